mod common;

use std::collections::BTreeSet;

use common::*;
use peeriv::instruments::team_instrument_idx;
use peeriv::panel::{read_records, write_records, PanelBuilder, RecordFormat};
use peeriv::{
    build_eligible_panel, build_panel, demean, filter_algorithmic_pairs, panel_summary, EligiblePanel, EligibleRow,
    MatchRecord, Mode, OutcomeKind,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn parties() -> FixtureSpec {
    FixtureSpec {
        party_rate: 0.5,
        ..FixtureSpec::default()
    }
}

fn round_trip(records: &[MatchRecord], kind: OutcomeKind, format: RecordFormat) -> Vec<MatchRecord> {
    let mut buf = Vec::new();
    write_records(&mut buf, records, kind, format).unwrap();
    let (back, back_kind) = read_records(buf.as_slice(), format).unwrap();
    assert_eq!(back_kind, kind);
    back
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn summary_counts_match_brute_force(seed in any::<u64>()) {
        let records = random_records(seed, &FixtureSpec::default());
        let panel = build_panel(records.clone(), OutcomeKind::Binary).unwrap();
        let s = panel_summary(&panel);
        let matches: BTreeSet<&str> = records.iter().map(|r| r.match_id.as_str()).collect();
        let players: BTreeSet<&str> = records.iter().map(|r| r.player_id.as_str()).collect();
        prop_assert_eq!(s.n_matches, matches.len());
        prop_assert_eq!(s.n_players, players.len());
        prop_assert_eq!(s.n_observations, records.len());
        let mean = records.iter().map(|r| r.y).sum::<f64>() / records.len() as f64;
        prop_assert!(close(s.mean_y.unwrap(), mean, 1e-12));
    }

    #[test]
    fn export_reingest_round_trips(seed in any::<u64>(), binary in any::<bool>()) {
        let spec = FixtureSpec { binary, party_rate: 0.3, ..FixtureSpec::default() };
        let kind = if binary { OutcomeKind::Binary } else { OutcomeKind::LinearLatent };
        let panel = build_panel(random_records(seed, &spec), kind).unwrap();
        let exported = panel.to_records();
        for format in [RecordFormat::Csv, RecordFormat::Jsonl] {
            let back = round_trip(&exported, kind, format);
            prop_assert_eq!(&back, &exported);
            prop_assert_eq!(&build_panel(back, kind).unwrap(), &panel);
        }
    }

    #[test]
    fn panel_is_invariant_to_row_order_and_sharding(seed in any::<u64>(), cut in 0usize..1000) {
        let records = random_records(seed, &parties());
        let panel = build_panel(records.clone(), OutcomeKind::Binary).unwrap();
        let mut shuffled = records;
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ 0x5eed));
        let cut = cut % (shuffled.len() + 1);
        let mut a = PanelBuilder::new(OutcomeKind::Binary);
        a.extend(shuffled[..cut].iter().cloned());
        let mut b = PanelBuilder::new(OutcomeKind::Binary);
        b.extend(shuffled[cut..].iter().cloned());
        prop_assert_eq!(a.merge(b).finish().unwrap(), panel);
    }

    #[test]
    fn algorithmic_pairs_are_a_subset_of_complete_solo_duos(seed in any::<u64>()) {
        let records = random_records(seed, &parties());
        let panel = build_panel(records.clone(), OutcomeKind::Binary).unwrap();
        prop_assume!(!panel.parties().is_empty());
        let filtered = filter_algorithmic_pairs(&panel).unwrap();
        let input: BTreeSet<(String, String)> =
            records.iter().map(|r| (r.match_id.clone(), r.player_id.clone())).collect();
        let expected: BTreeSet<(String, String)> = records
            .iter()
            .filter(|r| {
                let team: Vec<&MatchRecord> = records
                    .iter()
                    .filter(|s| s.match_id == r.match_id && s.team_id == r.team_id)
                    .collect();
                r.mode == Mode::Duos
                    && team.len() == 2
                    && !(team[0].party_id.is_some() && team[0].party_id == team[1].party_id)
            })
            .map(|r| (r.match_id.clone(), r.player_id.clone()))
            .collect();
        let got: BTreeSet<(String, String)> = filtered
            .to_records()
            .into_iter()
            .map(|r| (r.match_id, r.player_id))
            .collect();
        prop_assert!(got.is_subset(&input));
        prop_assert_eq!(got, expected);
        let all_duos = filtered.observations().iter().all(|o| filtered.matches()[o.match_idx].mode == Mode::Duos);
        prop_assert!(all_duos);
    }

    /// The instrument for a row never reads an outcome from the same match.
    #[test]
    fn instrument_ignores_outcomes_of_its_own_match(seed in any::<u64>(), pick in any::<prop::sample::Index>()) {
        let records = random_records(seed, &FixtureSpec::default());
        let panel = build_panel(records.clone(), OutcomeKind::Binary).unwrap();
        let target = &panel.matches()[pick.index(panel.matches().len())].id;
        let mutated: Vec<MatchRecord> = records
            .iter()
            .map(|r| MatchRecord { y: if &r.match_id == target { 1.0 - r.y } else { r.y }, ..r.clone() })
            .collect();
        let other = build_panel(mutated, OutcomeKind::Binary).unwrap();
        let m = panel.match_idx(target).unwrap();
        for o in 0..panel.observations().len() {
            if panel.observations()[o].match_idx != m || !panel.team_of(o).complete {
                continue;
            }
            prop_assert_eq!(team_instrument_idx(&panel, o).unwrap(), team_instrument_idx(&other, o).unwrap());
        }
    }

    #[test]
    fn binary_regressor_and_instrument_lie_in_unit_interval(seed in any::<u64>()) {
        let panel = build_panel(random_records(seed, &FixtureSpec::default()), OutcomeKind::Binary).unwrap();
        if let Ok(e) = build_eligible_panel(&panel) {
            for r in &e.rows {
                prop_assert!((0.0..=1.0).contains(&r.x));
                prop_assert!((0.0..=1.0).contains(&r.z));
            }
        }
    }

    #[test]
    fn demeaning_is_idempotent(seed in any::<u64>()) {
        let spec = FixtureSpec { binary: false, ..FixtureSpec::default() };
        let panel = build_panel(random_records(seed, &spec), OutcomeKind::LinearLatent).unwrap();
        let Ok(eligible) = build_eligible_panel(&panel) else { return Ok(()) };
        let once = demean(&eligible).unwrap();
        for m in &once.player_means {
            let rows = once.rows.iter().filter(|r| r.player == m.player);
            let (sy, sx, sz) = rows.fold((0.0, 0.0, 0.0), |a, r| (a.0 + r.y, a.1 + r.x, a.2 + r.z));
            prop_assert!(sy.abs() < 1e-12 && sx.abs() < 1e-12 && sz.abs() < 1e-12);
        }
        let again = EligiblePanel {
            rows: once
                .rows
                .iter()
                .map(|r| EligibleRow { player: r.player, match_idx: r.match_idx, y: r.y, x: r.x, z: r.z })
                .collect(),
            ..eligible.clone()
        };
        let twice = demean(&again).unwrap();
        for (a, b) in once.rows.iter().zip(&twice.rows) {
            prop_assert!((a.y - b.y).abs() <= 1e-12);
            prop_assert!((a.x - b.x).abs() <= 1e-12);
            prop_assert!((a.z - b.z).abs() <= 1e-12);
        }
    }
}
