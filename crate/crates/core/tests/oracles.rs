mod common;

use common::*;
use peeriv::{
    build_eligible_panel, build_panel, demean, loo_frequency, ols_fit, robust_se, tsls_fit, Error, OutcomeKind,
};
use proptest::prelude::*;

fn kind(spec: &FixtureSpec) -> OutcomeKind {
    if spec.binary {
        OutcomeKind::Binary
    } else {
        OutcomeKind::LinearLatent
    }
}

fn check_loo(seed: u64, spec: &FixtureSpec) -> Result<(), TestCaseError> {
    let records = random_records(seed, spec);
    let panel = build_panel(records.clone(), kind(spec)).unwrap();
    for k in panel.players() {
        for j in panel.players() {
            if k.id == j.id {
                continue;
            }
            let got = loo_frequency(&panel, &k.id, &j.id).unwrap();
            let want = oracle_loo(&records, &k.id, &j.id);
            match (got, want) {
                (None, None) => {}
                (Some(a), Some(b)) => prop_assert!(close(a, b, 1e-12), "{} vs {}", a, b),
                _ => prop_assert!(
                    false,
                    "definedness differs for ({}, {}): {:?} vs {:?}",
                    k.id,
                    j.id,
                    got,
                    want
                ),
            }
        }
    }
    Ok(())
}

fn check_eligible(seed: u64, spec: &FixtureSpec) -> Result<(), TestCaseError> {
    let records = random_records(seed, spec);
    let panel = build_panel(records.clone(), kind(spec)).unwrap();
    let want = oracle_eligible(&records);
    let eligible = match build_eligible_panel(&panel) {
        Err(Error::EmptyAfterFiltering) => {
            prop_assert!(want.is_empty());
            return Ok(());
        }
        other => other.unwrap(),
    };
    let mut got: Vec<OracleRow> = eligible
        .rows
        .iter()
        .map(|r| OracleRow {
            player: eligible.player_ids[r.player].clone(),
            match_id: eligible.match_ids[r.match_idx].clone(),
            y: r.y,
            x: r.x,
            z: r.z,
        })
        .collect();
    got.sort_by(|a, b| (&a.player, &a.match_id).cmp(&(&b.player, &b.match_id)));
    prop_assert_eq!(got.len(), want.len());
    prop_assert_eq!(eligible.attrition.retained, want.len());
    for (g, w) in got.iter().zip(&want) {
        prop_assert_eq!(&g.player, &w.player);
        prop_assert_eq!(&g.match_id, &w.match_id);
        prop_assert_eq!(g.y, w.y);
        prop_assert!(close(g.x, w.x, 1e-12));
        prop_assert!(close(g.z, w.z, 1e-12));
    }
    Ok(())
}

/// Demeaned OLS and 2SLS against explicit player-dummy regressions.
fn check_fixed_effects(seed: u64, spec: &FixtureSpec) -> Result<bool, TestCaseError> {
    let records = random_records(seed, spec);
    let panel = build_panel(records, kind(spec)).unwrap();
    let Ok(eligible) = build_eligible_panel(&panel) else {
        return Ok(false);
    };
    let dm = demean(&eligible).unwrap();
    let (y, x, z) = dm.columns();
    let dof = dm.n_players();
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let szx: f64 = z.iter().zip(&x).map(|(a, b)| a * b).sum();
    if sxx < 1e-3 || szx.abs() < 1e-3 || y.len() <= dof + 1 {
        return Ok(false);
    }
    let players: Vec<usize> = eligible.rows.iter().map(|r| r.player).collect();
    let raw_y: Vec<f64> = eligible.rows.iter().map(|r| r.y).collect();
    let raw_x: Vec<f64> = eligible.rows.iter().map(|r| r.x).collect();
    let raw_z: Vec<f64> = eligible.rows.iter().map(|r| r.z).collect();
    let xd = with_player_dummies(&raw_x, &players);
    let zd = with_player_dummies(&raw_z, &players);

    let ols = ols_fit(&y, &x, dof).unwrap();
    let o = oracle_ols(&raw_y, &xd);
    prop_assert!(
        close(ols.beta_hat, o.beta[0], 1e-8),
        "{} vs {}",
        ols.beta_hat,
        o.beta[0]
    );
    prop_assert!(
        close(ols.se, o.cov[(0, 0)].sqrt(), 1e-8),
        "{} vs {}",
        ols.se,
        o.cov[(0, 0)].sqrt()
    );

    let (iv, _) = tsls_fit(&y, &x, &z, dof).unwrap();
    let o = oracle_iv(&raw_y, &xd, &zd);
    prop_assert!(close(iv.beta_hat, o.beta[0], 1e-8), "{} vs {}", iv.beta_hat, o.beta[0]);
    prop_assert!(
        close(iv.se, o.cov[(0, 0)].sqrt(), 1e-8),
        "{} vs {}",
        iv.se,
        o.cov[(0, 0)].sqrt()
    );
    Ok(true)
}

fn latent() -> FixtureSpec {
    FixtureSpec {
        binary: false,
        ..FixtureSpec::default()
    }
}

#[test]
fn dummy_variable_check_is_not_vacuous() {
    let used = (0..200u64)
        .filter(|&s| check_fixed_effects(s, &latent()).unwrap())
        .count();
    assert!(used >= 150, "only {used} of 200 fixtures had a usable design");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn loo_frequency_matches_brute_force(seed in any::<u64>()) {
        check_loo(seed, &FixtureSpec::default())?;
        check_loo(seed, &latent())?;
    }

    #[test]
    fn eligible_panel_matches_brute_force(seed in any::<u64>()) {
        check_eligible(seed, &FixtureSpec::default())?;
        check_eligible(seed, &latent())?;
    }

    #[test]
    fn demeaned_fits_match_dummy_variable_regressions(seed in any::<u64>()) {
        check_fixed_effects(seed, &latent())?;
        check_fixed_effects(seed, &FixtureSpec { max_players: 12, ..FixtureSpec::default() })?;
    }

    #[test]
    fn ols_matches_normal_equations(
        pts in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 3..60),
    ) {
        let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        prop_assume!(x.iter().map(|v| v * v).sum::<f64>() > 1e-3);
        let got = ols_fit(&y, &x, 0).unwrap();
        let want = oracle_ols(&y, &Matrix::from_columns(std::slice::from_ref(&x)));
        prop_assert!(close(got.beta_hat, want.beta[0], 1e-10));
        prop_assert!(close(got.se, want.cov[(0, 0)].sqrt(), 1e-10));
    }

    #[test]
    fn robust_se_matches_sandwich(
        pts in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 8..80),
        dof in 0usize..5,
    ) {
        let (x, e): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        prop_assume!(x.iter().map(|v| v * v).sum::<f64>() > 1e-3);
        let n = x.len() as f64;
        let xm = Matrix::from_columns(std::slice::from_ref(&x));
        let bread = xm.transpose().mul(&xm).inverse();
        let meat = xm.transpose().mul(&xm.scale_rows(&e.iter().map(|v| v * v).collect::<Vec<_>>()));
        let v = bread.mul(&meat).mul(&bread)[(0, 0)] * n / (n - dof as f64 - 1.0);
        let got = robust_se(&x, &e, dof).unwrap();
        prop_assert!(close(got, v.sqrt(), 1e-10));
    }
}
