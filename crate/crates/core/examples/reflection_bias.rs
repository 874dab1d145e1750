//! Monte Carlo comparison of OLS and leave-one-out 2SLS on simulated duos.
//!
//! cargo run --release -p peeriv --example reflection_bias -- [reps] [beta] [mode] [party_share] [homophily] [common_shock_sd]

use std::time::Instant;

use peeriv::simgen::ModeWeights;
use peeriv::{build_panel, fit, generate_panel, EstimateOptions, Mode, ModeFilter, OutcomeKind, SimConfig};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let reps: usize = args.first().map_or(20, |s| s.parse().unwrap());
    let beta: f64 = args.get(1).map_or(0.3, |s| s.parse().unwrap());
    let mode: Mode = args.get(2).map_or(Mode::Duos, |s| s.parse().unwrap());
    let party_share: f64 = args.get(3).map_or(0.0, |s| s.parse().unwrap());
    let homophily: f64 = args.get(4).map_or(0.0, |s| s.parse().unwrap());
    let common_shock_sd: f64 = args.get(5).map_or(1.0, |s| s.parse().unwrap());

    let base = SimConfig {
        n_players: 5_000,
        matches_per_player: 20.0,
        mode_weights: ModeWeights::only(mode),
        beta,
        alpha_mean: 1.0,
        alpha_sd: 1.0,
        idiosyncratic_sd: 1.0,
        common_shock_sd,
        party_share,
        homophily,
        outcome: OutcomeKind::LinearLatent,
        ..SimConfig::default()
    };
    let options = EstimateOptions {
        mode: ModeFilter::All,
        algorithmic_pairs: party_share > 0.0,
        ..EstimateOptions::default()
    };

    let (mut covered, mut rejected, mut strong) = (0, 0, 0);
    let mut ols = Vec::new();
    let mut tsls = Vec::new();
    let mut slowest = 0.0f64;
    for rep in 0..reps {
        let start = Instant::now();
        let cfg = SimConfig {
            seed: rep as u64,
            ..base.clone()
        };
        let sim = generate_panel(&cfg).expect("simulate");
        let panel = build_panel(sim.records, cfg.outcome).expect("panel");
        let f = fit(&panel, options).expect("fit");
        slowest = slowest.max(start.elapsed().as_secs_f64());
        let o = f.ols.unwrap();
        let t = f.tsls.unwrap();
        covered += t.covers(beta) as usize;
        rejected += (t.t_stat(0.0).abs() > peeriv::estimators::Z_975) as usize;
        strong += (f.first_stage.f_stat > 10.0) as usize;
        ols.push((o.beta_hat, o.se));
        tsls.push((t.beta_hat, t.se));
        if rep < 3 {
            println!(
                "rep {rep}: n={} ols={:.4} ({:.4}) 2sls={:.4} ({:.4}) F={:.1}",
                t.n_obs, o.beta_hat, o.se, t.beta_hat, t.se, f.first_stage.f_stat
            );
        }
    }
    let mean =
        |v: &[(f64, f64)], k: usize| v.iter().map(|p| if k == 0 { p.0 } else { p.1 }).sum::<f64>() / v.len() as f64;
    println!(
        "reps={reps} beta={beta} mode={mode}\n  OLS mean {:.4} (se {:.4})\n  2SLS mean {:.4} (se {:.4})\n  coverage {:.3}  reject0 {:.3}  F>10 {:.3}  slowest rep {:.2}s",
        mean(&ols, 0),
        mean(&ols, 1),
        mean(&tsls, 0),
        mean(&tsls, 1),
        covered as f64 / reps as f64,
        rejected as f64 / reps as f64,
        strong as f64 / reps as f64,
        slowest
    );
}
