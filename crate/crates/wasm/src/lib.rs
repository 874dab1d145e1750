//! Browser bindings for the interactive demo page in `www/`.
//!
//! The functions in [`demo`] are plain Rust and run natively in tests; the
//! `#[wasm_bindgen]` wrappers only convert errors to JavaScript values.

use wasm_bindgen::prelude::*;

pub mod demo {
    use peeriv::estimators::Z_975;
    use peeriv::{build_panel, fit, generate_panel, solve_team_equilibrium, EstimateOptions, SimConfig};
    use serde::{Deserialize, Serialize};
    use serde_json::Value;

    /// Settings exposed on the page. Unset fields, including unset fields of
    /// `sim`, take the defaults below.
    #[derive(Debug, Clone, Serialize, Deserialize)]
    #[serde(default, deny_unknown_fields)]
    pub struct DemoSettings {
        pub sim: SimConfig,
        pub algorithmic_pairs: bool,
    }

    impl Default for DemoSettings {
        fn default() -> Self {
            DemoSettings {
                sim: SimConfig {
                    n_players: 1_000,
                    matches_per_player: 20.0,
                    alpha_mean: 1.0,
                    alpha_sd: 1.0,
                    idiosyncratic_sd: 1.0,
                    common_shock_sd: 1.0,
                    outcome: peeriv::OutcomeKind::LinearLatent,
                    ..SimConfig::default()
                },
                algorithmic_pairs: false,
            }
        }
    }

    #[derive(Debug, Clone, PartialEq, Serialize)]
    pub struct Draw {
        pub seed: u64,
        pub ols: f64,
        pub tsls: f64,
        pub tsls_se: f64,
        pub covers: bool,
        pub f_stat: f64,
    }

    #[derive(Debug, Clone, PartialEq, Serialize)]
    pub struct SamplingDistribution {
        pub beta_true: f64,
        pub draws: Vec<Draw>,
        pub mean_ols: f64,
        pub mean_tsls: f64,
        pub coverage: f64,
    }

    fn parse(settings_json: &str) -> Result<DemoSettings, String> {
        if settings_json.trim().is_empty() {
            return Ok(DemoSettings::default());
        }
        let invalid = |e: serde_json::Error| format!("invalid settings: {e}");
        let given: Value = serde_json::from_str(settings_json).map_err(invalid)?;
        let mut merged = serde_json::to_value(DemoSettings::default()).map_err(invalid)?;
        overlay(&mut merged, given);
        serde_json::from_value(merged).map_err(invalid)
    }

    fn overlay(base: &mut Value, top: Value) {
        match (base, top) {
            (Value::Object(b), Value::Object(t)) => {
                for (k, v) in t {
                    match b.get_mut(&k) {
                        Some(slot) => overlay(slot, v),
                        None => {
                            b.insert(k, v);
                        }
                    }
                }
            }
            (slot, v) => *slot = v,
        }
    }

    fn options(s: &DemoSettings) -> EstimateOptions {
        EstimateOptions {
            algorithmic_pairs: s.algorithmic_pairs,
            ..EstimateOptions::default()
        }
    }

    fn one(s: &DemoSettings, seed: u64) -> Result<peeriv::Fitted, String> {
        let cfg = SimConfig { seed, ..s.sim.clone() };
        let sim = generate_panel(&cfg).map_err(|e| e.to_string())?;
        let panel = build_panel(sim.records, cfg.outcome).map_err(|e| e.to_string())?;
        fit(&panel, options(s)).map_err(|e| e.to_string())
    }

    /// Simulate one panel and return the estimation report as JSON.
    pub fn simulate_and_estimate(settings_json: &str) -> Result<String, String> {
        let s = parse(settings_json)?;
        let fitted = one(&s, s.sim.seed)?;
        let report = fitted.report().map_err(|e| e.to_string())?;
        report.to_json().map_err(|e| e.to_string())
    }

    /// OLS and 2SLS estimates over `reps` simulated panels with seeds
    /// `seed, seed + 1, ...`.
    pub fn sampling_distribution(settings_json: &str, reps: u32) -> Result<SamplingDistribution, String> {
        let s = parse(settings_json)?;
        if reps == 0 {
            return Err("reps must be positive".into());
        }
        let draws = (0..u64::from(reps))
            .map(|r| {
                let seed = s.sim.seed.wrapping_add(r);
                let f = one(&s, seed)?;
                let (o, t) = (f.ols.unwrap(), f.tsls.unwrap());
                Ok(Draw {
                    seed,
                    ols: o.beta_hat,
                    tsls: t.beta_hat,
                    tsls_se: t.se,
                    covers: (t.beta_hat - s.sim.beta).abs() <= Z_975 * t.se,
                    f_stat: f.first_stage.f_stat,
                })
            })
            .collect::<Result<Vec<_>, String>>()?;
        let n = draws.len() as f64;
        Ok(SamplingDistribution {
            beta_true: s.sim.beta,
            mean_ols: draws.iter().map(|d| d.ols).sum::<f64>() / n,
            mean_tsls: draws.iter().map(|d| d.tsls).sum::<f64>() / n,
            coverage: draws.iter().filter(|d| d.covers).count() as f64 / n,
            draws,
        })
    }

    /// Equilibrium outcomes of one team given each member's `alpha + eps`.
    pub fn team_equilibrium(inputs: &[f64], beta: f64) -> Result<Vec<f64>, String> {
        solve_team_equilibrium(inputs, beta).map_err(|e| e.to_string())
    }
}

fn js_err(e: String) -> JsValue {
    JsValue::from_str(&e)
}

#[wasm_bindgen(js_name = simulateAndEstimate)]
pub fn simulate_and_estimate(settings_json: &str) -> Result<String, JsValue> {
    demo::simulate_and_estimate(settings_json).map_err(js_err)
}

#[wasm_bindgen(js_name = samplingDistribution)]
pub fn sampling_distribution(settings_json: &str, reps: u32) -> Result<String, JsValue> {
    let d = demo::sampling_distribution(settings_json, reps).map_err(js_err)?;
    serde_json::to_string(&d).map_err(|e| js_err(e.to_string()))
}

#[wasm_bindgen(js_name = teamEquilibrium)]
pub fn team_equilibrium(inputs: &[f64], beta: f64) -> Result<Vec<f64>, JsValue> {
    demo::team_equilibrium(inputs, beta).map_err(js_err)
}
