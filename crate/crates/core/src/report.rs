//! Result tables: JSON record and an aligned text layout with rows
//! Estimate / Standard Error / F Statistic / N / Multiple of Average.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::estimators::{per_teammate_effect, EstimationResult, FirstStageResult, Method};
use crate::instruments::Attrition;
use crate::panel::{ModeFilter, PanelSummary};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub method: Method,
    pub estimate: f64,
    pub standard_error: f64,
    pub ci95: [f64; 2],
    pub n_obs: usize,
    pub multiple_of_mean: f64,
    /// Coefficient divided by the number of teammates, for fixed-size modes.
    pub per_teammate_effect: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSummary {
    pub n_obs: usize,
    pub n_players: usize,
    pub mean_y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub mode: ModeFilter,
    pub algorithmic_pairs: bool,
    /// Team size when every estimation match has the same mode.
    pub team_size: Option<usize>,
    pub input: PanelSummary,
    pub attrition: Attrition,
    pub sample: SampleSummary,
    pub first_stage: FirstStageResult,
    pub ols: Option<ReportEntry>,
    pub tsls: Option<ReportEntry>,
}

fn entry(est: &EstimationResult, mean_y: f64, team_size: Option<usize>) -> Result<ReportEntry> {
    let (lo, hi) = est.ci95();
    Ok(ReportEntry {
        method: est.method,
        estimate: est.beta_hat,
        standard_error: est.se,
        ci95: [lo, hi],
        n_obs: est.n_obs,
        multiple_of_mean: est.multiple_of_mean(mean_y)?,
        per_teammate_effect: team_size.map(|k| per_teammate_effect(est.beta_hat, k)),
        warnings: est.warnings.clone(),
    })
}

pub struct ReportInputs<'a> {
    pub mode: ModeFilter,
    pub algorithmic_pairs: bool,
    pub team_size: Option<usize>,
    pub input: PanelSummary,
    pub attrition: Attrition,
    pub sample: SampleSummary,
    pub first_stage: &'a FirstStageResult,
    pub ols: Option<&'a EstimationResult>,
    pub tsls: Option<&'a EstimationResult>,
}

/// Assemble the report. Fails with `ZeroMeanOutcome` unless the estimation
/// sample's mean outcome is positive.
pub fn report(inputs: ReportInputs<'_>) -> Result<Report> {
    let mean_y = inputs.sample.mean_y;
    let ols = inputs.ols.map(|e| entry(e, mean_y, inputs.team_size)).transpose()?;
    let tsls = inputs.tsls.map(|e| entry(e, mean_y, inputs.team_size)).transpose()?;
    if ols.is_none() && tsls.is_none() {
        crate::estimators::multiple_of_mean(0.0, mean_y)?;
    }
    Ok(Report {
        mode: inputs.mode,
        algorithmic_pairs: inputs.algorithmic_pairs,
        team_size: inputs.team_size,
        input: inputs.input,
        attrition: inputs.attrition,
        sample: inputs.sample,
        first_stage: inputs.first_stage.clone(),
        ols,
        tsls,
    })
}

/// Multiple of the mean at table precision (one decimal).
pub fn format_multiple(beta_hat: f64, mean_y: f64) -> String {
    format!("{:.1}", beta_hat / mean_y)
}

/// `12345678` -> `12,345,678`.
pub fn thousands(n: usize) -> String {
    let digits = n.to_string();
    let mut out = String::with_capacity(digits.len() + digits.len() / 3);
    for (i, c) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(c);
    }
    out
}

impl Report {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn to_text_table(&self) -> String {
        const LABEL: usize = 48;
        const COL: usize = 13;
        let mut cols: Vec<(&str, Vec<String>)> = vec![(
            "First Stage",
            vec![
                format!("{:.4}", self.first_stage.gamma_hat),
                format!("({:.4})", self.first_stage.se),
                format!("{:.1}", self.first_stage.f_stat),
                thousands(self.first_stage.n_obs),
                String::new(),
                String::new(),
            ],
        )];
        for (name, e) in [("OLS", &self.ols), ("2SLS", &self.tsls)] {
            if let Some(e) = e {
                cols.push((
                    name,
                    vec![
                        format!("{:.4}", e.estimate),
                        format!("({:.4})", e.standard_error),
                        String::new(),
                        thousands(e.n_obs),
                        format!("{:.1}", e.multiple_of_mean),
                        e.per_teammate_effect.map(|v| format!("{v:.4}")).unwrap_or_default(),
                    ],
                ));
            }
        }
        let labels = [
            "Estimate",
            "Standard Error",
            "F Statistic",
            "Number of Observations",
            "Multiple of Average Probability of Toxic Speech",
            "Per-Teammate Effect",
        ];

        let mut out = String::new();
        let mode = match self.mode {
            ModeFilter::All => "All Modes".to_owned(),
            m => format!("{} Mode", m.mode().map(|m| m.as_str()).unwrap_or_default()),
        };
        let pairs = if self.algorithmic_pairs {
            ", Algorithmic Pairs"
        } else {
            ""
        };
        let _ = writeln!(out, "{mode}{pairs}");
        let _ = write!(out, "{:LABEL$}", "");
        for (name, _) in &cols {
            let _ = write!(out, "{name:>COL$}");
        }
        out.push('\n');
        for (row, label) in labels.iter().enumerate() {
            if row == 5 && self.team_size.is_none() {
                continue;
            }
            let _ = write!(out, "{label:LABEL$}");
            for (_, vals) in &cols {
                let _ = write!(out, "{:>COL$}", vals[row]);
            }
            out.push('\n');
        }
        let _ = writeln!(
            out,
            "\nEstimation sample: {} observations, {} players, mean outcome {:.6}",
            thousands(self.sample.n_obs),
            thousands(self.sample.n_players),
            self.sample.mean_y
        );
        let a = &self.attrition;
        let _ = writeln!(
            out,
            "Attrition: {} input rows; dropped {} incomplete-team, {} undefined-instrument, {} single-match; {} retained",
            thousands(a.input_rows),
            a.incomplete_team,
            a.instrument_undefined,
            a.too_few_matches,
            thousands(a.retained)
        );
        out
    }
}
