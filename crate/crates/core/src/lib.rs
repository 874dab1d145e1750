//! Peer-effect estimation on match/team panels.
//!
//! The outcome of a player in a match is modelled as a player fixed effect
//! plus a peer term in the mean outcome of their teammates. Teammates'
//! outcomes are determined jointly, which makes the peer term endogenous. It
//! is instrumented with each teammate's average outcome in the matches
//! they played without the focal player. Fixed effects are absorbed by
//! demeaning within player, and the slope is estimated by just-identified
//! 2SLS with HC1 standard errors.
//!
//! Modules, in pipeline order:
//!
//! - [`panel`]: record ingestion (CSV / JSONL) and the indexed panel
//! - [`instruments`]: leave-one-out instruments and sample restrictions
//! - [`transform`]: within-player demeaning
//! - [`estimators`]: OLS, first stage, 2SLS, robust standard errors
//! - [`report`]: JSON and text tables
//! - [`simgen`]: synthetic panels with known peer coefficient
//! - [`cli`]: the `simulate` / `estimate` batch commands

pub mod cli;
pub mod error;
pub mod estimators;
pub mod instruments;
pub mod panel;
pub mod pipeline;
pub mod report;
pub mod simgen;
pub mod sum;
pub mod transform;

pub use error::{Error, Result};
pub use estimators::{
    first_stage, ols_fit, robust_se, robust_se_iv, tsls_fit, EstimationResult, FirstStageResult, Method,
};
pub use instruments::{build_eligible_panel, loo_frequency, team_instrument, EligiblePanel, EligibleRow};
pub use panel::{
    build_panel, filter_algorithmic_pairs, panel_summary, MatchRecord, Mode, ModeFilter, OutcomeKind, Panel,
    PanelSummary,
};
pub use pipeline::{fit, EstimateOptions, EstimatorChoice, Fitted};
pub use report::Report;
pub use simgen::{generate_panel, simulate_schedule, solve_team_equilibrium, SimConfig};
pub use transform::{demean, DemeanedPanel};
