//! Panel → restrictions → instruments → demeaning → fits.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::estimators::{first_stage, ols_fit, tsls_fit, EstimationResult, FirstStageResult};
use crate::instruments::{build_eligible_panel, EligiblePanel};
use crate::panel::{filter_algorithmic_pairs, ModeFilter, Panel, PanelSummary};
use crate::report::{report, Report, ReportInputs, SampleSummary};
use crate::transform::{demean, DemeanedPanel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorChoice {
    Ols,
    #[serde(rename = "2sls")]
    Tsls,
    #[default]
    Both,
}

impl EstimatorChoice {
    fn ols(self) -> bool {
        matches!(self, EstimatorChoice::Ols | EstimatorChoice::Both)
    }

    fn tsls(self) -> bool {
        matches!(self, EstimatorChoice::Tsls | EstimatorChoice::Both)
    }
}

impl std::str::FromStr for EstimatorChoice {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ols" => Ok(EstimatorChoice::Ols),
            "2sls" | "tsls" | "iv" => Ok(EstimatorChoice::Tsls),
            "both" => Ok(EstimatorChoice::Both),
            other => Err(format!("unknown estimator {other:?} (expected ols, 2sls or both)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EstimateOptions {
    pub mode: ModeFilter,
    pub algorithmic_pairs: bool,
    pub estimator: EstimatorChoice,
}

#[derive(Debug, Clone)]
pub struct Fitted {
    pub options: EstimateOptions,
    pub input: PanelSummary,
    pub team_size: Option<usize>,
    pub eligible: EligiblePanel,
    pub demeaned: DemeanedPanel,
    pub first_stage: FirstStageResult,
    pub ols: Option<EstimationResult>,
    pub tsls: Option<EstimationResult>,
}

impl Fitted {
    pub fn report(&self) -> Result<Report> {
        report(ReportInputs {
            mode: self.options.mode,
            algorithmic_pairs: self.options.algorithmic_pairs,
            team_size: self.team_size,
            input: self.input,
            attrition: self.eligible.attrition,
            sample: SampleSummary {
                n_obs: self.demeaned.len(),
                n_players: self.demeaned.n_players(),
                mean_y: self.demeaned.mean_y,
            },
            first_stage: &self.first_stage,
            ols: self.ols.as_ref(),
            tsls: self.tsls.as_ref(),
        })
    }
}

fn common_team_size(panel: &Panel) -> Option<usize> {
    let mut modes = panel.matches().iter().map(|m| m.mode);
    let first = modes.next()?;
    modes.all(|m| m == first).then(|| first.team_size())
}

/// Run the estimation pipeline on a raw panel.
pub fn fit(panel: &Panel, options: EstimateOptions) -> Result<Fitted> {
    let mut sample = panel.restrict_mode(options.mode);
    if options.algorithmic_pairs {
        sample = filter_algorithmic_pairs(&sample)?;
    }
    let eligible = build_eligible_panel(&sample)?;
    let demeaned = demean(&eligible)?;
    let dof = demeaned.n_players();
    let (y, x, z) = demeaned.columns();

    let (tsls, fs) = if options.estimator.tsls() {
        let (est, fs) = tsls_fit(&y, &x, &z, dof)?;
        (Some(est), fs)
    } else {
        (None, first_stage(&x, &z, dof)?)
    };
    let ols = options.estimator.ols().then(|| ols_fit(&y, &x, dof)).transpose()?;

    Ok(Fitted {
        options,
        input: sample.summary(),
        team_size: common_team_size(&sample),
        eligible,
        demeaned,
        first_stage: fs,
        ols,
        tsls,
    })
}
