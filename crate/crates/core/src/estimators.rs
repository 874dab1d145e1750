//! Single-regressor OLS, first-stage, and just-identified 2SLS on demeaned
//! columns, with HC1 standard errors.
//!
//! All columns are assumed already demeaned within player, so no intercept
//! is fitted. The absorbed fixed effects enter only through the small-sample
//! factor `n / (n - dof_absorbed - 1)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sum::{par_dot, par_sum_by};

/// Conventional rule-of-thumb threshold for a strong first stage.
pub const RELEVANCE_F_THRESHOLD: f64 = 10.0;

/// Two-sided 95% normal critical value.
pub const Z_975: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "OLS")]
    Ols,
    #[serde(rename = "2SLS")]
    Tsls,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationResult {
    pub method: Method,
    pub beta_hat: f64,
    /// Heteroskedasticity-robust (HC1).
    pub se: f64,
    pub n_obs: usize,
    pub dof_absorbed: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl EstimationResult {
    pub fn ci95(&self) -> (f64, f64) {
        (self.beta_hat - Z_975 * self.se, self.beta_hat + Z_975 * self.se)
    }

    pub fn covers(&self, value: f64) -> bool {
        let (lo, hi) = self.ci95();
        lo <= value && value <= hi
    }

    pub fn t_stat(&self, null: f64) -> f64 {
        (self.beta_hat - null) / self.se
    }

    /// Coefficient as a multiple of the mean outcome.
    pub fn multiple_of_mean(&self, mean_y: f64) -> Result<f64> {
        multiple_of_mean(self.beta_hat, mean_y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirstStageResult {
    pub gamma_hat: f64,
    pub se: f64,
    /// Robust Wald F for the single excluded instrument, `(gamma/se)^2`.
    pub f_stat: f64,
    pub n_obs: usize,
    pub relevant: bool,
}

fn check_len(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    Ok(())
}

fn hc1_factor(n: usize, dof_absorbed: usize) -> Result<f64> {
    if n <= dof_absorbed + 1 {
        return Err(Error::InsufficientDof { n, dof_absorbed });
    }
    Ok(n as f64 / (n - dof_absorbed - 1) as f64)
}

/// HC1 sandwich standard error of a no-intercept slope on `x`.
pub fn robust_se(x: &[f64], residuals: &[f64], dof_absorbed: usize) -> Result<f64> {
    robust_se_iv(x, x, residuals, dof_absorbed)
}

/// HC1 standard error of the just-identified IV slope
/// `sum(z*y) / sum(z*x)`: `c * sum((z*e)^2) / sum(z*x)^2`.
pub fn robust_se_iv(z: &[f64], x: &[f64], residuals: &[f64], dof_absorbed: usize) -> Result<f64> {
    check_len(z, x)?;
    check_len(z, residuals)?;
    let factor = hc1_factor(z.len(), dof_absorbed)?;
    let meat = par_sum_by(z.len(), |i| {
        let s = z[i] * residuals[i];
        s * s
    });
    let bread = par_dot(z, x);
    Ok((factor * meat / (bread * bread)).sqrt())
}

fn residuals(y: &[f64], x: &[f64], beta: f64) -> Vec<f64> {
    y.iter().zip(x).map(|(y, x)| y - beta * x).collect()
}

fn iv_fit(y: &[f64], x: &[f64], z: &[f64], dof_absorbed: usize, method: Method) -> Result<EstimationResult> {
    let szx = par_dot(z, x);
    let szy = par_dot(z, y);
    let beta_hat = szy / szx;
    let e = residuals(y, x, beta_hat);
    let se = robust_se_iv(z, x, &e, dof_absorbed)?;
    Ok(EstimationResult {
        method,
        beta_hat,
        se,
        n_obs: y.len(),
        dof_absorbed,
        warnings: Vec::new(),
    })
}

fn min_rows(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InsufficientDof { n, dof_absorbed: 0 });
    }
    Ok(())
}

pub fn ols_fit(y: &[f64], x: &[f64], dof_absorbed: usize) -> Result<EstimationResult> {
    check_len(y, x)?;
    min_rows(y.len())?;
    if x.iter().all(|&v| v == 0.0) {
        return Err(Error::ZeroVariance("regressor"));
    }
    iv_fit(y, x, x, dof_absorbed, Method::Ols)
}

pub fn first_stage(x: &[f64], z: &[f64], dof_absorbed: usize) -> Result<FirstStageResult> {
    check_len(x, z)?;
    min_rows(x.len())?;
    if z.iter().all(|&v| v == 0.0) {
        return Err(Error::ZeroVariance("instrument"));
    }
    let fit = iv_fit(x, z, z, dof_absorbed, Method::Ols)?;
    let f_stat = if fit.beta_hat == 0.0 {
        0.0
    } else {
        (fit.beta_hat / fit.se).powi(2)
    };
    Ok(FirstStageResult {
        gamma_hat: fit.beta_hat,
        se: fit.se,
        f_stat,
        n_obs: fit.n_obs,
        relevant: f_stat > RELEVANCE_F_THRESHOLD,
    })
}

/// Just-identified 2SLS; returns the estimate and the first stage it used.
pub fn tsls_fit(y: &[f64], x: &[f64], z: &[f64], dof_absorbed: usize) -> Result<(EstimationResult, FirstStageResult)> {
    check_len(y, x)?;
    check_len(y, z)?;
    let fs = first_stage(x, z, dof_absorbed)?;
    if par_dot(z, x) == 0.0 {
        return Err(Error::WeakOrZeroFirstStage);
    }
    let mut est = iv_fit(y, x, z, dof_absorbed, Method::Tsls)?;
    if !fs.relevant {
        est.warnings.push(format!(
            "weak first stage: F = {:.2} is not above {}",
            fs.f_stat, RELEVANCE_F_THRESHOLD
        ));
    }
    Ok((est, fs))
}

pub fn multiple_of_mean(beta_hat: f64, mean_y: f64) -> Result<f64> {
    if !(mean_y > 0.0) {
        return Err(Error::ZeroMeanOutcome(mean_y));
    }
    Ok(beta_hat / mean_y)
}

/// Effect of one teammate: the all-teammates coefficient divided by the
/// number of teammates.
pub fn per_teammate_effect(beta_hat: f64, team_size: usize) -> f64 {
    beta_hat / (team_size - 1) as f64
}
