//! Goodness-of-fit machinery: Pearson and deviance residuals, dispersion,
//! BIC, likelihood-ratio tests, and the tail probabilities they need.

use serde::{Deserialize, Serialize};

use crate::countglm::{log_likelihood, saturated_log_likelihood, Family, FitResult};
use crate::error::{Error, Result};

/// Upper-tail probability of a chi-square distribution with k degrees of
/// freedom, via the regularized upper incomplete gamma function.
pub fn chi2_sf(x: f64, k: u32) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("chi2_sf requires x >= 0, got {x}")));
    }
    if k == 0 {
        return Err(Error::Domain("chi2_sf requires k >= 1".into()));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    Ok(statrs::function::gamma::gamma_ur(k as f64 / 2.0, x / 2.0))
}

/// Two-sided standard-normal tail probability of |z|.
pub fn normal_two_sided_p(z: f64) -> f64 {
    statrs::function::erf::erfc(z.abs() / std::f64::consts::SQRT_2)
}

/// Pearson residuals (y - mu) / sqrt(var(mu)).
pub fn pearson_residuals(y: &[f64], mu: &[f64], family: Family) -> Result<Vec<f64>> {
    if y.len() != mu.len() {
        return Err(Error::LengthMismatch(format!(
            "y has {} entries, mu has {}",
            y.len(),
            mu.len()
        )));
    }
    y.iter()
        .zip(mu.iter())
        .map(|(&yi, &mi)| {
            if !(mi > 0.0) {
                return Err(Error::Domain(format!(
                    "pearson_residuals requires mu > 0, got {mi}"
                )));
            }
            Ok((yi - mi) / family.variance(mi).sqrt())
        })
        .collect()
}

/// Total deviance and its per-observation contributions.
#[derive(Debug, Clone, PartialEq)]
pub struct Deviance {
    pub total: f64,
    pub contributions: Vec<f64>,
}

/// Deviance via the likelihood-ratio definition -2(L(mu) - L(y)).
pub fn deviance(family: Family, y: &[f64], mu: &[f64]) -> Result<Deviance> {
    if y.len() != mu.len() {
        return Err(Error::LengthMismatch(format!(
            "y has {} entries, mu has {}",
            y.len(),
            mu.len()
        )));
    }
    let mut contributions = Vec::with_capacity(y.len());
    let mut total = 0.0;
    for (&yi, &mi) in y.iter().zip(mu.iter()) {
        let fitted = family.log_pmf(yi, mi)?;
        let saturated = if yi == 0.0 { 0.0 } else { family.log_pmf(yi, yi)? };
        // clamp tiny negatives from rounding so sqrt is safe
        let d = (-2.0 * (fitted - saturated)).max(0.0);
        contributions.push(d);
        total += d;
    }
    Ok(Deviance { total, contributions })
}

/// Signed square roots of the per-observation deviance contributions.
pub fn deviance_residuals(family: Family, y: &[f64], mu: &[f64]) -> Result<Vec<f64>> {
    let dev = deviance(family, y, mu)?;
    Ok(dev
        .contributions
        .iter()
        .zip(y.iter().zip(mu.iter()))
        .map(|(&d, (&yi, &mi))| (yi - mi).signum() * d.sqrt())
        .collect())
}

/// Deviance residuals divided by sqrt(phi).
pub fn standardized_deviance_residuals(
    family: Family,
    y: &[f64],
    mu: &[f64],
    phi: f64,
) -> Result<Vec<f64>> {
    if !(phi > 0.0) {
        return Err(Error::Domain(format!(
            "standardization requires phi > 0, got {phi}"
        )));
    }
    let scale = phi.sqrt();
    Ok(deviance_residuals(family, y, mu)?
        .into_iter()
        .map(|d| d / scale)
        .collect())
}

/// Dispersion estimate: deviance over residual degrees of freedom.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dispersion {
    pub value: f64,
    pub overdispersed: bool,
}

pub fn dispersion(deviance: f64, residual_df: i64) -> Result<Dispersion> {
    if residual_df < 1 {
        return Err(Error::Domain(format!(
            "dispersion requires residual_df >= 1, got {residual_df}"
        )));
    }
    let value = deviance / residual_df as f64;
    Ok(Dispersion {
        value,
        overdispersed: value > 1.0,
    })
}

/// Deviance-based information criterion: D - DF ln(m).
pub fn bic(deviance: f64, residual_df: i64, m: usize) -> f64 {
    deviance - residual_df as f64 * (m as f64).ln()
}

/// Likelihood-ratio test of a restricted model against the full model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LrTest {
    pub statistic: f64,
    pub df: u32,
    pub p_value: f64,
    pub warning: Option<String>,
}

pub fn lr_test(full: &FitResult, restricted: &FitResult) -> Result<LrTest> {
    if full.family != restricted.family {
        return Err(Error::Nesting(format!(
            "family mismatch: {:?} vs {:?}",
            full.family, restricted.family
        )));
    }
    if full.m != restricted.m {
        return Err(Error::Nesting(format!(
            "observation counts differ: {} vs {}",
            full.m, restricted.m
        )));
    }
    for col in &restricted.column_names {
        if !full.column_names.contains(col) {
            return Err(Error::Nesting(format!(
                "restricted column '{col}' is not in the full model"
            )));
        }
    }
    if restricted.n_params > full.n_params {
        return Err(Error::Nesting(
            "restricted model has more parameters than the full model".into(),
        ));
    }
    let statistic = 2.0 * (full.log_likelihood - restricted.log_likelihood);
    let df = (full.n_params - restricted.n_params) as u32;
    if statistic < 0.0 {
        return Ok(LrTest {
            statistic,
            df,
            p_value: 1.0,
            warning: Some(
                "full-model likelihood is below the restricted model's; test is uninformative"
                    .into(),
            ),
        });
    }
    let p_value = if df == 0 { 1.0 } else { chi2_sf(statistic, df)? };
    Ok(LrTest {
        statistic,
        df,
        p_value,
        warning: None,
    })
}

/// Full residual diagnostics for one fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub pearson_residuals: Vec<f64>,
    pub deviance_residuals: Vec<f64>,
    pub standardized_deviance_residuals: Vec<f64>,
    pub pearson_chi2: f64,
    pub deviance: f64,
    pub dispersion: Dispersion,
    pub bic: f64,
    /// Rows with |Pearson residual| above the threshold (default 2).
    pub outlier_indices: Vec<usize>,
}

pub const DEFAULT_OUTLIER_THRESHOLD: f64 = 2.0;

impl DiagnosticsReport {
    pub fn compute(
        family: Family,
        y: &[f64],
        mu: &[f64],
        residual_df: i64,
        m: usize,
        outlier_threshold: f64,
    ) -> Result<DiagnosticsReport> {
        let pearson = pearson_residuals(y, mu, family)?;
        let dev = deviance(family, y, mu)?;
        let disp = dispersion(dev.total, residual_df)?;
        let dev_resid = deviance_residuals(family, y, mu)?;
        let std_dev_resid = standardized_deviance_residuals(family, y, mu, disp.value)?;
        let pearson_chi2 = pearson.iter().map(|p| p * p).sum();
        let outlier_indices = pearson
            .iter()
            .enumerate()
            .filter(|(_, p)| p.abs() > outlier_threshold)
            .map(|(i, _)| i)
            .collect();
        Ok(DiagnosticsReport {
            pearson_residuals: pearson,
            deviance_residuals: dev_resid,
            standardized_deviance_residuals: std_dev_resid,
            pearson_chi2,
            deviance: dev.total,
            dispersion: disp,
            bic: bic(dev.total, residual_df, m),
            outlier_indices,
        })
    }

    pub fn for_fit(fit: &FitResult, y: &[f64]) -> Result<DiagnosticsReport> {
        Self::compute(
            fit.family,
            y,
            &fit.fitted_means,
            fit.residual_df,
            fit.m,
            DEFAULT_OUTLIER_THRESHOLD,
        )
    }
}

/// Independent recomputation used by the identity properties: the deviance
/// as -2(L(beta) - L(y)) from the likelihood routines directly.
pub fn deviance_from_likelihood(family: Family, y: &[f64], mu: &[f64]) -> Result<f64> {
    Ok(-2.0 * (log_likelihood(family, y, mu)? - saturated_log_likelihood(family, y)?))
}
