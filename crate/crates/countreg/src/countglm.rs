//! Poisson and NB2 log-likelihoods, IRLS fitting with the log link,
//! prediction, and Wald coefficient inference.

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dataset::DesignMatrix;
use crate::diagnostics::normal_two_sided_p;
use crate::error::{Error, Result};

/// Model family with fixed heterogeneity for NB2. NB2 with gamma -> 0 is
/// semantically Poisson; gamma is never estimated inside the fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Family {
    Poisson,
    Nb2 { gamma: f64 },
}

impl Family {
    pub fn nb2(gamma: f64) -> Result<Family> {
        if gamma < 0.0 || !gamma.is_finite() {
            return Err(Error::Domain(format!("gamma must be >= 0, got {gamma}")));
        }
        Ok(Family::Nb2 { gamma })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::Poisson => "poisson",
            Family::Nb2 { .. } => "nb2",
        }
    }

    pub fn gamma(&self) -> f64 {
        match self {
            Family::Poisson => 0.0,
            Family::Nb2 { gamma } => *gamma,
        }
    }

    /// Extra distribution parameters beyond the coefficients (the
    /// heterogeneity parameter for NB2).
    pub fn extra_params(&self) -> usize {
        match self {
            Family::Poisson => 0,
            Family::Nb2 { .. } => 1,
        }
    }

    /// Response variance at mean `mu`.
    pub fn variance(&self, mu: f64) -> f64 {
        match self {
            Family::Poisson => mu,
            Family::Nb2 { gamma } => mu * (1.0 + gamma * mu),
        }
    }

    /// IRLS working weight at mean `mu` under the log link.
    pub fn working_weight(&self, mu: f64) -> f64 {
        match self {
            Family::Poisson => mu,
            Family::Nb2 { gamma } => mu / (1.0 + gamma * mu),
        }
    }

    /// Log pmf at observation `y` (an integer-valued f64) and mean `mu`.
    pub fn log_pmf(&self, y: f64, mu: f64) -> Result<f64> {
        match self {
            Family::Poisson => poisson_log_pmf_f(y, mu),
            Family::Nb2 { gamma } => {
                if *gamma == 0.0 {
                    poisson_log_pmf_f(y, mu)
                } else {
                    nb2_log_pmf_f(y, mu, *gamma)
                }
            }
        }
    }
}

/// Natural log of the gamma function for x > 0.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("log_gamma requires x > 0, got {x}")));
    }
    Ok(statrs::function::gamma::ln_gamma(x))
}

fn check_count(y: f64, what: &str) -> Result<()> {
    if !(y >= 0.0) || !y.is_finite() {
        return Err(Error::Domain(format!("{what} requires y >= 0, got {y}")));
    }
    Ok(())
}

fn poisson_log_pmf_f(y: f64, lambda: f64) -> Result<f64> {
    check_count(y, "poisson_log_pmf")?;
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!(
            "poisson_log_pmf requires lambda > 0, got {lambda}"
        )));
    }
    let y_term = if y == 0.0 { 0.0 } else { y * lambda.ln() };
    Ok(y_term - lambda - log_gamma(y + 1.0)?)
}

/// Poisson log probability: y ln(lambda) - lambda - ln Gamma(y+1).
pub fn poisson_log_pmf(y: u64, lambda: f64) -> Result<f64> {
    poisson_log_pmf_f(y as f64, lambda)
}

fn nb2_log_pmf_f(y: f64, lambda: f64, gamma: f64) -> Result<f64> {
    check_count(y, "nb2_log_pmf")?;
    if !(lambda > 0.0) || !(gamma > 0.0) {
        return Err(Error::Domain(format!(
            "nb2_log_pmf requires lambda > 0 and gamma > 0, got lambda={lambda}, gamma={gamma}"
        )));
    }
    let alpha = 1.0 / gamma;
    let glam = gamma * lambda;
    // log(1/(1+glam)) and log(glam/(1+glam)) via ln_1p for small glam.
    let log_one_plus = glam.ln_1p();
    // ln Gamma(y+a) - ln Gamma(a) + y ln(gamma) telescopes to
    // sum_{k<y} ln(1 + gamma k), which stays exact as gamma -> 0 where the
    // direct lgamma difference loses all precision. Combine it with the
    // y ln(glam) piece of the pmf so the y ln(gamma) terms cancel.
    const SUM_LIMIT: f64 = 100_000.0;
    let ratio_plus_ylng = if y <= SUM_LIMIT && y.fract() == 0.0 {
        (0..y as u64).map(|k| (gamma * k as f64).ln_1p()).sum()
    } else {
        log_gamma(y + alpha)? - log_gamma(alpha)? + y * gamma.ln()
    };
    let y_term = if y == 0.0 {
        0.0
    } else {
        y * (lambda.ln() - log_one_plus)
    };
    Ok(ratio_plus_ylng - log_gamma(y + 1.0)? - alpha * log_one_plus + y_term)
}

/// NB2 log probability with mean `lambda` and heterogeneity `gamma`,
/// evaluated entirely in log space.
pub fn nb2_log_pmf(y: u64, lambda: f64, gamma: f64) -> Result<f64> {
    nb2_log_pmf_f(y as f64, lambda, gamma)
}

/// Sum of per-observation log pmfs. The saturated value is obtained by
/// passing mu = y; a zero observation at mu = 0 contributes 0 (the
/// mu -> 0+ limit for both families).
pub fn log_likelihood(family: Family, y: &[f64], mu: &[f64]) -> Result<f64> {
    if y.len() != mu.len() {
        return Err(Error::LengthMismatch(format!(
            "y has {} entries, mu has {}",
            y.len(),
            mu.len()
        )));
    }
    let mut total = 0.0;
    for (&yi, &mi) in y.iter().zip(mu.iter()) {
        if mi <= 0.0 {
            if yi == 0.0 {
                continue; // limit convention
            }
            return Err(Error::Domain(format!(
                "log_likelihood requires mu > 0 when y > 0, got mu={mi}, y={yi}"
            )));
        }
        total += family.log_pmf(yi, mi)?;
    }
    Ok(total)
}

/// Log-likelihood of the saturated model (mu_i = y_i).
pub fn saturated_log_likelihood(family: Family, y: &[f64]) -> Result<f64> {
    log_likelihood(family, y, y)
}

/// IRLS controls.
#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    /// Relative deviance-change convergence tolerance.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Step halvings allowed when a full step increases the deviance.
    pub max_step_halvings: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            tolerance: 1e-8,
            max_iterations: 100,
            max_step_halvings: 20,
        }
    }
}

/// Maximum-likelihood fit of a count GLM.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub family: Family,
    pub column_names: Vec<String>,
    pub coefficients: Vec<f64>,
    /// Inverse of the final Fisher information, row-major.
    pub covariance: Vec<Vec<f64>>,
    pub std_errors: Vec<f64>,
    pub log_likelihood: f64,
    pub deviance: f64,
    pub fitted_means: Vec<f64>,
    /// Coefficient count minus intercept.
    pub model_df: usize,
    /// m - n_params - 1.
    pub residual_df: i64,
    /// Coefficients plus one for the NB2 heterogeneity parameter.
    pub n_params: usize,
    pub m: usize,
    pub iterations: usize,
    pub converged: bool,
}

/// Columns implicated in a rank deficiency: large components of the
/// near-null right singular vectors of X.
pub fn dependent_columns(x: &DesignMatrix) -> Vec<String> {
    let svd = x.values.clone().svd(false, true);
    let v_t = match svd.v_t {
        Some(v) => v,
        None => return x.column_names.clone(),
    };
    let max_sv = svd.singular_values.max();
    let tol = max_sv * 1e-10;
    let mut cols = Vec::new();
    for (k, &sv) in svd.singular_values.iter().enumerate() {
        if sv <= tol {
            for (j, name) in x.column_names.iter().enumerate() {
                if v_t[(k, j)].abs() > 1e-6 && !cols.contains(name) {
                    cols.push(name.clone());
                }
            }
        }
    }
    if cols.is_empty() && x.nrows() < x.ncols() {
        return x.column_names.clone();
    }
    cols
}

fn solve_information(
    x: &DesignMatrix,
    weights: &[f64],
) -> Result<(Cholesky<f64, nalgebra::Dyn>, DMatrix<f64>)> {
    let n = x.ncols();
    let m = x.nrows();
    let mut info = DMatrix::zeros(n, n);
    for i in 0..m {
        let w = weights[i];
        let row = x.values.row(i);
        for a in 0..n {
            for b in a..n {
                info[(a, b)] += w * row[a] * row[b];
            }
        }
    }
    for a in 0..n {
        for b in 0..a {
            info[(a, b)] = info[(b, a)];
        }
    }
    match Cholesky::new(info.clone()) {
        Some(chol) => Ok((chol, info)),
        None => Err(Error::Singular {
            columns: dependent_columns(x),
        }),
    }
}

/// Fit a count GLM by iteratively reweighted least squares with the log
/// link. Gamma is fixed for NB2. Starts from mu = y + 0.5 and uses
/// step-halving when a step increases the deviance.
pub fn irls_fit(x: &DesignMatrix, y: &[f64], family: Family, options: &FitOptions) -> Result<FitResult> {
    let m = x.nrows();
    let n = x.ncols();
    if y.len() != m {
        return Err(Error::LengthMismatch(format!(
            "design matrix has {m} rows, response has {} entries",
            y.len()
        )));
    }
    if let Some(bad) = y.iter().find(|v| **v < 0.0 || !v.is_finite()) {
        return Err(Error::Domain(format!(
            "response must be nonnegative, got {bad}"
        )));
    }
    let n_params = n + family.extra_params();
    if m <= n_params {
        return Err(Error::Domain(format!(
            "need more observations ({m}) than parameters ({n_params})"
        )));
    }

    let y_vec = DVector::from_column_slice(y);
    let saturated = saturated_log_likelihood(family, y)?;
    let deviance_at = |mu: &DVector<f64>| -> Result<f64> {
        let ll = log_likelihood(family, y, mu.as_slice())?;
        Ok(-2.0 * (ll - saturated))
    };

    let mut beta = DVector::zeros(n);
    let mut mu: DVector<f64> = y_vec.map(|v| v + 0.5);
    let mut dev = deviance_at(&mu)?;
    let mut converged = false;
    let mut iterations = 0;

    for iter in 1..=options.max_iterations {
        iterations = iter;
        let eta = mu.map(f64::ln);
        let weights: Vec<f64> = mu.iter().map(|&mi| family.working_weight(mi)).collect();
        // Working response under the log link: z = eta + (y - mu)/mu.
        let z: DVector<f64> =
            DVector::from_fn(m, |i, _| eta[i] + (y_vec[i] - mu[i]) / mu[i]);

        let (chol, _) = solve_information(x, &weights)?;
        let mut rhs = DVector::zeros(n);
        for i in 0..m {
            let w = weights[i];
            for a in 0..n {
                rhs[a] += w * x.values[(i, a)] * z[i];
            }
        }
        let candidate = chol.solve(&rhs);

        // Step-halving toward the previous beta if the deviance worsens.
        let mut step = candidate.clone();
        let mut accepted = false;
        for _ in 0..=options.max_step_halvings {
            let eta_new = &x.values * &step;
            if eta_new.iter().any(|v| !v.is_finite() || *v > 700.0) {
                step = (&step + &beta) * 0.5;
                continue;
            }
            let mu_new = eta_new.map(f64::exp);
            if mu_new.iter().any(|v| *v <= 0.0 || !v.is_finite()) {
                step = (&step + &beta) * 0.5;
                continue;
            }
            let dev_new = deviance_at(&mu_new)?;
            if dev_new.is_finite() && (dev_new <= dev + 1e-10 || iter == 1) {
                let rel = (dev - dev_new).abs() / (dev_new.abs() + 0.1);
                beta = step;
                mu = mu_new;
                dev = dev_new;
                accepted = true;
                if rel < options.tolerance {
                    converged = true;
                }
                break;
            }
            step = (&step + &beta) * 0.5;
        }
        if !accepted || converged {
            break;
        }
    }

    let weights: Vec<f64> = mu.iter().map(|&mi| family.working_weight(mi)).collect();
    let (chol, _) = solve_information(x, &weights)?;
    let covariance_mat = chol.inverse();
    let std_errors: Vec<f64> = (0..n).map(|j| covariance_mat[(j, j)].max(0.0).sqrt()).collect();
    let covariance: Vec<Vec<f64>> = (0..n)
        .map(|a| (0..n).map(|b| covariance_mat[(a, b)]).collect())
        .collect();
    let log_lik = log_likelihood(family, y, mu.as_slice())?;

    Ok(FitResult {
        family,
        column_names: x.column_names.clone(),
        coefficients: beta.as_slice().to_vec(),
        covariance,
        std_errors,
        log_likelihood: log_lik,
        deviance: dev,
        fitted_means: mu.as_slice().to_vec(),
        model_df: n - 1,
        residual_df: m as i64 - n_params as i64 - 1,
        n_params,
        m,
        iterations,
        converged,
    })
}

/// Predicted means exp(X_new . beta); X_new columns must match the fit.
pub fn predict(fit: &FitResult, x_new: &DesignMatrix) -> Result<Vec<f64>> {
    if x_new.column_names != fit.column_names {
        return Err(Error::Schema(format!(
            "prediction columns {:?} do not match fitted columns {:?}",
            x_new.column_names, fit.column_names
        )));
    }
    let beta = DVector::from_column_slice(&fit.coefficients);
    let eta = &x_new.values * beta;
    Ok(eta.iter().map(|v| v.exp()).collect())
}

/// One row of a Wald inference table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefRow {
    pub name: String,
    pub coefficient: f64,
    pub std_err: f64,
    pub z: f64,
    pub p_value: f64,
    pub degenerate: bool,
}

/// Wald z statistics and two-sided normal p-values for every coefficient.
pub fn coef_inference(fit: &FitResult) -> Vec<CoefRow> {
    fit.column_names
        .iter()
        .zip(fit.coefficients.iter().zip(fit.std_errors.iter()))
        .map(|(name, (&coef, &se))| {
            if se == 0.0 {
                CoefRow {
                    name: name.clone(),
                    coefficient: coef,
                    std_err: se,
                    z: if coef == 0.0 { 0.0 } else { f64::INFINITY * coef.signum() },
                    p_value: 0.0,
                    degenerate: true,
                }
            } else {
                let z = coef / se;
                CoefRow {
                    name: name.clone(),
                    coefficient: coef,
                    std_err: se,
                    z,
                    p_value: normal_two_sided_p(z),
                    degenerate: false,
                }
            }
        })
        .collect()
}
