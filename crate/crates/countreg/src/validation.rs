//! Jackknife (leave-one-out) cross-validation: per-fold refits, left-out
//! predictions, and aggregated BIC and coefficient summaries.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::countglm::{irls_fit, predict, Family, FitOptions, FitResult};
use crate::dataset::DesignMatrix;
use crate::diagnostics::{bic, pearson_residuals};
use crate::error::{Error, Result};

/// One successful fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldOutcome {
    pub left_out_index: usize,
    pub observed: f64,
    /// Left-out prediction from the fold fit.
    pub prediction: f64,
    pub coefficients: Vec<f64>,
    pub log_likelihood: f64,
    pub deviance: f64,
    /// BIC of the fold fit, using the fold's own m-1 observations.
    pub bic: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldFailure {
    pub left_out_index: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JackknifeResult {
    pub family: Family,
    pub column_names: Vec<String>,
    pub per_fold: Vec<FoldOutcome>,
    /// Folds that failed to fit, flagged and excluded from aggregates.
    pub failed_folds: Vec<FoldFailure>,
    pub bic_mean: f64,
    /// Sample standard deviation of per-fold BIC.
    pub bic_std: f64,
    pub coef_mean: Vec<f64>,
    /// Sample standard deviation of per-fold coefficients.
    pub coef_std: Vec<f64>,
    /// Jackknife standard error sqrt((k-1)/k * sum (b_i - mean)^2).
    pub coef_jackknife_se: Vec<f64>,
    pub full_fit: FitResult,
}

fn sample_mean_std(values: &[f64]) -> (f64, f64) {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
    } else {
        0.0
    };
    (mean, std)
}

/// Leave-one-out refitting. Fold i fits the other m-1 rows and predicts
/// row i. Singular or failing folds are flagged and excluded from the
/// aggregates; an error is returned only if every fold fails.
pub fn jackknife(
    x: &DesignMatrix,
    y: &[f64],
    family: Family,
    options: &FitOptions,
) -> Result<JackknifeResult> {
    let m = x.nrows();
    let n_params = x.ncols() + family.extra_params();
    if m < n_params + 2 {
        return Err(Error::Domain(format!(
            "jackknife needs m >= n_params + 2 ({} >= {})",
            m,
            n_params + 2
        )));
    }
    let full_fit = irls_fit(x, y, family, options)?;

    let outcomes: Vec<std::result::Result<FoldOutcome, FoldFailure>> = (0..m)
        .into_par_iter()
        .map(|i| {
            let x_fold = x.without_row(i);
            let mut y_fold = y.to_vec();
            y_fold.remove(i);
            let fit = irls_fit(&x_fold, &y_fold, family, options).map_err(|e| FoldFailure {
                left_out_index: i,
                message: e.to_string(),
            })?;
            let prediction = predict(&fit, &x.row_matrix(i)).map_err(|e| FoldFailure {
                left_out_index: i,
                message: e.to_string(),
            })?[0];
            let fold_bic = bic(fit.deviance, fit.residual_df, fit.m);
            Ok(FoldOutcome {
                left_out_index: i,
                observed: y[i],
                prediction,
                coefficients: fit.coefficients,
                log_likelihood: fit.log_likelihood,
                deviance: fit.deviance,
                bic: fold_bic,
                converged: fit.converged,
            })
        })
        .collect();

    let mut per_fold = Vec::new();
    let mut failed_folds = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok(fold) => per_fold.push(fold),
            Err(failure) => failed_folds.push(failure),
        }
    }
    if per_fold.is_empty() {
        return Err(Error::Convergence("every jackknife fold failed".into()));
    }

    let bics: Vec<f64> = per_fold.iter().map(|f| f.bic).collect();
    let (bic_mean, bic_std) = sample_mean_std(&bics);
    let n = x.ncols();
    let k = per_fold.len() as f64;
    let mut coef_mean = vec![0.0; n];
    let mut coef_std = vec![0.0; n];
    let mut coef_jackknife_se = vec![0.0; n];
    for j in 0..n {
        let values: Vec<f64> = per_fold.iter().map(|f| f.coefficients[j]).collect();
        let (mean, std) = sample_mean_std(&values);
        coef_mean[j] = mean;
        coef_std[j] = std;
        let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
        coef_jackknife_se[j] = ((k - 1.0) / k * ss).sqrt();
    }

    Ok(JackknifeResult {
        family,
        column_names: x.column_names.clone(),
        per_fold,
        failed_folds,
        bic_mean,
        bic_std,
        coef_mean,
        coef_std,
        coef_jackknife_se,
        full_fit,
    })
}

/// One observed/predicted pair for the prediction scatter data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRow {
    pub left_out_index: usize,
    pub observed: f64,
    pub predicted: f64,
    pub pearson_residual: f64,
}

/// Observed vs. left-out-prediction rows with the Pearson residual of
/// each pair.
pub fn jackknife_predictions_table(result: &JackknifeResult) -> Result<Vec<PredictionRow>> {
    result
        .per_fold
        .iter()
        .map(|fold| {
            let resid =
                pearson_residuals(&[fold.observed], &[fold.prediction], result.family)?[0];
            Ok(PredictionRow {
                left_out_index: fold.left_out_index,
                observed: fold.observed,
                predicted: fold.prediction,
                pearson_residual: resid,
            })
        })
        .collect()
}
