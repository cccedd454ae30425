//! Rejected linear baselines: ordinary least squares, the collinearity
//! screen, and principal-component regression.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::countglm::dependent_columns;
use crate::dataset::{standardize, DesignMatrix, Standardization};
use crate::error::{Error, Result};

/// Least-squares fit. Fitted values may be negative or non-integer; that
/// is the documented defect of this baseline for count responses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub column_names: Vec<String>,
    pub coefficients: Vec<f64>,
    pub fitted: Vec<f64>,
    pub residuals: Vec<f64>,
    pub residual_sum_squares: f64,
}

const RANK_TOL: f64 = 1e-10;

/// Ordinary least squares via the singular value decomposition.
pub fn ols_fit(x: &DesignMatrix, y: &[f64]) -> Result<LinearFit> {
    let m = x.nrows();
    let n = x.ncols();
    if y.len() != m {
        return Err(Error::LengthMismatch(format!(
            "design matrix has {m} rows, response has {}",
            y.len()
        )));
    }
    if m <= n {
        return Err(Error::Domain(format!(
            "need more observations ({m}) than coefficients ({n})"
        )));
    }
    let svd = x.values.clone().svd(true, true);
    let max_sv = svd.singular_values.max();
    if svd.singular_values.min() <= max_sv * RANK_TOL {
        return Err(Error::Singular {
            columns: dependent_columns(x),
        });
    }
    let y_vec = DVector::from_column_slice(y);
    let beta = svd
        .solve(&y_vec, max_sv * RANK_TOL)
        .map_err(|e| Error::Domain(format!("svd solve failed: {e}")))?;
    let fitted = &x.values * &beta;
    let residuals: Vec<f64> = y_vec
        .iter()
        .zip(fitted.iter())
        .map(|(yi, fi)| yi - fi)
        .collect();
    let rss = residuals.iter().map(|r| r * r).sum();
    Ok(LinearFit {
        column_names: x.column_names.clone(),
        coefficients: beta.as_slice().to_vec(),
        fitted: fitted.as_slice().to_vec(),
        residuals,
        residual_sum_squares: rss,
    })
}

/// Condition number of the standardized non-intercept block, with a flag
/// when it exceeds the conventional threshold of 20.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionNumber {
    pub value: f64,
    pub collinear: bool,
}

pub const COLLINEARITY_THRESHOLD: f64 = 20.0;

pub fn condition_number(x: &DesignMatrix) -> Result<ConditionNumber> {
    if x.nrows() == 0 {
        return Err(Error::Domain("condition_number requires rows".into()));
    }
    let (std_x, _) = standardize(x);
    let block = non_intercept_block(&std_x);
    let svd = block.svd(false, false);
    let max_sv = svd.singular_values.max();
    let min_sv = svd.singular_values.min();
    let value = if min_sv <= max_sv * 1e-15 {
        f64::INFINITY
    } else {
        max_sv / min_sv
    };
    Ok(ConditionNumber {
        value,
        collinear: value > COLLINEARITY_THRESHOLD,
    })
}

fn non_intercept_block(x: &DesignMatrix) -> DMatrix<f64> {
    let keep: Vec<usize> = x
        .column_names
        .iter()
        .enumerate()
        .filter(|(_, name)| name.as_str() != "intercept")
        .map(|(j, _)| j)
        .collect();
    let mut block = DMatrix::zeros(x.nrows(), keep.len());
    for (jj, &j) in keep.iter().enumerate() {
        block.set_column(jj, &x.values.column(j));
    }
    block
}

/// Principal-component basis of the standardized predictor block.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaBasis {
    /// Orthonormal loadings, one column per component, rows in the order
    /// of the non-intercept predictor columns.
    pub loadings: DMatrix<f64>,
    pub explained_variance_ratio: Vec<f64>,
    /// Retained component count for the variance target.
    pub k: usize,
    pub predictor_names: Vec<String>,
    pub standardization: Standardization,
}

/// PCA on the standardized non-intercept block. The retained count k is
/// the smallest number of components whose cumulative explained-variance
/// ratio reaches `variance_target`. Loading signs are fixed so the
/// largest-magnitude entry of each component is positive.
pub fn pca(x: &DesignMatrix, variance_target: f64) -> Result<PcaBasis> {
    if !(variance_target > 0.0 && variance_target <= 1.0) {
        return Err(Error::Domain(format!(
            "variance_target must be in (0, 1], got {variance_target}"
        )));
    }
    let m = x.nrows();
    if m < 2 {
        return Err(Error::Domain("pca requires at least 2 rows".into()));
    }
    let (std_x, params) = standardize(x);
    let block = non_intercept_block(&std_x);
    let predictor_names: Vec<String> = x
        .column_names
        .iter()
        .filter(|n| n.as_str() != "intercept")
        .cloned()
        .collect();

    let svd = block.clone().svd(false, true);
    let v_t = svd.v_t.expect("svd requested v_t");
    let p = v_t.nrows();
    let eigenvalues: Vec<f64> = svd
        .singular_values
        .iter()
        .map(|s| s * s / (m as f64 - 1.0))
        .collect();
    let total: f64 = eigenvalues.iter().sum();
    let ratios: Vec<f64> = if total > 0.0 {
        eigenvalues.iter().map(|e| e / total).collect()
    } else {
        vec![0.0; p]
    };

    let mut loadings = DMatrix::zeros(predictor_names.len(), p);
    for c in 0..p {
        let mut col: Vec<f64> = (0..predictor_names.len()).map(|j| v_t[(c, j)]).collect();
        // deterministic sign: largest-magnitude entry positive
        let pivot = col
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
            .map(|(i, _)| i)
            .unwrap_or(0);
        if col[pivot] < 0.0 {
            for v in col.iter_mut() {
                *v = -*v;
            }
        }
        for (j, v) in col.iter().enumerate() {
            loadings[(j, c)] = *v;
        }
    }

    let mut cumulative = 0.0;
    let mut k = p;
    for (i, r) in ratios.iter().enumerate() {
        cumulative += r;
        if cumulative >= variance_target - 1e-12 {
            k = i + 1;
            break;
        }
    }

    Ok(PcaBasis {
        loadings,
        explained_variance_ratio: ratios,
        k,
        predictor_names,
        standardization: params,
    })
}

impl PcaBasis {
    /// Scores of the first k components for a design matrix with the same
    /// columns the basis was built from.
    pub fn scores(&self, x: &DesignMatrix) -> Result<DMatrix<f64>> {
        let names: Vec<String> = x
            .column_names
            .iter()
            .filter(|n| n.as_str() != "intercept")
            .cloned()
            .collect();
        if names != self.predictor_names {
            return Err(Error::Schema(
                "design matrix columns do not match the PCA basis".into(),
            ));
        }
        let mut z = non_intercept_block(x);
        let offsets: Vec<(f64, f64)> = self
            .standardization
            .column_names
            .iter()
            .zip(
                self.standardization
                    .means
                    .iter()
                    .zip(self.standardization.scales.iter()),
            )
            .filter(|(n, _)| n.as_str() != "intercept")
            .map(|(_, (m, s))| (*m, *s))
            .collect();
        for j in 0..z.ncols() {
            let (mean, scale) = offsets[j];
            for i in 0..z.nrows() {
                z[(i, j)] = (z[(i, j)] - mean) / scale;
            }
        }
        Ok(&z * self.loadings.columns(0, self.k))
    }
}

/// OLS on intercept plus retained principal-component scores.
#[derive(Debug, Clone, PartialEq)]
pub struct PcRegression {
    pub basis: PcaBasis,
    /// Fit in PC space: intercept followed by one coefficient per score.
    pub pc_fit: LinearFit,
    /// Coefficients back-projected to the original predictor space,
    /// intercept first, in the design matrix's column order.
    pub coefficients_original: Vec<f64>,
    pub fitted: Vec<f64>,
}

pub fn pc_regression(x: &DesignMatrix, y: &[f64], variance_target: f64) -> Result<PcRegression> {
    let basis = pca(x, variance_target)?;
    let scores = basis.scores(x)?;
    let m = x.nrows();
    let mut values = DMatrix::zeros(m, basis.k + 1);
    for i in 0..m {
        values[(i, 0)] = 1.0;
        for c in 0..basis.k {
            values[(i, c + 1)] = scores[(i, c)];
        }
    }
    let mut column_names = vec!["intercept".to_string()];
    column_names.extend((1..=basis.k).map(|c| format!("pc{c}")));
    let score_matrix = DesignMatrix {
        values,
        column_names,
        row_ids: x.row_ids.clone(),
    };
    let pc_fit = ols_fit(&score_matrix, y)?;

    // Back-project: coef_j = sum_c V_jc b_c / scale_j, intercept absorbs
    // the centering offsets.
    let non_intercept: Vec<usize> = x
        .column_names
        .iter()
        .enumerate()
        .filter(|(_, n)| n.as_str() != "intercept")
        .map(|(j, _)| j)
        .collect();
    let mut coefficients_original = vec![0.0; x.ncols()];
    let mut intercept = pc_fit.coefficients[0];
    for (jj, &j) in non_intercept.iter().enumerate() {
        let scale = basis.standardization.scales[j];
        let mean = basis.standardization.means[j];
        let mut c = 0.0;
        for comp in 0..basis.k {
            c += basis.loadings[(jj, comp)] * pc_fit.coefficients[comp + 1];
        }
        c /= scale;
        coefficients_original[j] = c;
        intercept -= c * mean;
    }
    let intercept_idx = x
        .column_names
        .iter()
        .position(|n| n == "intercept")
        .unwrap_or(0);
    coefficients_original[intercept_idx] = intercept;

    Ok(PcRegression {
        fitted: pc_fit.fitted.clone(),
        basis,
        pc_fit,
        coefficients_original,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn dm(values: DMatrix<f64>, names: &[&str]) -> DesignMatrix {
        DesignMatrix {
            row_ids: (0..values.nrows()).map(|i| format!("r{i}")).collect(),
            column_names: names.iter().map(|s| s.to_string()).collect(),
            values,
        }
    }

    #[test]
    fn ols_intercept_only_is_mean() {
        let x = dm(DMatrix::from_element(3, 1, 1.0), &["intercept"]);
        let fit = ols_fit(&x, &[1.0, 2.0, 3.0]).unwrap();
        assert_abs_diff_eq!(fit.coefficients[0], 2.0, epsilon = 1e-12);
        assert!(fit.fitted.iter().all(|&f| (f - 2.0).abs() < 1e-12));
    }

    #[test]
    fn ols_exact_interpolation() {
        let values = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 1.0, 1.0, 1.0, 2.0, 1.0, 3.0]);
        let x = dm(values, &["intercept", "x"]);
        let y: Vec<f64> = [0.0, 1.0, 2.0, 3.0].iter().map(|v| 3.0 + 2.0 * v).collect();
        let fit = ols_fit(&x, &y).unwrap();
        assert_abs_diff_eq!(fit.coefficients[0], 3.0, epsilon = 1e-10);
        assert_abs_diff_eq!(fit.coefficients[1], 2.0, epsilon = 1e-10);
    }

    #[test]
    fn ols_matches_normal_equations() {
        // 3-point, 2-coefficient fit; closed-form normal equations.
        let xs = [0.0, 1.0, 3.0];
        let y = [1.0, 2.0, 2.0];
        let values = DMatrix::from_row_slice(3, 2, &[1.0, xs[0], 1.0, xs[1], 1.0, xs[2]]);
        let x = dm(values, &["intercept", "x"]);
        let n = 3.0;
        let sx: f64 = xs.iter().sum();
        let sxx: f64 = xs.iter().map(|v| v * v).sum();
        let sy: f64 = y.iter().sum();
        let sxy: f64 = xs.iter().zip(y.iter()).map(|(a, b)| a * b).sum();
        let det = n * sxx - sx * sx;
        let b0 = (sxx * sy - sx * sxy) / det;
        let b1 = (n * sxy - sx * sy) / det;
        let fit = ols_fit(&x, &y).unwrap();
        assert_abs_diff_eq!(fit.coefficients[0], b0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.coefficients[1], b1, epsilon = 1e-12);
    }

    #[test]
    fn ols_residuals_orthogonal_to_columns() {
        let values = DMatrix::from_row_slice(
            5,
            3,
            &[
                1.0, 0.2, 3.0, 1.0, 1.4, 2.0, 1.0, 2.1, 7.0, 1.0, 3.3, 1.0, 1.0, 4.0, 4.0,
            ],
        );
        let x = dm(values, &["intercept", "a", "b"]);
        let y = [2.0, 1.0, 4.0, 3.0, 6.0];
        let fit = ols_fit(&x, &y).unwrap();
        let scale: f64 = y.iter().map(|v| v.abs()).sum();
        for j in 0..3 {
            let dot: f64 = (0..5).map(|i| fit.residuals[i] * x.values[(i, j)]).sum();
            assert!(dot.abs() < 1e-8 * scale, "column {j}: {dot}");
        }
    }

    #[test]
    fn ols_rank_deficient_errors() {
        let mut values = DMatrix::zeros(5, 3);
        for i in 0..5 {
            values[(i, 0)] = 1.0;
            values[(i, 1)] = i as f64;
            values[(i, 2)] = i as f64; // duplicate
        }
        let x = dm(values, &["intercept", "a", "b"]);
        let err = ols_fit(&x, &[1.0; 5]).unwrap_err();
        assert!(matches!(err, Error::Singular { .. }));
    }

    #[test]
    fn condition_number_orthonormal_is_one() {
        // centered orthogonal columns stay orthogonal after scaling
        let values = DMatrix::from_row_slice(
            4,
            3,
            &[
                1.0, 1.0, 1.0, 1.0, 1.0, -1.0, 1.0, -1.0, 1.0, 1.0, -1.0, -1.0,
            ],
        );
        let x = dm(values, &["intercept", "a", "b"]);
        let cn = condition_number(&x).unwrap();
        assert_abs_diff_eq!(cn.value, 1.0, epsilon = 1e-10);
        assert!(!cn.collinear);
    }

    #[test]
    fn condition_number_flags_above_threshold() {
        // nearly-collinear pair
        let m = 30;
        let mut values = DMatrix::zeros(m, 3);
        for i in 0..m {
            let t = i as f64 / (m - 1) as f64;
            values[(i, 0)] = 1.0;
            values[(i, 1)] = t;
            values[(i, 2)] = t + 1e-3 * ((i % 2) as f64 - 0.5);
        }
        let x = dm(values, &["intercept", "a", "b"]);
        let cn = condition_number(&x).unwrap();
        assert!(cn.value > 20.0);
        assert!(cn.collinear);
    }

    #[test]
    fn condition_number_exact_collinearity_is_infinite() {
        let mut values = DMatrix::zeros(4, 3);
        for i in 0..4 {
            values[(i, 0)] = 1.0;
            values[(i, 1)] = i as f64;
            values[(i, 2)] = 3.0 * i as f64;
        }
        let x = dm(values, &["intercept", "a", "b"]);
        let cn = condition_number(&x).unwrap();
        assert!(cn.value.is_infinite());
        assert!(cn.collinear);
    }

    #[test]
    fn condition_number_two_column_matches_gram_eigenvalues() {
        // After standardization the Gram matrix is (m-1) * [[1, r], [r, 1]];
        // the condition number is sqrt((1+|r|)/(1-|r|)).
        let xs = [0.0f64, 1.0, 2.0, 3.0, 4.0, 6.0];
        let zs = [1.0f64, 0.0, 2.0, 1.5, 5.0, 2.0];
        let m = xs.len();
        let mut values = DMatrix::zeros(m, 3);
        for i in 0..m {
            values[(i, 0)] = 1.0;
            values[(i, 1)] = xs[i];
            values[(i, 2)] = zs[i];
        }
        let x = dm(values, &["intercept", "a", "b"]);
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let (mx, mz) = (mean(&xs), mean(&zs));
        let sx = (xs.iter().map(|v| (v - mx).powi(2)).sum::<f64>() / (m as f64 - 1.0)).sqrt();
        let sz = (zs.iter().map(|v| (v - mz).powi(2)).sum::<f64>() / (m as f64 - 1.0)).sqrt();
        let r = xs
            .iter()
            .zip(zs.iter())
            .map(|(a, b)| (a - mx) / sx * (b - mz) / sz)
            .sum::<f64>()
            / (m as f64 - 1.0);
        let expected = ((1.0 + r.abs()) / (1.0 - r.abs())).sqrt();
        let cn = condition_number(&x).unwrap();
        assert_abs_diff_eq!(cn.value, expected, epsilon = 1e-10);
    }

    fn covariance_2d_data() -> DesignMatrix {
        // 5 centered points with sample covariance [[2, 1], [1, 2]]
        let s = 3f64.sqrt();
        let values = DMatrix::from_row_slice(
            5,
            3,
            &[
                1.0, s, s, 1.0, -s, -s, 1.0, 1.0, -1.0, 1.0, -1.0, 1.0, 1.0, 0.0, 0.0,
            ],
        );
        dm(values, &["intercept", "a", "b"])
    }

    #[test]
    fn pca_known_covariance_ratios() {
        let x = covariance_2d_data();
        let basis = pca(&x, 0.99).unwrap();
        // correlation 0.5 -> eigenvalues 1.5 and 0.5 -> ratios 0.75, 0.25
        assert_abs_diff_eq!(basis.explained_variance_ratio[0], 0.75, epsilon = 1e-10);
        assert_abs_diff_eq!(basis.explained_variance_ratio[1], 0.25, epsilon = 1e-10);
        let sum: f64 = basis.explained_variance_ratio.iter().sum();
        assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-10);
        // orthonormal loadings
        let gram = basis.loadings.transpose() * &basis.loadings;
        for i in 0..gram.nrows() {
            for j in 0..gram.ncols() {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((gram[(i, j)] - expected).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn pca_rank_one_data() {
        let mut values = DMatrix::zeros(4, 3);
        for i in 0..4 {
            values[(i, 0)] = 1.0;
            values[(i, 1)] = i as f64;
            values[(i, 2)] = 2.0 * i as f64;
        }
        let x = dm(values, &["intercept", "a", "b"]);
        let basis = pca(&x, 0.9).unwrap();
        assert_eq!(basis.k, 1);
        assert!(basis.explained_variance_ratio[0] > 1.0 - 1e-10);
    }

    #[test]
    fn pca_full_target_keeps_rank() {
        let x = covariance_2d_data();
        let basis = pca(&x, 1.0).unwrap();
        assert_eq!(basis.k, 2);
    }

    #[test]
    fn pca_reconstruction_recovers_standardized_data() {
        let x = covariance_2d_data();
        let basis = pca(&x, 1.0).unwrap();
        let scores = basis.scores(&x).unwrap();
        let reconstructed = &scores * basis.loadings.transpose();
        let (std_x, _) = standardize(&x);
        for i in 0..x.nrows() {
            for (jj, j) in [1usize, 2].iter().enumerate() {
                assert!((reconstructed[(i, jj)] - std_x.values[(i, *j)]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn pc_regression_full_target_reproduces_ols() {
        let x = covariance_2d_data();
        let y = [1.0, 5.0, 2.0, 4.0, 3.0];
        let ols = ols_fit(&x, &y).unwrap();
        let pcr = pc_regression(&x, &y, 1.0).unwrap();
        for (a, b) in pcr.fitted.iter().zip(ols.fitted.iter()) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
        // back-projected coefficients reproduce the fitted values too
        for i in 0..x.nrows() {
            let f: f64 = (0..x.ncols())
                .map(|j| pcr.coefficients_original[j] * x.values[(i, j)])
                .sum();
            assert!((f - pcr.fitted[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn pc_regression_handles_perfect_collinearity() {
        let mut values = DMatrix::zeros(6, 3);
        for i in 0..6 {
            values[(i, 0)] = 1.0;
            values[(i, 1)] = i as f64;
            values[(i, 2)] = i as f64; // duplicated column
        }
        let x = dm(values, &["intercept", "a", "b"]);
        let y = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0];
        assert!(ols_fit(&x, &y).is_err());
        let pcr = pc_regression(&x, &y, 0.99).unwrap();
        for (i, f) in pcr.fitted.iter().enumerate() {
            assert!((f - i as f64).abs() < 1e-8);
        }
    }

    #[test]
    fn pc_regression_reduces_condition_number() {
        let m = 40;
        let mut values = DMatrix::zeros(m, 3);
        for i in 0..m {
            let t = i as f64 / 10.0;
            values[(i, 0)] = 1.0;
            values[(i, 1)] = t;
            values[(i, 2)] = t + 0.01 * ((i * 7 % 5) as f64);
        }
        let x = dm(values, &["intercept", "a", "b"]);
        let y: Vec<f64> = (0..m).map(|i| (i as f64).sin() + i as f64 / 5.0).collect();
        let cn_x = condition_number(&x).unwrap().value;
        let pcr = pc_regression(&x, &y, 0.999).unwrap();
        let scores = pcr.basis.scores(&x).unwrap();
        let svd = scores.svd(false, false);
        let cn_scores = svd.singular_values.max() / svd.singular_values.min();
        assert!(cn_scores <= cn_x + 1e-9, "{cn_scores} vs {cn_x}");
    }

    #[test]
    fn pc_regression_invariant_to_column_permutation() {
        let x = covariance_2d_data();
        let y = [1.0, 5.0, 2.0, 4.0, 3.0];
        let mut swapped_values = x.values.clone();
        swapped_values.swap_columns(1, 2);
        let swapped = dm(swapped_values, &["intercept", "b", "a"]);
        let a = pc_regression(&x, &y, 1.0).unwrap();
        let b = pc_regression(&swapped, &y, 1.0).unwrap();
        for (u, v) in a.fitted.iter().zip(b.fitted.iter()) {
            assert!((u - v).abs() < 1e-8);
        }
    }
}
