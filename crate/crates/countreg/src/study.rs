//! Experiment orchestration: heterogeneity sweeps, restricted-predictor
//! cases, model comparison, and the TLD badness-score utility.

use serde::{Deserialize, Serialize};

use crate::countglm::{coef_inference, irls_fit, Family, FitOptions, FitResult};
use crate::dataset::{encode, CaseLabel, DesignMatrix, OrgRecord, PredictorSchema};
use crate::diagnostics::{lr_test, DiagnosticsReport, LrTest};
use crate::error::{Error, Result};
use crate::validation::jackknife;

/// The nine standard heterogeneity values for the absolute-model sweep.
pub const DEFAULT_GAMMA_GRID: [f64; 9] = [0.01, 0.20, 0.38, 0.57, 0.76, 0.94, 1.13, 1.31, 1.50];

/// One row of a heterogeneity sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub gamma: f64,
    /// Full-sample dispersion estimate.
    pub dispersion: f64,
    pub overdispersed: bool,
    /// Jackknifed BIC summary.
    pub bic_mean: f64,
    pub bic_std: f64,
    /// Fraction of jackknife folds that fit and converged.
    pub converged_fraction: f64,
}

/// Jackknifed NB2 evaluation at each grid value.
pub fn gamma_sweep(
    x: &DesignMatrix,
    y: &[f64],
    grid: &[f64],
    options: &FitOptions,
) -> Result<Vec<SweepRow>> {
    if grid.is_empty() {
        return Err(Error::Domain("gamma grid must be nonempty".into()));
    }
    for pair in grid.windows(2) {
        if pair[1] <= pair[0] {
            return Err(Error::Domain(
                "gamma grid must be strictly increasing".into(),
            ));
        }
    }
    if grid[0] <= 0.0 {
        return Err(Error::Domain("gamma grid values must be positive".into()));
    }

    let mut rows = Vec::with_capacity(grid.len());
    for &gamma in grid {
        let family = Family::Nb2 { gamma };
        let full = irls_fit(x, y, family, options)?;
        let disp = crate::diagnostics::dispersion(full.deviance, full.residual_df)?;
        let jk = jackknife(x, y, family, options)?;
        let total = (jk.per_fold.len() + jk.failed_folds.len()) as f64;
        let good = jk.per_fold.iter().filter(|f| f.converged).count() as f64;
        rows.push(SweepRow {
            gamma,
            dispersion: disp.value,
            overdispersed: disp.overdispersed,
            bic_mean: jk.bic_mean,
            bic_std: jk.bic_std,
            converged_fraction: good / total,
        });
    }
    Ok(rows)
}

/// Coefficient row with significance stars.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseCoef {
    pub name: String,
    pub coefficient: f64,
    pub std_err: f64,
    pub p_value: f64,
    pub stars: String,
    pub jackknife_mean: f64,
    pub jackknife_std: f64,
}

/// Full report for one predictor-restriction case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseReport {
    pub case_label: CaseLabel,
    pub description: String,
    pub family: Family,
    pub log_likelihood: f64,
    pub deviance: f64,
    pub pearson_chi2: f64,
    pub residual_df: i64,
    pub dispersion: f64,
    pub overdispersed: bool,
    pub bic_mean: f64,
    pub bic_std: f64,
    pub coefficients: Vec<CaseCoef>,
    /// Likelihood-ratio test against the full model; absent for the full
    /// model itself.
    pub lr_vs_full: Option<LrTest>,
    pub outlier_count: usize,
    /// Fraction of standardized deviance residuals below 1 in magnitude.
    pub frac_small_residuals: f64,
}

/// Star markers for p-value thresholds 0.001, 0.01, 0.05.
pub fn significance_stars(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}

fn case_report(
    records: &[OrgRecord],
    case: CaseLabel,
    family: Family,
    options: &FitOptions,
    full_fit: Option<&FitResult>,
) -> Result<CaseReport> {
    let schema = PredictorSchema::for_case(case);
    let (x, y) = encode(records, &schema)?;
    let y_slice: Vec<f64> = y.iter().copied().collect();
    let jk = jackknife(&x, &y_slice, family, options)?;
    let fit = &jk.full_fit;
    let diag = DiagnosticsReport::for_fit(fit, &y_slice)?;
    let inference = coef_inference(fit);
    let coefficients = inference
        .iter()
        .enumerate()
        .map(|(j, row)| CaseCoef {
            name: row.name.clone(),
            coefficient: row.coefficient,
            std_err: row.std_err,
            p_value: row.p_value,
            stars: significance_stars(row.p_value).to_string(),
            jackknife_mean: jk.coef_mean[j],
            jackknife_std: jk.coef_std[j],
        })
        .collect();
    let lr_vs_full = match full_fit {
        Some(full) if case != CaseLabel::Full => Some(lr_test(full, fit)?),
        _ => None,
    };
    let frac_small_residuals = diag
        .standardized_deviance_residuals
        .iter()
        .filter(|d| d.abs() < 1.0)
        .count() as f64
        / y_slice.len() as f64;
    Ok(CaseReport {
        case_label: case,
        description: case.description().to_string(),
        family,
        log_likelihood: fit.log_likelihood,
        deviance: fit.deviance,
        pearson_chi2: diag.pearson_chi2,
        residual_df: fit.residual_df,
        dispersion: diag.dispersion.value,
        overdispersed: diag.dispersion.overdispersed,
        bic_mean: jk.bic_mean,
        bic_std: jk.bic_std,
        coefficients,
        lr_vs_full,
        outlier_count: diag.outlier_indices.len(),
        frac_small_residuals,
    })
}

/// Six case reports (full model plus the five restrictions) for one
/// family. Restricted cases carry a likelihood-ratio test against the
/// full model on the same data.
pub fn run_cases(
    records: &[OrgRecord],
    family: Family,
    options: &FitOptions,
) -> Result<Vec<CaseReport>> {
    let full = case_report(records, CaseLabel::Full, family, options, None)?;
    let schema = PredictorSchema::full();
    let (x, y) = encode(records, &schema)?;
    let y_slice: Vec<f64> = y.iter().copied().collect();
    let full_fit = irls_fit(&x, &y_slice, family, options)?;

    let mut reports = vec![full];
    for case in [
        CaseLabel::Case1,
        CaseLabel::Case2,
        CaseLabel::Case3,
        CaseLabel::Case4,
        CaseLabel::Case5,
    ] {
        reports.push(case_report(records, case, family, options, Some(&full_fit))?);
    }
    Ok(reports)
}

/// Spamhaus-style badness score: (bad/total) * ln(bad), with 0 bad
/// domains scoring 0.
pub fn badness_score(n_bad: u64, n_total: u64) -> Result<f64> {
    if n_total == 0 {
        return Err(Error::Domain("badness_score requires n_total >= 1".into()));
    }
    if n_bad > n_total {
        return Err(Error::Domain(format!(
            "badness_score requires n_bad <= n_total, got {n_bad} > {n_total}"
        )));
    }
    if n_bad == 0 {
        return Ok(0.0);
    }
    Ok(n_bad as f64 / n_total as f64 * (n_bad as f64).ln())
}

/// One entry of a model comparison, best fit first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub rank: usize,
    pub case_label: CaseLabel,
    pub gamma: f64,
    pub bic_mean: f64,
    pub dispersion: f64,
    pub overdispersed: bool,
    pub outlier_count: usize,
    pub frac_small_residuals: f64,
}

/// Rank reports by jackknifed average BIC ascending; ties break by the
/// dispersion's distance from 1, then by case label.
pub fn compare_models(reports: &[CaseReport]) -> Vec<ComparisonRow> {
    let mut order: Vec<&CaseReport> = reports.iter().collect();
    order.sort_by(|a, b| {
        a.bic_mean
            .total_cmp(&b.bic_mean)
            .then((a.dispersion - 1.0).abs().total_cmp(&(b.dispersion - 1.0).abs()))
            .then(a.case_label.cmp(&b.case_label))
            .then(a.family.gamma().total_cmp(&b.family.gamma()))
    });
    order
        .into_iter()
        .enumerate()
        .map(|(i, r)| ComparisonRow {
            rank: i + 1,
            case_label: r.case_label,
            gamma: r.family.gamma(),
            bic_mean: r.bic_mean,
            dispersion: r.dispersion,
            overdispersed: r.overdispersed,
            outlier_count: r.outlier_count,
            frac_small_residuals: r.frac_small_residuals,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{simulate, SynthConfig};

    fn synthetic_records(m: usize, seed: u64, gamma: f64) -> Vec<OrgRecord> {
        let mut config = SynthConfig::with_default_marginals(m, seed);
        config.gamma = gamma;
        config.true_beta.insert("intercept".into(), 0.5);
        config.true_beta.insert("violations".into(), 0.15);
        config.true_beta.insert("seib3".into(), 0.8);
        simulate(&config).unwrap()
    }

    #[test]
    fn default_grid_is_frozen() {
        assert_eq!(
            DEFAULT_GAMMA_GRID,
            [0.01, 0.20, 0.38, 0.57, 0.76, 0.94, 1.13, 1.31, 1.50]
        );
    }

    #[test]
    fn sweep_rejects_bad_grids() {
        let records = synthetic_records(30, 5, 0.0);
        let (x, y) = encode(&records, &PredictorSchema::for_case(CaseLabel::Case5)).unwrap();
        let y: Vec<f64> = y.iter().copied().collect();
        assert!(gamma_sweep(&x, &y, &[], &FitOptions::default()).is_err());
        assert!(gamma_sweep(&x, &y, &[0.5, 0.2], &FitOptions::default()).is_err());
        assert!(gamma_sweep(&x, &y, &[-0.1, 0.2], &FitOptions::default()).is_err());
    }

    #[test]
    fn sweep_tiny_gamma_matches_poisson_dispersion() {
        let records = synthetic_records(40, 2, 0.0);
        let (x, y) = encode(&records, &PredictorSchema::for_case(CaseLabel::Case5)).unwrap();
        let y: Vec<f64> = y.iter().copied().collect();
        let pois = irls_fit(&x, &y, Family::Poisson, &FitOptions::default()).unwrap();
        let pois_disp =
            crate::diagnostics::dispersion(pois.deviance, pois.residual_df).unwrap();
        let rows = gamma_sweep(&x, &y, &[1e-9], &FitOptions::default()).unwrap();
        // NB2 has one more parameter, so compare deviance ratios on the
        // Poisson DF to isolate the gamma -> 0 limit
        let nb_fit =
            irls_fit(&x, &y, Family::Nb2 { gamma: 1e-9 }, &FitOptions::default()).unwrap();
        let nb_on_pois_df = nb_fit.deviance / pois.residual_df as f64;
        assert!(
            (nb_on_pois_df - pois_disp.value).abs() < 1e-3,
            "{nb_on_pois_df} vs {}",
            pois_disp.value
        );
        assert_eq!(rows.len(), 1);
    }

    #[test]
    fn significance_star_boundaries() {
        assert_eq!(significance_stars(0.0005), "***");
        assert_eq!(significance_stars(0.001), "**");
        assert_eq!(significance_stars(0.009), "**");
        assert_eq!(significance_stars(0.01), "*");
        assert_eq!(significance_stars(0.049999), "*");
        assert_eq!(significance_stars(0.05), "");
        assert_eq!(significance_stars(0.9), "");
    }

    #[test]
    fn badness_score_values() {
        assert_eq!(badness_score(0, 1000).unwrap(), 0.0);
        assert_eq!(badness_score(1, 1).unwrap(), 0.0);
        let score = badness_score(68_900, 462_416).unwrap();
        assert!((score - 1.66).abs() < 0.01, "{score}");
        assert!((68_900.0 / 462_416.0 - 0.149_f64).abs() < 0.001);
        assert!(badness_score(2, 1).is_err());
        assert!(badness_score(0, 0).is_err());
    }

    #[test]
    fn badness_score_monotone_in_bad_count() {
        let mut prev = badness_score(1, 100_000).unwrap();
        for n_bad in [2u64, 5, 10, 100, 1000, 50_000, 100_000] {
            let next = badness_score(n_bad, 100_000).unwrap();
            assert!(next >= prev, "{n_bad}: {next} < {prev}");
            prev = next;
        }
    }

    #[test]
    fn run_cases_residual_dfs_and_exclusions() {
        let records = synthetic_records(41, 77, 0.01);
        let reports =
            run_cases(&records, Family::Nb2 { gamma: 0.01 }, &FitOptions::default()).unwrap();
        assert_eq!(reports.len(), 6);
        let dfs: Vec<i64> = reports.iter().map(|r| r.residual_df).collect();
        assert_eq!(dfs, vec![25, 26, 27, 26, 26, 29]);
        let labels: Vec<&str> = reports.iter().map(|r| r.case_label.name()).collect();
        assert_eq!(labels, vec!["full", "case1", "case2", "case3", "case4", "case5"]);
        for report in &reports {
            let names: Vec<&str> = report
                .coefficients
                .iter()
                .map(|c| c.name.as_str())
                .collect();
            for excluded in report.case_label.excluded_columns() {
                assert!(!names.contains(excluded), "{:?}", report.case_label);
            }
            for coef in &report.coefficients {
                assert_eq!(coef.stars, significance_stars(coef.p_value));
            }
            if report.case_label != CaseLabel::Full {
                let lr = report.lr_vs_full.as_ref().unwrap();
                assert!(lr.df >= 1);
            } else {
                assert!(report.lr_vs_full.is_none());
            }
        }
        // nested log-likelihood ordering (within optimizer slack)
        let full_ll = reports[0].log_likelihood;
        for case in &reports[1..] {
            assert!(full_ll >= case.log_likelihood - 1e-8, "{:?}", case.case_label);
        }
    }

    #[test]
    fn compare_models_ranks_and_is_permutation_invariant() {
        let records = synthetic_records(41, 13, 0.01);
        let reports =
            run_cases(&records, Family::Nb2 { gamma: 0.2 }, &FitOptions::default()).unwrap();
        let ranked = compare_models(&reports);
        assert_eq!(ranked.len(), reports.len());
        for pair in ranked.windows(2) {
            assert!(pair[0].bic_mean <= pair[1].bic_mean);
        }
        let mut shuffled = reports.clone();
        shuffled.rotate_left(3);
        let ranked_b = compare_models(&shuffled);
        assert_eq!(ranked, ranked_b);

        // identical reports tie-break by label
        let mut a = reports[1].clone();
        a.case_label = CaseLabel::Case4;
        let mut b = reports[1].clone();
        b.case_label = CaseLabel::Case2;
        let ranked = compare_models(&[a, b]);
        assert_eq!(ranked[0].case_label, CaseLabel::Case2);
    }
}
