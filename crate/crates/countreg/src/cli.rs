//! Command-line front door: CSV ingestion, fits, jackknife, sweeps, case
//! studies, simulation, and plot-data export.
//!
//! Reports are machine-first: JSON is canonical, CSV mirrors the same
//! values, and plot data is TSV with a one-line header. Output files are
//! written atomically (temp file then rename).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::countglm::{coef_inference, Family, FitOptions};
use crate::dataset::{
    encode, load_csv, simulate, write_csv, Marginal, OrgRecord, PredictorSchema, SynthConfig,
};
use crate::diagnostics::DiagnosticsReport;
use crate::error::{Error, Result};
use crate::linmodel::{condition_number, ols_fit, pc_regression};
use crate::study::{compare_models, gamma_sweep, run_cases, CaseReport, DEFAULT_GAMMA_GRID};
use crate::validation::{jackknife, jackknife_predictions_table};

#[derive(Debug, Parser)]
#[command(
    name = "countreg",
    about = "Count-regression models for per-organization intrusion data",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit one model on a dataset and write a full regression report.
    Fit(CommonArgs),
    /// Leave-one-out cross-validation with per-fold predictions.
    Jackknife(CommonArgs),
    /// Jackknifed NB2 evaluation over a heterogeneity grid.
    Sweep(CommonArgs),
    /// Full model plus the five predictor-restriction cases.
    Cases(CommonArgs),
    /// Generate a calibrated synthetic dataset.
    Simulate(SimArgs),
    /// Export TSV plot data from a previous fit or jackknife run.
    Plotdata(PlotArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Input dataset in the canonical CSV schema.
    #[arg(long)]
    pub input: PathBuf,
    /// Model family: linear, pc, poisson, or nb2.
    #[arg(long, default_value = "poisson")]
    pub family: String,
    /// NB2 heterogeneity parameter.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Comma-separated gamma grid for sweep/cases.
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<f64>>,
    /// Cumulative explained-variance target for PC regression.
    #[arg(long = "variance-target", default_value_t = 0.99)]
    pub variance_target: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory for report files.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Report format: json (canonical) or csv (mirror alongside json).
    #[arg(long, default_value = "json")]
    pub format: String,
}

#[derive(Debug, Args)]
pub struct SimArgs {
    /// Number of organizations to generate.
    #[arg(long, default_value_t = 41)]
    pub m: usize,
    /// Heterogeneity of the response draw; 0 means Poisson.
    #[arg(long, default_value_t = 0.0)]
    pub gamma: f64,
    /// True coefficients as name=value pairs, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub beta: Option<Vec<String>>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Directory holding a previous fit or jackknife report.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Histogram bin count for the standardized deviance residuals.
    #[arg(long, default_value_t = 10)]
    pub bins: usize,
}

const EXIT_USAGE: i32 = 1;
const EXIT_CONVERGENCE: i32 = 2;
const EXIT_IO: i32 = 3;

fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Io(_) | Error::Json(_) => EXIT_IO,
        Error::Convergence(_) => EXIT_CONVERGENCE,
        _ => EXIT_USAGE,
    }
}

/// Execute a parsed command, returning the process exit code.
pub fn run(cli: Cli) -> i32 {
    let outcome = match cli.command {
        Command::Fit(args) => cmd_fit(&args),
        Command::Jackknife(args) => cmd_jackknife(&args),
        Command::Sweep(args) => cmd_sweep(&args),
        Command::Cases(args) => cmd_cases(&args),
        Command::Simulate(args) => cmd_simulate(&args),
        Command::Plotdata(args) => cmd_plotdata(&args),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            exit_code_for(&err)
        }
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Flatten a JSON report into `path,value` CSV rows. Numbers keep their
/// JSON representation, so parsing either file yields identical values.
fn json_to_csv(value: &Value) -> String {
    fn walk(prefix: &str, value: &Value, rows: &mut Vec<String>) {
        match value {
            Value::Object(map) => {
                for (k, v) in map {
                    let key = if prefix.is_empty() {
                        k.clone()
                    } else {
                        format!("{prefix}.{k}")
                    };
                    walk(&key, v, rows);
                }
            }
            Value::Array(items) => {
                for (i, v) in items.iter().enumerate() {
                    walk(&format!("{prefix}[{i}]"), v, rows);
                }
            }
            Value::String(s) => rows.push(format!("{prefix},{}", s.replace(',', ";"))),
            other => rows.push(format!("{prefix},{other}")),
        }
    }
    let mut rows = vec!["field,value".to_string()];
    walk("", value, &mut rows);
    let mut out = rows.join("\n");
    out.push('\n');
    out
}

fn write_report<T: Serialize>(args_out: &Path, stem: &str, format: &str, report: &T) -> Result<()> {
    let json = serde_json::to_string_pretty(report)?;
    write_atomic(&args_out.join(format!("{stem}.json")), json.as_bytes())?;
    if format == "csv" {
        let value: Value = serde_json::from_str(&json)?;
        write_atomic(
            &args_out.join(format!("{stem}.csv")),
            json_to_csv(&value).as_bytes(),
        )?;
    }
    Ok(())
}

fn parse_format(format: &str) -> Result<()> {
    match format {
        "json" | "csv" => Ok(()),
        other => Err(Error::Schema(format!(
            "unknown format '{other}', expected json or csv"
        ))),
    }
}

fn glm_family(args: &CommonArgs) -> Result<Family> {
    match args.family.as_str() {
        "poisson" => Ok(Family::Poisson),
        "nb2" => {
            let gamma = args.gamma.ok_or_else(|| {
                Error::Schema("--gamma is required for the nb2 family".into())
            })?;
            Family::nb2(gamma)
        }
        other => Err(Error::Schema(format!(
            "family '{other}' is not a count GLM (expected poisson or nb2)"
        ))),
    }
}

fn load_encoded(args: &CommonArgs) -> Result<(Vec<OrgRecord>, crate::dataset::DesignMatrix, Vec<f64>)> {
    let records = load_csv(&args.input)?;
    let (x, y) = encode(&records, &PredictorSchema::full())?;
    let y: Vec<f64> = y.iter().copied().collect();
    Ok((records, x, y))
}

#[derive(Debug, Serialize, Deserialize)]
struct CoefEntry {
    name: String,
    coefficient: f64,
    std_err: f64,
    z: f64,
    p_value: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct JackknifeCoefEntry {
    name: String,
    mean: f64,
    std: f64,
    jackknife_se: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct JackknifeSummary {
    bic_mean: f64,
    bic_std: f64,
    coefficients: Vec<JackknifeCoefEntry>,
    failed_folds: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct GlmFitReport {
    kind: String,
    family: String,
    gamma: Option<f64>,
    m: usize,
    model_df: usize,
    residual_df: i64,
    n_params: usize,
    log_likelihood: f64,
    deviance: f64,
    pearson_chi2: f64,
    dispersion: f64,
    overdispersed: bool,
    bic: f64,
    converged: bool,
    iterations: usize,
    coefficients: Vec<CoefEntry>,
    jackknife: JackknifeSummary,
    observed: Vec<f64>,
    predicted: Vec<f64>,
    pearson_residuals: Vec<f64>,
    standardized_deviance_residuals: Vec<f64>,
    outlier_indices: Vec<usize>,
}

fn cmd_fit(args: &CommonArgs) -> Result<i32> {
    parse_format(&args.format)?;
    match args.family.as_str() {
        "linear" | "pc" => cmd_fit_linear(args),
        _ => cmd_fit_glm(args),
    }
}

fn cmd_fit_glm(args: &CommonArgs) -> Result<i32> {
    let family = glm_family(args)?;
    let (_, x, y) = load_encoded(args)?;
    let options = FitOptions::default();
    let jk = jackknife(&x, &y, family, &options)?;
    let fit = &jk.full_fit;
    let diag = DiagnosticsReport::for_fit(fit, &y)?;
    let coefficients = coef_inference(fit)
        .into_iter()
        .map(|r| CoefEntry {
            name: r.name,
            coefficient: r.coefficient,
            std_err: r.std_err,
            z: r.z,
            p_value: r.p_value,
        })
        .collect();
    let jackknife_summary = JackknifeSummary {
        bic_mean: jk.bic_mean,
        bic_std: jk.bic_std,
        coefficients: fit
            .column_names
            .iter()
            .enumerate()
            .map(|(j, name)| JackknifeCoefEntry {
                name: name.clone(),
                mean: jk.coef_mean[j],
                std: jk.coef_std[j],
                jackknife_se: jk.coef_jackknife_se[j],
            })
            .collect(),
        failed_folds: jk.failed_folds.len(),
    };
    let report = GlmFitReport {
        kind: "glm_fit".into(),
        family: family.name().into(),
        gamma: match family {
            Family::Poisson => None,
            Family::Nb2 { gamma } => Some(gamma),
        },
        m: fit.m,
        model_df: fit.model_df,
        residual_df: fit.residual_df,
        n_params: fit.n_params,
        log_likelihood: fit.log_likelihood,
        deviance: fit.deviance,
        pearson_chi2: diag.pearson_chi2,
        dispersion: diag.dispersion.value,
        overdispersed: diag.dispersion.overdispersed,
        bic: diag.bic,
        converged: fit.converged,
        iterations: fit.iterations,
        coefficients,
        jackknife: jackknife_summary,
        observed: y.clone(),
        predicted: fit.fitted_means.clone(),
        pearson_residuals: diag.pearson_residuals.clone(),
        standardized_deviance_residuals: diag.standardized_deviance_residuals.clone(),
        outlier_indices: diag.outlier_indices.clone(),
    };
    let converged = fit.converged;
    write_report(&args.out, "fit_report", &args.format, &report)?;
    if !converged {
        eprintln!("warning: fit did not converge; report written with converged=false");
        return Ok(EXIT_CONVERGENCE);
    }
    Ok(0)
}

#[derive(Debug, Serialize)]
struct LinearCoefEntry {
    name: String,
    coefficient: f64,
}

#[derive(Debug, Serialize)]
struct LinearFitReport {
    kind: String,
    family: String,
    m: usize,
    coefficients: Vec<LinearCoefEntry>,
    residual_sum_squares: f64,
    condition_number: f64,
    collinear: bool,
    variance_target: Option<f64>,
    retained_components: Option<usize>,
    observed: Vec<f64>,
    fitted: Vec<f64>,
}

fn cmd_fit_linear(args: &CommonArgs) -> Result<i32> {
    let (_, x, y) = load_encoded(args)?;
    let cn = condition_number(&x)?;
    let report = if args.family == "linear" {
        let fit = ols_fit(&x, &y)?;
        LinearFitReport {
            kind: "linear_fit".into(),
            family: "linear".into(),
            m: x.nrows(),
            coefficients: fit
                .column_names
                .iter()
                .zip(fit.coefficients.iter())
                .map(|(name, &coefficient)| LinearCoefEntry {
                    name: name.clone(),
                    coefficient,
                })
                .collect(),
            residual_sum_squares: fit.residual_sum_squares,
            condition_number: cn.value,
            collinear: cn.collinear,
            variance_target: None,
            retained_components: None,
            observed: y,
            fitted: fit.fitted,
        }
    } else {
        let fit = pc_regression(&x, &y, args.variance_target)?;
        let rss = y
            .iter()
            .zip(fit.fitted.iter())
            .map(|(a, b)| (a - b).powi(2))
            .sum();
        LinearFitReport {
            kind: "linear_fit".into(),
            family: "pc".into(),
            m: x.nrows(),
            coefficients: x
                .column_names
                .iter()
                .zip(fit.coefficients_original.iter())
                .map(|(name, &coefficient)| LinearCoefEntry {
                    name: name.clone(),
                    coefficient,
                })
                .collect(),
            residual_sum_squares: rss,
            condition_number: cn.value,
            collinear: cn.collinear,
            variance_target: Some(args.variance_target),
            retained_components: Some(fit.basis.k),
            observed: y,
            fitted: fit.fitted,
        }
    };
    write_report(&args.out, "fit_report", &args.format, &report)?;
    Ok(0)
}

#[derive(Debug, Serialize, Deserialize)]
struct FoldEntry {
    index: usize,
    observed: f64,
    predicted: f64,
    bic: f64,
    converged: bool,
}

#[derive(Debug, Serialize, Deserialize)]
struct JackknifeReport {
    kind: String,
    family: String,
    gamma: Option<f64>,
    m: usize,
    bic_mean: f64,
    bic_std: f64,
    coefficients: Vec<CoefEntry>,
    jackknife: JackknifeSummary,
    folds: Vec<FoldEntry>,
    observed: Vec<f64>,
    predicted: Vec<f64>,
    pearson_residuals: Vec<f64>,
    standardized_deviance_residuals: Vec<f64>,
    outlier_indices: Vec<usize>,
}

fn cmd_jackknife(args: &CommonArgs) -> Result<i32> {
    parse_format(&args.format)?;
    let family = glm_family(args)?;
    let (_, x, y) = load_encoded(args)?;
    let jk = jackknife(&x, &y, family, &FitOptions::default())?;
    let table = jackknife_predictions_table(&jk)?;
    let diag = DiagnosticsReport::for_fit(&jk.full_fit, &y)?;
    let pearson: Vec<f64> = table.iter().map(|r| r.pearson_residual).collect();
    let outlier_indices = pearson
        .iter()
        .enumerate()
        .filter(|(_, p)| p.abs() > 2.0)
        .map(|(i, _)| i)
        .collect();
    let report = JackknifeReport {
        kind: "jackknife".into(),
        family: family.name().into(),
        gamma: match family {
            Family::Poisson => None,
            Family::Nb2 { gamma } => Some(gamma),
        },
        m: x.nrows(),
        bic_mean: jk.bic_mean,
        bic_std: jk.bic_std,
        coefficients: coef_inference(&jk.full_fit)
            .into_iter()
            .map(|r| CoefEntry {
                name: r.name,
                coefficient: r.coefficient,
                std_err: r.std_err,
                z: r.z,
                p_value: r.p_value,
            })
            .collect(),
        jackknife: JackknifeSummary {
            bic_mean: jk.bic_mean,
            bic_std: jk.bic_std,
            coefficients: jk
                .column_names
                .iter()
                .enumerate()
                .map(|(j, name)| JackknifeCoefEntry {
                    name: name.clone(),
                    mean: jk.coef_mean[j],
                    std: jk.coef_std[j],
                    jackknife_se: jk.coef_jackknife_se[j],
                })
                .collect(),
            failed_folds: jk.failed_folds.len(),
        },
        folds: jk
            .per_fold
            .iter()
            .map(|f| FoldEntry {
                index: f.left_out_index,
                observed: f.observed,
                predicted: f.prediction,
                bic: f.bic,
                converged: f.converged,
            })
            .collect(),
        observed: table.iter().map(|r| r.observed).collect(),
        predicted: table.iter().map(|r| r.predicted).collect(),
        pearson_residuals: pearson,
        standardized_deviance_residuals: diag.standardized_deviance_residuals.clone(),
        outlier_indices,
    };
    write_report(&args.out, "jackknife_report", &args.format, &report)?;
    Ok(0)
}

#[derive(Debug, Serialize)]
struct SweepReport {
    kind: String,
    family: String,
    grid: Vec<f64>,
    rows: Vec<crate::study::SweepRow>,
}

fn cmd_sweep(args: &CommonArgs) -> Result<i32> {
    parse_format(&args.format)?;
    let grid = match &args.grid {
        Some(grid) if grid.is_empty() => {
            return Err(Error::Schema("--grid must contain at least one value".into()))
        }
        Some(grid) => grid.clone(),
        None => DEFAULT_GAMMA_GRID.to_vec(),
    };
    let (_, x, y) = load_encoded(args)?;
    let rows = gamma_sweep(&x, &y, &grid, &FitOptions::default())?;
    let report = SweepReport {
        kind: "sweep".into(),
        family: "nb2".into(),
        grid,
        rows,
    };
    write_report(&args.out, "sweep_report", &args.format, &report)?;
    Ok(0)
}

#[derive(Debug, Serialize)]
struct CaseBlock {
    gamma: Option<f64>,
    reports: Vec<CaseReport>,
    comparison: Vec<crate::study::ComparisonRow>,
}

#[derive(Debug, Serialize)]
struct CasesReport {
    kind: String,
    family: String,
    note: String,
    blocks: Vec<CaseBlock>,
}

fn cmd_cases(args: &CommonArgs) -> Result<i32> {
    parse_format(&args.format)?;
    let records = load_csv(&args.input)?;
    let options = FitOptions::default();

    let (family_name, families): (&str, Vec<Family>) = match args.family.as_str() {
        "poisson" => ("poisson", vec![Family::Poisson]),
        "nb2" => {
            let gammas = match (&args.grid, args.gamma) {
                (Some(grid), _) if grid.is_empty() => {
                    return Err(Error::Schema("--grid must contain at least one value".into()))
                }
                (Some(grid), _) => grid.clone(),
                (None, Some(gamma)) => vec![gamma],
                (None, None) => {
                    return Err(Error::Schema(
                        "--gamma or --grid is required for nb2 cases".into(),
                    ))
                }
            };
            (
                "nb2",
                gammas
                    .into_iter()
                    .map(Family::nb2)
                    .collect::<Result<Vec<_>>>()?,
            )
        }
        other => {
            return Err(Error::Schema(format!(
                "family '{other}' is not a count GLM (expected poisson or nb2)"
            )))
        }
    };

    let mut blocks = Vec::new();
    for family in families {
        let reports = run_cases(&records, family, &options)?;
        let comparison = compare_models(&reports);
        blocks.push(CaseBlock {
            gamma: match family {
                Family::Poisson => None,
                Family::Nb2 { gamma } => Some(gamma),
            },
            reports,
            comparison,
        });
    }
    let report = CasesReport {
        kind: "cases".into(),
        family: family_name.into(),
        note: "case numbering: case1 omits violations, case2 omits seib, case3 omits hosts, \
               case4 omits rosg, case5 omits hosts+rosg+seib"
            .into(),
        blocks,
    };
    write_report(&args.out, "cases_report", &args.format, &report)?;
    Ok(0)
}

fn parse_beta(pairs: &[String]) -> Result<BTreeMap<String, f64>> {
    let mut beta = BTreeMap::new();
    for pair in pairs {
        let (name, value) = pair.split_once('=').ok_or_else(|| {
            Error::Schema(format!("--beta entries must be name=value, got '{pair}'"))
        })?;
        let value: f64 = value
            .parse()
            .map_err(|_| Error::Schema(format!("invalid coefficient value '{value}'")))?;
        beta.insert(name.trim().to_string(), value);
    }
    Ok(beta)
}

fn cmd_simulate(args: &SimArgs) -> Result<i32> {
    let mut config = SynthConfig::with_default_marginals(args.m, args.seed);
    config.gamma = args.gamma;
    if let Some(pairs) = &args.beta {
        config.true_beta = parse_beta(pairs)?;
    }
    let records = simulate(&config)?;

    std::fs::create_dir_all(&args.out)?;
    let mut buf = Vec::new();
    write_csv(&mut buf, &records)?;
    write_atomic(&args.out.join("dataset.csv"), &buf)?;

    // summary statistics against the marginal targets
    let m = records.len() as f64;
    println!("wrote {} records to {}", records.len(), args.out.join("dataset.csv").display());
    println!("column\tsample_mean\ttarget_mean");
    for (name, marginal) in &config.marginals {
        let target = match marginal {
            Marginal::LogNormal { mean, .. } => *mean,
            Marginal::Poisson { mean } => *mean,
            Marginal::Seib { .. } => continue,
        };
        let sample = records
            .iter()
            .map(|r| r.predictor(name).unwrap_or(0.0))
            .sum::<f64>()
            / m;
        println!("{name}\t{sample}\t{target}");
    }
    let response_mean = records.iter().map(|r| r.intrusions as f64).sum::<f64>() / m;
    println!("intrusions\t{response_mean}\t-");
    Ok(0)
}

/// The subset of a fit/jackknife report that plot export needs.
#[derive(Debug, Deserialize)]
struct PlotSource {
    kind: String,
    family: String,
    observed: Vec<f64>,
    predicted: Vec<f64>,
    pearson_residuals: Vec<f64>,
    standardized_deviance_residuals: Vec<f64>,
    outlier_indices: Vec<usize>,
}

fn histogram(values: &[f64], bins: usize) -> Vec<(f64, f64, usize)> {
    if values.is_empty() || bins == 0 {
        return Vec::new();
    }
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        return vec![(lo, hi, values.len())];
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in values {
        let idx = (((v - lo) / width) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| (lo + i as f64 * width, lo + (i + 1) as f64 * width, c))
        .collect()
}

fn cmd_plotdata(args: &PlotArgs) -> Result<i32> {
    let source_path = ["jackknife_report.json", "fit_report.json"]
        .iter()
        .map(|name| args.out.join(name))
        .find(|p| p.exists())
        .ok_or_else(|| {
            Error::Schema(format!(
                "no fit_report.json or jackknife_report.json in {}; run fit or jackknife first",
                args.out.display()
            ))
        })?;
    let raw = std::fs::read_to_string(&source_path)?;
    let source: PlotSource = serde_json::from_str(&raw).map_err(|_| {
        Error::Schema(format!(
            "{} does not contain plottable GLM results",
            source_path.display()
        ))
    })?;
    if source.kind != "glm_fit" && source.kind != "jackknife" {
        return Err(Error::Schema(format!(
            "report kind '{}' has no plot data",
            source.kind
        )));
    }

    let mut predictions = String::from("observed\tpredicted\n");
    for (o, p) in source.observed.iter().zip(source.predicted.iter()) {
        predictions.push_str(&format!("{o}\t{p}\n"));
    }
    write_atomic(&args.out.join("predictions.tsv"), predictions.as_bytes())?;

    let mut residuals = String::from("fitted_mean\tpearson_residual\n");
    for (p, r) in source.predicted.iter().zip(source.pearson_residuals.iter()) {
        residuals.push_str(&format!("{p}\t{r}\n"));
    }
    write_atomic(&args.out.join("residuals.tsv"), residuals.as_bytes())?;

    let mut hist = String::from("bin_low\tbin_high\tcount\n");
    for (lo, hi, count) in histogram(&source.standardized_deviance_residuals, args.bins) {
        hist.push_str(&format!("{lo}\t{hi}\t{count}\n"));
    }
    write_atomic(&args.out.join("deviance_hist.tsv"), hist.as_bytes())?;

    let meta = serde_json::json!({
        "source": source_path.file_name().and_then(|s| s.to_str()),
        "family": source.family,
        "residual_reference_lines": [-2.0, 2.0],
        "outlier_indices": source.outlier_indices,
        "bins": args.bins,
    });
    write_atomic(
        &args.out.join("plot_metadata.json"),
        serde_json::to_string_pretty(&meta)?.as_bytes(),
    )?;
    Ok(0)
}
