//! Organization records: CSV ingestion, design-matrix encoding, column
//! standardization, and calibrated synthetic data generation.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, LogNormal, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Canonical CSV header, in order.
pub const CSV_HEADER: [&str; 14] = [
    "org_id",
    "domestic_com",
    "domestic_edu",
    "domestic_gov",
    "domestic_net",
    "domestic_org",
    "foreign_com",
    "foreign_net",
    "foreign_org",
    "violations",
    "hosts",
    "rosg",
    "seib",
    "intrusions",
];

/// Numeric predictor columns in design-matrix order (dummies excluded).
pub const NUMERIC_PREDICTORS: [&str; 11] = [
    "domestic_com",
    "domestic_edu",
    "domestic_gov",
    "domestic_net",
    "domestic_org",
    "foreign_com",
    "foreign_net",
    "foreign_org",
    "violations",
    "hosts",
    "rosg",
];

pub const SEIB_DUMMIES: [&str; 2] = ["seib3", "seib10"];

/// One organization's predictor values and observed intrusion count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrgRecord {
    pub org_id: String,
    pub domestic_com: u64,
    pub domestic_edu: u64,
    pub domestic_gov: u64,
    pub domestic_net: u64,
    pub domestic_org: u64,
    pub foreign_com: u64,
    pub foreign_net: u64,
    pub foreign_org: u64,
    pub violations: u64,
    pub hosts: u64,
    pub rosg: u64,
    pub seib: u8,
    pub intrusions: u64,
}

impl OrgRecord {
    pub fn validate(&self) -> Result<()> {
        if self.hosts < 1 {
            return Err(Error::Domain(format!(
                "org {}: hosts must be >= 1, got {}",
                self.org_id, self.hosts
            )));
        }
        if self.rosg < 1 {
            return Err(Error::Domain(format!(
                "org {}: rosg must be >= 1, got {}",
                self.org_id, self.rosg
            )));
        }
        if !matches!(self.seib, 1 | 3 | 10) {
            return Err(Error::Domain(format!(
                "org {}: seib must be one of 1, 3, 10, got {}",
                self.org_id, self.seib
            )));
        }
        Ok(())
    }

    /// Value of a numeric predictor column by name.
    pub fn predictor(&self, name: &str) -> Option<f64> {
        let v = match name {
            "domestic_com" => self.domestic_com,
            "domestic_edu" => self.domestic_edu,
            "domestic_gov" => self.domestic_gov,
            "domestic_net" => self.domestic_net,
            "domestic_org" => self.domestic_org,
            "foreign_com" => self.foreign_com,
            "foreign_net" => self.foreign_net,
            "foreign_org" => self.foreign_org,
            "violations" => self.violations,
            "hosts" => self.hosts,
            "rosg" => self.rosg,
            "seib3" => u64::from(self.seib == 3),
            "seib10" => u64::from(self.seib == 10),
            _ => return None,
        };
        Some(v as f64)
    }

    fn set_predictor(&mut self, name: &str, value: u64) {
        match name {
            "domestic_com" => self.domestic_com = value,
            "domestic_edu" => self.domestic_edu = value,
            "domestic_gov" => self.domestic_gov = value,
            "domestic_net" => self.domestic_net = value,
            "domestic_org" => self.domestic_org = value,
            "foreign_com" => self.foreign_com = value,
            "foreign_net" => self.foreign_net = value,
            "foreign_org" => self.foreign_org = value,
            "violations" => self.violations = value,
            "hosts" => self.hosts = value,
            "rosg" => self.rosg = value,
            _ => unreachable!("unknown predictor {name}"),
        }
    }
}

/// Predictor-restriction cases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CaseLabel {
    Full,
    Case1,
    Case2,
    Case3,
    Case4,
    Case5,
}

impl CaseLabel {
    pub const ALL: [CaseLabel; 6] = [
        CaseLabel::Full,
        CaseLabel::Case1,
        CaseLabel::Case2,
        CaseLabel::Case3,
        CaseLabel::Case4,
        CaseLabel::Case5,
    ];

    /// Predictor columns excluded by this case.
    pub fn excluded_columns(self) -> &'static [&'static str] {
        match self {
            CaseLabel::Full => &[],
            CaseLabel::Case1 => &["violations"],
            CaseLabel::Case2 => &["seib3", "seib10"],
            CaseLabel::Case3 => &["hosts"],
            CaseLabel::Case4 => &["rosg"],
            CaseLabel::Case5 => &["hosts", "rosg", "seib3", "seib10"],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CaseLabel::Full => "full",
            CaseLabel::Case1 => "case1",
            CaseLabel::Case2 => "case2",
            CaseLabel::Case3 => "case3",
            CaseLabel::Case4 => "case4",
            CaseLabel::Case5 => "case5",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            CaseLabel::Full => "all predictors",
            CaseLabel::Case1 => "omit violations",
            CaseLabel::Case2 => "omit seib",
            CaseLabel::Case3 => "omit hosts",
            CaseLabel::Case4 => "omit rosg",
            CaseLabel::Case5 => "omit cyber footprint (hosts, rosg, seib)",
        }
    }
}

impl std::str::FromStr for CaseLabel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(CaseLabel::Full),
            "case1" => Ok(CaseLabel::Case1),
            "case2" => Ok(CaseLabel::Case2),
            "case3" => Ok(CaseLabel::Case3),
            "case4" => Ok(CaseLabel::Case4),
            "case5" => Ok(CaseLabel::Case5),
            other => Err(Error::Schema(format!("unknown case label: {other}"))),
        }
    }
}

/// Ordered predictor column selection for encoding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredictorSchema {
    pub included_columns: Vec<String>,
    pub case_label: CaseLabel,
}

impl PredictorSchema {
    pub fn full() -> Self {
        Self::for_case(CaseLabel::Full)
    }

    pub fn for_case(case: CaseLabel) -> Self {
        let excluded = case.excluded_columns();
        let included_columns = NUMERIC_PREDICTORS
            .iter()
            .chain(SEIB_DUMMIES.iter())
            .filter(|c| !excluded.contains(*c))
            .map(|c| c.to_string())
            .collect();
        Self {
            included_columns,
            case_label: case,
        }
    }
}

/// Encoded numeric predictor table: intercept first, SEIB as 0/1 dummies.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    pub values: DMatrix<f64>,
    pub column_names: Vec<String>,
    pub row_ids: Vec<String>,
}

impl DesignMatrix {
    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.values.ncols()
    }

    /// Copy with row `i` removed; row ids follow.
    pub fn without_row(&self, i: usize) -> DesignMatrix {
        let values = self.values.clone().remove_row(i);
        let mut row_ids = self.row_ids.clone();
        row_ids.remove(i);
        DesignMatrix {
            values,
            column_names: self.column_names.clone(),
            row_ids,
        }
    }

    /// Single-row view as an owned matrix sharing column names.
    pub fn row_matrix(&self, i: usize) -> DesignMatrix {
        DesignMatrix {
            values: DMatrix::from_row_slice(1, self.ncols(), self.values.row(i).transpose().as_slice()),
            column_names: self.column_names.clone(),
            row_ids: vec![self.row_ids[i].clone()],
        }
    }
}

/// Read records from the canonical CSV format.
pub fn load_csv(path: &Path) -> Result<Vec<OrgRecord>> {
    let file = std::fs::File::open(path)?;
    read_records(file)
}

/// Same as [`load_csv`] but from any reader.
pub fn read_records<R: Read>(reader: R) -> Result<Vec<OrgRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let headers: Vec<String> = rdr
        .headers()?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if headers.len() != CSV_HEADER.len() {
        // Name the first mismatching/missing column.
        for (i, want) in CSV_HEADER.iter().enumerate() {
            if headers.get(i).map(String::as_str) != Some(*want) {
                return Err(Error::Schema(format!(
                    "header column {} should be '{}', got '{}'",
                    i + 1,
                    want,
                    headers.get(i).map(String::as_str).unwrap_or("<missing>")
                )));
            }
        }
        return Err(Error::Schema(format!(
            "expected {} columns, got {} (extra column '{}')",
            CSV_HEADER.len(),
            headers.len(),
            headers[CSV_HEADER.len()]
        )));
    }
    for (i, (got, want)) in headers.iter().zip(CSV_HEADER.iter()).enumerate() {
        if got != want {
            return Err(Error::Schema(format!(
                "header column {} should be '{}', got '{}'",
                i + 1,
                want,
                got
            )));
        }
    }

    let parse_count = |row: usize, col: &str, raw: &str| -> Result<u64> {
        raw.parse::<u64>().map_err(|_| Error::Parse {
            row,
            message: format!("column '{col}' must be a nonnegative integer, got '{raw}'"),
        })
    };

    let mut records = Vec::new();
    for (idx, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = idx + 1;
        if rec.len() != CSV_HEADER.len() {
            return Err(Error::Parse {
                row,
                message: format!("expected {} fields, got {}", CSV_HEADER.len(), rec.len()),
            });
        }
        let record = OrgRecord {
            org_id: rec[0].to_string(),
            domestic_com: parse_count(row, "domestic_com", &rec[1])?,
            domestic_edu: parse_count(row, "domestic_edu", &rec[2])?,
            domestic_gov: parse_count(row, "domestic_gov", &rec[3])?,
            domestic_net: parse_count(row, "domestic_net", &rec[4])?,
            domestic_org: parse_count(row, "domestic_org", &rec[5])?,
            foreign_com: parse_count(row, "foreign_com", &rec[6])?,
            foreign_net: parse_count(row, "foreign_net", &rec[7])?,
            foreign_org: parse_count(row, "foreign_org", &rec[8])?,
            violations: parse_count(row, "violations", &rec[9])?,
            hosts: parse_count(row, "hosts", &rec[10])?,
            rosg: parse_count(row, "rosg", &rec[11])?,
            seib: parse_count(row, "seib", &rec[12])? as u8,
            intrusions: parse_count(row, "intrusions", &rec[13])?,
        };
        record.validate()?;
        records.push(record);
    }
    Ok(records)
}

/// Write records in the canonical CSV format.
pub fn write_csv<W: Write>(writer: W, records: &[OrgRecord]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(CSV_HEADER)?;
    for r in records {
        wtr.write_record([
            r.org_id.as_str(),
            &r.domestic_com.to_string(),
            &r.domestic_edu.to_string(),
            &r.domestic_gov.to_string(),
            &r.domestic_net.to_string(),
            &r.domestic_org.to_string(),
            &r.foreign_com.to_string(),
            &r.foreign_net.to_string(),
            &r.foreign_org.to_string(),
            &r.violations.to_string(),
            &r.hosts.to_string(),
            &r.rosg.to_string(),
            &r.seib.to_string(),
            &r.intrusions.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Encode records into a design matrix plus response vector.
///
/// The intercept column comes first; SEIB level 1 is the reference category,
/// level 3 maps to seib3=1 and level 10 to seib10=1.
pub fn encode(records: &[OrgRecord], schema: &PredictorSchema) -> Result<(DesignMatrix, DVector<f64>)> {
    if records.is_empty() {
        return Err(Error::Schema("cannot encode an empty record set".into()));
    }
    let m = records.len();
    let mut column_names = vec!["intercept".to_string()];
    column_names.extend(schema.included_columns.iter().cloned());
    let n = column_names.len();

    let mut values = DMatrix::zeros(m, n);
    let mut y = DVector::zeros(m);
    for (i, r) in records.iter().enumerate() {
        r.validate()?;
        values[(i, 0)] = 1.0;
        for (j, col) in schema.included_columns.iter().enumerate() {
            values[(i, j + 1)] = r
                .predictor(col)
                .ok_or_else(|| Error::Schema(format!("unknown predictor column '{col}'")))?;
        }
        y[i] = r.intrusions as f64;
    }
    let row_ids = records.iter().map(|r| r.org_id.clone()).collect();
    Ok((
        DesignMatrix {
            values,
            column_names,
            row_ids,
        },
        y,
    ))
}

/// Centering/scaling parameters from [`standardize`].
#[derive(Debug, Clone, PartialEq)]
pub struct Standardization {
    pub column_names: Vec<String>,
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
    pub zero_variance: Vec<bool>,
}

impl Standardization {
    /// Undo the transform, reconstructing the original matrix.
    pub fn invert(&self, x: &DesignMatrix) -> DesignMatrix {
        let mut values = x.values.clone();
        for j in 0..values.ncols() {
            for i in 0..values.nrows() {
                values[(i, j)] = values[(i, j)] * self.scales[j] + self.means[j];
            }
        }
        DesignMatrix {
            values,
            column_names: x.column_names.clone(),
            row_ids: x.row_ids.clone(),
        }
    }
}

/// Center every non-intercept column to mean 0 and scale unit-variance
/// columns by their sample standard deviation. Zero-variance columns are
/// centered only and flagged.
pub fn standardize(x: &DesignMatrix) -> (DesignMatrix, Standardization) {
    let m = x.nrows();
    let n = x.ncols();
    let mut values = x.values.clone();
    let mut means = vec![0.0; n];
    let mut scales = vec![1.0; n];
    let mut zero_variance = vec![false; n];

    for j in 0..n {
        if x.column_names[j] == "intercept" {
            continue;
        }
        let col = x.values.column(j);
        let mean = col.sum() / m as f64;
        let var = if m > 1 {
            col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m as f64 - 1.0)
        } else {
            0.0
        };
        means[j] = mean;
        if var > 0.0 {
            scales[j] = var.sqrt();
        } else {
            zero_variance[j] = true;
        }
        for i in 0..m {
            values[(i, j)] = (values[(i, j)] - means[j]) / scales[j];
        }
    }

    (
        DesignMatrix {
            values,
            column_names: x.column_names.clone(),
            row_ids: x.row_ids.clone(),
        },
        Standardization {
            column_names: x.column_names.clone(),
            means,
            scales,
            zero_variance,
        },
    )
}

/// Marginal distribution spec for one synthetic predictor column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Marginal {
    /// Log-normal moment-matched to a target mean and standard deviation.
    LogNormal { mean: f64, sd: f64 },
    /// Poisson with the given mean.
    Poisson { mean: f64 },
    /// SEIB category probabilities for levels 1, 3, 10.
    Seib { p1: f64, p3: f64, p10: f64 },
}

/// Synthetic dataset configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub m: usize,
    /// Coefficients keyed by design-matrix column name; absent keys are 0.
    pub true_beta: BTreeMap<String, f64>,
    /// Heterogeneity of the response draw; 0 means Poisson.
    pub gamma: f64,
    pub marginals: BTreeMap<String, Marginal>,
    pub seed: u64,
}

impl SynthConfig {
    /// Marginals calibrated to realistic MSSP descriptive statistics.
    pub fn with_default_marginals(m: usize, seed: u64) -> Self {
        let mut marginals = BTreeMap::new();
        let lognormals: [(&str, f64, f64); 10] = [
            ("domestic_com", 3.7e5, 3.6e5),
            ("domestic_edu", 2017.2, 3203.4),
            ("domestic_gov", 1273.7, 1770.6),
            ("domestic_net", 1.6e5, 2.3e5),
            ("domestic_org", 1.1e4, 1.5e4),
            ("foreign_com", 4.5e4, 5.7e4),
            ("foreign_net", 1.7e4, 2.9e4),
            ("foreign_org", 4.2e5, 6.8e5),
            ("hosts", 2145.9, 5555.0),
            ("rosg", 2753.8, 4873.8),
        ];
        for (name, mean, sd) in lognormals {
            marginals.insert(name.to_string(), Marginal::LogNormal { mean, sd });
        }
        marginals.insert("violations".to_string(), Marginal::Poisson { mean: 5.1 });
        marginals.insert(
            "seib".to_string(),
            Marginal::Seib {
                p1: 0.780,
                p3: 0.171,
                p10: 0.049,
            },
        );
        SynthConfig {
            m,
            true_beta: BTreeMap::new(),
            gamma: 0.0,
            marginals,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 2 {
            return Err(Error::Domain(format!("m must be >= 2, got {}", self.m)));
        }
        if self.gamma < 0.0 {
            return Err(Error::Domain("gamma must be >= 0".into()));
        }
        for (name, marginal) in &self.marginals {
            match marginal {
                Marginal::LogNormal { mean, sd } => {
                    if *mean <= 0.0 || *sd < 0.0 {
                        return Err(Error::Domain(format!(
                            "log-normal marginal for '{name}' needs mean > 0 and sd >= 0"
                        )));
                    }
                }
                Marginal::Poisson { mean } => {
                    if *mean < 0.0 {
                        return Err(Error::Domain(format!(
                            "poisson marginal for '{name}' needs mean >= 0"
                        )));
                    }
                }
                Marginal::Seib { p1, p3, p10 } => {
                    if *p1 < 0.0 || *p3 < 0.0 || *p10 < 0.0 || (p1 + p3 + p10 - 1.0).abs() > 1e-9 {
                        return Err(Error::Domain(
                            "seib probabilities must be nonnegative and sum to 1".into(),
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Log-normal parameters matching a target mean and standard deviation.
fn lognormal_params(mean: f64, sd: f64) -> (f64, f64) {
    let sigma2 = (1.0 + (sd / mean).powi(2)).ln();
    let mu = mean.ln() - sigma2 / 2.0;
    (mu, sigma2.sqrt())
}

/// Generate a synthetic dataset. Deterministic given the seed; the response
/// is drawn Poisson(lambda) when gamma = 0 and from the gamma-Poisson
/// mixture with heterogeneity gamma otherwise, lambda = exp(x . beta).
pub fn simulate(config: &SynthConfig) -> Result<Vec<OrgRecord>> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let schema = PredictorSchema::full();

    let mut records = Vec::with_capacity(config.m);
    for i in 0..config.m {
        let mut record = OrgRecord {
            org_id: format!("org{i:05}"),
            domestic_com: 0,
            domestic_edu: 0,
            domestic_gov: 0,
            domestic_net: 0,
            domestic_org: 0,
            foreign_com: 0,
            foreign_net: 0,
            foreign_org: 0,
            violations: 0,
            hosts: 1,
            rosg: 1,
            seib: 1,
            intrusions: 0,
        };
        // Predictors are drawn in canonical column order so output is
        // reproducible for a given seed.
        for name in NUMERIC_PREDICTORS {
            let value = match config.marginals.get(name) {
                Some(Marginal::LogNormal { mean, sd }) => {
                    let (mu, sigma) = lognormal_params(*mean, *sd);
                    let dist = LogNormal::new(mu, sigma)
                        .map_err(|e| Error::Generation(format!("log-normal for {name}: {e}")))?;
                    dist.sample(&mut rng).round().max(0.0) as u64
                }
                Some(Marginal::Poisson { mean }) => {
                    if *mean == 0.0 {
                        0
                    } else {
                        let dist = Poisson::new(*mean)
                            .map_err(|e| Error::Generation(format!("poisson for {name}: {e}")))?;
                        dist.sample(&mut rng) as u64
                    }
                }
                Some(Marginal::Seib { .. }) => {
                    return Err(Error::Generation(format!(
                        "seib marginal assigned to numeric column '{name}'"
                    )))
                }
                None => 0,
            };
            let value = match name {
                "hosts" | "rosg" => value.max(1),
                _ => value,
            };
            record.set_predictor(name, value);
        }
        record.seib = match config.marginals.get("seib") {
            Some(Marginal::Seib { p1, p3, .. }) => {
                let u: f64 = rand::Rng::random(&mut rng);
                if u < *p1 {
                    1
                } else if u < p1 + p3 {
                    3
                } else {
                    10
                }
            }
            _ => 1,
        };

        // Linear predictor over the full encoded row.
        let mut eta = *config.true_beta.get("intercept").unwrap_or(&0.0);
        for col in &schema.included_columns {
            if let Some(beta) = config.true_beta.get(col) {
                eta += beta * record.predictor(col).unwrap();
            }
        }
        if eta > 700.0 {
            return Err(Error::Generation(format!(
                "linear predictor {eta:.1} exceeds 700 for org {}; choose smaller coefficients",
                record.org_id
            )));
        }
        let lambda = eta.exp().max(f64::MIN_POSITIVE);

        let mean = if config.gamma == 0.0 {
            lambda
        } else {
            let shape = 1.0 / config.gamma;
            let scale = config.gamma * lambda;
            let dist = Gamma::new(shape, scale)
                .map_err(|e| Error::Generation(format!("gamma mixture: {e}")))?;
            dist.sample(&mut rng).max(f64::MIN_POSITIVE)
        };
        let dist = Poisson::new(mean)
            .map_err(|e| Error::Generation(format!("poisson response: {e}")))?;
        record.intrusions = dist.sample(&mut rng) as u64;

        records.push(record);
    }
    Ok(records)
}
