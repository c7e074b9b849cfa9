//! Monte Carlo campaigns: fit many noisy realizations of one benchmark and
//! summarize the error of the estimates.

use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::benchmarks::{benchmark_truth, generate_realization, BenchmarkId};
use crate::error::{Result, ShapesError};
use crate::label::Label;
use crate::model_search::{shapes_fit, ShapesConfig};
use crate::rng::{stream, Stream};
use crate::scalar::Scalar;

/// Realizations per campaign unless overridden.
pub const DEFAULT_NUM_REALIZATIONS: usize = 100;
/// Realizations per campaign in the full-size study.
pub const FULL_NUM_REALIZATIONS: usize = 1000;
pub const BOOTSTRAP_RESAMPLES: usize = 10_000;
pub const DEFAULT_BOOTSTRAP_SEED: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignSpec<T> {
    pub benchmark: BenchmarkId,
    pub snr: T,
    pub num_realizations: usize,
    pub config: ShapesConfig<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub bootstrap_seed: u64,
    pub bootstrap_resamples: usize,
}

impl<T: Scalar> CampaignSpec<T> {
    pub fn new(benchmark: BenchmarkId, snr: T, num_realizations: usize, config: ShapesConfig<T>) -> Self {
        Self {
            benchmark,
            snr,
            num_realizations,
            config,
            label: None,
            bootstrap_seed: DEFAULT_BOOTSTRAP_SEED,
            bootstrap_resamples: BOOTSTRAP_RESAMPLES,
        }
    }

    /// Settings and SNR taken from a key string such as `LP_100_0.1_100_FKM`.
    pub fn from_label(benchmark: BenchmarkId, label: &str, num_realizations: usize) -> Result<Self> {
        let parsed = Label::parse(label)?;
        let mut spec = Self::new(benchmark, T::lit(parsed.snr), num_realizations, parsed.config());
        spec.label = Some(label.to_string());
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_realizations == 0 {
            return Err(ShapesError::InvalidConfig("campaign needs at least one realization".into()));
        }
        if self.bootstrap_resamples == 0 {
            return Err(ShapesError::InvalidConfig("bootstrap needs at least one resample".into()));
        }
        if !(self.snr > T::zero()) || !self.snr.is_finite() {
            return Err(ShapesError::InvalidConfig(format!("SNR must be positive, got {}", self.snr)));
        }
        self.config.validate()?;
        if let Some(label) = &self.label {
            let parsed = Label::parse(label)?;
            let actual = Label::from_config(self.snr, &self.config);
            if parsed != actual {
                return Err(ShapesError::InvalidConfig(format!(
                    "label {label} does not match the settings ({actual})"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizationRecord<T> {
    /// 1-based realization index, also its noise seed.
    pub index: usize,
    pub m_best: usize,
    pub fitness: T,
    /// `‖f - f̂‖²` of the returned estimate.
    pub squared_error: T,
    /// `‖f - f̂‖²` of the winning model before bias correction.
    pub squared_error_uncorrected: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignSummary<T> {
    pub rmse: T,
    /// Bootstrap standard deviation of `rmse`.
    pub rmse_error: T,
    pub rmse_uncorrected: T,
    pub rmse_uncorrected_error: T,
    pub mean_knots: T,
    pub knots_std: T,
    /// SNR-scaled benchmark on the grid.
    pub truth: Vec<T>,
    /// Pointwise sample mean of the estimates.
    pub mean_estimate: Vec<T>,
    /// Pointwise sample standard deviation of the estimates.
    pub std_estimate: Vec<T>,
    pub records: Vec<RealizationRecord<T>>,
}

impl<T: Scalar> CampaignSummary<T> {
    /// Grid points where the truth lies outside `mean ± width·σ`.
    pub fn envelope_violations(&self, width: T) -> Vec<usize> {
        (0..self.truth.len())
            .filter(|&i| (self.mean_estimate[i] - self.truth[i]).abs() > width * self.std_estimate[i])
            .collect()
    }
}

/// Root of the mean of the squared errors.
pub fn rmse<T: Scalar>(squared_errors: &[T]) -> Result<T> {
    if squared_errors.is_empty() {
        return Err(ShapesError::Empty("squared errors"));
    }
    let n = T::from_usize_lossy(squared_errors.len());
    Ok((squared_errors.iter().copied().sum::<T>() / n).sqrt())
}

/// Standard deviation of the RMSE over `resamples` bootstrap resamples drawn
/// with replacement from the bootstrap stream keyed by `seed`.
pub fn bootstrap_error<T: Scalar>(squared_errors: &[T], resamples: usize, seed: u64) -> Result<T> {
    if squared_errors.is_empty() {
        return Err(ShapesError::Empty("squared errors"));
    }
    if resamples < 2 {
        return Ok(T::zero());
    }
    let n = squared_errors.len();
    let mut rng = stream(Stream::Bootstrap, seed);
    let nf = T::from_usize_lossy(n);
    let values: Vec<T> = (0..resamples)
        .map(|_| {
            let s: T = (0..n).map(|_| squared_errors[rng.random_range(0..n)]).sum();
            (s / nf).sqrt()
        })
        .collect();
    Ok(sample_std(&values))
}

fn mean<T: Scalar>(v: &[T]) -> T {
    v.iter().copied().sum::<T>() / T::from_usize_lossy(v.len())
}

/// Sample standard deviation with `n - 1` in the denominator; 0 for fewer than two values.
fn sample_std<T: Scalar>(v: &[T]) -> T {
    if v.len() < 2 {
        return T::zero();
    }
    let m = mean(v);
    let ss: T = v.iter().map(|&x| (x - m) * (x - m)).sum();
    (ss / T::from_usize_lossy(v.len() - 1)).sqrt()
}

fn squared_distance<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum()
}

/// Scalar aggregates of a set of records (everything in the summary except
/// the pointwise curves).
#[derive(Debug, Clone, PartialEq)]
pub struct RecordAggregates<T> {
    pub rmse: T,
    pub rmse_error: T,
    pub rmse_uncorrected: T,
    pub rmse_uncorrected_error: T,
    pub mean_knots: T,
    pub knots_std: T,
}

pub fn aggregate_records<T: Scalar>(records: &[RealizationRecord<T>], resamples: usize, seed: u64) -> Result<RecordAggregates<T>> {
    let se: Vec<T> = records.iter().map(|r| r.squared_error).collect();
    let seu: Vec<T> = records.iter().map(|r| r.squared_error_uncorrected).collect();
    let knots: Vec<T> = records.iter().map(|r| T::from_usize_lossy(r.m_best)).collect();
    Ok(RecordAggregates {
        rmse: rmse(&se)?,
        rmse_error: bootstrap_error(&se, resamples, seed)?,
        rmse_uncorrected: rmse(&seu)?,
        rmse_uncorrected_error: bootstrap_error(&seu, resamples, seed)?,
        mean_knots: mean(&knots),
        knots_std: sample_std(&knots),
    })
}

/// Fits every realization of the campaign. Realization `j` (1-based) uses
/// noise seed `j`; a single failing realization fails the campaign.
pub fn run_campaign<T: Scalar>(spec: &CampaignSpec<T>) -> Result<CampaignSummary<T>> {
    spec.validate()?;
    let (_, truth) = benchmark_truth::<T>(spec.benchmark, spec.snr)?;
    let outcomes: Vec<Result<(RealizationRecord<T>, Vec<T>)>> = (1..=spec.num_realizations)
        .into_par_iter()
        .map(|j| {
            let fail = |e: ShapesError| ShapesError::RealizationFailed { index: j, reason: e.to_string() };
            let data = generate_realization(spec.benchmark, spec.snr, j as u64).map_err(fail)?;
            let est = shapes_fit(&data.y, &data.grid, &spec.config).map_err(fail)?;
            let record = RealizationRecord {
                index: j,
                m_best: est.m_best,
                fitness: est.fitness,
                squared_error: squared_distance(&est.estimate, &data.truth),
                squared_error_uncorrected: squared_distance(&est.raw_estimate, &data.truth),
            };
            Ok((record, est.estimate))
        })
        .collect();

    let mut records = Vec::with_capacity(outcomes.len());
    let mut estimates = Vec::with_capacity(outcomes.len());
    for outcome in outcomes {
        let (record, estimate) = outcome?;
        records.push(record);
        estimates.push(estimate);
    }

    let n = truth.len();
    let column = |i: usize| estimates.iter().map(|e| e[i]).collect::<Vec<T>>();
    let mean_estimate = (0..n).map(|i| mean(&column(i))).collect();
    let std_estimate = (0..n).map(|i| sample_std(&column(i))).collect();
    let agg = aggregate_records(&records, spec.bootstrap_resamples, spec.bootstrap_seed)?;
    Ok(CampaignSummary {
        rmse: agg.rmse,
        rmse_error: agg.rmse_error,
        rmse_uncorrected: agg.rmse_uncorrected,
        rmse_uncorrected_error: agg.rmse_uncorrected_error,
        mean_knots: agg.mean_knots,
        knots_std: agg.knots_std,
        truth,
        mean_estimate,
        std_estimate,
        records,
    })
}

// ---- files ----

fn io_error(path: &Path, e: impl std::fmt::Display) -> ShapesError {
    ShapesError::Io { path: path.display().to_string(), reason: e.to_string() }
}

/// 17 significant digits, enough to round-trip an `f64`.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CampaignReport<T> {
    pub package_version: String,
    pub spec: CampaignSpec<T>,
    pub summary: CampaignSummary<T>,
}

impl<T: Scalar + Serialize> CampaignReport<T> {
    pub fn new(spec: CampaignSpec<T>, summary: CampaignSummary<T>) -> Self {
        Self { package_version: env!("CARGO_PKG_VERSION").to_string(), spec, summary }
    }
}

pub fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| io_error(path, e))?;
    std::fs::write(path, text + "\n").map_err(|e| io_error(path, e))
}

pub fn read_report(path: &Path) -> Result<CampaignReport<f64>> {
    let file = File::open(path).map_err(|e| io_error(path, e))?;
    serde_json::from_reader(BufReader::new(file)).map_err(|e| io_error(path, e))
}

const RECORD_HEADER: [&str; 5] = ["index", "m_best", "fitness", "squared_error", "squared_error_uncorrected"];

pub fn write_records_csv<T: Scalar>(path: &Path, records: &[RealizationRecord<T>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_error(path, e))?;
    w.write_record(RECORD_HEADER).map_err(|e| io_error(path, e))?;
    for r in records {
        w.write_record([
            r.index.to_string(),
            r.m_best.to_string(),
            format_float(r.fitness.as_f64()),
            format_float(r.squared_error.as_f64()),
            format_float(r.squared_error_uncorrected.as_f64()),
        ])
        .map_err(|e| io_error(path, e))?;
    }
    w.flush().map_err(|e| io_error(path, e))
}

pub fn read_records_csv(path: &Path) -> Result<Vec<RealizationRecord<f64>>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| io_error(path, e))?;
    let bad = |row: usize, what: &str| ShapesError::Parse { what: "records file", reason: format!("row {row}: {what}") };
    let mut out = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row.map_err(|e| io_error(path, e))?;
        if row.len() != RECORD_HEADER.len() {
            return Err(bad(i + 1, "wrong number of columns"));
        }
        let f = |c: usize| row[c].trim().parse::<f64>().map_err(|_| bad(i + 1, RECORD_HEADER[c]));
        let u = |c: usize| row[c].trim().parse::<usize>().map_err(|_| bad(i + 1, RECORD_HEADER[c]));
        out.push(RealizationRecord {
            index: u(0)?,
            m_best: u(1)?,
            fitness: f(2)?,
            squared_error: f(3)?,
            squared_error_uncorrected: f(4)?,
        });
    }
    Ok(out)
}

/// Campaign description as written in a JSON or TOML file. Settings come
/// either from `label` or from `config` (with `snr`), not both.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignFile {
    pub benchmark: BenchmarkId,
    #[serde(default)]
    pub num_realizations: Option<usize>,
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default)]
    pub snr: Option<f64>,
    #[serde(default)]
    pub config: Option<ShapesConfig<f64>>,
    #[serde(default)]
    pub bootstrap_seed: Option<u64>,
}

impl CampaignFile {
    pub fn load(path: &Path) -> Result<Self> {
        let mut text = String::new();
        File::open(path)
            .and_then(|mut f| f.read_to_string(&mut text))
            .map_err(|e| io_error(path, e))?;
        let toml_ext = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("toml"));
        let parsed = if toml_ext {
            toml::from_str(&text).map_err(|e| e.to_string())
        } else {
            serde_json::from_str(&text).map_err(|e| e.to_string())
        };
        parsed.map_err(|reason| ShapesError::Parse { what: "campaign file", reason })
    }

    pub fn into_spec(self) -> Result<CampaignSpec<f64>> {
        let n = self.num_realizations.unwrap_or(DEFAULT_NUM_REALIZATIONS);
        let mut spec = match (self.label, self.config) {
            (Some(label), None) => {
                let spec = CampaignSpec::from_label(self.benchmark, &label, n)?;
                if self.snr.is_some_and(|s| s != spec.snr) {
                    return Err(ShapesError::InvalidConfig(format!("snr disagrees with label {label}")));
                }
                spec
            }
            (None, Some(config)) => {
                let snr = self.snr.ok_or_else(|| ShapesError::InvalidConfig("snr is required with an explicit config".into()))?;
                CampaignSpec::new(self.benchmark, snr, n, config)
            }
            (Some(_), Some(_)) => return Err(ShapesError::InvalidConfig("give either a label or a config, not both".into())),
            (None, None) => return Err(ShapesError::InvalidConfig("campaign needs a label or a config".into())),
        };
        if let Some(seed) = self.bootstrap_seed {
            spec.bootstrap_seed = seed;
        }
        spec.validate()?;
        Ok(spec)
    }
}

/// Writes `(x, f(x))` rows with a header.
pub fn write_xy_csv<T: Scalar>(path: &Path, x_header: &str, y_header: &str, x: &[T], y: &[T]) -> Result<()> {
    let mut out = String::with_capacity(x.len() * 52);
    out.push_str(&format!("{x_header},{y_header}\n"));
    for (&a, &b) in x.iter().zip(y) {
        out.push_str(&format_float(a.as_f64()));
        out.push(',');
        out.push_str(&format_float(b.as_f64()));
        out.push('\n');
    }
    File::create(path)
        .and_then(|mut f| f.write_all(out.as_bytes()))
        .map_err(|e| io_error(path, e))
}
