use std::path::Path;

use anyhow::{bail, Context};
use serde::Serialize;
use shapes::simharness::{write_json, write_xy_csv};
use shapes::{shapes_fit, ShapesConfig64, ShapesEstimate64};

use crate::args::FitArgs;
use crate::output::Outputs;

/// Reads `x, y` rows; a first row that does not parse as numbers is taken
/// as a header.
pub fn read_xy(path: &Path) -> anyhow::Result<(Vec<f64>, Vec<f64>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.with_context(|| format!("{}: row {}", path.display(), i + 1))?;
        if rec.len() < 2 {
            bail!("{}: row {} has {} column(s), expected 2", path.display(), i + 1, rec.len());
        }
        match (rec[0].parse::<f64>(), rec[1].parse::<f64>()) {
            (Ok(x), Ok(y)) if x.is_finite() && y.is_finite() => rows.push((x, y)),
            _ if i == 0 => continue,
            _ => bail!("{}: row {}: expected two finite numbers", path.display(), i + 1),
        }
    }
    if rows.len() < 2 {
        bail!("{}: need at least two data rows", path.display());
    }
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    if rows.windows(2).any(|w| w[0].0 == w[1].0) {
        bail!("{}: duplicate x values", path.display());
    }
    Ok(rows.into_iter().unzip())
}

#[derive(Debug, Serialize)]
struct Transform {
    /// `u = (x - x_min) / (x_max - x_min)`
    x_min: f64,
    x_max: f64,
}

#[derive(Debug, Serialize)]
struct AicRow {
    num_knots: usize,
    aic: f64,
    fitness: f64,
    best_run: usize,
}

#[derive(Debug, Serialize)]
struct ModelReport<'a> {
    package_version: &'static str,
    input: String,
    transform: Transform,
    settings: &'a ShapesConfig64,
    m_best: usize,
    fitness: f64,
    /// Bias correction amplitude.
    scale: Option<f64>,
    bias_degenerate: bool,
    /// Knot vector in rescaled coordinates.
    knots: &'a [f64],
    /// Knot vector in the units of the input x.
    knots_x: Vec<f64>,
    coefficients: &'a [f64],
    aic_table: Vec<AicRow>,
    failed_models: &'a [(usize, String)],
}

fn report<'a>(args: &FitArgs, config: &'a ShapesConfig64, est: &'a ShapesEstimate64, x_min: f64, x_max: f64) -> ModelReport<'a> {
    let best = est.best_model();
    ModelReport {
        package_version: env!("CARGO_PKG_VERSION"),
        input: args.input.display().to_string(),
        transform: Transform { x_min, x_max },
        settings: config,
        m_best: est.m_best,
        fitness: est.fitness,
        scale: est.scale,
        bias_degenerate: est.bias_degenerate,
        knots: best.knots.values(),
        knots_x: best.knots.values().iter().map(|t| x_min + t * (x_max - x_min)).collect(),
        coefficients: &best.coefficients,
        aic_table: est
            .models
            .iter()
            .map(|m| AicRow { num_knots: m.num_knots, aic: m.aic, fitness: m.fitness, best_run: m.best_run })
            .collect(),
        failed_models: &est.failed_models,
    }
}

pub fn run(args: FitArgs) -> anyhow::Result<()> {
    let (config, _) = args.settings.config()?;
    let (x, y) = read_xy(&args.input)?;
    let (x_min, x_max) = (x[0], x[x.len() - 1]);
    let width = x_max - x_min;
    let mut u: Vec<f64> = x.iter().map(|v| (v - x_min) / width).collect();
    let last = u.len() - 1;
    u[last] = 1.0;
    if u.windows(2).any(|w| !(w[1] > w[0])) {
        bail!("x values collapse after rescaling to [0, 1]");
    }

    let est = shapes_fit(&y, &u, &config).context("fit failed")?;

    let mut outputs = Outputs::in_dir(&args.out)?;
    let csv_path = outputs.track(args.out.join("estimate.csv"));
    write_xy_csv(&csv_path, "x", "f_hat", &x, &est.estimate)?;
    let json_path = outputs.track(args.out.join("model.json"));
    write_json(&json_path, &report(&args, &config, &est, x_min, x_max))?;
    outputs.commit();
    Ok(())
}
