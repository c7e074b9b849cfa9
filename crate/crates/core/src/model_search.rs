//! The adaptive spline pipeline: for every candidate number of knots run
//! several independent swarms over knot placements, keep the best run, pick
//! the model with the lowest AIC and undo the shrinkage of the penalty by a
//! least-squares rescaling of the winning estimate.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bspline::{build_basis_matrix, KnotVector};
use crate::error::{Result, ShapesError};
use crate::knotmap::{map_to_knots, KnotMapOptions};
use crate::penalized::{fit_basis, PenalizedFitResult};
use crate::pso::{run_pso, FitnessValue, SwarmParams};
use crate::scalar::{dot, l2_norm, Scalar};

/// Candidate knot counts used unless overridden.
pub const DEFAULT_MODEL_SET: [usize; 10] = [5, 6, 7, 8, 9, 10, 12, 14, 16, 18];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapesConfig<T> {
    /// Candidate numbers of distinct knots, strictly increasing.
    pub model_set: Vec<usize>,
    /// Independent swarm runs per model.
    pub num_runs: usize,
    /// Regulator gain.
    pub lambda: T,
    pub swarm: SwarmParams<T>,
    pub knots: KnotMapOptions,
    pub drop_end_bsplines: bool,
    pub bias_correction: bool,
    /// Run `r` (1-based) uses swarm seed `seed_base + r`.
    pub seed_base: u64,
}

impl<T: Scalar> ShapesConfig<T> {
    pub fn new(lambda: T, num_iterations: usize) -> Self {
        Self {
            model_set: DEFAULT_MODEL_SET.to_vec(),
            num_runs: 4,
            lambda,
            swarm: SwarmParams::with_iterations(num_iterations),
            knots: KnotMapOptions::default(),
            drop_end_bsplines: false,
            bias_correction: true,
            seed_base: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(ShapesError::InvalidConfig(m));
        if self.model_set.is_empty() {
            return bad("model set is empty".into());
        }
        if self.model_set.windows(2).any(|w| w[1] <= w[0]) {
            return bad("model set must be strictly increasing".into());
        }
        if self.model_set[0] < 2 {
            return bad("every model needs at least 2 distinct knots".into());
        }
        if self.num_runs == 0 {
            return bad("need at least one swarm run per model".into());
        }
        if !(self.lambda >= T::zero()) || !self.lambda.is_finite() {
            return bad(format!("regulator gain {} must be finite and >= 0", self.lambda));
        }
        if self.knots.order == 0 {
            return bad("spline order must be at least 1".into());
        }
        self.swarm.unit_box_config(1, 0).validate()
    }
}

/// Best of the swarm runs for one knot count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelResult<T> {
    pub num_knots: usize,
    /// 1-based index of the run with the lowest fitness.
    pub best_run: usize,
    /// Best swarm position of the winning run.
    pub position: Vec<T>,
    pub knots: KnotVector<T>,
    pub coefficients: Vec<T>,
    pub fitness: T,
    pub aic: T,
    /// Fitted values on the grid, before any bias correction.
    pub estimate: Vec<T>,
    /// Final global-best fitness of every run, in run order.
    pub run_fitness: Vec<FitnessValue<T>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapesEstimate<T> {
    pub m_best: usize,
    /// Estimate on the grid; bias corrected when enabled.
    pub estimate: Vec<T>,
    /// Estimate of the winning model before bias correction.
    pub raw_estimate: Vec<T>,
    /// Fitness of the winning model (before bias correction).
    pub fitness: T,
    /// Amplitude `A` of the bias correction, `None` when it is disabled.
    pub scale: Option<T>,
    /// Set when bias correction met a zero estimate and passed it through.
    pub bias_degenerate: bool,
    pub models: Vec<ModelResult<T>>,
    /// Knot counts whose every evaluation failed, with the reason.
    pub failed_models: Vec<(usize, String)>,
}

impl<T: Scalar> ShapesEstimate<T> {
    pub fn best_model(&self) -> &ModelResult<T> {
        self.models
            .iter()
            .find(|m| m.num_knots == self.m_best)
            .expect("winning model is in the table")
    }

    /// `(M, AIC)` for every model that produced a finite fitness.
    pub fn aic_table(&self) -> Vec<(usize, T)> {
        self.models.iter().map(|m| (m.num_knots, m.aic)).collect()
    }
}

/// `4 M + F`: the number of fitted parameters is `2M` (knots and coefficients)
/// and the log-likelihood is proportional to the least-squares fitness.
pub fn aic<T: Scalar>(num_knots: usize, fitness: T) -> T {
    T::lit(4.0) * T::from_usize_lossy(num_knots) + fitness
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiasCorrection<T> {
    pub estimate: Vec<T>,
    pub scale: T,
    /// The input estimate had zero norm and was returned unchanged.
    pub degenerate: bool,
}

/// Rescales the unit-norm shape of `estimate` by its least-squares amplitude
/// against the data.
pub fn bias_correct<T: Scalar>(estimate: &[T], y: &[T]) -> BiasCorrection<T> {
    let norm = l2_norm(estimate);
    if !(norm > T::zero()) || !norm.is_finite() {
        return BiasCorrection { estimate: estimate.to_vec(), scale: T::zero(), degenerate: true };
    }
    let unit: Vec<T> = estimate.iter().map(|&v| v / norm).collect();
    let scale = dot(y, &unit);
    BiasCorrection {
        estimate: unit.iter().map(|&u| scale * u).collect(),
        scale,
        degenerate: false,
    }
}

/// Everything the objective needs; evaluation is a pure function of the position.
struct KnotObjective<'a, T> {
    y: &'a [T],
    grid: &'a [T],
    lambda: T,
    options: &'a KnotMapOptions,
    drop_end_bsplines: bool,
}

impl<T: Scalar> KnotObjective<'_, T> {
    fn fit(&self, z: &[T]) -> Result<(KnotVector<T>, PenalizedFitResult<T>)> {
        let knots = map_to_knots(z, self.grid, self.options)?;
        let basis = build_basis_matrix(&knots, self.grid, self.drop_end_bsplines)?;
        let fit = fit_basis(&basis, self.y, self.lambda)?;
        Ok((knots, fit))
    }

    fn value(&self, z: &[T]) -> T {
        self.fit(z).map_or(T::infinity(), |(_, f)| f.fitness)
    }
}

fn check_data<T: Scalar>(y: &[T], grid: &[T]) -> Result<()> {
    if grid.is_empty() {
        return Err(ShapesError::Empty("predictor grid"));
    }
    if y.len() != grid.len() {
        return Err(ShapesError::IllPosed(format!("{} observations for {} grid points", y.len(), grid.len())));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(ShapesError::IllPosed("grid must be strictly increasing".into()));
    }
    if grid[0] != T::zero() || grid[grid.len() - 1] != T::one() {
        return Err(ShapesError::IllPosed("grid must span [0, 1]".into()));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(ShapesError::IllPosed("observations must be finite".into()));
    }
    Ok(())
}

/// Optimizes the knot placement for a fixed number of distinct knots with
/// `num_runs` independent swarms and returns the best run.
pub fn fit_model<T: Scalar>(y: &[T], grid: &[T], num_knots: usize, config: &ShapesConfig<T>) -> Result<ModelResult<T>> {
    check_data(y, grid)?;
    let objective = KnotObjective {
        y,
        grid,
        lambda: config.lambda,
        options: &config.knots,
        drop_end_bsplines: config.drop_end_bsplines,
    };
    let dim = config.knots.search_dim(num_knots);
    let runs: Vec<(Vec<T>, FitnessValue<T>)> = if dim == 0 {
        // both knots pinned: nothing to search
        let v = FitnessValue::new(objective.value(&[]));
        vec![(Vec::new(), v); config.num_runs]
    } else {
        (1..=config.num_runs)
            .into_par_iter()
            .map(|r| {
                let swarm = config.swarm.unit_box_config(dim, config.seed_base + r as u64);
                run_pso(&|z: &[T]| objective.value(z), &swarm).map(|o| (o.best_position, o.best_fitness))
            })
            .collect::<Result<_>>()?
    };

    let mut best = 0;
    for (i, run) in runs.iter().enumerate() {
        if run.1 < runs[best].1 {
            best = i;
        }
    }
    if !runs[best].1.is_finite() {
        return Err(ShapesError::IllPosed(format!("every knot placement with M = {num_knots} failed")));
    }
    let (knots, fit) = objective.fit(&runs[best].0)?;
    Ok(ModelResult {
        num_knots,
        best_run: best + 1,
        position: runs[best].0.clone(),
        knots,
        coefficients: fit.coefficients.alpha,
        fitness: fit.fitness,
        aic: aic(num_knots, fit.fitness),
        estimate: fit.estimate,
        run_fitness: runs.into_iter().map(|r| r.1).collect(),
    })
}

/// Lowest AIC; among equal values the model with fewer knots wins.
pub fn select_model<T: Scalar>(models: &[ModelResult<T>]) -> Option<&ModelResult<T>> {
    models.iter().fold(None, |best: Option<&ModelResult<T>>, m| match best {
        Some(b) if m.aic > b.aic || (m.aic == b.aic && m.num_knots >= b.num_knots) => Some(b),
        _ => Some(m),
    })
}

/// Fits every model in the model set, selects the lowest AIC (smaller `M` on
/// ties) and optionally bias corrects the winner.
pub fn shapes_fit<T: Scalar>(y: &[T], grid: &[T], config: &ShapesConfig<T>) -> Result<ShapesEstimate<T>> {
    config.validate()?;
    check_data(y, grid)?;
    let outcomes: Vec<(usize, Result<ModelResult<T>>)> = config
        .model_set
        .par_iter()
        .map(|&m| (m, fit_model(y, grid, m, config)))
        .collect();

    let mut models = Vec::new();
    let mut failed_models = Vec::new();
    for (m, outcome) in outcomes {
        match outcome {
            Ok(result) => models.push(result),
            Err(e) => failed_models.push((m, e.to_string())),
        }
    }
    let winner = select_model(&models).ok_or(ShapesError::AllModelsFailed)?;

    let raw_estimate = winner.estimate.clone();
    let (estimate, scale, bias_degenerate) = if config.bias_correction {
        let bc = bias_correct(&raw_estimate, y);
        (bc.estimate, Some(bc.scale), bc.degenerate)
    } else {
        (raw_estimate.clone(), None, false)
    };
    Ok(ShapesEstimate {
        m_best: winner.num_knots,
        fitness: winner.fitness,
        estimate,
        raw_estimate,
        scale,
        bias_degenerate,
        models,
        failed_models,
    })
}
