//! Local-best particle swarm optimization on a box.
//!
//! Each particle is attracted to its personal best and to the best personal
//! best among itself and its two ring neighbors. Velocities are clamped
//! componentwise and the inertia weight decays linearly over the run.
//! Particles that leave the box are not evaluated ("let them fly"): they get
//! an infinite fitness and are pulled back by the attractors, which always
//! lie inside the box.

use std::cmp::Ordering;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ShapesError};
use crate::rng::{stream, Stream, StreamRng};
use crate::scalar::Scalar;

/// Fitness with an explicit infinity that sorts above every finite value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FitnessValue<T> {
    Finite(T),
    Infinite,
}

impl<T: Scalar> FitnessValue<T> {
    /// Wraps a raw objective value; NaN and ±inf become [`FitnessValue::Infinite`].
    pub fn new(v: T) -> Self {
        if v.is_finite() {
            Self::Finite(v)
        } else {
            Self::Infinite
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Self::Finite(_))
    }

    pub fn value(&self) -> Option<T> {
        match *self {
            Self::Finite(v) => Some(v),
            Self::Infinite => None,
        }
    }

    /// Raw value with `+inf` for the sentinel.
    pub fn to_scalar(&self) -> T {
        self.value().unwrap_or_else(T::infinity)
    }
}

impl<T: Scalar> Eq for FitnessValue<T> {}

impl<T: Scalar> PartialOrd for FitnessValue<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Scalar> Ord for FitnessValue<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Self::Finite(a), Self::Finite(b)) => a.partial_cmp(b).expect("finite values are ordered"),
            (Self::Finite(_), Self::Infinite) => Ordering::Less,
            (Self::Infinite, Self::Finite(_)) => Ordering::Greater,
            (Self::Infinite, Self::Infinite) => Ordering::Equal,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwarmConfig<T> {
    pub num_particles: usize,
    pub c1: T,
    pub c2: T,
    pub w_max: T,
    pub w_min: T,
    /// Maximum step per dimension as a fraction of the box width.
    pub v_max_fraction: T,
    pub num_iterations: usize,
    /// `[a_j, b_j]` per dimension.
    pub bounds: Vec<(T, T)>,
    pub seed: u64,
}

impl<T: Scalar> SwarmConfig<T> {
    /// Standard settings: 40 particles, `c1 = c2 = 2`, inertia 0.9 → 0.4,
    /// `v_max` half the box width.
    pub fn new(bounds: Vec<(T, T)>, num_iterations: usize, seed: u64) -> Self {
        Self {
            num_particles: 40,
            c1: T::lit(2.0),
            c2: T::lit(2.0),
            w_max: T::lit(0.9),
            w_min: T::lit(0.4),
            v_max_fraction: T::lit(0.5),
            num_iterations,
            bounds,
            seed,
        }
    }

    /// Unit hypercube `[0, 1]^dim`.
    pub fn unit_box(dim: usize, num_iterations: usize, seed: u64) -> Self {
        Self::new(vec![(T::zero(), T::one()); dim], num_iterations, seed)
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(ShapesError::InvalidConfig(m.to_string()));
        if self.num_particles < 2 {
            return bad("swarm needs at least 2 particles");
        }
        if self.num_iterations == 0 {
            return bad("swarm needs at least 1 iteration");
        }
        if !(self.w_max >= self.w_min) {
            return bad("w_max must be >= w_min");
        }
        if self.bounds.is_empty() {
            return bad("search box has no dimensions");
        }
        if self.bounds.iter().any(|&(a, b)| !(b > a) || !a.is_finite() || !b.is_finite()) {
            return bad("every bound needs a < b");
        }
        if !(self.v_max_fraction > T::zero()) {
            return bad("v_max_fraction must be positive");
        }
        Ok(())
    }

    /// Inertia weight at 1-based iteration `k`, linear from `w_max` at the
    /// first iteration to `w_min` at the last.
    pub fn inertia(&self, k: usize) -> T {
        if self.num_iterations <= 1 {
            return self.w_max;
        }
        let frac = T::from_usize_lossy(k - 1) / T::from_usize_lossy(self.num_iterations - 1);
        self.w_max - (self.w_max - self.w_min) * frac
    }

    pub fn v_max(&self) -> Vec<T> {
        self.bounds.iter().map(|&(a, b)| self.v_max_fraction * (b - a)).collect()
    }

    fn in_box(&self, x: &[T]) -> bool {
        x.iter().zip(&self.bounds).all(|(&v, &(a, b))| v >= a && v <= b)
    }
}

/// Swarm settings independent of the search box and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwarmParams<T> {
    pub num_particles: usize,
    pub c1: T,
    pub c2: T,
    pub w_max: T,
    pub w_min: T,
    pub v_max_fraction: T,
    pub num_iterations: usize,
}

impl<T: Scalar> SwarmParams<T> {
    pub fn with_iterations(num_iterations: usize) -> Self {
        let d = SwarmConfig::<T>::new(Vec::new(), num_iterations, 0);
        Self {
            num_particles: d.num_particles,
            c1: d.c1,
            c2: d.c2,
            w_max: d.w_max,
            w_min: d.w_min,
            v_max_fraction: d.v_max_fraction,
            num_iterations,
        }
    }

    /// Full configuration on the unit hypercube of dimension `dim`.
    pub fn unit_box_config(&self, dim: usize, seed: u64) -> SwarmConfig<T> {
        SwarmConfig {
            num_particles: self.num_particles,
            c1: self.c1,
            c2: self.c2,
            w_max: self.w_max,
            w_min: self.w_min,
            v_max_fraction: self.v_max_fraction,
            num_iterations: self.num_iterations,
            bounds: vec![(T::zero(), T::one()); dim],
            seed,
        }
    }
}

/// The two ring neighbors of 1-based particle `i` in a swarm of `np`.
pub fn ring_neighbors(i: usize, np: usize) -> Result<(usize, usize)> {
    if i == 0 || i > np {
        return Err(ShapesError::IndexOutOfRange { index: i, len: np });
    }
    let left = if i == 1 { np } else { i - 1 };
    let right = if i == np { 1 } else { i + 1 };
    Ok((left, right))
}

/// Componentwise velocity clamping to `[-v_max, v_max]`.
pub fn clamp_velocity<T: Scalar>(v: &mut [T], v_max: &[T]) {
    for (vj, &m) in v.iter_mut().zip(v_max) {
        *vj = vj.max(-m).min(m);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Particle<T> {
    pub position: Vec<T>,
    pub velocity: Vec<T>,
    pub best_position: Vec<T>,
    pub best_fitness: FitnessValue<T>,
    /// Fitness of `position` at the last evaluation.
    pub fitness: FitnessValue<T>,
    pub local_best: Vec<T>,
    pub local_best_fitness: FitnessValue<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwarmState<T> {
    pub particles: Vec<Particle<T>>,
    pub global_best: Vec<T>,
    pub global_best_fitness: FitnessValue<T>,
    /// Number of completed iterations.
    pub iteration: usize,
}

impl<T: Scalar> SwarmState<T> {
    /// Draws positions uniformly in the box and velocities uniformly in
    /// `[a - x, b - x]`.
    pub fn initialize(config: &SwarmConfig<T>, rng: &mut StreamRng) -> Self {
        let particles = (0..config.num_particles)
            .map(|_| {
                let position: Vec<T> = config
                    .bounds
                    .iter()
                    .map(|&(a, b)| a + (b - a) * uniform(rng))
                    .collect();
                let velocity = position
                    .iter()
                    .zip(&config.bounds)
                    .map(|(&x, &(a, b))| (a - x) + (b - a) * uniform(rng))
                    .collect();
                Particle {
                    best_position: position.clone(),
                    local_best: position.clone(),
                    position,
                    velocity,
                    best_fitness: FitnessValue::Infinite,
                    fitness: FitnessValue::Infinite,
                    local_best_fitness: FitnessValue::Infinite,
                }
            })
            .collect::<Vec<_>>();
        let global_best = particles[0].position.clone();
        Self { particles, global_best, global_best_fitness: FitnessValue::Infinite, iteration: 0 }
    }
}

fn uniform<T: Scalar>(rng: &mut StreamRng) -> T {
    T::lit(rng.random::<f64>())
}

/// One iteration `k` (1-based): evaluate every particle, update personal,
/// local and global bests, then (unless `k` is the last iteration) move the
/// particles with clamped velocities.
pub fn step_swarm<T, F>(
    state: &mut SwarmState<T>,
    config: &SwarmConfig<T>,
    k: usize,
    objective: &F,
    rng: &mut StreamRng,
) where
    T: Scalar,
    F: Fn(&[T]) -> T + ?Sized,
{
    for p in &mut state.particles {
        p.fitness = if config.in_box(&p.position) {
            FitnessValue::new(objective(&p.position))
        } else {
            FitnessValue::Infinite
        };
        if p.fitness < p.best_fitness {
            p.best_fitness = p.fitness;
            p.best_position.clone_from(&p.position);
        }
    }

    let np = state.particles.len();
    for i in 0..np {
        let (left, right) = ring_neighbors(i + 1, np).expect("index in range");
        let mut best = i;
        for j in [left - 1, right - 1] {
            if state.particles[j].best_fitness < state.particles[best].best_fitness {
                best = j;
            }
        }
        let (pos, fit) = {
            let b = &state.particles[best];
            (b.best_position.clone(), b.best_fitness)
        };
        let p = &mut state.particles[i];
        p.local_best = pos;
        p.local_best_fitness = fit;
    }
    for p in &state.particles {
        if p.best_fitness < state.global_best_fitness {
            state.global_best_fitness = p.best_fitness;
            state.global_best.clone_from(&p.best_position);
        }
    }
    state.iteration = k;

    if k >= config.num_iterations {
        return;
    }
    let w = config.inertia(k);
    let v_max = config.v_max();
    for p in &mut state.particles {
        let d = p.position.len();
        let r1: Vec<T> = (0..d).map(|_| uniform(rng)).collect();
        let r2: Vec<T> = (0..d).map(|_| uniform(rng)).collect();
        for j in 0..d {
            let x = p.position[j];
            p.velocity[j] = w * p.velocity[j]
                + config.c1 * (p.best_position[j] - x) * r1[j]
                + config.c2 * (p.local_best[j] - x) * r2[j];
        }
        clamp_velocity(&mut p.velocity, &v_max);
        for j in 0..d {
            p.position[j] = p.position[j] + p.velocity[j];
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsoOutcome<T> {
    pub best_position: Vec<T>,
    pub best_fitness: FitnessValue<T>,
    /// Global best fitness after each iteration.
    pub history: Vec<FitnessValue<T>>,
}

/// Runs the swarm for `config.num_iterations` iterations on its own seeded
/// stream and returns the global best.
pub fn run_pso<T, F>(objective: &F, config: &SwarmConfig<T>) -> Result<PsoOutcome<T>>
where
    T: Scalar,
    F: Fn(&[T]) -> T + ?Sized,
{
    run_pso_observed(objective, config, |_| {})
}

/// [`run_pso`] with a callback invoked on the state after every iteration.
pub fn run_pso_observed<T, F, O>(objective: &F, config: &SwarmConfig<T>, mut observe: O) -> Result<PsoOutcome<T>>
where
    T: Scalar,
    F: Fn(&[T]) -> T + ?Sized,
    O: FnMut(&SwarmState<T>),
{
    config.validate()?;
    let mut rng = stream(Stream::Swarm, config.seed);
    let mut state = SwarmState::initialize(config, &mut rng);
    let mut history = Vec::with_capacity(config.num_iterations);
    for k in 1..=config.num_iterations {
        step_swarm(&mut state, config, k, objective, &mut rng);
        history.push(state.global_best_fitness);
        observe(&state);
    }
    Ok(PsoOutcome {
        best_position: state.global_best,
        best_fitness: state.global_best_fitness,
        history,
    })
}
