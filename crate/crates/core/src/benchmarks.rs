//! The ten benchmark signals, SNR normalization and noisy data realizations.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::bspline::KnotVector;
use crate::error::{Result, ShapesError};
use crate::rng::{stream, Stream};
use crate::scalar::{l2_norm, Scalar};

/// Number of samples in a simulated data realization.
pub const NUM_SAMPLES: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum BenchmarkId {
    F1,
    F2,
    F3,
    F4,
    F5,
    F6,
    F7,
    F8,
    F9,
    F10,
}

impl BenchmarkId {
    pub const ALL: [BenchmarkId; 10] = [
        Self::F1,
        Self::F2,
        Self::F3,
        Self::F4,
        Self::F5,
        Self::F6,
        Self::F7,
        Self::F8,
        Self::F9,
        Self::F10,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::F1 => "f1",
            Self::F2 => "f2",
            Self::F3 => "f3",
            Self::F4 => "f4",
            Self::F5 => "f5",
            Self::F6 => "f6",
            Self::F7 => "f7",
            Self::F8 => "f8",
            Self::F9 => "f9",
            Self::F10 => "f10",
        }
    }

    /// Interval the formula is written on; `[0, 1]` predictors are mapped onto it affinely.
    pub fn natural_domain(self) -> (f64, f64) {
        match self {
            Self::F4 | Self::F5 => (-2.0, 2.0),
            _ => (0.0, 1.0),
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Self::F1 => "90 / (1 + exp(-100 (x - 0.4)))",
            Self::F2 => "1/(0.01 + (x-0.3)^2) for x < 0.6, 1/(0.015 + (x-0.65)^2) otherwise",
            Self::F3 => "100 exp(-|10x - 5|) + (10x - 5)^5 / 500",
            Self::F4 => "sin(x) + 2 exp(-30 x^2) on [-2, 2]",
            Self::F5 => "sin(2x) + 2 exp(-16 x^2) + 2 on [-2, 2]",
            Self::F6 => "piecewise cubic with a jump at 0.5",
            Self::F7 => "single cubic B-spline on knots 0.3, 0.4, 0.45, 0.5, 0.55",
            Self::F8 => "f7(x) + f7(x - 0.125)",
            Self::F9 => "f7(x - 0.25) + f7(x - 0.125)",
            Self::F10 => "exp(-(x-0.5)^2 / 0.125) sin(10.24 pi (x - 0.5))",
        }
    }
}

impl fmt::Display for BenchmarkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BenchmarkId {
    type Err = ShapesError;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        Self::ALL
            .into_iter()
            .find(|id| id.name() == lower)
            .ok_or_else(|| ShapesError::UnknownBenchmark(s.to_string()))
    }
}

impl TryFrom<String> for BenchmarkId {
    type Error = ShapesError;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<BenchmarkId> for String {
    fn from(id: BenchmarkId) -> Self {
        id.name().to_string()
    }
}

/// Knot vector whose basis function `B_3` is the transient bump used by f7–f9.
fn bump_knots<T: Scalar>() -> KnotVector<T> {
    let v = [0.3, 0.3, 0.3, 0.3, 0.4, 0.45, 0.5, 0.55, 0.55, 0.55, 0.55];
    KnotVector::new(v.iter().map(|&x| T::lit(x)).collect(), 4).expect("valid bump knots")
}

fn bump<T: Scalar>(knots: &KnotVector<T>, x: T) -> T {
    knots.basis_function(3, x)
}

/// Evaluates a benchmark at predictor values in `[0, 1]`.
pub fn evaluate_benchmark<T: Scalar>(id: BenchmarkId, grid: &[T]) -> Vec<T> {
    let c = T::lit;
    let knots = bump_knots::<T>();
    let (lo, hi) = id.natural_domain();
    grid.iter()
        .map(|&u| {
            let x = c(lo) + c(hi - lo) * u;
            match id {
                BenchmarkId::F1 => c(90.0) / (T::one() + (c(-100.0) * (x - c(0.4))).exp()),
                BenchmarkId::F2 => {
                    if x < c(0.6) {
                        T::one() / (c(0.01) + (x - c(0.3)).powi(2))
                    } else {
                        T::one() / (c(0.015) + (x - c(0.65)).powi(2))
                    }
                }
                BenchmarkId::F3 => {
                    let s = c(10.0) * x - c(5.0);
                    c(100.0) * (-s.abs()).exp() + s.powi(5) / c(500.0)
                }
                BenchmarkId::F4 => x.sin() + c(2.0) * (c(-30.0) * x * x).exp(),
                BenchmarkId::F5 => (c(2.0) * x).sin() + c(2.0) * (c(-16.0) * x * x).exp() + c(2.0),
                BenchmarkId::F6 => {
                    if x < c(0.5) {
                        c(4.0) * x * x * (c(3.0) - c(4.0) * x)
                    } else if x < c(0.75) {
                        c(4.0) / c(3.0) * x * (c(4.0) * x * x - c(10.0) * x + c(7.0)) - c(1.5)
                    } else {
                        c(16.0) / c(3.0) * x * (x - T::one()).powi(2)
                    }
                }
                BenchmarkId::F7 => bump(&knots, x),
                BenchmarkId::F8 => bump(&knots, x) + bump(&knots, x - c(0.125)),
                BenchmarkId::F9 => bump(&knots, x - c(0.25)) + bump(&knots, x - c(0.125)),
                BenchmarkId::F10 => {
                    let d = x - c(0.5);
                    (-(d * d) / c(0.125)).exp() * (c(10.24) * T::lit(std::f64::consts::PI) * d).sin()
                }
            }
        })
        .collect()
}

/// Rescales `samples` so that their Euclidean norm equals `snr` (unit noise variance).
pub fn normalize_snr<T: Scalar>(samples: &[T], snr: T) -> Result<Vec<T>> {
    if !(snr > T::zero()) {
        return Err(ShapesError::InvalidConfig(format!("SNR must be positive, got {snr}")));
    }
    let norm = l2_norm(samples);
    if !(norm > T::zero()) || !norm.is_finite() {
        return Err(ShapesError::ZeroNorm("signal".into()));
    }
    let scale = snr / norm;
    Ok(samples.iter().map(|&v| v * scale).collect())
}

/// `n` equally spaced points from 0 to 1 inclusive.
pub fn uniform_grid<T: Scalar>(n: usize) -> Vec<T> {
    match n {
        0 => Vec::new(),
        1 => vec![T::zero()],
        _ => {
            let step = T::from_usize_lossy(n - 1);
            (0..n).map(|i| T::from_usize_lossy(i) / step).collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataRealization<T> {
    pub grid: Vec<T>,
    /// Benchmark scaled to the requested SNR.
    pub truth: Vec<T>,
    pub y: Vec<T>,
    pub seed: u64,
}

/// SNR-scaled benchmark on the standard 256-point grid.
pub fn benchmark_truth<T: Scalar>(id: BenchmarkId, snr: T) -> Result<(Vec<T>, Vec<T>)> {
    let grid = uniform_grid::<T>(NUM_SAMPLES);
    let truth = normalize_snr(&evaluate_benchmark(id, &grid), snr)?;
    Ok((grid, truth))
}

/// One noisy realization: the SNR-scaled benchmark plus iid standard normal
/// noise drawn (ChaCha8 stream, ziggurat normal transform) from the noise
/// stream keyed by `seed`.
pub fn generate_realization<T: Scalar>(id: BenchmarkId, snr: T, seed: u64) -> Result<DataRealization<T>> {
    let (grid, truth) = benchmark_truth(id, snr)?;
    let mut rng = stream(Stream::Noise, seed);
    let y = truth
        .iter()
        .map(|&f| f + T::lit(rng.sample::<f64, _>(StandardNormal)))
        .collect();
    Ok(DataRealization { grid, truth, y, seed })
}
