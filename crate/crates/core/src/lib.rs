//! Adaptive spline fitting with free knot placement.
//!
//! Knot locations of a regression spline are optimized by a local-best particle
//! swarm, the coefficients by ridge-penalized least squares, and the number of
//! knots by an information criterion. The [`simharness`] module runs Monte Carlo
//! campaigns over a fixed set of benchmark signals.
//!
//! All numerical code is generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! aliases below name the double precision instantiations used by the harness
//! and the command line tool.

pub mod benchmarks;
pub mod bspline;
pub mod error;
pub mod knotmap;
pub mod label;
pub mod model_search;
pub mod penalized;
pub mod pso;
pub mod rng;
pub mod scalar;
pub mod simharness;

pub use benchmarks::{evaluate_benchmark, generate_realization, BenchmarkId, DataRealization};
pub use bspline::{build_basis_matrix, evaluate_basis, BasisMatrix, KnotVector};
pub use error::{Result, ShapesError};
pub use label::Label;
pub use knotmap::{EndKnots, KnotAdjust, KnotMapOptions, MapKind};
pub use model_search::{shapes_fit, ModelResult, ShapesConfig, ShapesEstimate};
pub use penalized::{fitness, solve_coefficients, FitCoefficients, PenalizedFitResult};
pub use pso::{run_pso, FitnessValue, SwarmConfig, SwarmParams, SwarmState};
pub use scalar::Scalar;
pub use simharness::{run_campaign, CampaignSpec, CampaignSummary, RealizationRecord};

pub type KnotVector64 = KnotVector<f64>;
pub type BasisMatrix64 = BasisMatrix<f64>;
pub type SwarmConfig64 = SwarmConfig<f64>;
pub type PenalizedFitResult64 = PenalizedFitResult<f64>;
pub type ShapesConfig64 = ShapesConfig<f64>;
pub type ShapesEstimate64 = ShapesEstimate<f64>;
pub type CampaignSpec64 = CampaignSpec<f64>;
pub type CampaignSummary64 = CampaignSummary<f64>;
