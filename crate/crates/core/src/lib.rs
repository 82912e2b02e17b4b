//! Densest k-subgraph through the diagonally loaded relaxation
//! `max xᵀ(A + λI)x` over `{0 <= x <= 1, Σx = k}`.
//!
//! Solvers are generic over [`Scalar`] (`f32` or `f64`); the aliases below fix
//! `f64`, which the baselines, oracles and reports use throughout.

// `!(x > 0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod error;
pub mod fw;
pub mod graph;
pub mod linalg;
pub mod metrics;
pub mod oracle;
pub mod param;
pub mod rounding;
pub mod scalar;
pub mod select;
pub mod theory;

pub use baselines::{density_upper_bound, greedy_feige, rank1_lrbo};
pub use error::{DksError, Result};
pub use fw::{fw_multi_start, fw_solve, objective, FractionalPoint, FrankWolfe, FwConfig, SolveReport, StepRule};
pub use graph::{load_edge_list, parse_edge_list, Graph, ProblemInstance};
pub use metrics::{run_sweep, run_solver, ExperimentRecord, ReportFormat, SolverKind, SolverSettings, SweepSpec};
pub use param::{param_solve, OptimizerConfig};
pub use rounding::{project_top_k, round_to_integral, Rounder, VertexSelection};
pub use scalar::Scalar;

pub type Instance<'g> = ProblemInstance<'g, f64>;
pub type Point = FractionalPoint<f64>;
pub type Report = SolveReport<f64>;
pub type Selection = VertexSelection<f64>;
pub type Config = FwConfig<f64>;
