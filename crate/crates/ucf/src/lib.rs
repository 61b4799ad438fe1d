//! Unit-commitment formulation engine and polyhedral verification toolkit.
//!
//! The crate builds two-period, three-period and multi-period sliding-window
//! MIP formulations of the unit-commitment problem, solves them at desk scale
//! with an embedded simplex and branch-and-bound, and checks the polyhedral
//! properties of the single-unit window polytopes in exact arithmetic.

pub mod bounds;
pub mod builder;
pub mod cli;
pub mod instance;
pub mod polylab;
pub mod scalar;
pub mod solver;
pub mod windows;

pub use builder::{build_formulation, BuildOptions, Formulation, ModelKind, WindowChoice};
pub use instance::{load_instance, normalize_unit, status_bounds, NormalizedUnit, StatusBounds, UcInstance, UnitParams};
pub use solver::{solve_lp, solve_mip, LpSolution, MipSolution, SolverConfig};
