//! Embedded LP/MIP solving, MPS output and the external-solver bridge.

mod external;
mod lp;
mod metrics;
mod mip;
mod mps;

pub use external::{command_template, parse_solution, run_external, solve_external, ExternalMode, SOLVER_CMD_ENV};
pub use lp::{solve_lp, LpSolution, LpStatus};
pub use metrics::{metrics, Metrics};
pub use mip::{relative_gap, solve_mip, MipSolution, MipStatus};
pub use mps::{mps_string, row_names, write_mps, MpsCounts};

use std::time::Duration;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("objective is quadratic; linearize it first")]
    Quadratic,
    #[error("simplex iteration limit reached after {0} iterations")]
    IterationLimit(usize),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error("no external solver command configured")]
    NoExternalCommand,
    #[error("failed to run external solver: {0}")]
    Spawn(String),
    #[error("external solver exited with status {code:?}: {stderr}")]
    ExternalExit { code: Option<i32>, stderr: String },
    #[error("solution parse error: {0}")]
    Parse(String),
    #[error("MIP objective is zero or not finite")]
    ZeroMip,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub feasibility_tol: f64,
    pub optimality_tol: f64,
    pub integer_tol: f64,
    pub node_limit: usize,
    pub time_limit: Option<Duration>,
    pub mip_gap: f64,
    pub iteration_limit: Option<usize>,
    pub external_cmd: Option<String>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            feasibility_tol: 1e-9,
            optimality_tol: 1e-9,
            integer_tol: 1e-6,
            node_limit: 200_000,
            time_limit: None,
            mip_gap: 1e-3,
            iteration_limit: None,
            external_cmd: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        let tols = [self.feasibility_tol, self.optimality_tol, self.integer_tol];
        if tols.iter().any(|&t| !(t > 0.0)) {
            return Err(SolverError::Config("tolerances must be positive".into()));
        }
        if !(self.mip_gap >= 0.0) {
            return Err(SolverError::Config("gap target must be nonnegative".into()));
        }
        Ok(())
    }
}
