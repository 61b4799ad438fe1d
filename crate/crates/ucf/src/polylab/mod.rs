//! Exact-arithmetic laboratory for single-unit window polytopes: vertex
//! enumeration, dimension, facet and redundancy verdicts, integrality checks
//! and witness points.

pub mod facet;
pub mod linalg;
pub mod polytope;
pub mod vertices;
pub mod witness;

use crate::bounds::BoundError;
use thiserror::Error;

pub use facet::{
    integer_hull, polytope_dim, report_json_lines, verify_facet, verify_integral_hull, FacetLab, FacetReport,
    Verdict,
};
pub use polytope::{build_polytope, Coord, Polytope, PolytopeKind, Row, RowFamily, RowTag};
pub use vertices::{enumerate_vertices, VertexSet};
pub use witness::{candidate_params, feasible_witnesses, witness_point, witness_points, WitnessParams};

#[derive(Debug, Error)]
pub enum PolylabError {
    #[error("guard exceeded: {0}")]
    Guard(String),
    #[error(transparent)]
    Bound(#[from] BoundError),
    #[error("empty point set")]
    Empty,
    #[error("witness family A{family}: {reason}")]
    WitnessParams { family: u8, reason: String },
    #[error("witness family A{family} produced a point outside the polytope")]
    WitnessInfeasible { family: u8 },
}
