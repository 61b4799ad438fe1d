use super::{Family, Formulation, Sense, VarKey};
use crate::windows::LinExpr;

/// Replaces each diagonal quadratic term `g·x²` by an epigraph variable `z`
/// with `pieces + 1` tangent cuts over `[lo, hi]`. Existing variable ids are
/// kept, so solutions of the result evaluate directly in the original model.
pub fn piecewise_linearize(f: &Formulation, pieces: usize) -> Formulation {
    let mut out = f.clone();
    let quad = std::mem::take(&mut out.quad);
    let pieces = pieces.max(1);
    for q in quad {
        let (unit, t) = match out.variables[q.i].key {
            VarKey::P { unit, t } => (unit, t),
            other => panic!("quadratic term on {}", other.name()),
        };
        let z = out.add_var(VarKey::Z { unit, t }, 0.0, f64::INFINITY, false);
        out.objective.add_term(z, 1.0);
        for l in 0..=pieces {
            let pl = q.lo + l as f64 * (q.hi - q.lo) / pieces as f64;
            let expr = LinExpr::var(z).with_term(q.i, -2.0 * q.coef * pl);
            out.add_row(Family::PieceCut, format!("cut_{unit}_{t}_{l}"), expr, Sense::Ge, -q.coef * pl * pl);
        }
    }
    out
}
