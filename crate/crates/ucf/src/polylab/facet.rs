//! Dimension, integrality and facet verdicts over the hull of the
//! mixed-binary points of a window polytope.

use super::linalg::affine_rank;
use super::polytope::{Polytope, Row, RowTag};
use super::vertices::{box_vertices, enumerate_vertices, DenseRow, VertexSet};
use super::PolylabError;
use crate::builder::Sense;
use crate::scalar::Rat;
use num_traits::{One, Zero};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Facet,
    ValidNonFacet,
    Redundant,
    Invalid,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FacetReport {
    pub valid: bool,
    pub tight_count: usize,
    /// Affine rank of the tight points, `-1` when none is tight.
    pub affine_rank_tight: i64,
    pub polytope_dim: usize,
    pub full_dimensional: bool,
    pub verdict: Verdict,
}

/// Affine dimension of a nonempty point set.
pub fn polytope_dim(vs: &VertexSet) -> Result<usize, PolylabError> {
    if vs.is_empty() {
        return Err(PolylabError::Empty);
    }
    Ok(affine_rank(&vs.points))
}

/// Whether every relaxation vertex is 0/1 in the first `binary_prefix` coordinates.
pub fn verify_integral_hull(p: &Polytope, binary_prefix: usize) -> Result<bool, PolylabError> {
    let vs = enumerate_vertices(p)?;
    Ok(vs.points.iter().all(|x| x[..binary_prefix].iter().all(|v| v.is_zero() || v.is_one())))
}

fn binary_assignments(p: &Polytope) -> Vec<Vec<bool>> {
    let nb = p.n_binary;
    let tau_only: Vec<&Row> = p.rows.iter().filter(|r| r.expr.terms().all(|(&j, _)| j < nb)).collect();
    let packing: Vec<&Row> = tau_only
        .iter()
        .copied()
        .filter(|r| r.sense == Sense::Le && r.expr.terms().all(|(_, c)| *c >= Rat::zero()))
        .collect();
    let mut out = Vec::new();
    let mut cur = vec![false; nb];
    fn rec(j: usize, cur: &mut Vec<bool>, packing: &[&Row], tau_only: &[&Row], out: &mut Vec<Vec<bool>>) {
        let x: Vec<Rat> = cur.iter().map(|&b| if b { Rat::one() } else { Rat::zero() }).collect();
        if packing.iter().any(|r| r.lhs(&x) > r.rhs) {
            return;
        }
        if j == cur.len() {
            if tau_only.iter().all(|r| r.satisfied(&x)) {
                out.push(cur.clone());
            }
            return;
        }
        rec(j + 1, cur, packing, tau_only, out);
        cur[j] = true;
        rec(j + 1, cur, packing, tau_only, out);
        cur[j] = false;
    }
    rec(0, &mut cur, &packing, &tau_only, &mut out);
    out
}

/// Vertices of the convex hull of points with 0/1 binary coordinates.
pub fn integer_hull(p: &Polytope) -> Result<VertexSet, PolylabError> {
    let nb = p.n_binary;
    let dp = p.dim_ambient() - nb;
    let mut points = Vec::new();
    for tau in binary_assignments(p) {
        let tv: Vec<Rat> = tau.iter().map(|&b| if b { Rat::one() } else { Rat::zero() }).collect();
        let slice: Vec<DenseRow> = p
            .rows
            .iter()
            .filter(|r| r.expr.terms().any(|(&j, _)| j >= nb))
            .map(|r| {
                let mut a = vec![Rat::zero(); dp];
                let mut b = r.rhs.clone() - r.expr.constant().clone();
                for (&j, c) in r.expr.terms() {
                    if j < nb {
                        b -= c * &tv[j];
                    } else {
                        a[j - nb] = c.clone();
                    }
                }
                DenseRow { a, sense: r.sense, b }
            })
            .collect();
        for v in box_vertices(dp, &slice)? {
            let mut x = tv.clone();
            x.extend(v);
            points.push(x);
        }
    }
    Ok(VertexSet::new(points))
}

/// Hull of one polytope with facet verdicts for candidate rows.
pub struct FacetLab<'a> {
    pub polytope: &'a Polytope,
    pub hull: VertexSet,
    pub dim: usize,
}

impl<'a> FacetLab<'a> {
    pub fn new(p: &'a Polytope) -> Result<Self, PolylabError> {
        let hull = integer_hull(p)?;
        let dim = polytope_dim(&hull)?;
        Ok(FacetLab { polytope: p, hull, dim })
    }

    fn base_report(&self, ineq: &Row) -> FacetReport {
        let valid = self.hull.points.iter().all(|x| ineq.satisfied(x));
        let tight: Vec<Vec<Rat>> = self.hull.points.iter().filter(|x| ineq.tight(x)).cloned().collect();
        let rank = if tight.is_empty() { -1 } else { affine_rank(&tight) as i64 };
        let full = self.dim == self.polytope.dim_ambient();
        let verdict = if !valid {
            Verdict::Invalid
        } else if self.dim >= 1 && rank == self.dim as i64 - 1 {
            Verdict::Facet
        } else {
            Verdict::ValidNonFacet
        };
        FacetReport {
            valid,
            tight_count: tight.len(),
            affine_rank_tight: rank,
            polytope_dim: self.dim,
            full_dimensional: full,
            verdict,
        }
    }

    /// Verdict for row `idx` of the polytope, with the redundancy test.
    pub fn report_row(&self, idx: usize) -> Result<FacetReport, PolylabError> {
        let mut rep = self.base_report(&self.polytope.rows[idx]);
        if rep.verdict == Verdict::ValidNonFacet && integer_hull(&self.polytope.without_row(idx))? == self.hull {
            rep.verdict = Verdict::Redundant;
        }
        Ok(rep)
    }

    /// Verdict for an arbitrary inequality.
    pub fn report(&self, ineq: &Row) -> Result<FacetReport, PolylabError> {
        match self.polytope.rows.iter().position(|r| r == ineq) {
            Some(idx) => self.report_row(idx),
            None => Ok(self.base_report(ineq)),
        }
    }
}

pub fn verify_facet(p: &Polytope, ineq: &Row) -> Result<FacetReport, PolylabError> {
    FacetLab::new(p)?.report(ineq)
}

#[derive(Serialize)]
struct ReportLine<'a> {
    row: usize,
    tag: RowTag,
    #[serde(flatten)]
    report: &'a FacetReport,
}

/// One JSON object per line: row index, tag and report.
pub fn report_json_lines(p: &Polytope, reports: &[(usize, FacetReport)]) -> String {
    let mut out = String::new();
    for (row, report) in reports {
        let line = ReportLine { row: *row, tag: p.rows[*row].tag, report };
        out.push_str(&serde_json::to_string(&line).expect("serializable report"));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::RampParams;
    use crate::polylab::polytope::{build_polytope, PolytopeKind, RowFamily};
    use crate::scalar::rat;
    use crate::windows::{interval_set, HistoryMode};

    fn unit(up: Rat, down: Rat) -> RampParams<Rat> {
        RampParams {
            start: rat(1, 4),
            shut: rat(1, 4),
            up,
            down,
            p0: Rat::zero(),
            u0: false,
            t_on: 1,
            t_off: 1,
            u_run: 0,
            k_run: 0,
        }
    }

    fn b2() -> Polytope {
        let a = interval_set(0, 2, 1, 1, HistoryMode::None);
        build_polytope(PolytopeKind::B, &a, &unit(rat(1, 2), rat(1, 2))).unwrap()
    }

    #[test]
    fn b_vertices_are_unit_vectors() {
        let p = b2();
        let vs = enumerate_vertices(&p).unwrap();
        let z = Rat::zero;
        let o = Rat::one;
        let want = VertexSet::new(vec![
            vec![z(), z(), z()],
            vec![o(), z(), z()],
            vec![z(), o(), z()],
            vec![z(), z(), o()],
        ]);
        assert_eq!(vs, want);
        assert_eq!(polytope_dim(&vs).unwrap(), 3);
        assert!(verify_integral_hull(&p, 3).unwrap());
    }

    #[test]
    fn simplex_row_is_facet_and_pair_row_redundant() {
        let p = b2();
        let lab = FacetLab::new(&p).unwrap();
        let simplex = p.rows.iter().position(|r| r.expr.len() == 3).unwrap();
        let pair = p.rows.iter().position(|r| r.expr.len() == 2).unwrap();
        let s = lab.report_row(simplex).unwrap();
        assert_eq!(s.verdict, Verdict::Facet);
        assert_eq!(s.affine_rank_tight, 2);
        assert_eq!(lab.report_row(pair).unwrap().verdict, Verdict::Redundant);
    }

    #[test]
    fn dim_examples() {
        assert_eq!(polytope_dim(&VertexSet::new(vec![vec![rat(1, 3)]])).unwrap(), 0);
        let line = VertexSet::new(vec![vec![rat(0, 1)], vec![rat(1, 2)], vec![rat(1, 1)]]);
        assert_eq!(polytope_dim(&line).unwrap(), 1);
        assert!(matches!(polytope_dim(&VertexSet::new(vec![])), Err(PolylabError::Empty)));
    }

    #[test]
    fn slow_ramp_rows_are_not_facets() {
        let u = unit(rat(1, 2), rat(1, 2));
        let a = interval_set(0, 3, 1, 1, HistoryMode::None);
        let p = build_polytope(PolytopeKind::Q, &a, &u).unwrap();
        let lab = FacetLab::new(&p).unwrap();
        for (i, r) in p.rows_of(RowFamily::RampUp) {
            let rep = lab.report_row(i).unwrap();
            assert!(rep.valid);
            assert_eq!(rep.verdict == Verdict::Facet, r.tag.a < 2, "a={}", r.tag.a);
        }
    }

    #[test]
    fn only_packing_row_removal_breaks_integrality() {
        let u = unit(rat(1, 2), rat(1, 2));
        let a = interval_set(0, 3, 1, 1, HistoryMode::None);
        let p = build_polytope(PolytopeKind::P, &a, &u).unwrap();
        assert!(verify_integral_hull(&p, p.n_binary).unwrap());
        let broken: Vec<usize> =
            (0..p.rows.len()).filter(|&i| !verify_integral_hull(&p.without_row(i), p.n_binary).unwrap()).collect();
        assert_eq!(broken.len(), 1);
        assert_eq!(p.rows[broken[0]].tag.family, RowFamily::Packing);
    }

    #[test]
    fn json_lines_one_per_report() {
        let p = b2();
        let lab = FacetLab::new(&p).unwrap();
        let reps: Vec<_> = (0..p.rows.len()).map(|i| (i, lab.report_row(i).unwrap())).collect();
        let text = report_json_lines(&p, &reps);
        assert_eq!(text.lines().count(), 2);
        assert!(text.contains("\"verdict\":\"facet\""));
    }
}
