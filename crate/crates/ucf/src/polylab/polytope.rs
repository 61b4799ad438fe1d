//! Single-unit window polytopes in exact arithmetic.

use super::PolylabError;
use crate::bounds::{lb_power_history, ub_power, ub_ramp, BoundKind, BoundQuery, RampParams};
use crate::builder::Sense;
use crate::scalar::{Rat, Scalar};
use crate::windows::{online_history_row, packing_rows, HistoryMode, Interval, IntervalSet, LinExpr};
use serde::Serialize;

pub const MAX_WINDOW: i64 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum PolytopeKind {
    B,
    P,
    Q,
    BTilde,
    PTilde,
    QTilde,
}

impl PolytopeKind {
    pub fn is_tilde(self) -> bool {
        matches!(self, PolytopeKind::BTilde | PolytopeKind::PTilde | PolytopeKind::QTilde)
    }

    fn has_power(self) -> bool {
        !matches!(self, PolytopeKind::B | PolytopeKind::BTilde)
    }

    fn has_ramps(self) -> bool {
        matches!(self, PolytopeKind::Q | PolytopeKind::QTilde)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Coord {
    Tau(Interval),
    P(i64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum RowFamily {
    Packing,
    OnlineHistory,
    GenUb,
    GenLb,
    RampUp,
    RampDown,
    Extra,
}

/// Row tag: family, period `t` and ramp distance `a` (0 when unused).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct RowTag {
    pub family: RowFamily,
    pub t: i64,
    pub a: i64,
}

/// `expr (sense) rhs` over coordinate indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub expr: LinExpr<usize, Rat>,
    pub sense: Sense,
    pub rhs: Rat,
    pub tag: RowTag,
}

impl Row {
    pub fn lhs(&self, x: &[Rat]) -> Rat {
        self.expr.eval(|&j| x[j].clone())
    }

    pub fn satisfied(&self, x: &[Rat]) -> bool {
        let v = self.lhs(x);
        match self.sense {
            Sense::Le => v <= self.rhs,
            Sense::Ge => v >= self.rhs,
            Sense::Eq => v == self.rhs,
        }
    }

    pub fn tight(&self, x: &[Rat]) -> bool {
        self.lhs(x) == self.rhs
    }
}

/// Polytope inside the unit box: τ coordinates first, then P̃.
#[derive(Debug, Clone)]
pub struct Polytope {
    pub kind: PolytopeKind,
    pub m: i64,
    pub size: i64,
    pub coords: Vec<Coord>,
    pub n_binary: usize,
    pub rows: Vec<Row>,
}

impl Polytope {
    pub fn dim_ambient(&self) -> usize {
        self.coords.len()
    }

    pub fn index_of(&self, c: Coord) -> Option<usize> {
        self.coords.iter().position(|&x| x == c)
    }

    pub fn tau_index(&self, iv: Interval) -> Option<usize> {
        self.index_of(Coord::Tau(iv))
    }

    pub fn p_index(&self, t: i64) -> Option<usize> {
        self.index_of(Coord::P(t))
    }

    pub fn contains(&self, x: &[Rat]) -> bool {
        x.len() == self.coords.len()
            && x.iter().all(|v| *v >= zero() && *v <= one())
            && self.rows.iter().all(|r| r.satisfied(x))
    }

    pub fn rows_of(&self, family: RowFamily) -> impl Iterator<Item = (usize, &Row)> {
        self.rows.iter().enumerate().filter(move |(_, r)| r.tag.family == family)
    }

    pub fn without_row(&self, idx: usize) -> Polytope {
        let mut p = self.clone();
        p.rows.remove(idx);
        p
    }
}

fn zero() -> Rat {
    <Rat as Scalar>::zero()
}

fn one() -> Rat {
    <Rat as Scalar>::one()
}

/// Builds the named window polytope for interval set `a` and exact unit data.
pub fn build_polytope(
    kind: PolytopeKind,
    a: &IntervalSet,
    unit: &RampParams<Rat>,
) -> Result<Polytope, PolylabError> {
    if a.size > MAX_WINDOW || a.size < 1 {
        return Err(PolylabError::Guard(format!("window size {} outside 1..={MAX_WINDOW}", a.size)));
    }
    let (m, size, e) = (a.m, a.size, a.end());
    let tilde = kind.is_tilde();
    let history = tilde && unit.history_tables_apply(m);
    let mut coords: Vec<Coord> = a.intervals.iter().map(|&iv| Coord::Tau(iv)).collect();
    let n_binary = coords.len();
    let first_p = if tilde { m.max(1) } else { m };
    if kind.has_power() {
        coords.extend((first_p..=e).map(Coord::P));
    }
    let tau = |iv: &Interval| a.index_of(iv).expect("interval in set");
    let p_of = |t: i64| -> LinExpr<usize, Rat> {
        if t < first_p {
            LinExpr::constant_expr(if unit.u0 { unit.p0.clone() } else { zero() })
        } else {
            LinExpr::var(n_binary + (t - first_p) as usize)
        }
    };
    let mut rows = Vec::new();
    let tag = |family, t, a| RowTag { family, t, a };
    for (t, e) in packing_rows::<Rat>(a) {
        rows.push(Row { expr: e.map_vars(tau), sense: Sense::Le, rhs: one(), tag: tag(RowFamily::Packing, t, 0) });
    }
    if tilde {
        if let Some(e) = online_history_row::<Rat>(a, e) {
            rows.push(Row {
                expr: e.map_vars(tau),
                sense: Sense::Eq,
                rhs: one(),
                tag: tag(RowFamily::OnlineHistory, m, 0),
            });
        }
    }
    if !kind.has_power() {
        return Ok(Polytope { kind, m, size, coords, n_binary, rows });
    }
    let query = |bk, iv: Interval, t, aa| BoundQuery { kind: bk, interval: iv, t, a: aa, m, size, history, unit };
    if history {
        for t in first_p..=e {
            let lb = lb_power_history(Interval::new(m, e), t, unit)?;
            let mut expr = p_of(t);
            for iv in a.intervals.iter().filter(|iv| iv.h == m && iv.k >= t) {
                expr.add_term(tau(iv), -lb.clone());
            }
            rows.push(Row { expr, sense: Sense::Ge, rhs: zero(), tag: tag(RowFamily::GenLb, t, 0) });
        }
    }
    for t in first_p..=e {
        let mut expr = p_of(t);
        for iv in a.intervals.iter().filter(|iv| iv.contains(t)) {
            expr.add_term(tau(iv), -ub_power(&query(BoundKind::GenUb, *iv, t, 0))?);
        }
        rows.push(Row { expr, sense: Sense::Le, rhs: zero(), tag: tag(RowFamily::GenUb, t, 0) });
    }
    if kind.has_ramps() {
        for t in (m + 1)..=e {
            for aa in 1..=(t - m) {
                for (bk, family) in [(BoundKind::RampUp, RowFamily::RampUp), (BoundKind::RampDown, RowFamily::RampDown)] {
                    let (hi, lo) = if bk == BoundKind::RampUp { (t, t - aa) } else { (t - aa, t) };
                    let mut expr = p_of(hi).plus(&p_of(lo), -one());
                    for iv in a.intervals.iter().filter(|iv| iv.contains(t) || iv.contains(t - aa)) {
                        expr.add_term(tau(iv), -ub_ramp(&query(bk, *iv, t, aa))?);
                    }
                    rows.push(Row { expr, sense: Sense::Le, rhs: zero(), tag: tag(family, t, aa) });
                }
            }
        }
    }
    for r in rows.iter_mut() {
        let c = r.expr.constant().clone();
        if c != zero() {
            r.expr.add_constant(-c.clone());
            r.rhs = r.rhs.clone() - c;
        }
    }
    Ok(Polytope { kind, m, size, coords, n_binary, rows })
}

/// Exact copy of floating unit data.
pub fn exact_params(p: &RampParams<f64>) -> RampParams<Rat> {
    use crate::scalar::rat_from_f64;
    RampParams {
        start: rat_from_f64(p.start),
        shut: rat_from_f64(p.shut),
        up: rat_from_f64(p.up),
        down: rat_from_f64(p.down),
        p0: rat_from_f64(p.p0),
        u0: p.u0,
        t_on: p.t_on,
        t_off: p.t_off,
        u_run: p.u_run,
        k_run: p.k_run,
    }
}

/// History mode matching the unit data (online units use `U`).
pub fn history_of(unit: &RampParams<Rat>, offline_lock: i64) -> HistoryMode {
    if unit.u0 {
        HistoryMode::Online { u: unit.u_run, t_on: unit.t_on }
    } else {
        HistoryMode::Offline { l: offline_lock }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;
    use crate::windows::interval_set;

    pub(crate) fn unit() -> RampParams<Rat> {
        RampParams {
            start: rat(1, 4),
            shut: rat(3, 8),
            up: rat(3, 8),
            down: rat(1, 4),
            p0: zero(),
            u0: false,
            t_on: 1,
            t_off: 1,
            u_run: 0,
            k_run: 0,
        }
    }

    #[test]
    fn b_two_period_rows() {
        let a = interval_set(0, 2, 1, 1, HistoryMode::None);
        let p = build_polytope(PolytopeKind::B, &a, &unit()).unwrap();
        assert_eq!(p.coords.len(), 3);
        assert_eq!(p.rows.len(), 2);
        assert_eq!(p.rows[0].expr.len(), 2);
        assert_eq!(p.rows[1].expr.len(), 3);
    }

    #[test]
    fn q_three_period_counts() {
        let a = interval_set(0, 3, 1, 1, HistoryMode::None);
        let p = build_polytope(PolytopeKind::Q, &a, &unit()).unwrap();
        assert_eq!(p.n_binary, 6);
        assert_eq!(p.coords.len(), 9);
        assert_eq!(p.rows_of(RowFamily::GenUb).count(), 3);
        let ramps = p.rows_of(RowFamily::RampUp).count() + p.rows_of(RowFamily::RampDown).count();
        assert_eq!(ramps, 6);
    }

    #[test]
    fn online_history_adds_equality() {
        let u = RampParams { u0: true, p0: rat(3, 4), u_run: 2, k_run: 2, ..unit() };
        let a = interval_set(0, 3, 1, 1, HistoryMode::Online { u: 2, t_on: 1 });
        let p = build_polytope(PolytopeKind::BTilde, &a, &u).unwrap();
        assert_eq!(p.rows_of(RowFamily::OnlineHistory).count(), 1);
        let q = build_polytope(PolytopeKind::QTilde, &a, &u).unwrap();
        assert_eq!(q.coords.len() - q.n_binary, 2);
        assert!(q.rows_of(RowFamily::GenLb).count() > 0);
    }

    #[test]
    fn guard_rejects_large_windows() {
        let a = interval_set(0, 6, 1, 1, HistoryMode::None);
        assert!(matches!(build_polytope(PolytopeKind::B, &a, &unit()), Err(PolylabError::Guard(_))));
    }
}
