use crate::scalar::{Rat, Scalar};
use crate::windows::{Interval, IntervalSet, LinExpr};
use std::collections::BTreeMap;

/// Basis variable of one window: `u_t`, `v_t` or an interior interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BasisVar {
    U(i64),
    V(i64),
    Tau(Interval),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElimRowKind {
    /// `0 ≤ expr ≤ 1`
    Range01,
    /// `expr = 0`
    Zero,
}

#[derive(Debug, Clone)]
pub struct EliminationSystem {
    pub m: i64,
    pub size: i64,
    pub basis: Vec<BasisVar>,
    /// `x = E⁻¹ b` for every interval of the window.
    pub inverse: BTreeMap<Interval, LinExpr<BasisVar, Rat>>,
    /// Same map with interior intervals outside `A_m` fixed to zero.
    pub substituted: BTreeMap<Interval, LinExpr<BasisVar, Rat>>,
    /// Bound rows on the eliminated (non-basic) intervals.
    pub bound_rows: Vec<(Interval, ElimRowKind)>,
}

fn is_interior(iv: &Interval, m: i64, e: i64) -> bool {
    m < iv.h && iv.k < e
}

/// All intervals of window `[m, m+M−1]` in lexicographic order.
pub fn window_intervals(m: i64, size: i64) -> Vec<Interval> {
    let e = m + size - 1;
    (m..=e).flat_map(|h| (h..=e).map(move |k| Interval::new(h, k))).collect()
}

pub fn basis_order(m: i64, size: i64) -> Vec<BasisVar> {
    let e = m + size - 1;
    let mut b: Vec<BasisVar> = (m..=e).map(BasisVar::U).collect();
    b.extend(((m + 1)..=e).map(BasisVar::V));
    b.extend(window_intervals(m, size).into_iter().filter(|iv| is_interior(iv, m, e)).map(BasisVar::Tau));
    b
}

/// The matrix `E` of `E x = b`, with columns in `window_intervals` order and
/// rows in `basis_order` order.
pub fn elimination_matrix(m: i64, size: i64) -> (Vec<Interval>, Vec<BasisVar>, Vec<Vec<Rat>>) {
    let cols = window_intervals(m, size);
    let rows = basis_order(m, size);
    let mat = rows
        .iter()
        .map(|r| {
            cols.iter()
                .map(|iv| {
                    let hit = match r {
                        BasisVar::U(t) => iv.contains(*t),
                        BasisVar::V(t) => iv.h == *t,
                        BasisVar::Tau(b) => b == iv,
                    };
                    if hit {
                        Rat::one()
                    } else {
                        Rat::zero()
                    }
                })
                .collect()
        })
        .collect();
    (cols, rows, mat)
}

/// Expresses every interval variable of the window through the basis.
pub fn elimination_solve(a: &IntervalSet) -> EliminationSystem {
    let (m, size) = (a.m, a.size);
    let e = m + size - 1;
    let one = Rat::one;
    let tau = |h: i64, k: i64| LinExpr::<BasisVar, Rat>::var(BasisVar::Tau(Interval::new(h, k)));
    let mut inverse = BTreeMap::new();
    let mut right = BTreeMap::new();
    for h in (m + 1)..=e {
        let mut x = LinExpr::var(BasisVar::V(h));
        for k in h..e {
            x.add_scaled(&tau(h, k), -one());
        }
        right.insert(h, x);
    }
    let tail = |t: i64| -> LinExpr<BasisVar, Rat> {
        if t > e {
            return LinExpr::new();
        }
        let mut s = LinExpr::var(BasisVar::U(t));
        for h in (m + 1)..=t {
            s.add_scaled(&right[&h], -one());
        }
        for h in (m + 1)..=t.min(e - 1) {
            for k in t.max(h)..e {
                s.add_scaled(&tau(h, k), -one());
            }
        }
        s
    };
    for k in m..=e {
        inverse.insert(Interval::new(m, k), tail(k).plus(&tail(k + 1), -one()));
    }
    for (h, x) in right {
        inverse.insert(Interval::new(h, e), x);
    }
    for iv in window_intervals(m, size) {
        if is_interior(&iv, m, e) {
            inverse.insert(iv, tau(iv.h, iv.k));
        }
    }
    let substituted: BTreeMap<_, _> = inverse
        .iter()
        .map(|(iv, x)| {
            let s = x.substitute(|bv| match bv {
                BasisVar::Tau(t) if !a.contains(t) => LinExpr::new(),
                other => LinExpr::var(*other),
            });
            (*iv, s)
        })
        .collect();
    let bound_rows = window_intervals(m, size)
        .into_iter()
        .filter(|iv| !is_interior(iv, m, e))
        .map(|iv| (iv, if a.contains(&iv) { ElimRowKind::Range01 } else { ElimRowKind::Zero }))
        .collect();
    EliminationSystem { m, size, basis: basis_order(m, size), inverse, substituted, bound_rows }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polylab::linalg::invert;
    use crate::windows::{active_intervals, interval_set, HistoryMode};

    fn eval(sys: &EliminationSystem, on: &[bool]) -> BTreeMap<Interval, Rat> {
        let m = sys.m;
        let at = |t: i64| on[(t - m) as usize];
        let active = active_intervals(on, m);
        sys.substituted
            .iter()
            .map(|(iv, x)| {
                let val = x.eval(|bv| {
                    let b = match bv {
                        BasisVar::U(t) => at(*t),
                        BasisVar::V(t) => at(*t) && !at(t - 1),
                        BasisVar::Tau(i) => active.contains(i),
                    };
                    if b {
                        Rat::one()
                    } else {
                        Rat::zero()
                    }
                });
                (*iv, val)
            })
            .collect()
    }

    #[test]
    fn always_on_schedule() {
        let sys = elimination_solve(&interval_set(0, 3, 1, 1, HistoryMode::None));
        let vals = eval(&sys, &[true, true, true]);
        for (iv, v) in vals {
            let want = if iv == Interval::new(0, 2) { 1 } else { 0 };
            assert_eq!(v, Rat::from_i64(want), "{iv:?}");
        }
    }

    #[test]
    fn single_start_schedule() {
        let sys = elimination_solve(&interval_set(0, 3, 1, 1, HistoryMode::None));
        let vals = eval(&sys, &[false, true, false]);
        for (iv, v) in vals {
            let want = if iv == Interval::new(1, 1) { 1 } else { 0 };
            assert_eq!(v, Rat::from_i64(want), "{iv:?}");
        }
    }

    #[test]
    fn closed_form_matches_exact_inverse() {
        for size in 2..6 {
            let (cols, rows, mat) = elimination_matrix(2, size);
            let inv = invert(&mat).expect("E nonsingular");
            let sys = elimination_solve(&interval_set(2, size, 1, 1, HistoryMode::None));
            for (i, iv) in cols.iter().enumerate() {
                for (j, bv) in rows.iter().enumerate() {
                    assert_eq!(sys.inverse[iv].coef(bv), inv[i][j], "M={size} {iv:?} {bv:?}");
                }
            }
        }
    }

    #[test]
    fn bound_rows_cover_boundary_intervals() {
        let sys = elimination_solve(&interval_set(0, 4, 1, 1, HistoryMode::None));
        assert_eq!(sys.bound_rows.len(), 2 * 4 - 1);
        assert!(sys.bound_rows.iter().all(|(_, k)| *k == ElimRowKind::Range01));
        let off = elimination_solve(&interval_set(0, 4, 1, 1, HistoryMode::Offline { l: 2 }));
        assert!(off.bound_rows.iter().any(|(_, k)| *k == ElimRowKind::Zero));
    }
}
