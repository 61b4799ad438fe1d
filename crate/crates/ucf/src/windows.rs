//! Feasible operating-interval sets per window, interval-variable linking
//! expressions, packing and cross-window consistency rows, and model-size
//! counting.

use crate::instance::{NormalizedUnit, StatusBounds};
use crate::scalar::Scalar;
use serde::Serialize;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WindowError {
    #[error("window m={m}, M={size} out of range for T={horizon}")]
    OutOfRange { m: i64, size: i64, horizon: i64 },
    #[error("period {t} outside the legal range for {kind} in window m={m}, M={size}")]
    PeriodOutOfRange { kind: &'static str, t: i64, m: i64, size: i64 },
}

/// Continuous operating interval `[h, k]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Interval {
    pub h: i64,
    pub k: i64,
}

impl Interval {
    pub fn new(h: i64, k: i64) -> Self {
        Interval { h, k }
    }

    pub fn contains(&self, t: i64) -> bool {
        self.h <= t && t <= self.k
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum HistoryMode {
    None,
    Offline { l: i64 },
    Online { u: i64, t_on: i64 },
}

/// The set `A_m` for one unit and one window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalSet {
    pub m: i64,
    pub size: i64,
    pub intervals: Vec<Interval>,
    pub history: HistoryMode,
    pub t_on: i64,
    pub t_off: i64,
}

impl IntervalSet {
    /// Last period of the window.
    pub fn end(&self) -> i64 {
        self.m + self.size - 1
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn contains(&self, iv: &Interval) -> bool {
        self.intervals.binary_search(iv).is_ok()
    }

    pub fn index_of(&self, iv: &Interval) -> Option<usize> {
        self.intervals.binary_search(iv).ok()
    }

    pub fn periods(&self) -> std::ops::RangeInclusive<i64> {
        self.m..=self.end()
    }
}

/// Builds `A_m` from explicit integer data.
pub fn interval_set(
    m: i64,
    size: i64,
    t_on: i64,
    t_off: i64,
    history: HistoryMode,
) -> IntervalSet {
    let e = m + size - 1;
    let mut intervals = Vec::new();
    for h in m..=e {
        let k_min = match history {
            HistoryMode::None => {
                if h == m {
                    Some(m)
                } else {
                    Some((h + t_on - 1).min(e))
                }
            }
            HistoryMode::Offline { l } => {
                if h == m {
                    (m > l).then(|| m.max(l + t_on).min(e))
                } else if h > l {
                    Some((h + t_on - 1).min(e))
                } else {
                    None
                }
            }
            HistoryMode::Online { u, .. } => {
                if h == m {
                    Some(m.max(u).min(e))
                } else if h > u + t_off {
                    Some((h + t_on - 1).min(e))
                } else {
                    None
                }
            }
        };
        if let Some(k_min) = k_min {
            for k in k_min..=e {
                intervals.push(Interval::new(h, k));
            }
        }
    }
    IntervalSet { m, size, intervals, history, t_on, t_off }
}

pub fn check_window(m: i64, size: i64, horizon: i64) -> Result<(), WindowError> {
    if size < 2 || size > horizon + 1 || m < 0 || m > horizon - size + 1 {
        return Err(WindowError::OutOfRange { m, size, horizon });
    }
    Ok(())
}

/// Window starts `0..=T-M+1`.
pub fn window_starts(horizon: i64, size: i64) -> std::ops::RangeInclusive<i64> {
    0..=(horizon - size + 1)
}

/// History mode implied by the unit's initial status.
pub fn history_mode(nu: &NormalizedUnit, sb: &StatusBounds, history: bool) -> HistoryMode {
    if !history {
        HistoryMode::None
    } else if nu.u0 {
        HistoryMode::Online { u: sb.u_run, t_on: nu.t_on }
    } else {
        HistoryMode::Offline { l: sb.l_lock }
    }
}

pub fn feasible_intervals(
    nu: &NormalizedUnit,
    sb: &StatusBounds,
    m: i64,
    size: i64,
    horizon: i64,
    history: bool,
) -> Result<IntervalSet, WindowError> {
    check_window(m, size, horizon)?;
    Ok(interval_set(m, size, nu.t_on, nu.t_off, history_mode(nu, sb, history)))
}

/// Sparse linear expression with deterministic variable order.
#[derive(Debug, Clone, PartialEq)]
pub struct LinExpr<V: Ord + Clone, C: Scalar> {
    terms: BTreeMap<V, C>,
    constant: C,
}

impl<V: Ord + Clone, C: Scalar> Default for LinExpr<V, C> {
    fn default() -> Self {
        Self::new()
    }
}

impl<V: Ord + Clone, C: Scalar> LinExpr<V, C> {
    pub fn new() -> Self {
        LinExpr { terms: BTreeMap::new(), constant: C::zero() }
    }

    pub fn constant_expr(c: C) -> Self {
        LinExpr { terms: BTreeMap::new(), constant: c }
    }

    pub fn var(v: V) -> Self {
        let mut e = Self::new();
        e.add_term(v, C::one());
        e
    }

    pub fn add_term(&mut self, v: V, c: C) {
        let entry = self.terms.entry(v.clone()).or_insert_with(C::zero);
        *entry = entry.clone() + c;
        if entry.is_negligible() {
            self.terms.remove(&v);
        }
    }

    pub fn add_constant(&mut self, c: C) {
        self.constant = self.constant.clone() + c;
    }

    /// `self += scale * other`.
    pub fn add_scaled(&mut self, other: &Self, scale: C) {
        for (v, c) in &other.terms {
            self.add_term(v.clone(), c.clone() * scale.clone());
        }
        self.constant = self.constant.clone() + other.constant.clone() * scale;
    }

    pub fn with_term(mut self, v: V, c: C) -> Self {
        self.add_term(v, c);
        self
    }

    pub fn plus(mut self, other: &Self, scale: C) -> Self {
        self.add_scaled(other, scale);
        self
    }

    pub fn scaled(&self, s: C) -> Self {
        let mut e = Self::new();
        e.add_scaled(self, s);
        e
    }

    pub fn terms(&self) -> impl Iterator<Item = (&V, &C)> {
        self.terms.iter()
    }

    pub fn coef(&self, v: &V) -> C {
        self.terms.get(v).cloned().unwrap_or_else(C::zero)
    }

    pub fn constant(&self) -> &C {
        &self.constant
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// No variable terms and a zero constant.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.constant.is_negligible()
    }

    pub fn eval(&self, mut value: impl FnMut(&V) -> C) -> C {
        let mut acc = self.constant.clone();
        for (v, c) in &self.terms {
            acc = acc + c.clone() * value(v);
        }
        acc
    }

    pub fn map_vars<W: Ord + Clone>(&self, mut f: impl FnMut(&V) -> W) -> LinExpr<W, C> {
        let mut e = LinExpr::<W, C>::constant_expr(self.constant.clone());
        for (v, c) in &self.terms {
            e.add_term(f(v), c.clone());
        }
        e
    }

    /// Replaces each variable by an expression over a new variable space.
    pub fn substitute<W: Ord + Clone>(&self, mut f: impl FnMut(&V) -> LinExpr<W, C>) -> LinExpr<W, C> {
        let mut e = LinExpr::<W, C>::constant_expr(self.constant.clone());
        for (v, c) in &self.terms {
            e.add_scaled(&f(v), c.clone());
        }
        e
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkKind {
    U,
    V,
    W,
}

/// `u_t`, `v_t` or `w_t` as a sum of interval variables of window `A`.
pub fn link_expression<C: Scalar>(
    a: &IntervalSet,
    kind: LinkKind,
    t: i64,
) -> Result<LinExpr<Interval, C>, WindowError> {
    let lo = if kind == LinkKind::U { a.m } else { a.m + 1 };
    if t < lo || t > a.end() {
        let name = match kind {
            LinkKind::U => "u",
            LinkKind::V => "v",
            LinkKind::W => "w",
        };
        return Err(WindowError::PeriodOutOfRange { kind: name, t, m: a.m, size: a.size });
    }
    let mut e = LinExpr::new();
    for iv in &a.intervals {
        let hit = match kind {
            LinkKind::U => iv.contains(t),
            LinkKind::V => iv.h == t,
            LinkKind::W => iv.k == t - 1,
        };
        if hit {
            e.add_term(*iv, C::one());
        }
    }
    Ok(e)
}

/// Packing rows `Σ_{t ∈ [h, k+t_off]} τ ≤ 1`, one per window period.
pub fn packing_rows<C: Scalar>(a: &IntervalSet) -> Vec<(i64, LinExpr<Interval, C>)> {
    a.periods()
        .map(|t| {
            let mut e = LinExpr::new();
            for iv in &a.intervals {
                if iv.h <= t && t <= iv.k + a.t_off {
                    e.add_term(*iv, C::one());
                }
            }
            (t, e)
        })
        .collect()
}

/// Cross-window consistency rows between `A_m` and `A_{m+1}`: the `u`
/// equalities on the overlap and the `v` equalities from `m+2`. Each
/// expression is `left − right` over `(window, interval)` keys and equals 0.
pub fn consistency_rows<C: Scalar>(
    a: &IntervalSet,
    b: &IntervalSet,
) -> Vec<(LinkKind, i64, LinExpr<(i64, Interval), C>)> {
    let mut rows = Vec::new();
    let tag = |e: LinExpr<Interval, C>, m: i64| e.map_vars(|iv| (m, *iv));
    for t in b.m..=a.end() {
        let l = tag(link_expression(a, LinkKind::U, t).expect("in window"), a.m);
        let r = tag(link_expression(b, LinkKind::U, t).expect("in window"), b.m);
        rows.push((LinkKind::U, t, l.plus(&r, -C::one())));
    }
    for t in (b.m + 1)..=a.end() {
        let l = tag(link_expression(a, LinkKind::V, t).expect("in window"), a.m);
        let r = tag(link_expression(b, LinkKind::V, t).expect("in window"), b.m);
        rows.push((LinkKind::V, t, l.plus(&r, -C::one())));
    }
    rows
}

/// Online-history row `Σ_k τ_{m,k} = 1` when the unit must still be on at `m`.
pub fn online_history_row<C: Scalar>(a: &IntervalSet, horizon: i64) -> Option<LinExpr<Interval, C>> {
    match a.history {
        HistoryMode::Online { u, .. } if a.m <= u.min(horizon - a.size + 1) => {
            let mut e = LinExpr::new();
            for iv in a.intervals.iter().filter(|iv| iv.h == a.m) {
                e.add_term(*iv, C::one());
            }
            Some(e)
        }
        _ => None,
    }
}

/// Intervals active under a 0/1 schedule over the window periods.
pub fn active_intervals(on: &[bool], m: i64) -> Vec<Interval> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, &x) in on.iter().enumerate() {
        let t = m + i as i64;
        match (x, start) {
            (true, None) => start = Some(t),
            (false, Some(h)) => {
                out.push(Interval::new(h, t - 1));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(h) = start {
        out.push(Interval::new(h, m + on.len() as i64 - 1));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelSize {
    pub n1: i64,
    pub n2: i64,
    pub ub_rows: i64,
    pub ramp_rows: i64,
}

pub fn count_model_size(size: i64, horizon: i64, t_on: i64) -> ModelSize {
    let windows = horizon - size + 2;
    let tail = (size - t_on - 1).max(0) * (size - t_on) / 2;
    ModelSize {
        n1: size * (size + 1) * windows / 2,
        n2: (2 * size - 1 + tail) * windows,
        ub_rows: size * windows - 1,
        ramp_rows: size * (size - 1) * windows,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn iv(h: i64, k: i64) -> Interval {
        Interval::new(h, k)
    }

    #[test]
    fn history_free_cardinalities() {
        assert_eq!(interval_set(0, 3, 1, 1, HistoryMode::None).len(), 6);
        let a = interval_set(2, 3, 2, 1, HistoryMode::None);
        assert_eq!(a.intervals, vec![iv(2, 2), iv(2, 3), iv(2, 4), iv(3, 4), iv(4, 4)]);
        for m in 1..6 {
            assert_eq!(interval_set(0, m, 1, 1, HistoryMode::None).len() as i64, m * (m + 1) / 2);
        }
    }

    #[test]
    fn offline_history_example() {
        let a = interval_set(1, 3, 1, 1, HistoryMode::Offline { l: 2 });
        assert_eq!(a.intervals, vec![iv(3, 3)]);
    }

    #[test]
    fn online_history_forces_run_until_u() {
        let a = interval_set(0, 4, 1, 2, HistoryMode::Online { u: 2, t_on: 1 });
        assert!(!a.contains(&iv(0, 1)));
        assert!(a.contains(&iv(0, 2)));
        assert!(!a.contains(&iv(3, 3)));
        let a = interval_set(0, 6, 1, 2, HistoryMode::Online { u: 2, t_on: 1 });
        assert!(a.contains(&iv(5, 5)));
        assert!(online_history_row::<f64>(&a, 6).is_some());
    }

    #[test]
    fn link_examples() {
        let a = interval_set(0, 3, 1, 1, HistoryMode::None);
        let u: LinExpr<Interval, f64> = link_expression(&a, LinkKind::U, 1).unwrap();
        let keys: Vec<_> = u.terms().map(|(k, _)| *k).collect();
        assert_eq!(keys, vec![iv(0, 1), iv(0, 2), iv(1, 1), iv(1, 2)]);
        let v: LinExpr<Interval, f64> = link_expression(&a, LinkKind::V, 1).unwrap();
        assert_eq!(v.terms().map(|(k, _)| *k).collect::<Vec<_>>(), vec![iv(1, 1), iv(1, 2)]);
        let w: LinExpr<Interval, f64> = link_expression(&a, LinkKind::W, 2).unwrap();
        assert_eq!(w.terms().map(|(k, _)| *k).collect::<Vec<_>>(), vec![iv(0, 1), iv(1, 1)]);
        assert!(link_expression::<f64>(&a, LinkKind::V, 0).is_err());
        assert!(link_expression::<f64>(&a, LinkKind::U, 3).is_err());
    }

    #[test]
    fn logic_identity_holds_in_every_window() {
        for size in 2..6 {
            for t_on in 1..4 {
                let a = interval_set(1, size, t_on, 1, HistoryMode::None);
                for t in 2..=a.end() {
                    let e = link_expression::<f64>(&a, LinkKind::U, t)
                        .unwrap()
                        .plus(&link_expression(&a, LinkKind::U, t - 1).unwrap(), -1.0)
                        .plus(&link_expression(&a, LinkKind::V, t).unwrap(), -1.0)
                        .plus(&link_expression(&a, LinkKind::W, t).unwrap(), 1.0);
                    assert!(e.is_zero(), "M={size} t={t}: {e:?}");
                }
            }
        }
    }

    #[test]
    fn packing_matrix_is_interval() {
        for size in 2..6 {
            for t_off in 1..4 {
                let a = interval_set(0, size, 1, t_off, HistoryMode::None);
                let rows = packing_rows::<f64>(&a);
                for col in &a.intervals {
                    let hits: Vec<i64> =
                        rows.iter().filter(|(_, e)| e.coef(col) != 0.0).map(|(t, _)| *t).collect();
                    assert!(hits.windows(2).all(|w| w[1] == w[0] + 1), "{col:?}: {hits:?}");
                }
            }
        }
    }

    #[test]
    fn table6_examples() {
        let s = count_model_size(2, 24, 1);
        assert_eq!((s.n1, s.n2, s.ub_rows, s.ramp_rows), (72, 72, 47, 48));
        let s = count_model_size(12, 24, 11);
        assert_eq!((s.n1, s.n2), (1092, 322));
        assert_eq!(count_model_size(13, 24, 12).n2, 325);
    }

    #[test]
    fn window_range_checked() {
        assert!(check_window(0, 1, 5).is_err());
        assert!(check_window(0, 7, 5).is_err());
        assert!(check_window(4, 3, 5).is_err());
        assert!(check_window(3, 3, 5).is_ok());
    }

    #[test]
    fn active_intervals_of_schedule() {
        assert_eq!(active_intervals(&[true, false, true, true], 2), vec![iv(2, 2), iv(4, 5)]);
        assert!(active_intervals(&[false, false], 0).is_empty());
    }

    proptest! {
        #[test]
        fn overlap_values_agree(bits in proptest::collection::vec(any::<bool>(), 3..7)) {
            let size = bits.len() as i64 - 1;
            let a = interval_set(0, size, 1, 1, HistoryMode::None);
            let b = interval_set(1, size, 1, 1, HistoryMode::None);
            let on_a = active_intervals(&bits[..size as usize], 0);
            let on_b = active_intervals(&bits[1..], 1);
            for (_, _, e) in consistency_rows::<f64>(&a, &b) {
                let val = e.eval(|(m, iv)| {
                    let set = if *m == 0 { &on_a } else { &on_b };
                    if set.contains(iv) { 1.0 } else { 0.0 }
                });
                prop_assert_eq!(val, 0.0);
            }
        }
    }
}
