//! Tight bound coefficients for the interval-variable generation and ramping
//! rows, the history lower bound, facet predicates and the redundancy ratio.

use crate::instance::{NormalizedUnit, StatusBounds};
use crate::scalar::{smax, smin, strictly_less, Scalar};
use crate::windows::Interval;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BoundError {
    #[error("no table case for interval [{h},{k}] at t={t}, a={a} in window m={m}, M={size}")]
    NoCase { h: i64, k: i64, t: i64, a: i64, m: i64, size: i64 },
    #[error("query out of range: {0}")]
    OutOfRange(String),
    #[error("history lower bound requested for a unit that is initially offline")]
    OfflineUnit,
    #[error("window size must be at least 2, got {0}")]
    WindowTooSmall(i64),
}

/// Normalized ramp data of one unit, generic over the scalar type.
#[derive(Debug, Clone, PartialEq)]
pub struct RampParams<S> {
    pub start: S,
    pub shut: S,
    pub up: S,
    pub down: S,
    pub p0: S,
    pub u0: bool,
    pub t_on: i64,
    pub t_off: i64,
    pub u_run: i64,
    pub k_run: i64,
}

impl RampParams<f64> {
    pub fn from_unit(nu: &NormalizedUnit, sb: &StatusBounds) -> Self {
        RampParams {
            start: nu.pt_start,
            shut: nu.pt_shut,
            up: nu.pt_up,
            down: nu.pt_down,
            p0: if nu.u0 { nu.pt0 } else { 0.0 },
            u0: nu.u0,
            t_on: nu.t_on,
            t_off: nu.t_off,
            u_run: sb.u_run,
            k_run: sb.k_run,
        }
    }
}

impl<S: Scalar> RampParams<S> {
    /// Whether the history tables apply to window `m`.
    pub fn history_tables_apply(&self, m: i64) -> bool {
        self.u0 && m <= self.u_run + self.t_off
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BoundKind {
    GenUb,
    GenLb,
    RampUp,
    RampDown,
}

#[derive(Debug, Clone)]
pub struct BoundQuery<'a, S> {
    pub kind: BoundKind,
    pub interval: Interval,
    pub t: i64,
    pub a: i64,
    pub m: i64,
    pub size: i64,
    pub history: bool,
    pub unit: &'a RampParams<S>,
}

fn s<S: Scalar>(v: i64) -> S {
    S::from_i64(v)
}

fn min3<S: Scalar>(a: S, b: S, c: S) -> S {
    smin(smin(a, b), c)
}

fn out_of_range<S>(q: &BoundQuery<'_, S>, what: &str) -> BoundError {
    BoundError::OutOfRange(format!(
        "{what}: interval [{},{}], t={}, a={}, window m={}, M={}",
        q.interval.h, q.interval.k, q.t, q.a, q.m, q.size
    ))
}

fn check_interval<S>(q: &BoundQuery<'_, S>) -> Result<(), BoundError> {
    let e = q.m + q.size - 1;
    let Interval { h, k } = q.interval;
    if !(q.m <= h && h <= k && k <= e) {
        return Err(out_of_range(q, "interval outside window"));
    }
    Ok(())
}

/// Generation upper-bound coefficient of `τ_{h,k}` at period `t`.
pub fn ub_power<S: Scalar>(q: &BoundQuery<'_, S>) -> Result<S, BoundError> {
    check_interval(q)?;
    let Interval { h, k } = q.interval;
    let t = q.t;
    if !(h <= t && t <= k) {
        return Err(out_of_range(q, "t outside interval"));
    }
    let u = q.unit;
    let e = q.m + q.size - 1;
    let one = S::one();
    let down_tail = u.shut.clone() + s::<S>(k - t) * u.down.clone();
    if q.history && h == q.m {
        let rise = u.p0.clone() + s::<S>(t) * u.up.clone();
        return Ok(if k < e { min3(one, rise, down_tail) } else { smin(one, rise) });
    }
    let rise = u.start.clone() + s::<S>(t - h) * u.up.clone();
    Ok(match (h > q.m, k < e) {
        (true, true) => min3(one, rise, down_tail),
        (true, false) => smin(one, rise),
        (false, true) => smin(one, down_tail),
        (false, false) => one,
    })
}

/// History lower bound `max(0, P̃_0 − t·P̃_down)` for intervals starting at `m`.
pub fn lb_power_history<S: Scalar>(
    interval: Interval,
    t: i64,
    unit: &RampParams<S>,
) -> Result<S, BoundError> {
    if !unit.u0 {
        return Err(BoundError::OfflineUnit);
    }
    if t > interval.k || t < interval.h {
        return Err(BoundError::OutOfRange(format!(
            "t={t} outside interval [{},{}]",
            interval.h, interval.k
        )));
    }
    Ok(smax(S::zero(), unit.p0.clone() - s::<S>(t) * unit.down.clone()))
}

/// Ramp-up or ramp-down coefficient of `τ_{h,k}` for the pair `(t−a, t)`.
pub fn ub_ramp<S: Scalar>(q: &BoundQuery<'_, S>) -> Result<S, BoundError> {
    check_interval(q)?;
    let e = q.m + q.size - 1;
    let (t, a) = (q.t, q.a);
    if t < q.m + 1 || t > e || a < 1 || a > t - q.m {
        return Err(out_of_range(q, "ramp indices"));
    }
    let Interval { h, k } = q.interval;
    let u = q.unit;
    let one = S::one();
    let covers_prev = h <= t - a && t - a <= k;
    let covers_t = h <= t && t <= k;
    let hist = q.history && h == q.m;
    let no_case = || BoundError::NoCase { h, k, t, a, m: q.m, size: q.size };
    match q.kind {
        BoundKind::RampUp => {
            let ramp = s::<S>(a) * u.up.clone();
            let down_tail = u.shut.clone() + s::<S>(k - t) * u.down.clone();
            if hist {
                let lb = smax(S::zero(), u.p0.clone() - s::<S>(t - a) * u.down.clone());
                return match (covers_prev, covers_t) {
                    (true, true) if k < e => {
                        Ok(min3(ramp, one - lb.clone(), down_tail - lb))
                    }
                    (true, true) => Ok(smin(one - lb, ramp)),
                    (true, false) => Ok(-lb),
                    _ => Err(no_case()),
                };
            }
            match (covers_prev, covers_t) {
                (true, true) if k < e => Ok(min3(one, ramp, down_tail)),
                (true, true) => Ok(smin(one, ramp)),
                (false, true) => {
                    let rise = u.start.clone() + s::<S>(t - h) * u.up.clone();
                    if k < e {
                        Ok(min3(one, rise, down_tail))
                    } else {
                        Ok(smin(one, rise))
                    }
                }
                (true, false) => Ok(S::zero()),
                (false, false) => Err(no_case()),
            }
        }
        BoundKind::RampDown => {
            let ramp = s::<S>(a) * u.down.clone();
            let fall = u.shut.clone() + s::<S>(k - t + a) * u.down.clone();
            let head = if hist {
                Some(u.p0.clone() + s::<S>(t - a) * u.up.clone())
            } else if h > q.m {
                Some(u.start.clone() + s::<S>(t - a - h) * u.up.clone())
            } else {
                None
            };
            let cap = |x: S| match &head {
                Some(hd) => min3(one.clone(), hd.clone(), x),
                None => smin(one.clone(), x),
            };
            match (covers_prev, covers_t) {
                (true, true) => Ok(cap(ramp)),
                (true, false) => Ok(cap(fall)),
                (false, true) => Ok(S::zero()),
                (false, false) => Err(no_case()),
            }
        }
        _ => Err(out_of_range(q, "not a ramp kind")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Proposition {
    P1,
    P2,
    P3,
    P4,
    P5,
    P6,
    P7,
    P8,
    P9,
    P10,
}

#[derive(Debug, Clone)]
pub struct FacetQuery<'a, S> {
    pub prop: Proposition,
    pub t: i64,
    pub a: i64,
    pub m: i64,
    pub size: i64,
    pub unit: &'a RampParams<S>,
}

fn lt<S: Scalar>(x: S, y: S) -> bool {
    strictly_less(&x, &y)
}

/// Whether the cited proposition predicts a facet.
pub fn facet_predicate<S: Scalar>(q: &FacetQuery<'_, S>) -> bool {
    let u = q.unit;
    let (t, a, m) = (q.t, q.a, q.m);
    let e = m + q.size - 1;
    let one = S::one();
    let (up, dn, st, sh, p0) = (u.up.clone(), u.down.clone(), u.start.clone(), u.shut.clone(), u.p0.clone());
    let ud = up.clone() + dn.clone();
    let k = u.k_run;
    let cap_u = u.u_run;
    let slack = t - cap_u - u.t_off;
    match q.prop {
        Proposition::P1 | Proposition::P2 | Proposition::P5 | Proposition::P6 => true,
        Proposition::P3 => lt(s(a), one / up),
        Proposition::P4 => lt(s(a), one / dn),
        Proposition::P7 => t == m.max(1) || lt(smin(s(k), p0 / dn), s(t)),
        Proposition::P8 => {
            t == m.max(1)
                || lt(smin(s(k), (one - p0.clone()) / up.clone()), s(t))
                || (k < e
                    && lt(
                        smax(
                            (sh.clone() - p0.clone()) / up.clone(),
                            (s::<S>(k) * dn.clone() + sh - p0) / ud,
                        ),
                        s(t),
                    )
                    && t < e)
        }
        Proposition::P9 => {
            let m1 = a == 1
                || t > k
                || lt(
                    smin(one.clone() / up.clone(), (one.clone() - p0.clone() + s::<S>(t) * dn.clone()) / ud.clone()),
                    s(a),
                )
                || (t.max(k) < e
                    && lt(
                        smin(
                            (sh.clone() + s::<S>((k - t).max(0)) * dn.clone()) / up.clone(),
                            (sh.clone() + s::<S>(t.max(k)) * dn.clone() - p0.clone()) / ud.clone(),
                        ),
                        s(a),
                    ))
                || (lt(
                    smin(s(u.t_on), (one.clone() - st.clone()) / up.clone() + one.clone()),
                    s(a),
                ) && a <= slack)
                || (t < e
                    && lt(
                        smax(
                            smax(
                                (sh.clone() - st.clone()) / up.clone(),
                                (s::<S>(u.t_on - 1) * dn.clone() + sh.clone() - st.clone()) / ud.clone(),
                            ),
                            s(t + u.t_on - m - q.size),
                        ) + one.clone(),
                        s(a),
                    )
                    && a <= slack);
            let m2 = t - a == 0
                || lt(
                    s(a),
                    smin(one.clone() / up.clone(), (one.clone() - p0.clone() + s::<S>(t) * dn.clone()) / ud.clone()),
                )
                || lt(s(a), smin(one.clone() / up.clone(), s(slack)));
            m1 && m2
        }
        Proposition::P10 => {
            let m3 = a == 1
                || a <= slack
                || lt(
                    smin(one.clone() / dn.clone(), (p0.clone() + s::<S>(t) * up.clone()) / ud.clone()),
                    s(a),
                )
                || (cap_u < t
                    && lt(
                        smin(
                            (one.clone() - sh.clone()) / dn.clone() + one.clone(),
                            (p0.clone() + s::<S>(t) * up.clone() + dn.clone() - sh.clone()) / ud.clone(),
                        ),
                        s(a),
                    ));
            let m4 = t - a == 0
                || lt(
                    s(a),
                    smin(one.clone() / dn.clone(), (p0.clone() + s::<S>(t) * up.clone()) / ud.clone()),
                )
                || lt(
                    s(a),
                    min3(
                        one.clone() / dn.clone(),
                        s(slack),
                        (st + s::<S>(slack - 1) * up) / ud,
                    ),
                );
            m3 && m4
        }
    }
}

/// `G = min(⌈1/P̃⌉, M)` for a ramp rate.
pub fn ramp_gate<S: Scalar>(rate: &S, size: i64) -> i64 {
    (S::one() / rate.clone()).ceil_int().min(size)
}

/// Fraction of ramp rows removed by the facet filter in one window.
pub fn redundancy_ratio(size: i64, g1: i64, g2: i64) -> Result<f64, BoundError> {
    if size < 2 {
        return Err(BoundError::WindowTooSmall(size));
    }
    let total = 2 * size * (size - 1);
    let kept = (g1 - 1) * (2 * size - g1) + (g2 - 1) * (2 * size - g2);
    Ok((total - kept) as f64 / total as f64)
}
