//! Parametrised feasible points of the window polytopes, families A1–A57.

use super::polytope::{Coord, Polytope};
use super::PolylabError;
use crate::bounds::RampParams;
use crate::scalar::{pos, rat, rat_abs, smin, Rat, Scalar};
use crate::windows::Interval;
use std::collections::BTreeMap;

pub const FAMILIES: std::ops::RangeInclusive<u8> = 1..=57;
const MAX_HALVINGS: u32 = 10;

/// Family indices; unused entries are ignored by families that do not cite them.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WitnessParams {
    pub r0: i64,
    pub r1: i64,
    pub r2: i64,
    pub r3: i64,
    pub r4: i64,
    pub a: i64,
    /// Ramp amount used by families A28–A53.
    pub ramp: Option<Rat>,
}

fn zero() -> Rat {
    <Rat as Scalar>::zero()
}

fn one() -> Rat {
    <Rat as Scalar>::one()
}

fn int(v: i64) -> Rat {
    Rat::from_i64(v)
}

fn min3(a: Rat, b: Rat, c: Rat) -> Rat {
    smin(smin(a, b), c)
}

fn abs(x: Rat) -> Rat {
    rat_abs(&x)
}

struct Gen<'a> {
    family: u8,
    u: &'a RampParams<Rat>,
    w: &'a WitnessParams,
    m: i64,
    e: i64,
    eps: Rat,
    tau: Vec<Interval>,
    p: BTreeMap<i64, Rat>,
}

impl Gen<'_> {
    fn bad(&self, reason: impl Into<String>) -> PolylabError {
        PolylabError::WitnessParams { family: self.family, reason: reason.into() }
    }

    /// `steps·num/den`, zero when `steps` is zero.
    fn frac(&self, steps: i64, num: Rat, den: i64) -> Result<Rat, PolylabError> {
        if steps == 0 {
            Ok(zero())
        } else if den == 0 {
            Err(self.bad("zero-length interpolation"))
        } else {
            Ok(int(steps) * num / int(den))
        }
    }

    fn ramp(&self) -> Result<Rat, PolylabError> {
        self.w.ramp.clone().ok_or_else(|| self.bad("ramp amount required"))
    }

    /// `P̃_ramp / a` slope.
    fn ramp_slope(&self) -> Result<Rat, PolylabError> {
        if self.w.a < 1 {
            return Err(self.bad("a must be at least 1"));
        }
        Ok(self.ramp()? / int(self.w.a))
    }

    fn on(&mut self, h: i64, k: i64) {
        self.tau.push(Interval::new(h, k));
    }

    fn set(&mut self, r: i64, v: Rat) {
        self.p.insert(r, v);
    }

    fn fill(&mut self, lo: i64, hi: i64, f: impl Fn(i64) -> Result<Rat, PolylabError>) -> Result<(), PolylabError> {
        for r in lo..=hi {
            let v = f(r)?;
            self.set(r, v);
        }
        Ok(())
    }

    fn perturb(&mut self, f: impl Fn(Rat, &Rat) -> Rat) {
        let r0 = self.w.r0;
        let v = self.p.get(&r0).cloned().unwrap_or_else(zero);
        let nv = f(v, &self.eps);
        self.set(r0, nv);
    }

    fn p0(&self) -> Rat {
        self.u.p0.clone()
    }

    /// `τ_{m,U}=1` with `P̃_r = max(0, P̃_0 − r·P̃_down)` on `[m, U]`.
    fn history_decay(&mut self) -> Result<(), PolylabError> {
        let (m, uu) = (self.m, self.u.u_run);
        self.on(m, uu);
        let (p0, dn) = (self.p0(), self.u.down.clone());
        self.fill(m, uu, |r| Ok(pos(p0.clone() - int(r) * dn.clone())))
    }

    /// Start-up/shut-down shape on `[r1, r2]` peaking at `r3`.
    fn startup_peak(&self, r1: i64, r2: i64, r3: i64) -> Rat {
        let u = self.u;
        min3(one(), u.start.clone() + int(r3 - r1) * u.up.clone(), u.shut.clone() + int(r2 - r3) * u.down.clone())
    }

    fn startup_shape(&self, x3: &Rat, r1: i64, r2: i64, r3: i64, r: i64) -> Result<Rat, PolylabError> {
        let u = self.u;
        Ok(x3.clone()
            - self.frac((r3 - r).max(0), pos(x3.clone() - u.start.clone()), r3 - r1)?
            - self.frac((r - r3).max(0), pos(x3.clone() - u.shut.clone()), r2 - r3)?)
    }

    /// History shape on `[m, r2]` rising from `P̃_0` to `x3` at `r3`.
    fn history_shape(&self, x3: &Rat, r2: i64, r3: i64, r: i64) -> Result<Rat, PolylabError> {
        Ok(x3.clone()
            - self.frac((r3 - r).max(0), x3.clone() - self.p0(), r3)?
            - self.frac((r - r3).max(0), pos(x3.clone() - self.u.shut.clone()), r2 - r3)?)
    }

    fn history_peak(&self, r2: i64, r3: i64) -> Rat {
        let u = self.u;
        min3(one(), self.p0() + int(r3) * u.up.clone(), u.shut.clone() + int(r2 - r3) * u.down.clone())
    }

    /// Shut-down tail `x4 − (r−r4)·max(0, x4 − P̃_shut)/(r2 − r4)` on `[r4+1, r2]`.
    fn shut_tail(&mut self, r4: i64, r2: i64) -> Result<(), PolylabError> {
        let x4 = self.p.get(&r4).cloned().unwrap_or_else(zero);
        let sh = self.u.shut.clone();
        for r in (r4 + 1)..=r2 {
            let v = x4.clone() - self.frac(r - r4, pos(x4.clone() - sh.clone()), r2 - r4)?;
            self.set(r, v);
        }
        Ok(())
    }

    /// Start-up head `x4 − (r4−r)·max(0, x4 − P̃_start)/(r4 − r1)` on `[r1, r4−1]`.
    fn start_head(&mut self, r1: i64, r4: i64) -> Result<(), PolylabError> {
        let x4 = self.p.get(&r4).cloned().unwrap_or_else(zero);
        let st = self.u.start.clone();
        for r in r1..r4 {
            let v = x4.clone() - self.frac(r4 - r, pos(x4.clone() - st.clone()), r4 - r1)?;
            self.set(r, v);
        }
        Ok(())
    }

    /// History head `P̃_0 − r·(P̃_0 − x)/r_x` on `[m, r_x − 1]`.
    fn history_head(&mut self, rx: i64) -> Result<(), PolylabError> {
        let x = self.p.get(&rx).cloned().unwrap_or_else(zero);
        let p0 = self.p0();
        for r in self.m..rx {
            let v = p0.clone() - self.frac(r, p0.clone() - x.clone(), rx)?;
            self.set(r, v);
        }
        Ok(())
    }

    fn check_ranges(&self) -> Result<(), PolylabError> {
        let w = self.w;
        let (m, e, uu, f) = (self.m, self.e, self.u.u_run, self.family);
        let inside = |v: i64, lo: i64, hi: i64| lo <= v && v <= hi;
        if w.r1 > w.r2 && !matches!(f, 1 | 2 | 18..=27 | 32..=39 | 44..=47 | 50..=55) {
            return Err(self.bad("r1 exceeds r2"));
        }
        let r2_span = if matches!(f, 7..=11 | 40..=43 | 56 | 57) { (m, w.r2) } else { (w.r1, w.r2) };
        let r0_ok = match f {
            4 | 6 | 13 | 15 => inside(w.r0, w.r1, w.r2),
            9 | 11 | 57 => inside(w.r0, m, w.r2),
            19 | 21 => inside(w.r0, w.r1, e),
            23 | 55 => inside(w.r0, m, e),
            42 => w.r4 < w.r0 && w.r0 <= w.r2,
            45 => w.r4 < w.r0 && w.r0 <= e,
            47 => inside(w.r0, m, e) && w.r0 != w.r4,
            51 => w.r3 < w.r0 && w.r0 <= e && w.r0 != w.r4,
            53 => inside(w.r0, m, w.r3 - 1),
            _ => true,
        };
        let r3_ok = match f {
            7..=9 | 40..=43 => inside(w.r3, m, w.r2),
            12..=15 | 28..=31 => inside(w.r3, w.r1, w.r2),
            16 | 17 | 48 | 49 => inside(w.r3, m, uu),
            18..=21 | 32..=39 => inside(w.r3, w.r1, e),
            22..=27 | 44..=47 | 50..=55 => inside(w.r3, m, e),
            _ => true,
        };
        let r4_ok = match f {
            16 | 28..=31 => inside(w.r4, w.r1, w.r2),
            40..=42 => inside(w.r4, m, w.r2),
            44..=47 => inside(w.r4, m, e),
            48 => inside(w.r4, m, uu),
            50..=53 => inside(w.r4, w.r3, e),
            _ => true,
        };
        let r1_ok = !matches!(f, 10 | 11) || inside(w.r1, m, w.r2);
        let span_ok = matches!(f, 1 | 2 | 22..=27 | 44..=47 | 50..=55)
            || (matches!(f, 18..=21 | 32..=39) && inside(w.r1, m, e))
            || (r2_span.0 <= r2_span.1 && inside(r2_span.0, m, e) && inside(r2_span.1, m, e));
        if !(r0_ok && r1_ok && r3_ok && r4_ok && span_ok) {
            return Err(self.bad("indices outside the family's ranges"));
        }
        if matches!(f, 28..=53) {
            self.ramp_slope()?;
        }
        Ok(())
    }

    fn build(&mut self) -> Result<(), PolylabError> {
        self.check_ranges()?;
        let w = self.w.clone();
        let (m, e) = (self.m, self.e);
        let (r1, r2, r3, r4) = (w.r1, w.r2, w.r3, w.r4);
        let u = self.u;
        let (st, sh, up, dn) = (u.start.clone(), u.shut.clone(), u.up.clone(), u.down.clone());
        let p0 = self.p0();
        let uu = u.u_run;
        let minus_eps_abs = |v: Rat, eps: &Rat| abs(v - eps.clone());
        let f = self.family;
        match f {
            1 => {}
            2 => {
                self.on(m, e);
                self.fill(m, e, |_| Ok(one()))?;
            }
            3 | 4 => {
                self.on(r1, r2);
                if f == 4 {
                    self.perturb(|_, eps| eps.clone());
                }
            }
            5 | 6 => {
                self.history_decay()?;
                self.on(r1, r2);
                if f == 6 {
                    self.perturb(|_, eps| eps.clone());
                }
            }
            7 => {
                self.on(m, r2);
                let x3 = smin(one(), sh.clone() + int(r2 - r3) * dn.clone());
                let g = &*self;
                let vals: Vec<Rat> = (m..=r2)
                    .map(|r| Ok(x3.clone() - g.frac((r - r3).max(0), pos(x3.clone() - sh.clone()), r2 - r3)?))
                    .collect::<Result<_, PolylabError>>()?;
                for (i, v) in vals.into_iter().enumerate() {
                    self.set(m + i as i64, v);
                }
            }
            8 | 9 => {
                self.on(m, r2);
                let x3 = self.history_peak(r2, r3);
                let vals = (m..=r2).map(|r| self.history_shape(&x3, r2, r3, r)).collect::<Result<Vec<_>, _>>()?;
                for (i, v) in vals.into_iter().enumerate() {
                    self.set(m + i as i64, v);
                }
                if f == 9 {
                    self.perturb(minus_eps_abs);
                }
            }
            10 | 11 => {
                self.on(m, r2);
                self.fill(m, r1, |r| Ok(pos(p0.clone() - int(r) * dn.clone())))?;
                let y1 = pos(p0.clone() - int(r1) * dn.clone());
                let drop = pos(y1.clone() - sh.clone());
                let vals = (r1..=r2)
                    .map(|r| Ok(y1.clone() - self.frac(r - r1, drop.clone(), r2 - r1)?))
                    .collect::<Result<Vec<_>, PolylabError>>()?;
                for (i, v) in vals.iter().enumerate() {
                    self.set(r1 + i as i64, v.clone());
                }
                if f == 11 {
                    let at = y1.clone() - self.frac(w.r0 - r1, drop, r2 - r1)?;
                    let eps = self.eps.clone();
                    self.set(w.r0, abs(at - eps));
                }
            }
            12..=15 => {
                if f >= 14 {
                    self.history_decay()?;
                }
                self.on(r1, r2);
                let x3 = self.startup_peak(r1, r2, r3);
                let vals = (r1..=r2).map(|r| self.startup_shape(&x3, r1, r2, r3, r)).collect::<Result<Vec<_>, _>>()?;
                for (i, v) in vals.into_iter().enumerate() {
                    self.set(r1 + i as i64, v);
                }
                if f == 13 || f == 15 {
                    self.perturb(minus_eps_abs);
                }
            }
            16 | 17 => {
                self.on(m, uu);
                let x3 = self.history_peak(uu, r3);
                let vals = (m..=uu).map(|r| self.history_shape(&x3, uu, r3, r)).collect::<Result<Vec<_>, _>>()?;
                for (i, v) in vals.into_iter().enumerate() {
                    self.set(m + i as i64, v);
                }
                self.on(r1, r2);
                if f == 16 {
                    let x4 = self.startup_peak(r1, r2, r4);
                    let vals =
                        (r1..=r2).map(|r| self.startup_shape(&x4, r1, r2, r4, r)).collect::<Result<Vec<_>, _>>()?;
                    for (i, v) in vals.into_iter().enumerate() {
                        self.set(r1 + i as i64, v);
                    }
                }
            }
            18..=21 => {
                if f >= 20 {
                    self.history_decay()?;
                }
                self.on(r1, e);
                let x3 = smin(one(), st.clone() + int(r3 - r1) * up.clone());
                let vals = (r1..=e)
                    .map(|r| Ok(x3.clone() - self.frac((r3 - r).max(0), pos(x3.clone() - st.clone()), r3 - r1)?))
                    .collect::<Result<Vec<_>, PolylabError>>()?;
                for (i, v) in vals.into_iter().enumerate() {
                    self.set(r1 + i as i64, v);
                }
                if f == 19 || f == 21 {
                    self.perturb(minus_eps_abs);
                }
            }
            22 | 23 => {
                self.on(m, e);
                let x3 = smin(one(), p0.clone() + int(r3) * up.clone());
                let vals = (m..=e)
                    .map(|r| Ok(x3.clone() - self.frac((r3 - r).max(0), x3.clone() - p0.clone(), r3)?))
                    .collect::<Result<Vec<_>, PolylabError>>()?;
                for (i, v) in vals.into_iter().enumerate() {
                    self.set(m + i as i64, v);
                }
                if f == 23 {
                    self.perturb(minus_eps_abs);
                }
            }
            24..=27 => {
                self.on(m, e);
                let eps = if f % 2 == 1 { self.eps.clone() } else { zero() };
                let (rate, rising) = if f <= 25 { (up.clone(), true) } else { (dn.clone(), false) };
                self.fill(m, e, |r| {
                    let steps = if rising { (r3 - r).max(0) } else { (r - r3).max(0) };
                    Ok(pos(one() - int(steps) * rate.clone() - eps.clone()))
                })?;
            }
            28 | 29 => {
                if f == 29 {
                    self.history_decay()?;
                }
                self.on(r1, r2);
                let x3 = self.startup_peak(r1, r2, r3);
                let slope = self.ramp_slope()?;
                for r in r4..=r2 {
                    let v = x3.clone()
                        - int((r3 - r).max(0)) * slope.clone()
                        - self.frac((r - r3).max(0), pos(x3.clone() - sh.clone()), r2 - r3)?;
                    self.set(r, v);
                }
                self.start_head(r1, r4)?;
            }
            30 | 31 => {
                if f == 31 {
                    self.history_decay()?;
                }
                self.on(r1, r2);
                let x3 = self.startup_peak(r1, r2, r3);
                let slope = self.ramp_slope()?;
                for r in r1..=r4 {
                    let v = x3.clone()
                        - int((r - r3).max(0)) * slope.clone()
                        - self.frac((r3 - r).max(0), pos(x3.clone() - st.clone()), r3 - r1)?;
                    self.set(r, v);
                }
                self.shut_tail(r4, r2)?;
            }
            32..=39 => {
                if matches!(f, 34 | 35 | 38 | 39) {
                    self.history_decay()?;
                }
                self.on(r1, e);
                let mut x3 = smin(one(), st.clone() + int(r3 - r1) * up.clone());
                if f % 2 == 1 {
                    x3 -= self.eps.clone();
                }
                let slope = self.ramp_slope()?;
                if f <= 35 {
                    for r in r1..=e {
                        self.set(r, pos(x3.clone() - int((r3 - r).max(0)) * slope.clone()));
                    }
                } else {
                    self.set(r3, x3.clone());
                    for r in (r3 + 1)..=e {
                        self.set(r, pos(x3.clone() - int(r - r3) * slope.clone()));
                    }
                    for r in r1..r3 {
                        let v = x3.clone() - self.frac(r3 - r, pos(x3.clone() - st.clone()), r3 - r1)?;
                        self.set(r, v);
                    }
                }
            }
            40 => {
                self.on(m, r2);
                let x3 = smin(one(), sh.clone() + int(r2 - r3) * dn.clone());
                let slope = self.ramp_slope()?;
                for r in m..=r4 {
                    self.set(r, x3.clone() - int((r - r3).max(0)) * slope.clone());
                }
                self.shut_tail(r4, r2)?;
            }
            41 | 42 => {
                self.on(m, r2);
                let x3 = self.history_peak(r2, r3);
                let slope = self.ramp_slope()?;
                for r in r4..=r2 {
                    let v = x3.clone()
                        - int((r3 - r).max(0)) * slope.clone()
                        - self.frac((r - r3).max(0), pos(x3.clone() - sh.clone()), r2 - r3)?;
                    self.set(r, v);
                }
                self.history_head(r4)?;
                if f == 42 {
                    self.perturb(minus_eps_abs);
                }
            }
            43 => {
                self.on(m, r2);
                let x3 = self.history_peak(r2, r3);
                let slope = self.ramp_slope()?;
                self.set(r3, x3.clone());
                for r in (r3 + 1)..=e {
                    self.set(r, pos(x3.clone() - int(r - r3) * slope.clone()));
                }
                self.history_head(r3)?;
            }
            44..=47 => {
                self.on(m, e);
                let mut x3 = smin(one(), p0.clone() + int(r3) * up.clone());
                if f >= 46 {
                    x3 -= self.eps.clone();
                }
                let slope = self.ramp_slope()?;
                for r in r4..=e {
                    self.set(r, x3.clone() - int((r3 - r).max(0)) * slope.clone());
                }
                self.history_head(r4)?;
                match f {
                    45 => self.perturb(minus_eps_abs),
                    47 => self.perturb(|v, eps| v - eps.clone()),
                    _ => {}
                }
            }
            48 | 49 => {
                self.on(m, uu);
                let x3 = self.history_peak(uu, r3);
                let slope = self.ramp_slope()?;
                if f == 48 {
                    for r in r4..=uu {
                        let v = x3.clone()
                            - int((r3 - r).max(0)) * slope.clone()
                            - self.frac((r - r3).max(0), pos(x3.clone() - sh.clone()), uu - r3)?;
                        self.set(r, v);
                    }
                    self.history_head(r4)?;
                } else {
                    for r in r3..=uu {
                        self.set(r, pos(x3.clone() - int(r - r3) * slope.clone()));
                    }
                    self.history_head(r3)?;
                }
                self.on(r1, r2);
            }
            50..=53 => {
                self.on(m, e);
                let mut x3 = smin(one(), p0.clone() + int(r3) * up.clone());
                if f >= 52 {
                    x3 -= self.eps.clone();
                }
                let slope = self.ramp_slope()?;
                self.set(r3, x3.clone());
                for r in (r3 + 1)..=r4 {
                    self.set(r, pos(x3.clone() - int(r - r3) * slope.clone()));
                }
                let x4 = self.p.get(&r4).cloned().unwrap_or_else(zero);
                for r in (r4 + 1)..=e {
                    self.set(r, x4.clone());
                }
                self.history_head(r3)?;
                match f {
                    51 => self.perturb(|v, eps| v + eps.clone()),
                    53 => self.perturb(|v, eps| v - eps.clone()),
                    _ => {}
                }
            }
            54 | 55 => {
                self.on(m, e);
                let x3 = pos(p0.clone() - int(r3) * dn.clone());
                let vals = (m..=e)
                    .map(|r| Ok(x3.clone() + self.frac((r3 - r).max(0), p0.clone() - x3.clone(), r3)?))
                    .collect::<Result<Vec<_>, PolylabError>>()?;
                for (i, v) in vals.into_iter().enumerate() {
                    self.set(m + i as i64, v);
                }
                if f == 55 {
                    self.perturb(minus_eps_abs);
                }
            }
            56 | 57 => {
                self.on(m, r2);
                let drop = pos(p0.clone() - sh.clone());
                let vals = (m..=r2)
                    .map(|r| Ok(p0.clone() - self.frac(r, drop.clone(), r2)?))
                    .collect::<Result<Vec<_>, PolylabError>>()?;
                for (i, v) in vals.into_iter().enumerate() {
                    self.set(m + i as i64, v);
                }
                if f == 57 {
                    self.perturb(minus_eps_abs);
                }
            }
            _ => return Err(self.bad("unknown family")),
        }
        Ok(())
    }

    fn point(&self, poly: &Polytope) -> Result<Vec<Rat>, PolylabError> {
        let mut x = vec![zero(); poly.dim_ambient()];
        for iv in &self.tau {
            let j = poly.tau_index(*iv).ok_or_else(|| self.bad(format!("[{},{}] not in A_m", iv.h, iv.k)))?;
            x[j] = x[j].clone() + one();
        }
        for (&r, v) in &self.p {
            if r < self.m || r > self.e {
                return Err(self.bad(format!("period {r} outside the window")));
            }
            if let Some(j) = poly.index_of(Coord::P(r)) {
                x[j] = v.clone();
            }
        }
        Ok(x)
    }
}

/// Point of family `A{family}` in `poly`, with ε = 1/64 halved until feasible.
pub fn witness_point(
    family: u8,
    params: &WitnessParams,
    poly: &Polytope,
    unit: &RampParams<Rat>,
) -> Result<Vec<Rat>, PolylabError> {
    if !FAMILIES.contains(&family) {
        return Err(PolylabError::WitnessParams { family, reason: "unknown family".into() });
    }
    let mut eps = rat(1, 64);
    for _ in 0..=MAX_HALVINGS {
        let mut g = Gen {
            family,
            u: unit,
            w: params,
            m: poly.m,
            e: poly.m + poly.size - 1,
            eps: eps.clone(),
            tau: Vec::new(),
            p: BTreeMap::new(),
        };
        g.build()?;
        let x = g.point(poly)?;
        if poly.contains(&x) {
            return Ok(x);
        }
        eps /= int(2);
    }
    Err(PolylabError::WitnessInfeasible { family })
}

/// Points of one family over several index choices.
pub fn witness_points(
    family: u8,
    params: &[WitnessParams],
    poly: &Polytope,
    unit: &RampParams<Rat>,
) -> Result<Vec<Vec<Rat>>, PolylabError> {
    params.iter().map(|w| witness_point(family, w, poly, unit)).collect()
}

fn uses_r0(f: u8) -> bool {
    matches!(f, 4 | 6 | 9 | 11 | 13 | 15 | 19 | 21 | 23 | 42 | 45 | 47 | 51 | 53 | 55 | 57)
}

fn uses_r4(f: u8) -> bool {
    matches!(f, 16 | 28..=31 | 40..=42 | 44..=48 | 50..=53)
}

fn uses_ramp(f: u8) -> bool {
    matches!(f, 28..=53)
}

/// Every in-range index choice of a family on `poly`, with ramp amounts
/// `min(1, a·up)`, `min(1, a·down)` and their start-up/shut-down caps.
pub fn candidate_params(family: u8, poly: &Polytope, unit: &RampParams<Rat>) -> Vec<WitnessParams> {
    let (m, e) = (poly.m, poly.m + poly.size - 1);
    let span = |used: bool| if used { (m..=e).collect::<Vec<_>>() } else { vec![m] };
    let r0s = span(uses_r0(family));
    let r4s = span(uses_r4(family));
    let aas: Vec<i64> = if uses_ramp(family) { (1..poly.size).collect() } else { vec![0] };
    let mut out = Vec::new();
    for &r0 in &r0s {
        for r1 in m..=e {
            for r2 in r1..=e {
                for r3 in m..=e {
                    for &r4 in &r4s {
                        for &a in &aas {
                            let ramps = if a == 0 {
                                vec![None]
                            } else {
                                let (one, up, dn) = (one(), unit.up.clone() * int(a), unit.down.clone() * int(a));
                                let cap_sh = unit.shut.clone() + int((r2 - r3).max(0)) * unit.down.clone();
                                let cap_st = unit.start.clone() + int((r3 - r1).max(0)) * unit.up.clone();
                                let mut v = vec![
                                    smin(one.clone(), up.clone()),
                                    smin(one.clone(), dn.clone()),
                                    min3(one.clone(), up, cap_sh),
                                    min3(one, dn, cap_st),
                                ];
                                v.sort();
                                v.dedup();
                                v.into_iter().map(Some).collect()
                            };
                            for ramp in ramps {
                                let w = WitnessParams { r0, r1, r2, r3, r4, a, ramp };
                                let g = Gen {
                                    family,
                                    u: unit,
                                    w: &w,
                                    m,
                                    e,
                                    eps: zero(),
                                    tau: Vec::new(),
                                    p: BTreeMap::new(),
                                };
                                if g.check_ranges().is_ok() {
                                    out.push(w);
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    out.dedup();
    out
}

/// Feasible points of a family over all candidate index choices.
pub fn feasible_witnesses(family: u8, poly: &Polytope, unit: &RampParams<Rat>) -> Vec<(WitnessParams, Vec<Rat>)> {
    candidate_params(family, poly, unit)
        .into_iter()
        .filter_map(|w| witness_point(family, &w, poly, unit).ok().map(|x| (w, x)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polylab::polytope::{build_polytope, PolytopeKind, RowFamily};
    use crate::windows::{interval_set, HistoryMode};

    fn unit() -> RampParams<Rat> {
        RampParams {
            start: rat(1, 4),
            shut: rat(3, 8),
            up: rat(3, 8),
            down: rat(1, 4),
            p0: rat(3, 4),
            u0: true,
            t_on: 1,
            t_off: 1,
            u_run: 2,
            k_run: 2,
        }
    }

    #[test]
    fn a1_is_origin_in_history_polytope() {
        let u = RampParams { u_run: 0, k_run: 0, ..unit() };
        let a = interval_set(1, 3, 1, 1, HistoryMode::Online { u: 0, t_on: 1 });
        let p = build_polytope(PolytopeKind::QTilde, &a, &u).unwrap();
        let x = witness_point(1, &WitnessParams::default(), &p, &u).unwrap();
        assert!(x.iter().all(|v| *v == zero()));
    }

    #[test]
    fn a2_is_tight_at_full_interval_bound() {
        let u = RampParams { u0: false, p0: zero(), u_run: 0, k_run: 0, ..unit() };
        let a = interval_set(0, 3, 1, 1, HistoryMode::None);
        let p = build_polytope(PolytopeKind::Q, &a, &u).unwrap();
        let x = witness_point(2, &WitnessParams::default(), &p, &u).unwrap();
        assert_eq!(x[p.tau_index(Interval::new(0, 2)).unwrap()], one());
        assert!(p.rows_of(RowFamily::GenUb).all(|(_, r)| r.tight(&x)));
    }

    #[test]
    fn a3_commits_at_zero_power() {
        let u = RampParams { u0: false, p0: zero(), u_run: 0, k_run: 0, ..unit() };
        let a = interval_set(0, 4, 1, 1, HistoryMode::None);
        let p = build_polytope(PolytopeKind::Q, &a, &u).unwrap();
        for iv in a.intervals.clone() {
            let w = WitnessParams { r1: iv.h, r2: iv.k, ..Default::default() };
            let x = witness_point(3, &w, &p, &u).unwrap();
            assert_eq!(x.iter().filter(|v| **v == one()).count(), 1);
        }
    }

    #[test]
    fn rejects_intervals_outside_the_set() {
        let u = RampParams { u0: false, p0: zero(), u_run: 0, k_run: 0, ..unit() };
        let a = interval_set(0, 3, 2, 1, HistoryMode::None);
        let p = build_polytope(PolytopeKind::Q, &a, &u).unwrap();
        let w = WitnessParams { r1: 1, r2: 1, ..Default::default() };
        assert!(matches!(witness_point(3, &w, &p, &u), Err(PolylabError::WitnessParams { .. })));
        assert!(matches!(witness_point(58, &w, &p, &u), Err(PolylabError::WitnessParams { .. })));
    }
}
