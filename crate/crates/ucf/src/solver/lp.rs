//! Bounded-variable revised simplex with a dense basis inverse.
//!
//! Every row `i` gets a logical column `r_i = a_i·x` bounded according to the
//! row sense, so the working system is `A x − r = 0` with the all-logical
//! basis as a starting point. Phase 1 minimizes the sum of bound violations
//! of the basic variables; phase 2 the true objective.

use super::{SolverConfig, SolverError};
use crate::builder::{Formulation, Sense};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub objective: f64,
    /// Values indexed by variable id.
    pub values: Vec<f64>,
    pub iterations: usize,
}

/// Column-wise copy of a linear formulation.
#[derive(Debug, Clone)]
pub(crate) struct LpData {
    pub n: usize,
    pub m: usize,
    pub cols: Vec<Vec<(usize, f64)>>,
    pub cost: Vec<f64>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub obj_const: f64,
}

impl LpData {
    pub fn from_formulation(f: &Formulation) -> Result<Self, SolverError> {
        if !f.is_linear() {
            return Err(SolverError::Quadratic);
        }
        let n = f.num_vars();
        let m = f.rows.len();
        let mut cols = vec![Vec::new(); n];
        let (mut lo, mut hi): (Vec<f64>, Vec<f64>) = f.variables.iter().map(|v| (v.lower, v.upper)).unzip();
        for (i, r) in f.rows.iter().enumerate() {
            for (&j, &c) in r.expr.terms() {
                cols[j].push((i, c));
            }
            let (l, h) = match r.sense {
                Sense::Le => (f64::NEG_INFINITY, r.rhs),
                Sense::Ge => (r.rhs, f64::INFINITY),
                Sense::Eq => (r.rhs, r.rhs),
            };
            lo.push(l);
            hi.push(h);
        }
        let mut cost = vec![0.0; n + m];
        for (&j, &c) in f.objective.terms() {
            cost[j] = c;
        }
        Ok(LpData { n, m, cols, cost, lo, hi, obj_const: *f.objective.constant() })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarState {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic free variable held at zero.
    Zero,
}

/// Basis snapshot for warm starts.
#[derive(Debug, Clone)]
pub(crate) struct Basis {
    head: Vec<usize>,
    state: Vec<VarState>,
}

#[derive(Debug, Clone)]
pub(crate) struct Simplex {
    pub data: LpData,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    x: Vec<f64>,
    head: Vec<usize>,
    state: Vec<VarState>,
    binv: Vec<f64>,
    since_refactor: usize,
    pub iterations: usize,
}

const PIVOT_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 64;

impl Simplex {
    pub fn new(data: LpData) -> Self {
        let (n, m) = (data.n, data.m);
        let lo = data.lo.clone();
        let hi = data.hi.clone();
        let mut state = vec![VarState::AtLower; n + m];
        for s in state.iter_mut().skip(n) {
            *s = VarState::Basic;
        }
        let mut binv = vec![0.0; m * m];
        for i in 0..m {
            binv[i * m + i] = -1.0;
        }
        let mut s = Simplex {
            data,
            lo,
            hi,
            x: vec![0.0; n + m],
            head: (n..n + m).collect(),
            state,
            binv,
            since_refactor: 0,
            iterations: 0,
        };
        s.place_nonbasic();
        s.recompute_basics();
        s
    }

    fn column(&self, j: usize) -> Vec<(usize, f64)> {
        if j < self.data.n {
            self.data.cols[j].clone()
        } else {
            vec![(j - self.data.n, -1.0)]
        }
    }

    fn place_nonbasic(&mut self) {
        for j in 0..self.x.len() {
            let (l, h) = (self.lo[j], self.hi[j]);
            let st = match self.state[j] {
                VarState::Basic => continue,
                VarState::AtUpper if h.is_finite() => VarState::AtUpper,
                _ if l.is_finite() => VarState::AtLower,
                _ if h.is_finite() => VarState::AtUpper,
                _ => VarState::Zero,
            };
            self.state[j] = st;
            self.x[j] = match st {
                VarState::AtLower => l,
                VarState::AtUpper => h,
                _ => 0.0,
            };
        }
    }

    /// `x_B = −B⁻¹ N x_N`.
    fn recompute_basics(&mut self) {
        let m = self.data.m;
        let mut rhs = vec![0.0; m];
        for j in 0..self.x.len() {
            if self.state[j] != VarState::Basic && self.x[j] != 0.0 {
                for (i, a) in self.column(j) {
                    rhs[i] -= a * self.x[j];
                }
            }
        }
        for r in 0..m {
            let row = &self.binv[r * m..(r + 1) * m];
            let v: f64 = row.iter().zip(&rhs).map(|(b, c)| b * c).sum();
            self.x[self.head[r]] = v;
        }
    }

    /// Rebuilds the dense inverse of the current basis. Returns false when
    /// the basis is numerically singular.
    fn refactor(&mut self) -> bool {
        let m = self.data.m;
        let mut a = vec![0.0; m * m];
        for (c, &j) in self.head.iter().enumerate() {
            for (i, v) in self.column(j) {
                a[i * m + c] = v;
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for c in 0..m {
            let p = (c..m).max_by(|&x, &y| a[x * m + c].abs().total_cmp(&a[y * m + c].abs())).unwrap();
            if a[p * m + c].abs() < 1e-11 {
                return false;
            }
            if p != c {
                for k in 0..m {
                    a.swap(p * m + k, c * m + k);
                    inv.swap(p * m + k, c * m + k);
                }
            }
            let d = 1.0 / a[c * m + c];
            for k in 0..m {
                a[c * m + k] *= d;
                inv[c * m + k] *= d;
            }
            for i in 0..m {
                let f = a[i * m + c];
                if i != c && f != 0.0 {
                    for k in 0..m {
                        a[i * m + k] -= f * a[c * m + k];
                        inv[i * m + k] -= f * inv[c * m + k];
                    }
                }
            }
        }
        self.binv = inv;
        self.since_refactor = 0;
        true
    }

    pub fn snapshot(&self) -> Basis {
        Basis { head: self.head.clone(), state: self.state.clone() }
    }

    /// Loads a basis; falls back to the slack basis when it is singular.
    pub fn load(&mut self, b: &Basis) {
        self.head = b.head.clone();
        self.state = b.state.clone();
        if !self.refactor() {
            let n = self.data.n;
            self.head = (n..n + self.data.m).collect();
            for j in 0..self.state.len() {
                self.state[j] = if j < n { VarState::AtLower } else { VarState::Basic };
            }
            self.refactor();
        }
        self.place_nonbasic();
        self.recompute_basics();
    }

    /// Applies new bounds to all variables and repositions the iterate.
    pub fn set_bounds(&mut self, lo: &[f64], hi: &[f64]) {
        self.lo.copy_from_slice(lo);
        self.hi.copy_from_slice(hi);
        self.place_nonbasic();
        self.recompute_basics();
    }

    fn ftran(&self, col: &[(usize, f64)]) -> Vec<f64> {
        let m = self.data.m;
        (0..m).map(|r| col.iter().map(|&(i, a)| self.binv[r * m + i] * a).sum()).collect()
    }

    fn infeasibility(&self, j: usize, tol: f64) -> f64 {
        if self.x[j] < self.lo[j] - tol {
            -1.0
        } else if self.x[j] > self.hi[j] + tol {
            1.0
        } else {
            0.0
        }
    }

    fn pivot(&mut self, r: usize, alpha: &[f64]) {
        let m = self.data.m;
        let p = alpha[r];
        let (before, rest) = self.binv.split_at_mut(r * m);
        let (prow, after) = rest.split_at_mut(m);
        for v in prow.iter_mut() {
            *v /= p;
        }
        for (i, row) in before.chunks_mut(m).chain(after.chunks_mut(m)).enumerate() {
            let i = if i < r { i } else { i + 1 };
            let f = alpha[i];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(prow.iter()) {
                    *v -= f * pv;
                }
            }
        }
        self.since_refactor += 1;
    }

    /// Runs phase 1 and phase 2 from the current basis.
    pub fn solve(&mut self, cfg: &SolverConfig) -> Result<LpStatus, SolverError> {
        let (n, m) = (self.data.n, self.data.m);
        let total = n + m;
        let ftol = cfg.feasibility_tol;
        let cmax = self.data.cost.iter().fold(1.0f64, |a, c| a.max(c.abs()));
        let limit = cfg.iteration_limit.unwrap_or(50_000 + 50 * total);
        let mut degenerate = 0usize;
        let mut bland = false;
        let mut cleanups = 0;
        loop {
            if self.iterations >= limit {
                return Err(SolverError::IterationLimit(self.iterations));
            }
            if self.since_refactor >= REFACTOR_EVERY {
                if !self.refactor() {
                    return Err(SolverError::Numerical("singular basis".into()));
                }
                self.recompute_basics();
            }
            let cb: Vec<f64> = self.head.iter().map(|&j| self.infeasibility(j, ftol)).collect();
            let phase1 = cb.iter().any(|&c| c != 0.0);
            let cb: Vec<f64> = if phase1 { cb } else { self.head.iter().map(|&j| self.data.cost[j]).collect() };
            let dtol = if phase1 { cfg.optimality_tol } else { cfg.optimality_tol * cmax };
            let mut y = vec![0.0; m];
            for (r, &c) in cb.iter().enumerate() {
                if c != 0.0 {
                    for (yk, b) in y.iter_mut().zip(&self.binv[r * m..(r + 1) * m]) {
                        *yk += c * b;
                    }
                }
            }
            let mut best: Option<(usize, f64)> = None;
            for j in 0..total {
                let st = self.state[j];
                if st == VarState::Basic || self.lo[j] == self.hi[j] {
                    continue;
                }
                let cj = if phase1 { 0.0 } else { self.data.cost[j] };
                let d = if j < n {
                    cj - self.data.cols[j].iter().map(|&(i, a)| y[i] * a).sum::<f64>()
                } else {
                    cj + y[j - n]
                };
                let attractive = match st {
                    VarState::AtLower => d < -dtol,
                    VarState::AtUpper => d > dtol,
                    VarState::Zero => d.abs() > dtol,
                    VarState::Basic => false,
                };
                if attractive {
                    if bland {
                        best = Some((j, d));
                        break;
                    }
                    if best.is_none_or(|(_, bd)| d.abs() > bd.abs()) {
                        best = Some((j, d));
                    }
                }
            }
            let Some((q, dq)) = best else {
                if phase1 {
                    return Ok(LpStatus::Infeasible);
                }
                if cleanups < 3 && self.since_refactor > 0 {
                    cleanups += 1;
                    self.refactor();
                    self.recompute_basics();
                    continue;
                }
                return Ok(LpStatus::Optimal);
            };
            let dir = if dq < 0.0 { 1.0 } else { -1.0 };
            let alpha = self.ftran(&self.column(q));
            // Harris two-pass ratio test.
            let bound_dist = |s: &Self, i: usize, relax: f64| -> Option<(f64, f64)> {
                let j = s.head[i];
                let delta = -dir * alpha[i];
                if delta.abs() < PIVOT_TOL {
                    return None;
                }
                let (x, l, h) = (s.x[j], s.lo[j], s.hi[j]);
                if delta < 0.0 {
                    let target = if x > h + ftol { h } else if x >= l - ftol { l } else { return None };
                    if !target.is_finite() {
                        return None;
                    }
                    Some(((x - target + relax).max(0.0) / -delta, target))
                } else {
                    let target = if x < l - ftol { l } else if x <= h + ftol { h } else { return None };
                    if !target.is_finite() {
                        return None;
                    }
                    Some(((target - x + relax).max(0.0) / delta, target))
                }
            };
            let mut theta_max = f64::INFINITY;
            for i in 0..m {
                if let Some((t, _)) = bound_dist(self, i, ftol) {
                    theta_max = theta_max.min(t);
                }
            }
            let mut leave: Option<(usize, f64, f64)> = None;
            if theta_max.is_finite() {
                let mut best_key = f64::NEG_INFINITY;
                for i in 0..m {
                    if let Some((t, target)) = bound_dist(self, i, 0.0) {
                        if t <= theta_max {
                            let key = if bland { -(self.head[i] as f64) } else { alpha[i].abs() };
                            if key > best_key {
                                best_key = key;
                                leave = Some((i, t, target));
                            }
                        }
                    }
                }
            }
            let range = self.hi[q] - self.lo[q];
            let flip = range.is_finite() && leave.is_none_or(|(_, t, _)| range <= t);
            if leave.is_none() && !flip {
                return if phase1 {
                    Err(SolverError::Numerical("unbounded phase-1 direction".into()))
                } else {
                    Ok(LpStatus::Unbounded)
                };
            }
            self.iterations += 1;
            let theta = if flip { range } else { leave.unwrap().1 };
            if theta < 1e-12 {
                degenerate += 1;
                if degenerate > 2 * total {
                    bland = true;
                }
            } else {
                degenerate = 0;
            }
            for (r, &a) in alpha.iter().enumerate() {
                if a != 0.0 {
                    self.x[self.head[r]] -= dir * theta * a;
                }
            }
            self.x[q] += dir * theta;
            if flip {
                self.state[q] = if dir > 0.0 { VarState::AtUpper } else { VarState::AtLower };
                self.x[q] = if dir > 0.0 { self.hi[q] } else { self.lo[q] };
                continue;
            }
            let (r, _, target) = leave.unwrap();
            let out = self.head[r];
            self.state[out] = if target == self.lo[out] { VarState::AtLower } else { VarState::AtUpper };
            self.x[out] = target;
            self.state[q] = VarState::Basic;
            self.head[r] = q;
            self.pivot(r, &alpha);
        }
    }

    pub fn objective(&self) -> f64 {
        self.data.obj_const + (0..self.data.n).map(|j| self.data.cost[j] * self.x[j]).sum::<f64>()
    }

    pub fn values(&self) -> Vec<f64> {
        self.x[..self.data.n].to_vec()
    }
}

/// Solves the continuous relaxation of a linear formulation.
pub fn solve_lp(f: &Formulation, cfg: &SolverConfig) -> Result<LpSolution, SolverError> {
    cfg.validate()?;
    let mut s = Simplex::new(LpData::from_formulation(f)?);
    let status = s.solve(cfg)?;
    let objective = match status {
        LpStatus::Optimal => s.objective(),
        LpStatus::Infeasible => f64::INFINITY,
        LpStatus::Unbounded => f64::NEG_INFINITY,
    };
    Ok(LpSolution { status, objective, values: s.values(), iterations: s.iterations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builder::{Family, ModelKind, VarKey};
    use crate::windows::LinExpr;

    fn lp(vars: &[(f64, f64)], obj: &[f64], rows: &[(&[f64], Sense, f64)]) -> Formulation {
        let mut f = Formulation::new(ModelKind::TwoP, 1);
        for (t, &(l, h)) in vars.iter().enumerate() {
            f.add_var(VarKey::P { unit: 0, t: t as i64 }, l, h, false);
        }
        for (j, &c) in obj.iter().enumerate() {
            f.objective.add_term(j, c);
        }
        for (k, (a, s, b)) in rows.iter().enumerate() {
            let mut e = LinExpr::new();
            for (j, &c) in a.iter().enumerate() {
                e.add_term(j, c);
            }
            f.add_row(Family::PowerBalance, format!("r{k}"), e, *s, *b);
        }
        f
    }

    #[test]
    fn single_bound_row() {
        let f = lp(&[(0.0, 10.0)], &[1.0], &[(&[1.0], Sense::Ge, 1.0)]);
        let s = solve_lp(&f, &SolverConfig::default()).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective - 1.0).abs() < 1e-12);
    }

    #[test]
    fn contradictory_rows_are_infeasible() {
        let f = lp(&[(0.0, 10.0), (0.0, 10.0)], &[1.0, 1.0], &[(&[1.0, 1.0], Sense::Le, 1.0), (&[1.0, 1.0], Sense::Ge, 2.0)]);
        assert_eq!(solve_lp(&f, &SolverConfig::default()).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_direction() {
        let f = lp(&[(0.0, f64::INFINITY)], &[-1.0], &[(&[1.0], Sense::Ge, 1.0)]);
        assert_eq!(solve_lp(&f, &SolverConfig::default()).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn small_production_plan() {
        // max 3x + 5y s.t. x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18 → 36 at (2, 6)
        let f = lp(
            &[(0.0, f64::INFINITY), (0.0, f64::INFINITY)],
            &[-3.0, -5.0],
            &[(&[1.0, 0.0], Sense::Le, 4.0), (&[0.0, 2.0], Sense::Le, 12.0), (&[3.0, 2.0], Sense::Le, 18.0)],
        );
        let s = solve_lp(&f, &SolverConfig::default()).unwrap();
        assert!((s.objective + 36.0).abs() < 1e-9);
        assert!((s.values[0] - 2.0).abs() < 1e-9 && (s.values[1] - 6.0).abs() < 1e-9);
    }

    #[test]
    fn equality_and_flips() {
        // min -x - y, x + y = 1.5, x,y ∈ [0,1]
        let f = lp(&[(0.0, 1.0), (0.0, 1.0)], &[-1.0, -2.0], &[(&[1.0, 1.0], Sense::Eq, 1.5)]);
        let s = solve_lp(&f, &SolverConfig::default()).unwrap();
        assert!((s.objective + 2.5).abs() < 1e-9, "{}", s.objective);
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's cycling example.
        let f = lp(
            &[(0.0, f64::INFINITY), (0.0, f64::INFINITY), (0.0, f64::INFINITY), (0.0, f64::INFINITY)],
            &[-0.75, 150.0, -0.02, 6.0],
            &[
                (&[0.25, -60.0, -0.04, 9.0], Sense::Le, 0.0),
                (&[0.5, -90.0, -0.02, 3.0], Sense::Le, 0.0),
                (&[0.0, 0.0, 1.0, 0.0], Sense::Le, 1.0),
            ],
        );
        let s = solve_lp(&f, &SolverConfig::default()).unwrap();
        assert!((s.objective + 0.05).abs() < 1e-9, "{}", s.objective);
    }
}
