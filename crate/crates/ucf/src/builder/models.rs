use super::elimination::{elimination_solve, BasisVar, ElimRowKind, EliminationSystem};
use super::{BuildError, BuildOptions, Family, Formulation, ModelKind, QuadTerm, Sense, VarKey};
use crate::bounds::{
    facet_predicate, lb_power_history, ub_power, ub_ramp, BoundKind, BoundQuery, FacetQuery, Proposition,
    RampParams,
};
use crate::instance::{normalize_unit, status_bounds, NormalizedUnit, StatusBounds, UcInstance, UnitParams};
use crate::scalar::Scalar;
use crate::windows::{
    consistency_rows, feasible_intervals, link_expression, online_history_row, packing_rows, Interval,
    IntervalSet, LinExpr, LinkKind,
};

type Expr = LinExpr<usize, f64>;

struct UnitCtx<'a> {
    params: &'a UnitParams,
    nu: NormalizedUnit,
    sb: StatusBounds,
    rp: RampParams<f64>,
    size: i64,
    windows: Vec<IntervalSet>,
    elim: Vec<EliminationSystem>,
}

struct Builder<'a> {
    inst: &'a UcInstance,
    kind: ModelKind,
    opts: BuildOptions,
    horizon: i64,
    f: Formulation,
    units: Vec<UnitCtx<'a>>,
}

/// Builds the formulation of `kind` for the instance. `windows` holds one
/// window size per unit and is ignored by the non-window models.
pub fn build_formulation(
    inst: &UcInstance,
    kind: ModelKind,
    windows: &[i64],
    opts: BuildOptions,
) -> Result<Formulation, BuildError> {
    let horizon = inst.t();
    if kind.uses_windows() && windows.len() != inst.units.len() {
        return Err(BuildError::WindowCount { expected: inst.units.len(), got: windows.len() });
    }
    let mut units = Vec::new();
    for (i, p) in inst.units.iter().enumerate() {
        let nu = normalize_unit(p)?;
        let sb = status_bounds(&nu, horizon);
        let rp = RampParams::from_unit(&nu, &sb);
        let (size, wins, elim) = if kind.uses_windows() {
            let size = windows[i];
            if size < 2 || size > horizon + 1 {
                return Err(BuildError::WindowSize { unit: p.id.clone(), size, max: horizon + 1 });
            }
            let history = kind == ModelKind::MpTi;
            let wins = (0..=horizon - size + 1)
                .map(|m| feasible_intervals(&nu, &sb, m, size, horizon, history))
                .collect::<Result<Vec<_>, _>>()?;
            let elim = if matches!(kind, ModelKind::Mp3 | ModelKind::MpTi) {
                wins.iter().map(elimination_solve).collect()
            } else {
                Vec::new()
            };
            (size, wins, elim)
        } else {
            (0, Vec::new(), Vec::new())
        };
        units.push(UnitCtx { params: p, nu, sb, rp, size, windows: wins, elim });
    }
    let mut f = Formulation::new(kind, horizon);
    f.windows = units.iter().map(|u| u.size).collect();
    f.set_initial_on(units.iter().map(|u| u.nu.u0).collect());
    let mut b = Builder { inst, kind, opts, horizon, f, units };
    b.create_variables();
    b.objective();
    if opts.include_system_rows {
        b.system_rows();
    }
    for i in 0..b.units.len() {
        b.commitment_rows(i);
        b.startup_rows(i);
        match kind {
            ModelKind::TwoP => b.two_period_rows(i),
            ModelKind::ThreeP => b.three_period_rows(i),
            ModelKind::ThreePHd => b.three_period_hd_rows(i),
            _ => b.window_rows(i)?,
        }
    }
    Ok(b.f)
}

fn bin(x: bool) -> f64 {
    if x {
        1.0
    } else {
        0.0
    }
}

impl<'a> Builder<'a> {
    fn has_uvw(&self) -> bool {
        self.kind != ModelKind::Mp1
    }

    fn var(&self, key: VarKey) -> Expr {
        Expr::var(self.f.var_id(&key).unwrap_or_else(|| panic!("missing variable {}", key.name())))
    }

    fn create_variables(&mut self) {
        let t_max = self.horizon;
        for i in 0..self.units.len() {
            if self.has_uvw() {
                for t in 0..=t_max {
                    self.f.add_var(VarKey::U { unit: i, t }, 0.0, 1.0, true);
                }
                for t in 1..=t_max {
                    self.f.add_var(VarKey::V { unit: i, t }, 0.0, 1.0, true);
                }
                for t in 1..=t_max {
                    self.f.add_var(VarKey::W { unit: i, t }, 0.0, 1.0, true);
                }
            }
            if self.kind == ModelKind::ThreePHd && self.units[i].nu.t_on == 1 {
                for t in 1..t_max {
                    self.f.add_var(VarKey::Tau3 { unit: i, t }, 0.0, 1.0, true);
                }
            }
            let eliminated = matches!(self.kind, ModelKind::Mp3 | ModelKind::MpTi);
            let wins = self.units[i].windows.clone();
            for a in &wins {
                for iv in &a.intervals {
                    if !eliminated || (a.m < iv.h && iv.k < a.end()) {
                        self.f.add_var(VarKey::Tau { unit: i, m: a.m, h: iv.h, k: iv.k }, 0.0, 1.0, true);
                    }
                }
            }
            let p_hi = if self.kind.physical_power() { self.units[i].params.p_max } else { 1.0 };
            for t in 1..=t_max {
                self.f.add_var(VarKey::P { unit: i, t }, 0.0, p_hi, false);
            }
            for t in 1..=t_max {
                self.f.add_var(VarKey::S { unit: i, t }, 0.0, f64::INFINITY, false);
            }
        }
    }

    fn window_index(&self, i: usize, m: i64) -> usize {
        let idx = (m - self.units[i].windows[0].m) as usize;
        debug_assert_eq!(self.units[i].windows[idx].m, m);
        idx
    }

    /// Interval variable of window `m` as an expression over model variables.
    fn tau(&self, i: usize, m: i64, iv: Interval) -> Expr {
        let wi = self.window_index(i, m);
        let u = &self.units[i];
        match self.kind {
            ModelKind::Mp3 | ModelKind::MpTi => {
                let x = &u.elim[wi].substituted[&iv];
                let mut e = Expr::new();
                for (bv, c) in x.terms() {
                    let key = match *bv {
                        BasisVar::U(t) => VarKey::U { unit: i, t },
                        BasisVar::V(t) => VarKey::V { unit: i, t },
                        BasisVar::Tau(b) => VarKey::Tau { unit: i, m, h: b.h, k: b.k },
                    };
                    e.add_scaled(&self.var(key), c.to_f64());
                }
                e
            }
            _ => {
                if u.windows[wi].contains(&iv) {
                    self.var(VarKey::Tau { unit: i, m, h: iv.h, k: iv.k })
                } else {
                    Expr::new()
                }
            }
        }
    }

    fn link(&self, i: usize, m: i64, kind: LinkKind, t: i64) -> Expr {
        let wi = self.window_index(i, m);
        let e: LinExpr<Interval, f64> = link_expression(&self.units[i].windows[wi], kind, t).expect("period in window");
        e.substitute(|iv| self.tau(i, m, *iv))
    }

    fn last_window(&self, i: usize) -> i64 {
        self.horizon - self.units[i].size + 1
    }

    fn u(&self, i: usize, t: i64) -> Expr {
        if self.has_uvw() {
            self.var(VarKey::U { unit: i, t })
        } else {
            self.link(i, t.min(self.last_window(i)), LinkKind::U, t)
        }
    }

    fn v(&self, i: usize, t: i64) -> Expr {
        if self.has_uvw() {
            self.var(VarKey::V { unit: i, t })
        } else {
            let size = self.units[i].size;
            self.link(i, (t - size + 1).max(0), LinkKind::V, t)
        }
    }

    fn w(&self, i: usize, t: i64) -> Expr {
        if self.has_uvw() {
            self.var(VarKey::W { unit: i, t })
        } else {
            self.link(i, (t - 1).min(self.last_window(i)), LinkKind::W, t)
        }
    }

    /// Output variable; period 0 is data.
    fn p(&self, i: usize, t: i64) -> Expr {
        if t == 0 {
            let u = &self.units[i];
            let p0 = if self.kind.physical_power() { u.params.initial_output() } else { u.nu.pt0 * bin(u.nu.u0) };
            Expr::constant_expr(p0)
        } else {
            self.var(VarKey::P { unit: i, t })
        }
    }

    fn tau3(&self, i: usize, t: i64) -> Expr {
        match self.f.var_id(&VarKey::Tau3 { unit: i, t }) {
            Some(id) => Expr::var(id),
            None => Expr::new(),
        }
    }

    fn row(&mut self, family: Family, name: String, expr: Expr, sense: Sense, rhs: f64) {
        self.f.add_row(family, name, expr, sense, rhs);
    }

    fn objective(&mut self) {
        let t_max = self.horizon;
        for i in 0..self.units.len() {
            let (params, nu) = (self.units[i].params, self.units[i].nu.clone());
            for t in 1..=t_max {
                let p_id = self.f.var_id(&VarKey::P { unit: i, t }).unwrap();
                let s = self.var(VarKey::S { unit: i, t });
                let mut obj = std::mem::take(&mut self.f.objective);
                obj.add_scaled(&s, 1.0);
                if self.kind.physical_power() {
                    obj.add_scaled(&self.u(i, t), params.alpha);
                    obj.add_term(p_id, params.beta);
                    if params.gamma > 0.0 {
                        self.f.quad.push(QuadTerm { i: p_id, j: p_id, coef: params.gamma, lo: params.p_min, hi: params.p_max });
                    }
                } else {
                    obj.add_scaled(&self.u(i, t), nu.at);
                    obj.add_term(p_id, nu.bt);
                    obj.add_scaled(&self.v(i, t), params.c_hot);
                    if nu.gt > 0.0 {
                        self.f.quad.push(QuadTerm { i: p_id, j: p_id, coef: nu.gt, lo: 0.0, hi: 1.0 });
                    }
                }
                self.f.objective = obj;
            }
        }
    }

    fn system_rows(&mut self) {
        for t in 1..=self.horizon {
            let d = self.inst.demand[t as usize - 1];
            let r = self.inst.reserve[t as usize - 1];
            let mut bal = Expr::new();
            let mut res = Expr::new();
            for i in 0..self.units.len() {
                let params = self.units[i].params;
                if self.kind.physical_power() {
                    bal.add_scaled(&self.p(i, t), 1.0);
                } else {
                    bal.add_scaled(&self.p(i, t), self.units[i].nu.range);
                    bal.add_scaled(&self.u(i, t), params.p_min);
                }
                res.add_scaled(&self.u(i, t), params.p_max);
            }
            self.row(Family::PowerBalance, format!("balance_{t}"), bal, Sense::Eq, d);
            self.row(Family::Reserve, format!("reserve_{t}"), res, Sense::Ge, d + r);
        }
    }

    fn commitment_rows(&mut self, i: usize) {
        let t_max = self.horizon;
        let (sb, t_on, t_off, u0) = {
            let u = &self.units[i];
            (u.sb, u.nu.t_on, u.nu.t_off, u.nu.u0)
        };
        if self.has_uvw() {
            for t in 1..=t_max {
                let e = self.v(i, t).plus(&self.w(i, t), -1.0).plus(&self.u(i, t), -1.0).plus(&self.u(i, t - 1), 1.0);
                self.row(Family::Logic, format!("logic_{i}_{t}"), e, Sense::Eq, 0.0);
            }
        }
        for t in 0..=(sb.w_lock + sb.l_lock).min(t_max) {
            let e = self.u(i, t);
            self.row(Family::InitialStatus, format!("init_{i}_{t}"), e, Sense::Eq, bin(u0));
        }
        let size = self.units[i].size;
        let kind = self.kind;
        let min_rows = |hold: i64| kind != ModelKind::Mp1 || hold >= size;
        if min_rows(t_on) {
            for t in (sb.w_lock + 1)..=t_max {
                let mut e = self.u(i, t).scaled(-1.0);
                for om in ((t - t_on).max(0) + 1)..=t {
                    e.add_scaled(&self.v(i, om), 1.0);
                }
                self.row(Family::MinUp, format!("minup_{i}_{t}"), e, Sense::Le, 0.0);
            }
        }
        if min_rows(t_off) {
            for t in (sb.l_lock + 1)..=t_max {
                let mut e = self.u(i, t);
                for om in ((t - t_off).max(0) + 1)..=t {
                    e.add_scaled(&self.w(i, om), 1.0);
                }
                self.row(Family::MinDown, format!("mindown_{i}_{t}"), e, Sense::Le, 1.0);
            }
        }
        if self.kind == ModelKind::MpTi {
            for a in self.units[i].windows.clone() {
                if let Some(e) = online_history_row::<f64>(&a, t_max) {
                    let e = e.substitute(|iv| self.tau(i, a.m, *iv));
                    self.row(Family::OnlineHistory, format!("online_{i}_{}", a.m), e, Sense::Eq, 1.0);
                }
            }
        }
    }

    /// Startup-cost rows with the hot/cold flag `m_t`.
    fn startup_rows(&mut self, i: usize) {
        let params = self.units[i].params;
        let t0 = params.t0_signed;
        let lag = params.t_off + params.t_cold;
        for t in 1..=self.horizon {
            let hot_flag = t - lag <= 0 && (-t0).max(0) < (t - lag - 1).abs() + 1;
            let s = self.var(VarKey::S { unit: i, t });
            let scale = if self.kind.physical_power() {
                let e = s.clone().plus(&self.v(i, t), -params.c_hot);
                self.row(Family::StartHot, format!("starthot_{i}_{t}"), e, Sense::Ge, 0.0);
                params.c_cold
            } else {
                params.c_cold - params.c_hot
            };
            let mut e = s.plus(&self.v(i, t), -scale);
            for pi in (t - lag).max(1)..t {
                e.add_scaled(&self.w(i, pi), scale);
            }
            self.row(Family::StartCost, format!("startcost_{i}_{t}"), e, Sense::Ge, -scale * bin(hot_flag));
        }
    }

    fn two_period_rows(&mut self, i: usize) {
        self.mw_output_rows(i, false);
        let t_max = self.horizon;
        for t in 1..=t_max {
            self.ramp_up_1(i, t);
            self.ramp_down_1(i, t);
        }
    }

    fn mw_output_rows(&mut self, i: usize, upper_last_only: bool) {
        let p = self.units[i].params;
        for t in 1..=self.horizon {
            let lb = self.u(i, t).scaled(p.p_min).plus(&self.p(i, t), -1.0);
            self.row(Family::GenLb, format!("genlb_{i}_{t}"), lb, Sense::Le, 0.0);
            if !upper_last_only || t == self.horizon {
                let ub = self.p(i, t).plus(&self.u(i, t), -p.p_max);
                self.row(Family::GenUb, format!("genub_{i}_{t}"), ub, Sense::Le, 0.0);
            }
        }
    }

    fn ramp_up_1(&mut self, i: usize, t: i64) {
        let p = self.units[i].params;
        let e = self.p(i, t)
            .plus(&self.p(i, t - 1), -1.0)
            .plus(&self.u(i, t), -(p.p_up + p.p_min))
            .plus(&self.u(i, t - 1), p.p_min)
            .plus(&self.v(i, t), -(p.p_start - p.p_up - p.p_min));
        self.row(Family::RampUp, format!("rampup_{i}_{t}"), e, Sense::Le, 0.0);
    }

    fn ramp_down_1(&mut self, i: usize, t: i64) {
        let p = self.units[i].params;
        let e = self.p(i, t - 1)
            .plus(&self.p(i, t), -1.0)
            .plus(&self.u(i, t - 1), -(p.p_down + p.p_min))
            .plus(&self.u(i, t), p.p_min)
            .plus(&self.w(i, t), -(p.p_shut - p.p_down - p.p_min));
        self.row(Family::RampDown, format!("rampdown_{i}_{t}"), e, Sense::Le, 0.0);
    }

    fn three_period_rows(&mut self, i: usize) {
        self.mw_output_rows(i, true);
        let p = self.units[i].params;
        let t_max = self.horizon;
        let (pmax, pmin, ps, psh, up, dn) = (p.p_max, p.p_min, p.p_start, p.p_shut, p.p_up, p.p_down);
        let long_on = p.t_on > 1;
        let in_l = up > psh - pmin;
        let in_l_down = dn > ps - pmin;
        for t in 1..t_max {
            if long_on {
                let e = self.p(i, t)
                    .plus(&self.u(i, t), -pmax)
                    .plus(&self.v(i, t), pmax - ps)
                    .plus(&self.w(i, t + 1), pmax - psh);
                self.row(Family::GenUb, format!("genub3_{i}_{t}"), e, Sense::Le, 0.0);
            } else {
                let e = self.p(i, t)
                    .plus(&self.u(i, t), -pmax)
                    .plus(&self.v(i, t), pmax - ps)
                    .plus(&self.w(i, t + 1), (ps - psh).max(0.0));
                self.row(Family::GenUb, format!("genub3a_{i}_{t}"), e, Sense::Le, 0.0);
                let e = self.p(i, t)
                    .plus(&self.u(i, t), -pmax)
                    .plus(&self.w(i, t + 1), pmax - psh)
                    .plus(&self.v(i, t), (psh - ps).max(0.0));
                self.row(Family::GenUb, format!("genub3b_{i}_{t}"), e, Sense::Le, 0.0);
            }
        }
        for t in 1..=t_max {
            if !(long_on && in_l) || t == t_max {
                self.ramp_up_1(i, t);
            }
            if !(long_on && in_l_down) || t == 1 {
                self.ramp_down_1(i, t);
            }
        }
        if long_on && in_l {
            for t in 1..t_max {
                let e = self.p(i, t)
                    .plus(&self.p(i, t - 1), -1.0)
                    .plus(&self.u(i, t), -up)
                    .plus(&self.w(i, t), pmin)
                    .plus(&self.w(i, t + 1), up - psh + pmin)
                    .plus(&self.v(i, t), -(ps - up));
                self.row(Family::RampUp, format!("rampup2_{i}_{t}"), e, Sense::Le, 0.0);
            }
        }
        if long_on && in_l_down {
            for t in 2..=t_max {
                let e = self.p(i, t - 1)
                    .plus(&self.p(i, t), -1.0)
                    .plus(&self.u(i, t), -dn)
                    .plus(&self.w(i, t), -psh)
                    .plus(&self.v(i, t - 1), dn - ps + pmin)
                    .plus(&self.v(i, t), dn + pmin);
                self.row(Family::RampDown, format!("rampdown2_{i}_{t}"), e, Sense::Le, 0.0);
            }
        }
        if long_on && p.t_off > 1 && in_l {
            for t in 1..t_max {
                let e = self.p(i, t + 1)
                    .plus(&self.p(i, t - 1), -1.0)
                    .plus(&self.u(i, t + 1), -2.0 * up)
                    .plus(&self.w(i, t), pmin)
                    .plus(&self.w(i, t + 1), pmin)
                    .plus(&self.v(i, t), -(ps - up))
                    .plus(&self.v(i, t + 1), -(ps - 2.0 * up));
                self.row(Family::RampUp3, format!("rampup3_{i}_{t}"), e, Sense::Le, 0.0);
            }
        }
    }

    fn three_period_hd_rows(&mut self, i: usize) {
        let nu = self.units[i].nu.clone();
        let (st, sh, up, dn) = (nu.pt_start, nu.pt_shut, nu.pt_up, nu.pt_down);
        let pos = |x: f64| x.max(0.0);
        let t_max = self.horizon;
        for t in 1..t_max {
            let x = self.tau3(i, t);
            if nu.t_on == 1 {
                let e = x.clone().plus(&self.v(i, t), -1.0).plus(&self.w(i, t + 1), -1.0).plus(&self.u(i, t), 1.0);
                self.row(Family::Tau3, format!("tau3a_{i}_{t}"), e, Sense::Ge, 0.0);
                let e = x.clone().plus(&self.w(i, t + 1), -1.0);
                self.row(Family::Tau3, format!("tau3b_{i}_{t}"), e, Sense::Le, 0.0);
                let e = x.clone().plus(&self.v(i, t), -1.0);
                self.row(Family::Tau3, format!("tau3c_{i}_{t}"), e, Sense::Le, 0.0);
            }
            let rhs = self.u(i, t - 1)
                .plus(&self.w(i, t), -(1.0 - sh))
                .plus(&self.w(i, t + 1), -(1.0 - dn - sh))
                .plus(&x, 1.0 - dn - sh);
            self.row(Family::GenUb, format!("genub_prev_{i}_{t}"), self.p(i, t - 1).plus(&rhs, -1.0), Sense::Le, 0.0);
            let rhs = self.u(i, t)
                .plus(&self.v(i, t), -(1.0 - st))
                .plus(&self.w(i, t + 1), -(1.0 - sh))
                .plus(&x, 1.0 - st.max(sh));
            self.row(Family::GenUb, format!("genub_mid_{i}_{t}"), self.p(i, t).plus(&rhs, -1.0), Sense::Le, 0.0);
            let rhs = self.u(i, t + 1)
                .plus(&self.v(i, t), -(1.0 - up - st))
                .plus(&self.v(i, t + 1), -(1.0 - st))
                .plus(&x, 1.0 - up - st);
            self.row(Family::GenUb, format!("genub_next_{i}_{t}"), self.p(i, t + 1).plus(&rhs, -1.0), Sense::Le, 0.0);

            let lhs = self.p(i, t).plus(&self.p(i, t - 1), -1.0);
            let rhs = self.v(i, t).scaled(st - up)
                .plus(&x, pos(up - sh) - pos(st - sh))
                .plus(&self.u(i, t), up)
                .plus(&self.w(i, t + 1), -pos(up - sh));
            self.row(Family::RampUp, format!("rampup_a_{i}_{t}"), lhs.plus(&rhs, -1.0), Sense::Le, 0.0);
            if t == t_max - 1 {
                let lhs = self.p(i, t + 1).plus(&self.p(i, t), -1.0);
                let rhs = self.u(i, t + 1).scaled(up).plus(&self.v(i, t + 1), st - up);
                self.row(Family::RampUp, format!("rampup_b_{i}_{t}"), lhs.plus(&rhs, -1.0), Sense::Le, 0.0);
            }
            let lhs = self.p(i, t + 1).plus(&self.p(i, t - 1), -1.0);
            let rhs = self.u(i, t + 1).scaled(2.0 * up)
                .plus(&self.v(i, t), st - up)
                .plus(&self.v(i, t + 1), st - 2.0 * up)
                .plus(&x, up - st);
            self.row(Family::RampUp3, format!("rampup_c_{i}_{t}"), lhs.plus(&rhs, -1.0), Sense::Le, 0.0);
            if t == 1 {
                let lhs = self.p(i, t - 1).plus(&self.p(i, t), -1.0);
                let rhs = self.u(i, t - 1).scaled(dn).plus(&self.w(i, t), sh - dn);
                self.row(Family::RampDown, format!("rampdown_a_{i}_{t}"), lhs.plus(&rhs, -1.0), Sense::Le, 0.0);
            }
            let lhs = self.p(i, t).plus(&self.p(i, t + 1), -1.0);
            let rhs = self.w(i, t + 1).scaled(sh - dn)
                .plus(&x, pos(dn - st) - pos(sh - st))
                .plus(&self.u(i, t), dn)
                .plus(&self.v(i, t), -pos(dn - st));
            self.row(Family::RampDown, format!("rampdown_b_{i}_{t}"), lhs.plus(&rhs, -1.0), Sense::Le, 0.0);
            let lhs = self.p(i, t - 1).plus(&self.p(i, t + 1), -1.0);
            let rhs = self.u(i, t - 1).scaled(2.0 * dn)
                .plus(&self.w(i, t), sh - 2.0 * dn)
                .plus(&self.w(i, t + 1), sh - dn)
                .plus(&x, dn - sh);
            self.row(Family::RampDown3, format!("rampdown_c_{i}_{t}"), lhs.plus(&rhs, -1.0), Sense::Le, 0.0);
        }
    }

    fn window_rows(&mut self, i: usize) -> Result<(), BuildError> {
        let wins = self.units[i].windows.clone();
        for (wi, a) in wins.iter().enumerate() {
            match self.kind {
                ModelKind::Mp1 => {
                    for (t, e) in packing_rows::<f64>(a) {
                        let e = e.substitute(|iv| self.tau(i, a.m, *iv));
                        self.row(Family::Packing, format!("pack_{i}_{}_{t}", a.m), e, Sense::Le, 1.0);
                    }
                    if let Some(b) = wins.get(wi + 1) {
                        for (kind, t, e) in consistency_rows::<f64>(a, b) {
                            let e = e.substitute(|(m, iv)| self.tau(i, *m, *iv));
                            let tag = if kind == LinkKind::U { "u" } else { "v" };
                            self.row(Family::Consistency, format!("cons{tag}_{i}_{}_{t}", a.m), e, Sense::Eq, 0.0);
                        }
                    }
                }
                ModelKind::Mp2 => {
                    for t in a.periods() {
                        let e = self.u(i, t).plus(&self.link(i, a.m, LinkKind::U, t), -1.0);
                        self.row(Family::Linking, format!("linku_{i}_{}_{t}", a.m), e, Sense::Eq, 0.0);
                    }
                    for t in (a.m + 1)..=a.end() {
                        let e = self.v(i, t).plus(&self.link(i, a.m, LinkKind::V, t), -1.0);
                        self.row(Family::Linking, format!("linkv_{i}_{}_{t}", a.m), e, Sense::Eq, 0.0);
                        let e = self.w(i, t).plus(&self.link(i, a.m, LinkKind::W, t), -1.0);
                        self.row(Family::Linking, format!("linkw_{i}_{}_{t}", a.m), e, Sense::Eq, 0.0);
                    }
                }
                _ => {
                    let rows = self.units[i].elim[wi].bound_rows.clone();
                    for (iv, kind) in rows {
                        let e = self.tau(i, a.m, iv);
                        let name = format!("elim_{i}_{}_{}_{}", a.m, iv.h, iv.k);
                        match kind {
                            ElimRowKind::Zero => self.row(Family::EliminationBound, name, e, Sense::Eq, 0.0),
                            ElimRowKind::Range01 => {
                                if e.len() == 1 && e.terms().all(|(_, c)| *c == 1.0) && *e.constant() == 0.0 {
                                    continue;
                                }
                                self.row(Family::EliminationBound, format!("{name}_lo"), e.clone(), Sense::Ge, 0.0);
                                self.row(Family::EliminationBound, format!("{name}_hi"), e, Sense::Le, 1.0);
                            }
                        }
                    }
                }
            }
            self.power_rows(i, a)?;
        }
        Ok(())
    }

    fn history_tables(&self, i: usize, m: i64) -> bool {
        self.kind == ModelKind::MpTi && self.units[i].rp.history_tables_apply(m)
    }

    fn power_rows(&mut self, i: usize, a: &IntervalSet) -> Result<(), BuildError> {
        let (m, size, e) = (a.m, a.size, a.end());
        let hist = self.history_tables(i, m);
        let rp = self.units[i].rp.clone();
        let query = |kind, iv: Interval, t, aa| BoundQuery { kind, interval: iv, t, a: aa, m, size, history: hist, unit: &rp };
        if hist {
            for t in m.max(1)..=e {
                let lb = lb_power_history(Interval::new(m, e), t, &rp)?;
                if lb <= 0.0 {
                    continue;
                }
                let mut rhs = Expr::new();
                for iv in a.intervals.iter().filter(|iv| iv.h == m && iv.k >= t) {
                    rhs.add_scaled(&self.tau(i, m, *iv), lb);
                }
                let row = self.p(i, t).plus(&rhs, -1.0);
                self.row(Family::GenLb, format!("genlb_{i}_{m}_{t}"), row, Sense::Ge, 0.0);
            }
        }
        for t in m.max(1)..=e {
            let mut rhs = Expr::new();
            for iv in a.intervals.iter().filter(|iv| iv.contains(t)) {
                let c = ub_power(&query(BoundKind::GenUb, *iv, t, 0))?;
                rhs.add_scaled(&self.tau(i, m, *iv), c);
            }
            let row = self.p(i, t).plus(&rhs, -1.0);
            self.row(Family::GenUb, format!("genub_{i}_{m}_{t}"), row, Sense::Le, 0.0);
        }
        let nu = &self.units[i].nu;
        if m == 0 && self.kind != ModelKind::MpTi && nu.u0 && nu.pt0 > nu.pt_shut.min(1.0) {
            let mut lhs = Expr::new();
            for iv in a.intervals.iter().filter(|iv| iv.h == 0) {
                let c = ub_power(&query(BoundKind::GenUb, *iv, 0, 0))?;
                lhs.add_scaled(&self.tau(i, m, *iv), c);
            }
            let pt0 = nu.pt0;
            self.row(Family::GenUbInitial, format!("genub0_{i}"), lhs, Sense::Ge, pt0);
        }
        let last = self.last_window(i);
        for t in (m + 1)..=e {
            for aa in 1..=(t - m) {
                for kind in [BoundKind::RampUp, BoundKind::RampDown] {
                    let up = kind == BoundKind::RampUp;
                    if self.opts.ramp_window_restriction {
                        let keep = if up { m == last || aa == t - m } else { m == 0 || t == e };
                        if !keep {
                            continue;
                        }
                    }
                    if self.opts.facet_filter {
                        let prop = match (up, hist) {
                            (true, false) => Proposition::P3,
                            (false, false) => Proposition::P4,
                            (true, true) => Proposition::P9,
                            (false, true) => Proposition::P10,
                        };
                        if !facet_predicate(&FacetQuery { prop, t, a: aa, m, size, unit: &rp }) {
                            continue;
                        }
                    }
                    let mut rhs = Expr::new();
                    for iv in a.intervals.iter().filter(|iv| iv.contains(t) || iv.contains(t - aa)) {
                        let c = ub_ramp(&query(kind, *iv, t, aa))?;
                        rhs.add_scaled(&self.tau(i, m, *iv), c);
                    }
                    let (hi, lo) = if up { (t, t - aa) } else { (t - aa, t) };
                    let row = self.p(i, hi).plus(&self.p(i, lo), -1.0).plus(&rhs, -1.0);
                    let (family, tag) = if up { (Family::RampUp, "up") } else { (Family::RampDown, "down") };
                    self.row(family, format!("ramp{tag}_{i}_{m}_{t}_{aa}"), row, Sense::Le, 0.0);
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::UnitParams;
    use crate::windows::count_model_size;

    pub(crate) fn unit(id: &str) -> UnitParams {
        UnitParams {
            id: id.into(),
            p_min: 100.0,
            p_max: 400.0,
            p_start: 160.0,
            p_shut: 190.0,
            p_up: 120.0,
            p_down: 90.0,
            t_on: 1,
            t_off: 1,
            t_cold: 1,
            alpha: 10.0,
            beta: 2.0,
            gamma: 0.01,
            c_hot: 50.0,
            c_cold: 100.0,
            u0: 0,
            t0_signed: -2,
            p0: None,
        }
    }

    fn instance(t: usize) -> UcInstance {
        UcInstance { horizon: t, demand: vec![250.0; t], reserve: vec![25.0; t], units: vec![unit("a")] }
    }

    #[test]
    fn mp1_variable_counts() {
        let inst = instance(6);
        let f = build_formulation(&inst, ModelKind::Mp1, &[3], BuildOptions::default()).unwrap();
        let count = |pred: fn(&VarKey) -> bool| f.variables.iter().filter(|v| pred(&v.key)).count();
        assert_eq!(count(|k| matches!(k, VarKey::Tau { .. })), 30);
        assert_eq!(count(|k| matches!(k, VarKey::P { .. })), 6);
        assert_eq!(count(|k| matches!(k, VarKey::S { .. })), 6);
    }

    #[test]
    fn mp1_all_row_counts_match_formulas() {
        for size in 2..=6 {
            let inst = instance(5);
            let f = build_formulation(&inst, ModelKind::Mp1, &[size], BuildOptions::all_rows()).unwrap();
            let fam = f.family_counts();
            let want = count_model_size(size, 5, 1);
            assert_eq!(fam[&Family::GenUb] as i64, want.ub_rows, "M={size}");
            let ramps = fam.get(&Family::RampUp).copied().unwrap_or(0) + fam.get(&Family::RampDown).copied().unwrap_or(0);
            assert_eq!(ramps as i64, want.ramp_rows, "M={size}");
            let taus = f.variables.iter().filter(|v| matches!(v.key, VarKey::Tau { .. })).count();
            assert_eq!(taus as i64, want.n1);
        }
    }

    #[test]
    fn window_size_validated() {
        let inst = instance(4);
        assert!(matches!(
            build_formulation(&inst, ModelKind::Mp2, &[6], BuildOptions::default()),
            Err(BuildError::WindowSize { .. })
        ));
        assert!(matches!(
            build_formulation(&inst, ModelKind::Mp2, &[], BuildOptions::default()),
            Err(BuildError::WindowCount { .. })
        ));
    }

    #[test]
    fn schedule_binaries_satisfy_commitment_rows() {
        let inst = instance(5);
        for kind in ModelKind::ALL {
            let opts = BuildOptions { include_system_rows: false, ..BuildOptions::default() };
            let f = build_formulation(&inst, kind, &[3], opts).unwrap();
            let sched = vec![vec![false, true, true, false, true]];
            let fixed = f.binaries_from_schedule(&sched);
            let mut x = vec![0.0; f.num_vars()];
            for (id, v) in fixed {
                x[id] = v;
            }
            for r in &f.rows {
                let only_binary = r.expr.terms().all(|(j, _)| f.variables[*j].binary);
                if only_binary {
                    assert!(r.violation(&x) < 1e-9, "{kind}: {} violated", r.name);
                }
            }
        }
    }

    #[test]
    fn deterministic_output() {
        let inst = instance(5);
        let a = build_formulation(&inst, ModelKind::MpTi, &[4], BuildOptions::default()).unwrap();
        let b = build_formulation(&inst, ModelKind::MpTi, &[4], BuildOptions::default()).unwrap();
        assert_eq!(a.rows, b.rows);
        assert_eq!(a.variables, b.variables);
    }
}
