//! Formulation assembly for the two-period, three-period and multi-period
//! models, variable elimination and piecewise-linear cost approximation.

mod elimination;
mod models;
mod piecewise;

pub use elimination::{elimination_matrix, elimination_solve, BasisVar, ElimRowKind, EliminationSystem};
pub use models::build_formulation;
pub use piecewise::piecewise_linearize;

use crate::bounds::BoundError;
use crate::instance::{normalize_unit, InstanceError, NormalizedUnit, UcInstance};
use crate::scalar::Scalar;
use crate::windows::{active_intervals, Interval, LinExpr, WindowError};
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("unknown model kind '{0}'")]
    UnknownKind(String),
    #[error("unit {unit}: window size {size} outside [2, {max}]")]
    WindowSize { unit: String, size: i64, max: i64 },
    #[error("expected {expected} window sizes, got {got}")]
    WindowCount { expected: usize, got: usize },
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Window(#[from] WindowError),
    #[error(transparent)]
    Bound(#[from] BoundError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelKind {
    TwoP,
    ThreeP,
    ThreePHd,
    Mp1,
    Mp2,
    Mp3,
    MpTi,
}

impl ModelKind {
    pub const ALL: [ModelKind; 7] = [
        ModelKind::TwoP,
        ModelKind::ThreeP,
        ModelKind::ThreePHd,
        ModelKind::Mp1,
        ModelKind::Mp2,
        ModelKind::Mp3,
        ModelKind::MpTi,
    ];

    pub fn uses_windows(self) -> bool {
        matches!(self, ModelKind::Mp1 | ModelKind::Mp2 | ModelKind::Mp3 | ModelKind::MpTi)
    }

    /// Models whose power variables live in MW space.
    pub fn physical_power(self) -> bool {
        matches!(self, ModelKind::TwoP | ModelKind::ThreeP)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::TwoP => "2p",
            ModelKind::ThreeP => "3p",
            ModelKind::ThreePHd => "3p-hd",
            ModelKind::Mp1 => "mp1",
            ModelKind::Mp2 => "mp2",
            ModelKind::Mp3 => "mp3",
            ModelKind::MpTi => "mp-ti",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = BuildError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.to_ascii_lowercase().replace('_', "-");
        ModelKind::ALL
            .into_iter()
            .find(|k| k.as_str() == norm || k.as_str().replace('-', "") == norm.replace('-', ""))
            .ok_or_else(|| BuildError::UnknownKind(s.to_string()))
    }
}

/// Window-size rule applied to every unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowChoice {
    Fixed(i64),
    Heuristic,
    Horizon,
}

impl FromStr for WindowChoice {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "H" | "h" => Ok(WindowChoice::Heuristic),
            "T" | "t" => Ok(WindowChoice::Horizon),
            _ => s.parse().map(WindowChoice::Fixed).map_err(|_| format!("invalid window '{s}'")),
        }
    }
}

/// `H = max(⌈(1−P̃_start)/P̃_up⌉+1, ⌈(1−P̃_shut)/P̃_down⌉+1, ⌈1/P̃_up⌉, ⌈1/P̃_down⌉, 2)`, capped at `T+1`.
pub fn default_window(nu: &NormalizedUnit, horizon: i64) -> i64 {
    let c = |x: f64| x.ceil_int();
    [
        c((1.0 - nu.pt_start) / nu.pt_up) + 1,
        c((1.0 - nu.pt_shut) / nu.pt_down) + 1,
        c(1.0 / nu.pt_up),
        c(1.0 / nu.pt_down),
        2,
    ]
    .into_iter()
    .max()
    .unwrap()
    .min(horizon + 1)
}

pub fn resolve_windows(inst: &UcInstance, choice: WindowChoice) -> Result<Vec<i64>, BuildError> {
    let t = inst.t();
    inst.units
        .iter()
        .map(|u| {
            Ok(match choice {
                WindowChoice::Fixed(m) => m.min(t + 1),
                WindowChoice::Horizon => t + 1,
                WindowChoice::Heuristic => default_window(&normalize_unit(u)?, t),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BuildOptions {
    /// Keep only ramp rows with `m = T−M+1 or a = t−m` (up) and `m = 0 or t = m+M−1` (down).
    pub ramp_window_restriction: bool,
    /// Drop ramp rows the facet predicates classify as non-facets.
    pub facet_filter: bool,
    /// Emit power-balance and reserve rows.
    pub include_system_rows: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { ramp_window_restriction: true, facet_filter: true, include_system_rows: true }
    }
}

impl BuildOptions {
    /// All proposed ramp rows kept.
    pub fn all_rows() -> Self {
        BuildOptions { ramp_window_restriction: false, facet_filter: false, include_system_rows: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKey {
    U { unit: usize, t: i64 },
    V { unit: usize, t: i64 },
    W { unit: usize, t: i64 },
    Tau { unit: usize, m: i64, h: i64, k: i64 },
    Tau3 { unit: usize, t: i64 },
    P { unit: usize, t: i64 },
    S { unit: usize, t: i64 },
    Z { unit: usize, t: i64 },
}

impl VarKey {
    pub fn name(&self) -> String {
        match *self {
            VarKey::U { unit, t } => format!("u_{unit}_{t}"),
            VarKey::V { unit, t } => format!("v_{unit}_{t}"),
            VarKey::W { unit, t } => format!("w_{unit}_{t}"),
            VarKey::Tau { unit, m, h, k } => format!("tau_{unit}_{m}_{h}_{k}"),
            VarKey::Tau3 { unit, t } => format!("tau3_{unit}_{t}"),
            VarKey::P { unit, t } => format!("p_{unit}_{t}"),
            VarKey::S { unit, t } => format!("s_{unit}_{t}"),
            VarKey::Z { unit, t } => format!("z_{unit}_{t}"),
        }
    }

    pub fn unit(&self) -> usize {
        match *self {
            VarKey::U { unit, .. }
            | VarKey::V { unit, .. }
            | VarKey::W { unit, .. }
            | VarKey::Tau { unit, .. }
            | VarKey::Tau3 { unit, .. }
            | VarKey::P { unit, .. }
            | VarKey::S { unit, .. }
            | VarKey::Z { unit, .. } => unit,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub key: VarKey,
    pub lower: f64,
    pub upper: f64,
    pub binary: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    PowerBalance,
    Reserve,
    Logic,
    InitialStatus,
    OnlineHistory,
    MinUp,
    MinDown,
    StartHot,
    StartCost,
    Tau3,
    Packing,
    Consistency,
    Linking,
    EliminationBound,
    GenLb,
    GenUb,
    GenUbInitial,
    RampUp,
    RampDown,
    RampUp3,
    RampDown3,
    PieceCut,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub family: Family,
    pub name: String,
    pub expr: LinExpr<usize, f64>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Row {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.expr.eval(|&j| x[j])
    }

    pub fn violation(&self, x: &[f64]) -> f64 {
        let a = self.activity(x);
        match self.sense {
            Sense::Le => (a - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - a).max(0.0),
            Sense::Eq => (a - self.rhs).abs(),
        }
    }
}

/// Diagonal quadratic objective term `coef · x_i · x_j` with the range the
/// variable takes when its unit is committed.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadTerm {
    pub i: usize,
    pub j: usize,
    pub coef: f64,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FormulationStats {
    pub vars: usize,
    pub binaries: usize,
    pub rows: usize,
    pub nonzeros: usize,
}

#[derive(Debug, Clone)]
pub struct Formulation {
    pub kind: ModelKind,
    pub horizon: i64,
    pub windows: Vec<i64>,
    pub variables: Vec<Variable>,
    index: HashMap<VarKey, usize>,
    pub rows: Vec<Row>,
    pub objective: LinExpr<usize, f64>,
    pub quad: Vec<QuadTerm>,
    /// `u0` of each unit, used to reconstruct binaries from schedules.
    initial_on: Vec<bool>,
}

impl Formulation {
    pub fn new(kind: ModelKind, horizon: i64) -> Self {
        Formulation {
            kind,
            horizon,
            windows: Vec::new(),
            variables: Vec::new(),
            index: HashMap::new(),
            rows: Vec::new(),
            objective: LinExpr::new(),
            quad: Vec::new(),
            initial_on: Vec::new(),
        }
    }

    pub fn add_var(&mut self, key: VarKey, lower: f64, upper: f64, binary: bool) -> usize {
        if let Some(&id) = self.index.get(&key) {
            return id;
        }
        let id = self.variables.len();
        self.variables.push(Variable { key, lower, upper, binary });
        self.index.insert(key, id);
        id
    }

    /// Appends a row `expr (sense) rhs`, moving the expression constant to the
    /// right-hand side. Empty rows that hold trivially are dropped.
    pub fn add_row(&mut self, family: Family, name: String, expr: LinExpr<usize, f64>, sense: Sense, rhs: f64) {
        let rhs = rhs - expr.constant();
        let mut expr = expr;
        expr.add_constant(-*expr.constant());
        if expr.is_empty() {
            let ok = match sense {
                Sense::Le => 0.0 <= rhs + 1e-9,
                Sense::Ge => 0.0 >= rhs - 1e-9,
                Sense::Eq => rhs.abs() <= 1e-9,
            };
            if ok {
                return;
            }
        }
        self.rows.push(Row { family, name, expr, sense, rhs });
    }

    pub fn var_id(&self, key: &VarKey) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn var_name(&self, id: usize) -> String {
        self.variables[id].key.name()
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn stats(&self) -> FormulationStats {
        FormulationStats {
            vars: self.variables.len(),
            binaries: self.variables.iter().filter(|v| v.binary).count(),
            rows: self.rows.len(),
            nonzeros: self.rows.iter().map(|r| r.expr.len()).sum(),
        }
    }

    pub fn family_counts(&self) -> BTreeMap<Family, usize> {
        let mut m = BTreeMap::new();
        for r in &self.rows {
            *m.entry(r.family).or_insert(0) += 1;
        }
        m
    }

    pub fn is_linear(&self) -> bool {
        self.quad.is_empty()
    }

    /// Objective value including quadratic terms.
    pub fn evaluate_objective(&self, x: &[f64]) -> f64 {
        let lin = self.objective.eval(|&j| x[j]);
        lin + self.quad.iter().map(|q| q.coef * x[q.i] * x[q.j]).sum::<f64>()
    }

    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let rows = self.rows.iter().map(|r| r.violation(x)).fold(0.0, f64::max);
        let bounds = self
            .variables
            .iter()
            .zip(x)
            .map(|(v, &xv)| (v.lower - xv).max(xv - v.upper).max(0.0))
            .fold(0.0, f64::max);
        rows.max(bounds)
    }

    pub(crate) fn set_initial_on(&mut self, initial_on: Vec<bool>) {
        self.initial_on = initial_on;
    }

    /// Definitional binary values implied by commitment schedules over
    /// periods `1..=T` (one vector per unit).
    pub fn binaries_from_schedule(&self, schedules: &[Vec<bool>]) -> Vec<(usize, f64)> {
        let on = |unit: usize, t: i64| -> bool {
            if t <= 0 {
                self.initial_on[unit]
            } else {
                schedules[unit].get(t as usize - 1).copied().unwrap_or(false)
            }
        };
        let b = |x: bool| if x { 1.0 } else { 0.0 };
        let mut window_cache: HashMap<(usize, i64), Vec<Interval>> = HashMap::new();
        self.variables
            .iter()
            .enumerate()
            .filter(|(_, v)| v.binary)
            .map(|(id, v)| {
                let val = match v.key {
                    VarKey::U { unit, t } => b(on(unit, t)),
                    VarKey::V { unit, t } => b(on(unit, t) && !on(unit, t - 1)),
                    VarKey::W { unit, t } => b(!on(unit, t) && on(unit, t - 1)),
                    VarKey::Tau3 { unit, t } => {
                        b(on(unit, t) && !on(unit, t - 1) && !on(unit, t + 1) && t < self.horizon)
                    }
                    VarKey::Tau { unit, m, h, k } => {
                        let size = self.windows[unit];
                        let active = window_cache.entry((unit, m)).or_insert_with(|| {
                            let bits: Vec<bool> = (m..m + size).map(|t| on(unit, t)).collect();
                            active_intervals(&bits, m)
                        });
                        b(active.contains(&Interval::new(h, k)))
                    }
                    _ => 0.0,
                };
                (id, val)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_parsing() {
        assert_eq!("3P-HD".parse::<ModelKind>().unwrap(), ModelKind::ThreePHd);
        assert_eq!("mp_ti".parse::<ModelKind>().unwrap(), ModelKind::MpTi);
        assert_eq!("mpti".parse::<ModelKind>().unwrap(), ModelKind::MpTi);
        assert!("4p".parse::<ModelKind>().is_err());
        assert_eq!("H".parse::<WindowChoice>().unwrap(), WindowChoice::Heuristic);
        assert_eq!("5".parse::<WindowChoice>().unwrap(), WindowChoice::Fixed(5));
    }

    fn nu(start: f64, shut: f64, up: f64, down: f64) -> NormalizedUnit {
        NormalizedUnit {
            id: "x".into(),
            pt_up: up,
            pt_down: down,
            pt_start: start,
            pt_shut: shut,
            pt0: 0.0,
            at: 0.0,
            bt: 0.0,
            gt: 0.0,
            p_min: 1.0,
            range: 1.0,
            t_on: 1,
            t_off: 1,
            u0: false,
            t0: -1,
        }
    }

    #[test]
    fn default_window_examples() {
        assert_eq!(default_window(&nu(0.2, 0.2, 0.4, 0.4), 24), 3);
        assert_eq!(default_window(&nu(1.0, 1.0, 1.0, 1.0), 24), 2);
        assert_eq!(default_window(&nu(1.0, 1.0, 0.1, 5.0), 24), 10);
        assert_eq!(default_window(&nu(0.0, 0.0, 0.01, 0.01), 24), 25);
    }

    #[test]
    fn add_row_moves_constant() {
        let mut f = Formulation::new(ModelKind::Mp1, 2);
        let x = f.add_var(VarKey::P { unit: 0, t: 1 }, 0.0, 1.0, false);
        let e = LinExpr::var(x).plus(&LinExpr::constant_expr(0.5), 1.0);
        f.add_row(Family::GenUb, "r".into(), e, Sense::Le, 1.0);
        assert_eq!(f.rows[0].rhs, 0.5);
        assert_eq!(*f.rows[0].expr.constant(), 0.0);
        f.add_row(Family::GenUb, "empty".into(), LinExpr::constant_expr(-1.0), Sense::Le, 0.0);
        assert_eq!(f.rows.len(), 1);
        f.add_row(Family::GenUb, "bad".into(), LinExpr::constant_expr(1.0), Sense::Le, 0.0);
        assert_eq!(f.rows.len(), 2);
    }
}
