//! Problem data, validation, normalization into the [0,1] power space and the
//! initial-status quantities W, L, U, K.

use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("validation failed:\n  {}", .0.join("\n  "))]
    Validation(Vec<String>),
    #[error("unit {0}: degenerate power range (p_max = p_min)")]
    Degenerate(String),
}

/// Physical generator data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitParams {
    pub id: String,
    pub p_min: f64,
    pub p_max: f64,
    pub p_start: f64,
    pub p_shut: f64,
    pub p_up: f64,
    pub p_down: f64,
    pub t_on: i64,
    pub t_off: i64,
    pub t_cold: i64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub c_hot: f64,
    pub c_cold: f64,
    pub u0: u8,
    #[serde(rename = "t0")]
    pub t0_signed: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p0: Option<f64>,
}

impl UnitParams {
    pub fn is_on_initially(&self) -> bool {
        self.u0 == 1
    }

    /// Output at period 0 in MW (zero when offline).
    pub fn initial_output(&self) -> f64 {
        if self.is_on_initially() {
            self.p0.unwrap_or(self.p_min)
        } else {
            0.0
        }
    }

    fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let id = &self.id;
        let mut check = |ok: bool, msg: &str| {
            if !ok {
                v.push(format!("unit {id}: {msg}"));
            }
        };
        let finite = [
            self.p_min, self.p_max, self.p_start, self.p_shut, self.p_up, self.p_down, self.alpha,
            self.beta, self.gamma, self.c_hot, self.c_cold,
        ]
        .iter()
        .all(|x| x.is_finite());
        check(finite, "all numeric fields must be finite");
        check(self.p_min > 0.0, "p_min must be positive");
        check(self.p_min < self.p_max, "p_min must be below p_max");
        check(
            self.p_min <= self.p_start && self.p_start <= self.p_max,
            "p_start must lie in [p_min, p_max]",
        );
        check(
            self.p_min <= self.p_shut && self.p_shut <= self.p_max,
            "p_shut must lie in [p_min, p_max]",
        );
        check(self.p_up > 0.0, "p_up must be positive");
        check(self.p_down > 0.0, "p_down must be positive");
        check(self.t_on >= 1, "t_on must be at least 1");
        check(self.t_off >= 1, "t_off must be at least 1");
        check(self.t_cold >= 0, "t_cold must be nonnegative");
        check(self.c_hot >= 0.0, "c_hot must be nonnegative");
        check(self.c_cold >= self.c_hot, "c_cold must be at least c_hot");
        check(self.gamma >= 0.0, "gamma must be nonnegative");
        match self.u0 {
            1 => {
                check(self.t0_signed >= 1, "t0 must be positive when u0 = 1");
                match self.p0 {
                    None => check(false, "p0 is required when u0 = 1"),
                    Some(p0) => check(
                        p0.is_finite() && self.p_min <= p0 && p0 <= self.p_max,
                        "p0 must lie in [p_min, p_max]",
                    ),
                }
            }
            0 => check(self.t0_signed <= -1, "t0 must be negative when u0 = 0"),
            _ => check(false, "u0 must be 0 or 1"),
        }
        v
    }
}

/// Full instance: horizon, system series and units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UcInstance {
    #[serde(rename = "T")]
    pub horizon: usize,
    pub demand: Vec<f64>,
    pub reserve: Vec<f64>,
    pub units: Vec<UnitParams>,
}

impl UcInstance {
    pub fn from_json_str(s: &str) -> Result<Self, InstanceError> {
        let inst: UcInstance = serde_json::from_str(s)?;
        inst.validate()?;
        Ok(inst)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    pub fn validate(&self) -> Result<(), InstanceError> {
        let t = self.horizon;
        let mut v = Vec::new();
        if t < 2 {
            v.push(format!("T must be at least 2, got {t}"));
        }
        if self.demand.len() != t {
            v.push(format!("demand has length {}, expected T = {t}", self.demand.len()));
        }
        if self.reserve.len() != t {
            v.push(format!("reserve has length {}, expected T = {t}", self.reserve.len()));
        }
        if self.demand.iter().chain(&self.reserve).any(|x| !x.is_finite() || *x < 0.0) {
            v.push("demand and reserve entries must be finite and nonnegative".into());
        }
        if self.units.is_empty() {
            v.push("at least one unit is required".into());
        }
        let mut seen = std::collections::HashSet::new();
        for u in &self.units {
            if !seen.insert(u.id.as_str()) {
                v.push(format!("unit {}: duplicate id", u.id));
            }
            v.extend(u.violations());
        }
        if v.is_empty() {
            Ok(())
        } else {
            Err(InstanceError::Validation(v))
        }
    }

    pub fn t(&self) -> i64 {
        self.horizon as i64
    }
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<UcInstance, InstanceError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| InstanceError::Io {
        path: path.display().to_string(),
        source,
    })?;
    UcInstance::from_json_str(&text)
}

/// Unit projected onto the [0,1] power space.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedUnit {
    pub id: String,
    pub pt_up: f64,
    pub pt_down: f64,
    pub pt_start: f64,
    pub pt_shut: f64,
    pub pt0: f64,
    pub at: f64,
    pub bt: f64,
    pub gt: f64,
    pub p_min: f64,
    pub range: f64,
    pub t_on: i64,
    pub t_off: i64,
    pub u0: bool,
    pub t0: i64,
}

impl NormalizedUnit {
    pub fn normalize_power(&self, p: f64) -> f64 {
        (p - self.p_min) / self.range
    }

    pub fn denormalize_power(&self, pt: f64) -> f64 {
        self.p_min + pt * self.range
    }

    /// Cost of a committed period at normalized output `pt`.
    pub fn cost(&self, pt: f64) -> f64 {
        self.at + self.bt * pt + self.gt * pt * pt
    }
}

pub fn normalize_unit(u: &UnitParams) -> Result<NormalizedUnit, InstanceError> {
    let range = u.p_max - u.p_min;
    if range == 0.0 {
        return Err(InstanceError::Degenerate(u.id.clone()));
    }
    let pt0 = if u.is_on_initially() {
        (u.initial_output() - u.p_min) / range
    } else {
        0.0
    };
    Ok(NormalizedUnit {
        id: u.id.clone(),
        pt_up: u.p_up / range,
        pt_down: u.p_down / range,
        pt_start: (u.p_start - u.p_min) / range,
        pt_shut: (u.p_shut - u.p_min) / range,
        pt0,
        at: u.alpha + u.beta * u.p_min + u.gamma * u.p_min * u.p_min,
        bt: range * (u.beta + 2.0 * u.gamma * u.p_min),
        gt: u.gamma * range * range,
        p_min: u.p_min,
        range,
        t_on: u.t_on,
        t_off: u.t_off,
        u0: u.is_on_initially(),
        t0: u.t0_signed,
    })
}

/// Initial-status lock durations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StatusBounds {
    pub w_lock: i64,
    pub l_lock: i64,
    pub u_run: i64,
    pub k_run: i64,
}

pub fn status_bounds(nu: &NormalizedUnit, horizon: i64) -> StatusBounds {
    status_bounds_from(nu.u0, nu.t0, nu.t_on, nu.t_off, horizon, &nu.pt0, &nu.pt_shut, &nu.pt_down)
}

/// Generic form shared with the exact-arithmetic lab.
#[allow(clippy::too_many_arguments)]
pub fn status_bounds_from<S: Scalar>(
    u0: bool,
    t0: i64,
    t_on: i64,
    t_off: i64,
    horizon: i64,
    pt0: &S,
    pt_shut: &S,
    pt_down: &S,
) -> StatusBounds {
    let u0i = i64::from(u0);
    let w_lock = (u0i * (t_on - t0)).min(horizon).max(0);
    let l_lock = ((1 - u0i) * (t_off + t0)).min(horizon).max(0);
    let (u_run, k_run) = if u0 {
        let excess = pt0.clone() - pt_shut.clone();
        let ratio = excess.clone() / pt_down.clone();
        let ceil = if excess > S::zero() { ratio.ceil_int() } else { 0 };
        let floor1 = (ratio.floor_int() + 1).max(0);
        (ceil.max(t_on - t0).min(horizon), floor1.max(t_on - t0).min(horizon))
    } else {
        (0, 0)
    };
    StatusBounds { w_lock, l_lock, u_run, k_run }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn unit() -> UnitParams {
        UnitParams {
            id: "g1".into(),
            p_min: 100.0,
            p_max: 400.0,
            p_start: 100.0,
            p_shut: 190.0,
            p_up: 150.0,
            p_down: 60.0,
            t_on: 2,
            t_off: 2,
            t_cold: 1,
            alpha: 10.0,
            beta: 2.0,
            gamma: 0.01,
            c_hot: 50.0,
            c_cold: 100.0,
            u0: 1,
            t0_signed: 5,
            p0: Some(370.0),
        }
    }

    fn instance_json(t: usize, demand_len: usize) -> String {
        let inst = UcInstance {
            horizon: t,
            demand: vec![300.0; demand_len],
            reserve: vec![30.0; t],
            units: vec![unit(), UnitParams { id: "g2".into(), ..unit() }],
        };
        serde_json::to_string(&inst).unwrap()
    }

    #[test]
    fn well_formed_file_loads() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("i.json");
        std::fs::write(&path, instance_json(6, 6)).unwrap();
        let inst = load_instance(&path).unwrap();
        assert_eq!(inst.units.len(), 2);
        assert_eq!(inst.horizon, 6);
        let again = UcInstance::from_json_str(&inst.to_json_string()).unwrap();
        assert_eq!(again, inst);
    }

    #[test]
    fn inverted_limits_name_the_unit() {
        let mut inst: UcInstance = serde_json::from_str(&instance_json(6, 6)).unwrap();
        inst.units[1].p_min = 500.0;
        let err = inst.validate().unwrap_err().to_string();
        assert!(err.contains("unit g2"), "{err}");
        assert!(!err.contains("unit g1"), "{err}");
    }

    #[test]
    fn demand_length_mismatch_rejected() {
        let err = UcInstance::from_json_str(&instance_json(6, 5)).unwrap_err();
        assert!(err.to_string().contains("demand has length 5"));
    }

    #[test]
    fn unknown_keys_and_missing_p0_rejected() {
        let text = instance_json(6, 6).replace("\"p_min\"", "\"bogus\":1,\"p_min\"");
        assert!(matches!(UcInstance::from_json_str(&text), Err(InstanceError::Parse(_))));
        let mut inst: UcInstance = serde_json::from_str(&instance_json(6, 6)).unwrap();
        inst.units[0].p0 = None;
        assert!(inst.validate().unwrap_err().to_string().contains("p0 is required"));
    }

    #[test]
    fn normalization_examples() {
        let nu = normalize_unit(&unit()).unwrap();
        assert_eq!(nu.pt_up, 0.5);
        assert_eq!(nu.pt_start, 0.0);
        assert!((nu.at - 310.0).abs() < 1e-12);
        assert!((nu.bt - 1200.0).abs() < 1e-12);
        assert!((nu.gt - 900.0).abs() < 1e-9);
    }

    #[test]
    fn cost_equivalence_and_round_trip() {
        let u = unit();
        let nu = normalize_unit(&u).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let p: f64 = rng.gen_range(u.p_min..=u.p_max);
            let direct = u.alpha + u.beta * p + u.gamma * p * p;
            let pt = nu.normalize_power(p);
            assert!((nu.cost(pt) - direct).abs() <= 1e-9 * direct.abs());
            assert!((nu.denormalize_power(pt) - p).abs() <= 1e-12 * p.max(1.0));
        }
    }

    #[test]
    fn degenerate_unit_rejected() {
        let u = UnitParams { p_max: 100.0, ..unit() };
        assert!(matches!(normalize_unit(&u), Err(InstanceError::Degenerate(_))));
    }

    #[test]
    fn status_bound_examples() {
        let sb = status_bounds_from(true, 2, 4, 1, 24, &0.5f64, &0.5, &0.5);
        assert_eq!(sb.w_lock, 2);
        let sb = status_bounds_from(false, -3, 1, 5, 24, &0.0f64, &0.3, &0.2);
        assert_eq!((sb.l_lock, sb.w_lock, sb.u_run, sb.k_run), (2, 0, 0, 0));
        let sb = status_bounds_from(true, 5, 2, 1, 24, &0.9f64, &0.3, &0.2);
        assert_eq!((sb.u_run, sb.k_run), (3, 4));
        assert_eq!(sb.l_lock, 0);
    }

    #[test]
    fn k_minus_u_is_zero_or_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            let pt0: f64 = rng.gen_range(0.0..=1.0);
            let sh: f64 = rng.gen_range(0.0..=1.0);
            let dn: f64 = rng.gen_range(0.01..=1.5);
            let t_on = rng.gen_range(1..=6);
            let t0 = rng.gen_range(1..=8);
            let sb = status_bounds_from(true, t0, t_on, 1, 24, &pt0, &sh, &dn);
            assert!(sb.k_run - sb.u_run == 0 || sb.k_run - sb.u_run == 1, "{sb:?}");
        }
    }
}
