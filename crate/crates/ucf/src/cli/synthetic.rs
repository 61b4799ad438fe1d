//! Seeded synthetic instances.
//!
//! Unit data are drawn from dyadic grids. Demand is the total output of a
//! reference trajectory in which every unit stays committed from period 1
//! and ramps by at most half its ramp limits, so every instance is feasible
//! and `Σ p_min ≤ demand_t ≤ 0.9·Σ p_max` holds. Reserve is 10% of demand.

use crate::instance::{UcInstance, UnitParams};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn pick<T: Copy>(rng: &mut ChaCha8Rng, xs: &[T]) -> T {
    *xs.choose(rng).expect("nonempty grid")
}

fn draw_unit(rng: &mut ChaCha8Rng, idx: usize) -> UnitParams {
    let p_max = 8.0 * rng.gen_range(25..=75) as f64;
    let p_min = p_max * pick(rng, &[0.25, 0.375, 0.5]);
    let range = p_max - p_min;
    let ramp = [0.25, 0.375, 0.5, 0.625, 0.75];
    let edge = [0.125, 0.25, 0.375, 0.5];
    let t_on = rng.gen_range(1..=3);
    let t_off = rng.gen_range(1..=3);
    let c_hot = 8.0 * rng.gen_range(10..=60) as f64;
    let on = rng.gen_bool(0.5);
    let (u0, t0, p0) = if on {
        let steps = pick(rng, &[0.0, 0.25, 0.5, 0.75]);
        (1, rng.gen_range(1..=4), Some(p_min + steps * (0.9 * p_max - p_min)))
    } else {
        (0, -(t_off + rng.gen_range(0..=3)), None)
    };
    UnitParams {
        id: format!("g{idx}"),
        p_min,
        p_max,
        p_start: p_min + range * pick(rng, &edge),
        p_shut: p_min + range * pick(rng, &edge),
        p_up: range * pick(rng, &ramp),
        p_down: range * pick(rng, &ramp),
        t_on,
        t_off,
        t_cold: rng.gen_range(0..=2),
        alpha: 4.0 * rng.gen_range(25..=125) as f64,
        beta: 0.5 * rng.gen_range(20..=60) as f64,
        gamma: rng.gen_range(1..=8) as f64 / 1024.0,
        c_hot,
        c_cold: 2.0 * c_hot,
        u0,
        t0_signed: t0,
        p0,
    }
}

pub fn generate_synthetic(seed: u64, n_units: usize, horizon: usize) -> UcInstance {
    assert!(n_units >= 1 && horizon >= 2, "need at least one unit and two periods");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let units: Vec<UnitParams> = (0..n_units).map(|i| draw_unit(&mut rng, i)).collect();
    let mut demand = vec![0.0; horizon];
    for u in &units {
        let hi = 0.9 * u.p_max;
        let step = (u.p_up.min(u.p_down) / 2.0).floor();
        let mut p = u.p0.unwrap_or(u.p_min);
        for (t, d) in demand.iter_mut().enumerate() {
            if t > 0 || u.u0 == 1 {
                let delta = rng.gen_range(-1.0..=1.0f64);
                p = (p + (delta * step).round()).clamp(u.p_min, hi);
            }
            *d += p;
        }
    }
    let reserve = demand.iter().map(|d| 0.1 * d).collect();
    UcInstance { horizon, demand, reserve, units }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_valid() {
        let a = generate_synthetic(1, 2, 6).to_json_string();
        let b = generate_synthetic(1, 2, 6).to_json_string();
        assert_eq!(a, b);
        for seed in 0..50 {
            let inst = generate_synthetic(seed, 3, 12);
            inst.validate().unwrap();
            let pmin: f64 = inst.units.iter().map(|u| u.p_min).sum();
            let pmax: f64 = inst.units.iter().map(|u| u.p_max).sum();
            for &d in &inst.demand {
                assert!(pmin <= d && d <= 0.9 * pmax + 1e-9);
            }
        }
    }
}
