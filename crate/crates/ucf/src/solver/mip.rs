//! Depth-first branch-and-bound over the embedded simplex.

use super::lp::{Basis, LpData, LpStatus, Simplex};
use super::{SolverConfig, SolverError};
use crate::builder::Formulation;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MipStatus {
    Optimal,
    Infeasible,
    Unbounded,
    LimitReached,
}

#[derive(Debug, Clone)]
pub struct MipSolution {
    pub status: MipStatus,
    /// Incumbent objective (`+∞` without incumbent).
    pub objective: f64,
    pub bound: f64,
    pub gap: f64,
    pub nodes: usize,
    pub lp_iterations: usize,
    /// Incumbent values, empty without incumbent.
    pub values: Vec<f64>,
}

struct Node {
    id: usize,
    parent: usize,
    bound: f64,
    fixes: Vec<(usize, f64)>,
    basis: Option<Basis>,
}

pub fn relative_gap(incumbent: f64, bound: f64) -> f64 {
    if !incumbent.is_finite() {
        return f64::INFINITY;
    }
    ((incumbent - bound) / incumbent.abs().max(1e-9)).max(0.0)
}

/// Solves a linear formulation with binary variables to the configured gap.
pub fn solve_mip(f: &Formulation, cfg: &SolverConfig) -> Result<MipSolution, SolverError> {
    cfg.validate()?;
    let start = Instant::now();
    let data = LpData::from_formulation(f)?;
    let binaries: Vec<usize> = (0..f.num_vars()).filter(|&j| f.variables[j].binary).collect();
    let (root_lo, root_hi) = (data.lo.clone(), data.hi.clone());
    let mut lp = Simplex::new(data);
    let mut incumbent = f64::INFINITY;
    let mut best_x: Vec<f64> = Vec::new();
    let mut pruned_bound = f64::INFINITY;
    let mut nodes = 0usize;
    let mut next_id = 1usize;
    let mut last_solved = usize::MAX;
    let mut stack = vec![Node { id: 0, parent: usize::MAX, bound: f64::NEG_INFINITY, fixes: Vec::new(), basis: None }];
    let mut limit_hit = false;
    let mut unbounded = false;
    while let Some(node) = stack.pop() {
        if relative_gap(incumbent, node.bound) <= cfg.mip_gap {
            pruned_bound = pruned_bound.min(node.bound);
            continue;
        }
        if nodes >= cfg.node_limit || cfg.time_limit.is_some_and(|t| start.elapsed() > t) {
            stack.push(node);
            limit_hit = true;
            break;
        }
        nodes += 1;
        if nodes.is_multiple_of(256) {
            stack.sort_by(|a, b| b.bound.total_cmp(&a.bound));
        }
        let (mut lo, mut hi) = (root_lo.clone(), root_hi.clone());
        for &(j, v) in &node.fixes {
            lo[j] = v;
            hi[j] = v;
        }
        if node.parent != last_solved {
            if let Some(b) = &node.basis {
                lp.load(b);
            }
        }
        lp.set_bounds(&lo, &hi);
        let status = lp.solve(cfg)?;
        last_solved = node.id;
        match status {
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded => {
                unbounded = true;
                break;
            }
            LpStatus::Optimal => {}
        }
        let z = lp.objective();
        if relative_gap(incumbent, z) <= cfg.mip_gap {
            pruned_bound = pruned_bound.min(z);
            continue;
        }
        let x = lp.values();
        let branch = binaries
            .iter()
            .map(|&j| (j, (x[j] - x[j].round()).abs()))
            .filter(|&(_, d)| d > cfg.integer_tol)
            .fold(None, |best: Option<(usize, f64)>, (j, d)| match best {
                Some((_, bd)) if bd >= d => best,
                _ => Some((j, d)),
            });
        let Some((j, _)) = branch else {
            if z < incumbent {
                incumbent = z;
                best_x = x;
            }
            continue;
        };
        let basis = lp.snapshot();
        let up_first = x[j] >= 0.5;
        for v in if up_first { [0.0, 1.0] } else { [1.0, 0.0] } {
            let mut fixes = node.fixes.clone();
            fixes.push((j, v));
            stack.push(Node { id: next_id, parent: node.id, bound: z, fixes, basis: Some(basis.clone()) });
            next_id += 1;
        }
    }
    let open = stack.iter().map(|n| n.bound).fold(f64::INFINITY, f64::min);
    let bound = incumbent.min(pruned_bound).min(open);
    let status = if unbounded {
        MipStatus::Unbounded
    } else if limit_hit {
        MipStatus::LimitReached
    } else if incumbent.is_finite() {
        MipStatus::Optimal
    } else {
        MipStatus::Infeasible
    };
    Ok(MipSolution {
        status,
        objective: incumbent,
        bound,
        gap: relative_gap(incumbent, bound),
        nodes,
        lp_iterations: lp.iterations,
        values: best_x,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builder::{Family, ModelKind, Sense, VarKey};
    use crate::solver::solve_lp;
    use crate::windows::LinExpr;

    fn knapsack(weights: &[f64], values: &[f64], cap: f64) -> Formulation {
        let mut f = Formulation::new(ModelKind::TwoP, 1);
        let mut row = LinExpr::new();
        for (t, (&w, &v)) in weights.iter().zip(values).enumerate() {
            let j = f.add_var(VarKey::U { unit: 0, t: t as i64 }, 0.0, 1.0, true);
            f.objective.add_term(j, -v);
            row.add_term(j, w);
        }
        f.add_row(Family::PowerBalance, "cap".into(), row, Sense::Le, cap);
        f
    }

    #[test]
    fn knapsack_matches_enumeration() {
        let w = [12.0, 7.0, 11.0, 8.0, 9.0];
        let v = [24.0, 13.0, 23.0, 15.0, 16.0];
        let cap = 26.0;
        let mut best = 0.0f64;
        for mask in 0..32u32 {
            let (mut tw, mut tv) = (0.0, 0.0);
            for k in 0..5 {
                if mask >> k & 1 == 1 {
                    tw += w[k];
                    tv += v[k];
                }
            }
            if tw <= cap {
                best = best.max(tv);
            }
        }
        let cfg = SolverConfig { mip_gap: 0.0, ..SolverConfig::default() };
        let s = solve_mip(&knapsack(&w, &v, cap), &cfg).unwrap();
        assert_eq!(s.status, MipStatus::Optimal);
        assert!((s.objective + best).abs() < 1e-9);
        assert!(s.objective >= s.bound - 1e-9);
    }

    #[test]
    fn fixed_binaries_equal_lp() {
        let mut f = knapsack(&[1.0, 2.0], &[1.0, 1.0], 5.0);
        for v in f.variables.iter_mut() {
            v.lower = 1.0;
        }
        let mip = solve_mip(&f, &SolverConfig::default()).unwrap();
        let lp = solve_lp(&f, &SolverConfig::default()).unwrap();
        assert!((mip.objective - lp.objective).abs() < 1e-12);
        assert_eq!(mip.nodes, 1);
    }

    #[test]
    fn infeasible_integer_program() {
        // 2x = 1 with x binary
        let mut f = Formulation::new(ModelKind::TwoP, 1);
        let j = f.add_var(VarKey::U { unit: 0, t: 1 }, 0.0, 1.0, true);
        f.add_row(Family::Logic, "half".into(), LinExpr::var(j).scaled(2.0), Sense::Eq, 1.0);
        assert_eq!(solve_mip(&f, &SolverConfig::default()).unwrap().status, MipStatus::Infeasible);
    }

    #[test]
    fn node_limit_reports_limit() {
        let w: Vec<f64> = (0..14).map(|k| 10.0 + k as f64).collect();
        let v: Vec<f64> = w.iter().map(|x| x + 0.5).collect();
        let cfg = SolverConfig { node_limit: 3, mip_gap: 0.0, ..SolverConfig::default() };
        let s = solve_mip(&knapsack(&w, &v, 60.5), &cfg).unwrap();
        assert_eq!(s.status, MipStatus::LimitReached);
        assert!(s.bound <= s.objective);
    }
}
