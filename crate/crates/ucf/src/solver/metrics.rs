use super::lp::LpSolution;
use super::SolverError;
use crate::builder::Formulation;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    /// Relative integrality gap `(z_mip − z_lp)/z_mip`.
    pub igap: f64,
    /// Share of binary variables that are integral in the relaxation.
    pub nb: f64,
}

pub fn metrics(zmip: f64, lp: &LpSolution, f: &Formulation, int_tol: f64) -> Result<Metrics, SolverError> {
    if zmip == 0.0 || !zmip.is_finite() {
        return Err(SolverError::ZeroMip);
    }
    let igap = (zmip - lp.objective) / zmip;
    let bins: Vec<f64> = f.variables.iter().zip(&lp.values).filter(|(v, _)| v.binary).map(|(_, &x)| x).collect();
    let nb = if bins.is_empty() {
        1.0
    } else {
        bins.iter().filter(|&&x| x.abs() <= int_tol || (x - 1.0).abs() <= int_tol).count() as f64 / bins.len() as f64
    };
    Ok(Metrics { igap, nb })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builder::{ModelKind, VarKey};
    use crate::solver::LpStatus;

    fn lp(obj: f64, values: Vec<f64>) -> LpSolution {
        LpSolution { status: LpStatus::Optimal, objective: obj, values, iterations: 0 }
    }

    #[test]
    fn gap_and_share() {
        let mut f = Formulation::new(ModelKind::TwoP, 4);
        for t in 0..4 {
            f.add_var(VarKey::U { unit: 0, t }, 0.0, 1.0, true);
        }
        let m = metrics(100.0, &lp(99.0, vec![0.0, 1.0, 0.5, 1.0]), &f, 1e-6).unwrap();
        assert!((m.igap - 0.01).abs() < 1e-12);
        assert_eq!(m.nb, 0.75);
        assert_eq!(metrics(5.0, &lp(5.0, vec![0.0; 4]), &f, 1e-6).unwrap().igap, 0.0);
        assert!(matches!(metrics(0.0, &lp(0.0, vec![]), &f, 1e-6), Err(SolverError::ZeroMip)));
    }
}
