//! Bridge to an external solver through MPS files.
//!
//! The command template is run through `sh -c` after substituting `{mps}`,
//! `{sol}` and `{mode}` (`lp` or `mip`). The solution file starts with
//! `objective <value>` followed by `<name> <value>` lines.

use super::lp::{LpSolution, LpStatus};
use super::mps::write_mps;
use super::{SolverConfig, SolverError};
use crate::builder::Formulation;
use std::collections::HashMap;
use std::path::Path;
use std::process::Command;

pub const SOLVER_CMD_ENV: &str = "UCF_SOLVER_CMD";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExternalMode {
    Lp,
    Mip,
}

/// Configured template, falling back to the environment.
pub fn command_template(cfg: &SolverConfig) -> Option<String> {
    cfg.external_cmd.clone().or_else(|| std::env::var(SOLVER_CMD_ENV).ok()).filter(|s| !s.trim().is_empty())
}

/// Parses a solution file against the formulation's variable names.
pub fn parse_solution(text: &str, f: &Formulation) -> Result<(f64, Vec<f64>), SolverError> {
    let ids: HashMap<String, usize> = (0..f.num_vars()).map(|j| (f.var_name(j), j)).collect();
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let first = lines.next().ok_or_else(|| SolverError::Parse("empty solution file".into()))?;
    let objective = match first.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["objective", v] => v.parse::<f64>().map_err(|_| SolverError::Parse(format!("bad objective '{v}'")))?,
        _ => return Err(SolverError::Parse(format!("expected 'objective <value>', got '{first}'"))),
    };
    let mut values = vec![0.0; f.num_vars()];
    for line in lines {
        let toks: Vec<&str> = line.split_whitespace().collect();
        let [name, v] = toks.as_slice() else {
            return Err(SolverError::Parse(format!("malformed line '{line}'")));
        };
        let j = *ids.get(*name).ok_or_else(|| SolverError::Parse(format!("unknown variable '{name}'")))?;
        values[j] = v.parse().map_err(|_| SolverError::Parse(format!("bad value '{v}' for '{name}'")))?;
    }
    Ok((objective, values))
}

/// Runs the external solver on an already written MPS file.
pub fn run_external(
    mps: &Path,
    f: &Formulation,
    mode: ExternalMode,
    cfg: &SolverConfig,
) -> Result<LpSolution, SolverError> {
    let template = command_template(cfg).ok_or(SolverError::NoExternalCommand)?;
    let sol = mps.with_extension("sol");
    let mode_s = match mode {
        ExternalMode::Lp => "lp",
        ExternalMode::Mip => "mip",
    };
    let cmd = template
        .replace("{mps}", &mps.display().to_string())
        .replace("{sol}", &sol.display().to_string())
        .replace("{mode}", mode_s);
    let out = Command::new("sh").arg("-c").arg(&cmd).output().map_err(|e| SolverError::Spawn(e.to_string()))?;
    if !out.status.success() {
        return Err(SolverError::ExternalExit {
            code: out.status.code(),
            stderr: String::from_utf8_lossy(&out.stderr).trim().to_string(),
        });
    }
    let text = std::fs::read_to_string(&sol).map_err(|e| SolverError::Spawn(format!("{}: {e}", sol.display())))?;
    let (objective, values) = parse_solution(&text, f)?;
    Ok(LpSolution { status: LpStatus::Optimal, objective, values, iterations: 0 })
}

/// Writes `f` into `dir` and solves it externally.
pub fn solve_external(
    f: &Formulation,
    dir: &Path,
    stem: &str,
    mode: ExternalMode,
    cfg: &SolverConfig,
) -> Result<LpSolution, SolverError> {
    let path = dir.join(format!("{stem}.mps"));
    write_mps(f, &path)?;
    run_external(&path, f, mode, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builder::{ModelKind, VarKey};

    fn one_var() -> Formulation {
        let mut f = Formulation::new(ModelKind::TwoP, 1);
        f.add_var(VarKey::P { unit: 0, t: 1 }, 0.0, 10.0, false);
        f
    }

    #[test]
    fn parses_solution_file() {
        let (z, x) = parse_solution("objective 1.5\np_0_1 1\n", &one_var()).unwrap();
        assert_eq!(z, 1.5);
        assert_eq!(x, vec![1.0]);
    }

    #[test]
    fn unknown_variable_is_named() {
        let err = parse_solution("objective 1\nq_9 2\n", &one_var()).unwrap_err();
        assert!(err.to_string().contains("q_9"));
    }

    #[test]
    fn scripted_solver_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = SolverConfig {
            external_cmd: Some("printf 'objective 1\\np_0_1 1\\n' > {sol}".into()),
            ..SolverConfig::default()
        };
        let s = solve_external(&one_var(), dir.path(), "t", ExternalMode::Lp, &cfg).unwrap();
        assert_eq!(s.objective, 1.0);
    }

    #[test]
    fn missing_executable_fails() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = SolverConfig { external_cmd: Some("/nonexistent/solver {mps} {sol}".into()), ..SolverConfig::default() };
        let err = solve_external(&one_var(), dir.path(), "t", ExternalMode::Lp, &cfg).unwrap_err();
        assert!(matches!(err, SolverError::ExternalExit { .. } | SolverError::Spawn(_)));
    }
}
