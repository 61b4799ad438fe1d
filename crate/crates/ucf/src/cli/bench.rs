//! Batch benchmarking: one record per (instance, case) with relaxation and
//! MIP objectives, integrality gap, relative time and ramp-row reduction.

use crate::builder::{
    build_formulation, piecewise_linearize, resolve_windows, BuildError, BuildOptions, Family, Formulation, ModelKind,
    WindowChoice,
};
use crate::instance::UcInstance;
use crate::solver::{metrics, solve_external, solve_lp, solve_mip, ExternalMode, LpStatus, MipStatus, SolverConfig};
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::PathBuf;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Solver(#[from] crate::solver::SolverError),
    #[error("{0}")]
    Status(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// One model configuration of a benchmark.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchCase {
    pub kind: ModelKind,
    pub window: WindowChoice,
}

impl BenchCase {
    pub fn new(kind: ModelKind, window: WindowChoice) -> Self {
        BenchCase { kind, window }
    }

    pub fn window_label(&self) -> String {
        if !self.kind.uses_windows() {
            return "-".into();
        }
        match self.window {
            WindowChoice::Fixed(m) => m.to_string(),
            WindowChoice::Heuristic => "H".into(),
            WindowChoice::Horizon => "T".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub case_id: String,
    pub model: String,
    pub window: String,
    pub n_vars: usize,
    pub n_rows: usize,
    pub n_nonzeros: usize,
    pub z_cr: f64,
    pub z_mip: f64,
    pub igap: f64,
    pub time_s: f64,
    pub rtime: f64,
    pub nb: f64,
    pub redu_con: f64,
    pub error: String,
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub pieces: usize,
    pub solver: SolverConfig,
    /// Solve through the external command, writing MPS files here.
    pub external_dir: Option<PathBuf>,
    pub threads: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig { pieces: 4, solver: SolverConfig::default(), external_dir: None, threads: 1 }
    }
}

fn ramp_rows(f: &Formulation) -> usize {
    f.rows.iter().filter(|r| matches!(r.family, Family::RampUp | Family::RampDown)).count()
}

/// Share of ramp rows the facet filter removes, relative to all proposed rows.
pub fn redu_con(inst: &UcInstance, kind: ModelKind, windows: &[i64]) -> Result<f64, BuildError> {
    if !kind.uses_windows() {
        return Ok(0.0);
    }
    let filtered = BuildOptions { ramp_window_restriction: false, facet_filter: true, include_system_rows: false };
    let all = BuildOptions { include_system_rows: false, ..BuildOptions::all_rows() };
    let kept = ramp_rows(&build_formulation(inst, kind, windows, filtered)?);
    let total = ramp_rows(&build_formulation(inst, kind, windows, all)?);
    Ok(if total == 0 { 0.0 } else { 1.0 - kept as f64 / total as f64 })
}

struct Solved {
    record: BenchRecord,
    z_incumbent: f64,
    f: Option<(Formulation, Vec<f64>)>,
}

fn empty_record(case_id: &str, case: &BenchCase) -> BenchRecord {
    BenchRecord {
        case_id: case_id.to_string(),
        model: case.kind.to_string(),
        window: case.window_label(),
        n_vars: 0,
        n_rows: 0,
        n_nonzeros: 0,
        z_cr: f64::NAN,
        z_mip: f64::NAN,
        igap: f64::NAN,
        time_s: f64::NAN,
        rtime: f64::NAN,
        nb: f64::NAN,
        redu_con: f64::NAN,
        error: String::new(),
    }
}

fn run_one(case_id: &str, inst: &UcInstance, case: &BenchCase, cfg: &BenchConfig) -> Result<Solved, BenchError> {
    let windows = if case.kind.uses_windows() { resolve_windows(inst, case.window)? } else { Vec::new() };
    let f = piecewise_linearize(&build_formulation(inst, case.kind, &windows, BuildOptions::default())?, cfg.pieces);
    let stats = f.stats();
    let stem = format!("{case_id}_{}_{}", case.kind, case.window_label());
    let start = Instant::now();
    let (lp, z_mip) = match &cfg.external_dir {
        Some(dir) => {
            let lp = solve_external(&f, dir, &stem, ExternalMode::Lp, &cfg.solver)?;
            let mip = solve_external(&f, dir, &stem, ExternalMode::Mip, &cfg.solver)?;
            (lp, mip.objective)
        }
        None => {
            let lp = solve_lp(&f, &cfg.solver)?;
            if lp.status != LpStatus::Optimal {
                return Err(BenchError::Status(format!("relaxation {:?}", lp.status)));
            }
            let mip = solve_mip(&f, &cfg.solver)?;
            if mip.status == MipStatus::Infeasible || mip.status == MipStatus::Unbounded {
                return Err(BenchError::Status(format!("MIP {:?}", mip.status)));
            }
            (lp, mip.objective)
        }
    };
    let time_s = start.elapsed().as_secs_f64();
    let mut record = empty_record(case_id, case);
    record.n_vars = stats.vars;
    record.n_rows = stats.rows;
    record.n_nonzeros = stats.nonzeros;
    record.z_cr = lp.objective;
    record.time_s = time_s;
    record.redu_con = redu_con(inst, case.kind, &windows)?;
    Ok(Solved { record, z_incumbent: z_mip, f: Some((f, lp.values)) })
}

fn run_jobs(
    instances: &[(String, UcInstance)],
    cases: &[BenchCase],
    cfg: &BenchConfig,
) -> Vec<Result<Solved, (BenchRecord, String)>> {
    let jobs: Vec<(usize, usize)> =
        (0..instances.len()).flat_map(|i| (0..cases.len()).map(move |c| (i, c))).collect();
    let run = |&(i, c): &(usize, usize)| {
        let (id, inst) = &instances[i];
        run_one(id, inst, &cases[c], cfg).map_err(|e| (empty_record(id, &cases[c]), e.to_string()))
    };
    let threads = cfg.threads.max(1).min(jobs.len().max(1));
    if threads == 1 {
        return jobs.iter().map(run).collect();
    }
    let chunk = jobs.len().div_ceil(threads);
    std::thread::scope(|s| {
        let handles: Vec<_> = jobs.chunks(chunk).map(|part| s.spawn(move || part.iter().map(run).collect::<Vec<_>>())).collect();
        handles.into_iter().flat_map(|h| h.join().expect("bench worker panicked")).collect()
    })
}

/// Runs every case on every instance. `Z_MIP` is the best incumbent across
/// the cases of an instance; `rtime` is relative to the 3P case when present.
pub fn bench_run(instances: &[(String, UcInstance)], cases: &[BenchCase], cfg: &BenchConfig) -> Vec<BenchRecord> {
    let results = run_jobs(instances, cases, cfg);
    let mut out = Vec::with_capacity(results.len());
    for chunk in results.chunks(cases.len().max(1)) {
        let z_best = chunk
            .iter()
            .filter_map(|r| r.as_ref().ok().map(|s| s.z_incumbent))
            .filter(|z| z.is_finite())
            .fold(f64::INFINITY, f64::min);
        let ref_time = chunk
            .iter()
            .zip(cases)
            .find(|(r, c)| c.kind == ModelKind::ThreeP && r.is_ok())
            .and_then(|(r, _)| r.as_ref().ok().map(|s| s.record.time_s));
        for r in chunk {
            match r {
                Ok(s) => {
                    let mut rec = s.record.clone();
                    rec.z_mip = z_best;
                    if let Some((f, x)) = &s.f {
                        let lp = crate::solver::LpSolution {
                            status: LpStatus::Optimal,
                            objective: rec.z_cr,
                            values: x.clone(),
                            iterations: 0,
                        };
                        match metrics(z_best, &lp, f, cfg.solver.integer_tol) {
                            Ok(m) => {
                                rec.igap = m.igap;
                                rec.nb = m.nb;
                            }
                            Err(e) => rec.error = e.to_string(),
                        }
                    }
                    rec.rtime = ref_time.map_or(f64::NAN, |t| rec.time_s / t.max(1e-12));
                    out.push(rec);
                }
                Err((rec, e)) => {
                    let mut rec = rec.clone();
                    rec.error = e.clone();
                    out.push(rec);
                }
            }
        }
    }
    out
}

pub fn write_csv<W: Write>(records: &[BenchRecord], w: W) -> Result<(), BenchError> {
    let mut wr = csv::Writer::from_writer(w);
    for r in records {
        wr.serialize(r)?;
    }
    wr.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_csv<R: Read>(r: R) -> Result<Vec<BenchRecord>, BenchError> {
    let mut rd = csv::Reader::from_reader(r);
    Ok(rd.deserialize().collect::<Result<Vec<BenchRecord>, _>>()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::synthetic::generate_synthetic;

    #[test]
    fn two_and_three_period_rows() {
        let inst = generate_synthetic(3, 2, 6);
        let cases = [BenchCase::new(ModelKind::TwoP, WindowChoice::Fixed(3)), BenchCase::new(ModelKind::ThreeP, WindowChoice::Fixed(3))];
        let recs = bench_run(&[("s3".into(), inst)], &cases, &BenchConfig::default());
        assert_eq!(recs.len(), 2);
        assert!(recs.iter().all(|r| r.error.is_empty()));
        assert!(recs[0].igap >= recs[1].igap - 1e-9);
        assert!(recs[1].igap >= -1e-9);
        assert!((recs[1].rtime - 1.0).abs() < 1e-12);
        assert!(recs.iter().all(|r| (0.0..=1.0).contains(&r.nb)));
    }

    #[test]
    fn csv_round_trip_and_error_column() {
        let inst = generate_synthetic(4, 1, 4);
        let cases = [BenchCase::new(ModelKind::Mp1, WindowChoice::Fixed(1)), BenchCase::new(ModelKind::Mp3, WindowChoice::Fixed(3))];
        let cfg = BenchConfig { threads: 2, ..BenchConfig::default() };
        let recs = bench_run(&[("s4".into(), inst)], &cases, &cfg);
        assert!(!recs[0].error.is_empty());
        assert!(recs[1].error.is_empty());
        let mut buf = Vec::new();
        write_csv(&recs, &mut buf).unwrap();
        let back = read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(format!("{:?}", back[1]), format!("{:?}", recs[1]));
        assert_eq!(back[0].error, recs[0].error);
    }
}
