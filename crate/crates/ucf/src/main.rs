use clap::{Args, Parser, Subcommand, ValueEnum};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use ucf::builder::{build_formulation, piecewise_linearize, resolve_windows, BuildOptions, ModelKind, WindowChoice};
use ucf::cli::{bench_run, performance_profile, profile_csv, verify_unit_window, write_csv, BenchCase, BenchConfig, VerifyRequest};
use ucf::instance::load_instance;
use ucf::polylab::PolytopeKind;
use ucf::solver::{solve_external, solve_lp, solve_mip, write_mps, ExternalMode, SolverConfig};

#[derive(Parser)]
#[command(name = "ucf", version, about = "Unit-commitment formulations and polyhedral checks")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct ModelArgs {
    /// 2p, 3p, 3p-hd, mp1, mp2, mp3 or mp-ti
    #[arg(long, default_value = "mp3")]
    model: String,
    /// Window size: an integer, H or T
    #[arg(long, default_value = "H")]
    window: String,
    /// Tangent pieces for the quadratic cost
    #[arg(long, default_value_t = 4)]
    pieces: usize,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a formulation and print its size
    Build {
        instance: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
        /// Write the linearized model as MPS
        #[arg(long)]
        emit_mps: Option<PathBuf>,
    },
    /// Solve the relaxation and the MIP
    Solve {
        instance: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
        /// External solver template with {mps}, {sol} and {mode}
        #[arg(long)]
        solver_cmd: Option<String>,
        /// Working directory for external solves
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long)]
        emit_mps: Option<PathBuf>,
    },
    /// Facet reports for one unit and window, as JSON lines
    Verify {
        instance: PathBuf,
        #[arg(long, default_value_t = 0)]
        unit: usize,
        #[arg(long, default_value_t = 0)]
        start: i64,
        #[arg(long, default_value = "3")]
        window: i64,
        #[arg(long, value_enum, default_value = "q")]
        polytope: PolyArg,
    },
    /// Benchmark model kinds over instances and write CSV files
    Bench {
        instances: Vec<PathBuf>,
        /// Comma-separated model kinds
        #[arg(long, default_value = "2p,3p,3p-hd,mp1,mp2,mp3,mp-ti")]
        model: String,
        /// Comma-separated window choices for window models
        #[arg(long, default_value = "H")]
        window: String,
        #[arg(long, default_value_t = 4)]
        pieces: usize,
        #[arg(long)]
        solver_cmd: Option<String>,
        #[arg(long, default_value = "bench_out")]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
    /// Generate a synthetic instance
    Gen {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        units: usize,
        #[arg(long, default_value_t = 24)]
        horizon: usize,
        /// Output file (stdout when absent)
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PolyArg {
    B,
    P,
    Q,
    Bt,
    Pt,
    Qt,
}

impl From<PolyArg> for PolytopeKind {
    fn from(p: PolyArg) -> Self {
        match p {
            PolyArg::B => PolytopeKind::B,
            PolyArg::P => PolytopeKind::P,
            PolyArg::Q => PolytopeKind::Q,
            PolyArg::Bt => PolytopeKind::BTilde,
            PolyArg::Pt => PolytopeKind::PTilde,
            PolyArg::Qt => PolytopeKind::QTilde,
        }
    }
}

enum Failure {
    Validation(String),
    Solver(String),
}

fn invalid(e: impl ToString) -> Failure {
    Failure::Validation(e.to_string())
}

fn solver_err(e: impl ToString) -> Failure {
    Failure::Solver(e.to_string())
}

fn build(path: &Path, m: &ModelArgs) -> Result<ucf::builder::Formulation, Failure> {
    let inst = load_instance(path).map_err(invalid)?;
    let kind: ModelKind = m.model.parse().map_err(invalid)?;
    let choice: WindowChoice = m.window.parse().map_err(invalid)?;
    let windows = if kind.uses_windows() { resolve_windows(&inst, choice).map_err(invalid)? } else { Vec::new() };
    let f = build_formulation(&inst, kind, &windows, BuildOptions::default()).map_err(invalid)?;
    Ok(piecewise_linearize(&f, m.pieces))
}

fn split<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, Failure>
where
    T::Err: ToString,
{
    s.split(',').map(|x| x.trim().parse::<T>().map_err(invalid)).collect()
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.cmd {
        Cmd::Build { instance, model, emit_mps } => {
            let f = build(&instance, &model)?;
            let s = f.stats();
            println!("model {} vars {} binaries {} rows {} nonzeros {}", f.kind, s.vars, s.binaries, s.rows, s.nonzeros);
            if let Some(p) = emit_mps {
                write_mps(&f, &p).map_err(invalid)?;
            }
        }
        Cmd::Solve { instance, model, solver_cmd, out, emit_mps } => {
            let f = build(&instance, &model)?;
            if let Some(p) = &emit_mps {
                write_mps(&f, p).map_err(invalid)?;
            }
            let cfg = SolverConfig { external_cmd: solver_cmd.clone(), ..SolverConfig::default() };
            if solver_cmd.is_some() {
                std::fs::create_dir_all(&out).map_err(invalid)?;
                let lp = solve_external(&f, &out, "model", ExternalMode::Lp, &cfg).map_err(solver_err)?;
                let mip = solve_external(&f, &out, "model", ExternalMode::Mip, &cfg).map_err(solver_err)?;
                println!("z_cr {} z_mip {}", lp.objective, mip.objective);
            } else {
                let lp = solve_lp(&f, &cfg).map_err(solver_err)?;
                let mip = solve_mip(&f, &cfg).map_err(solver_err)?;
                if !mip.objective.is_finite() {
                    return Err(Failure::Solver(format!("MIP ended with status {:?}", mip.status)));
                }
                println!(
                    "z_cr {} z_mip {} bound {} gap {:.3e} nodes {} status {:?}",
                    lp.objective, mip.objective, mip.bound, mip.gap, mip.nodes, mip.status
                );
            }
        }
        Cmd::Verify { instance, unit, start, window, polytope } => {
            let inst = load_instance(&instance).map_err(invalid)?;
            let req = VerifyRequest { unit, m: start, size: window, kind: polytope.into() };
            print!("{}", verify_unit_window(&inst, &req).map_err(invalid)?);
        }
        Cmd::Bench { instances, model, window, pieces, solver_cmd, out, threads } => {
            if instances.is_empty() {
                return Err(invalid("no instances given"));
            }
            let kinds: Vec<ModelKind> = split(&model)?;
            let windows: Vec<WindowChoice> = split(&window)?;
            let mut cases = Vec::new();
            for k in kinds {
                if k.uses_windows() {
                    cases.extend(windows.iter().map(|&w| BenchCase::new(k, w)));
                } else {
                    cases.push(BenchCase::new(k, WindowChoice::Heuristic));
                }
            }
            let loaded = instances
                .iter()
                .map(|p| {
                    let id = p.file_stem().map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned());
                    load_instance(p).map(|i| (id, i)).map_err(invalid)
                })
                .collect::<Result<Vec<_>, _>>()?;
            std::fs::create_dir_all(&out).map_err(invalid)?;
            let mps_dir = out.join("mps");
            if solver_cmd.is_some() {
                std::fs::create_dir_all(&mps_dir).map_err(invalid)?;
            }
            let cfg = BenchConfig {
                pieces,
                solver: SolverConfig { external_cmd: solver_cmd.clone(), ..SolverConfig::default() },
                external_dir: solver_cmd.map(|_| mps_dir),
                threads,
            };
            let recs = bench_run(&loaded, &cases, &cfg);
            let file = std::fs::File::create(out.join("bench.csv")).map_err(invalid)?;
            write_csv(&recs, file).map_err(invalid)?;
            let mut times: BTreeMap<String, Vec<f64>> = BTreeMap::new();
            for r in &recs {
                times.entry(format!("{}@{}", r.model, r.window)).or_default().push(r.time_s);
            }
            if let Ok(p) = performance_profile(&times) {
                std::fs::write(out.join("profile.csv"), profile_csv(&p)).map_err(invalid)?;
            }
            let failed = recs.iter().filter(|r| !r.error.is_empty()).count();
            println!("{} records, {failed} failed, written to {}", recs.len(), out.display());
            if failed > 0 {
                return Err(Failure::Solver(format!("{failed} records failed")));
            }
        }
        Cmd::Gen { seed, units, horizon, out } => {
            if units == 0 || horizon < 2 {
                return Err(invalid("need at least one unit and two periods"));
            }
            let text = ucf::cli::generate_synthetic(seed, units, horizon).to_json_string();
            match out {
                Some(p) => std::fs::write(p, text).map_err(invalid)?,
                None => println!("{text}"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Solver(e)) => {
            eprintln!("solver error: {e}");
            ExitCode::from(3)
        }
    }
}
