use std::fs::{self, File};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fracture_core::config::check_criticality;
use fracture_core::eigenerosion::{optimal_inelastic_energy, solve_ee_elastic};
use fracture_core::harness::{
    fit_method, sweep_epsilons, timing_comparison, timing_epsilon, write_fits, write_records, write_sweeps,
    write_timings, PfSweep,
};
use fracture_core::phasefield::{epsilon_sweep, optimal_epsilon_pf};
use fracture_core::{
    build_grid, load_config, reference_energies, run_study, EEOptions, EpsilonSetting, Error, LinearSolverKind,
    Method, PhaseField, ProblemParams, QuadratureMode, StudyConfig,
};
use log::{info, warn};

const EXIT_FAILED_RUN: u8 = 2;
const EXIT_CONFIG: u8 = 3;

#[derive(Parser)]
#[command(name = "fracture-bench", version, about = "Eigenerosion and phase-field fracture benchmark")]
struct Cli {
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analytic and closed-form self-tests.
    Check,
    /// One method on one mesh; prints the study record as CSV.
    Run {
        #[arg(long)]
        method: Method,
        #[arg(long = "h-over-d")]
        h_over_d: f64,
        /// A positive value or `auto`.
        #[arg(long, default_value = "auto")]
        epsilon: EpsilonArg,
        /// Configuration file; the Table 1 panel when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Phase-field ε sweep on one mesh; prints one CSV row per ε.
    Sweep {
        #[arg(long, value_parser = ["pf"])]
        method: String,
        #[arg(long = "h-over-d")]
        h_over_d: f64,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Full mesh study; writes records, sweeps and fits to the output directory.
    Convergence {
        #[arg(long)]
        config: PathBuf,
    },
    /// EE against single-ε PF wall times in `fast` quadrature mode.
    Timing {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 3)]
        reps: usize,
    },
}

#[derive(Clone, Copy)]
enum EpsilonArg {
    Auto,
    Value(f64),
}

impl std::str::FromStr for EpsilonArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "auto" {
            return Ok(EpsilonArg::Auto);
        }
        match s.parse::<f64>() {
            Ok(v) if v > 0.0 && v.is_finite() => Ok(EpsilonArg::Value(v)),
            _ => Err(format!("expected a positive number or `auto`, got `{s}`")),
        }
    }
}

enum Failure {
    Config(String),
    Run(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_config_error() {
            Failure::Config(e.to_string())
        } else {
            Failure::Run(e.to_string())
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Run(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let outcome = match cli.command {
        Command::Check => check(),
        Command::Run {
            method,
            h_over_d,
            epsilon,
            config,
            out,
        } => run(method, h_over_d, epsilon, config.as_deref(), out.as_deref()),
        Command::Sweep {
            h_over_d, config, out, ..
        } => sweep(h_over_d, config.as_deref(), out.as_deref()),
        Command::Convergence { config } => convergence(&config),
        Command::Timing { config, reps } => timing(&config, reps),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Run(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(EXIT_FAILED_RUN)
        }
    }
}

fn config_or_default(path: Option<&Path>) -> Result<StudyConfig, Failure> {
    let cfg = match path {
        Some(p) => load_config(p).map_err(|e| Failure::Config(e.to_string()))?,
        None => StudyConfig::table1(),
    };
    let report = cfg.criticality();
    if !report.pass {
        return Err(Failure::Config(format!(
            "load is not critical: |Gc − Gc_crit|/Gc = {:.3e} exceeds {:.1e} (Gc_crit = {:.9e})",
            report.mismatch, report.tolerance, report.critical_gc
        )));
    }
    Ok(cfg)
}

fn output(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn check() -> Outcome {
    let mut failed = 0;
    let mut verdict = |name: &str, pass: bool, detail: String| {
        println!("{} {name}: {detail}", if pass { "ok  " } else { "FAIL" });
        failed += usize::from(!pass);
    };

    let table = ProblemParams::table1();
    let c = check_criticality(&table, 1e-5);
    verdict(
        "criticality",
        c.pass,
        format!("Gc_crit = {:.9e}, mismatch {:.2e}", c.critical_gc, c.mismatch),
    );

    let cfg = StudyConfig::table1();
    let p = cfg.problem;
    let expected = [0.9963327, 0.7658681, 0.6327005, 0.5522746, 0.5018124];
    let worst = [0.02, 0.01, 0.005, 0.0025, 0.00125]
        .iter()
        .zip(expected)
        .map(|(r, e)| (optimal_inelastic_energy(p.a, r * p.d, 1.0) - e).abs() / e)
        .fold(0.0f64, f64::max);
    verdict(
        "eigenerosion closed forms",
        worst <= 1e-6,
        format!("max relative deviation {worst:.2e}"),
    );

    let r = reference_energies(&p);
    verdict(
        "reference energies",
        (r.w0 - 6.25e-5).abs() < 1e-15 && r.pi_total_domain > r.pi_total_exact,
        format!(
            "W0 = {:.6e}, Π closed form {:.9e}, Π domain {:.9e}",
            r.w0, r.pi_total_exact, r.pi_total_domain
        ),
    );

    let grid = build_grid(p.d, 0.02)?;
    let options = EEOptions {
        quadrature: QuadratureMode::Reference,
        residual: 0.0,
        solver: LinearSolverKind::Direct,
    };
    let intact = solve_ee_elastic(&grid, &p.uncracked(), &options)?;
    let rel = (intact.energy.potential + 1.5625e-3).abs() / 1.5625e-3;
    verdict(
        "uncracked panel",
        rel <= 1e-10,
        format!("Π = {:.12e}, relative error {rel:.2e}", intact.energy.potential),
    );

    if failed > 0 {
        Err(Failure::Run(format!("{failed} self-test(s) failed")))
    } else {
        Ok(())
    }
}

fn run(method: Method, h_over_d: f64, epsilon: EpsilonArg, config: Option<&Path>, out: Option<&Path>) -> Outcome {
    let mut cfg = config_or_default(config)?;
    cfg.h_over_d = vec![h_over_d];
    cfg.methods = vec![method];
    match (method, epsilon) {
        (Method::Pf, EpsilonArg::Value(e)) => cfg.pf.epsilon_list = Some(vec![e]),
        (Method::Pf, EpsilonArg::Auto) => {}
        (_, EpsilonArg::Value(e)) => cfg.ee.epsilon = EpsilonSetting::Value(e),
        (_, EpsilonArg::Auto) => cfg.ee.epsilon = EpsilonSetting::Auto,
    }
    let study = run_study(&cfg)?;
    write_records(&study.records, output(out)?)?;
    if study.any_failed() {
        return Err(Failure::Run(failures(&study.records)));
    }
    Ok(())
}

fn failures(records: &[fracture_core::StudyRecord]) -> String {
    let list: Vec<String> = records
        .iter()
        .filter(|r| r.failure.is_some() || !r.converged)
        .map(|r| {
            format!(
                "{} at h = {}: {}",
                r.method,
                r.h,
                r.failure.as_deref().unwrap_or("did not converge")
            )
        })
        .collect();
    format!("{} failed run(s): {}", list.len(), list.join("; "))
}

fn sweep(h_over_d: f64, config: Option<&Path>, out: Option<&Path>) -> Outcome {
    let cfg = config_or_default(config)?;
    let grid = build_grid(cfg.problem.d, h_over_d)?;
    let epsilons = sweep_epsilons(&cfg, grid.h)?;
    let mut pf = PhaseField::new(&grid, &cfg.problem, cfg.quadrature, LinearSolverKind::Direct)?;
    let start = std::time::Instant::now();
    let records = epsilon_sweep(&mut pf, &cfg.pf, &epsilons);
    let optimum = optimal_epsilon_pf(&records).map_err(|e| e.to_string());
    let result = PfSweep {
        h: grid.h,
        records,
        optimum: optimum.clone(),
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    write_sweeps(std::slice::from_ref(&result), output(out)?)?;
    match optimum {
        Ok((eps, potential)) => {
            info!("ε_h = {eps:.6e}, interpolated Π = {potential:.9e}");
            eprintln!("epsilon_h = {eps:e}, potential = {potential:e}");
        }
        Err(e) => warn!("no interior optimum: {e}"),
    }
    let failed = result.records.iter().filter(|r| r.failure.is_some() || !r.converged).count();
    if failed > 0 {
        return Err(Failure::Run(format!("{failed} sweep run(s) failed")));
    }
    Ok(())
}

fn convergence(config: &Path) -> Outcome {
    let cfg = config_or_default(Some(config))?;
    fs::create_dir_all(&cfg.output_dir)?;
    let study = run_study(&cfg)?;
    let dir = &cfg.output_dir;
    write_records(&study.records, File::create(dir.join("records.csv"))?)?;
    if !study.sweeps.is_empty() {
        write_sweeps(&study.sweeps, File::create(dir.join("sweeps.csv"))?)?;
    }
    let mut fits = Vec::new();
    for method in Method::ALL.into_iter().filter(|m| cfg.runs(*m)) {
        match fit_method(&study, method) {
            Ok(f) => {
                println!("{method}: C = {:.4e}, alpha = {:.4} over {} meshes", f.c, f.alpha, f.points);
                fits.push((method, cfg.reference, f));
            }
            Err(e) => warn!("{method}: no fit: {e}"),
        }
    }
    write_fits(&fits, File::create(dir.join("fits.csv"))?)?;
    info!("results written to {}", dir.display());
    if study.any_failed() {
        return Err(Failure::Run(failures(&study.records)));
    }
    Ok(())
}

fn timing(config: &Path, reps: usize) -> Outcome {
    if reps == 0 {
        return Err(Failure::Config("--reps must be at least 1".into()));
    }
    let cfg = config_or_default(Some(config))?;
    fs::create_dir_all(&cfg.output_dir)?;
    let rows = timing_comparison(&cfg, reps, |h| timing_epsilon(&cfg, h))?;
    write_timings(&rows, io::stdout().lock())?;
    write_timings(&rows, File::create(cfg.output_dir.join("timing.csv"))?)?;
    Ok(())
}
