use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sdg_bench::checks::{check_derivatives, GRADIENT_TOL};
use sdg_bench::profile::{retain_instances, same_solution_filter, RecordRow};
use sdg_bench::report::{emit_profile, emit_reports, read_records, write_table1};
use sdg_bench::suite::{check_assertions, run_suite};
use sdg_bench::table1::{check_invariance, check_shi_degradation, run_table1, Check};
use sdg_bench::{BenchError, ExperimentConfig, Statistic, OUT_DIR_ENV};

const DEFAULT_OUT: &str = "sdg_out";

#[derive(Parser)]
#[command(name = "sdg", version, about = "Steepest-descent globalized Newton-type solvers: experiments and reports")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and write records.csv and profiles.
    Run {
        config: PathBuf,
        /// Output directory (overrides SDG_OUT_DIR and the config).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Check the config's `assert` thresholds; exit 2 on failure.
        #[arg(long)]
        assert: bool,
    },
    /// Compute a performance profile from an existing records.csv.
    Profile {
        records: PathBuf,
        #[arg(long, value_parser = parse_stat)]
        stat: Statistic,
        /// Keep only instances where all algorithms reach the same value.
        #[arg(long)]
        same_solution: bool,
        /// Output directory (defaults to the directory of the records).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The ω-sweep on the scaled Brown badly scaled function.
    Table1 {
        #[arg(long, default_value_t = 1e-3)]
        eps: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Check invariance of the BB2 counts and growth of the unit-ξ counts.
        #[arg(long)]
        assert: bool,
    },
    /// Compare analytic gradients with central differences.
    CheckDerivatives {
        #[arg(long)]
        problem: Option<String>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

fn parse_stat(s: &str) -> Result<Statistic, String> {
    s.parse()
}

fn out_dir(flag: Option<PathBuf>, fallback: impl FnOnce() -> PathBuf) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from)).unwrap_or_else(fallback)
}

fn report_checks(checks: &[Check]) -> bool {
    for c in checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    checks.iter().all(|c| c.passed)
}

fn cmd_run(config: &Path, out: Option<PathBuf>, assert: bool) -> Result<ExitCode, BenchError> {
    let cfg = ExperimentConfig::load(config)?;
    let dir = out_dir(out, || cfg.out_dir.as_ref().map_or_else(|| PathBuf::from(DEFAULT_OUT), |p| cfg.resolve_path(p)));
    let records = run_suite(&cfg)?;
    let rows: Vec<RecordRow> = records.iter().map(RecordRow::from).collect();
    let profiled = if cfg.same_solution { retain_instances(&rows, &same_solution_filter(&rows)) } else { rows.clone() };
    std::fs::create_dir_all(&dir).map_err(|e| BenchError::io(&dir, e))?;
    let mut files = emit_reports(&rows, &[], &dir)?;
    for &s in &cfg.statistics {
        files.extend(emit_profile(&profiled, s, &dir)?);
    }
    let converged = rows.iter().filter(|r| r.converged()).count();
    println!("{} runs, {} converged", rows.len(), converged);
    for f in &files {
        println!("wrote {}", f.display());
    }
    if assert && !report_checks(&check_assertions(&cfg, &rows)) {
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_profile(records: &Path, stat: Statistic, same: bool, out: Option<PathBuf>) -> Result<ExitCode, BenchError> {
    let rows = read_records(records)?;
    let rows = if same { retain_instances(&rows, &same_solution_filter(&rows)) } else { rows };
    let dir = out_dir(out, || records.parent().map_or_else(|| PathBuf::from("."), Path::to_path_buf));
    std::fs::create_dir_all(&dir).map_err(|e| BenchError::io(&dir, e))?;
    for f in emit_profile(&rows, stat, &dir)? {
        println!("wrote {}", f.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_table1(eps: f64, out: Option<PathBuf>, assert: bool) -> Result<ExitCode, BenchError> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(BenchError::Config("--eps must lie in (0, 1)".into()));
    }
    let rows = run_table1(eps);
    println!("{:>8} {:>8} {:>10} {:>8} {:>10}", "omega", "its_bb2", "evals_bb2", "its_shi", "evals_shi");
    for r in &rows {
        println!("{:>8e} {:>8} {:>10} {:>8} {:>10}", r.omega, r.its_bb2, r.evals_bb2, r.its_shi, r.evals_shi);
    }
    let dir = out_dir(out, || PathBuf::from(DEFAULT_OUT));
    std::fs::create_dir_all(&dir).map_err(|e| BenchError::io(&dir, e))?;
    let path = dir.join("table1.csv");
    write_table1(&path, &rows)?;
    println!("wrote {}", path.display());
    if assert && !report_checks(&[check_invariance(&rows), check_shi_degradation(&rows)]) {
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_check(problem: Option<&str>, seed: u64) -> Result<ExitCode, BenchError> {
    let res = check_derivatives(problem, seed)?;
    for r in &res {
        println!("{} {:<26} max rel. error {:.3e} over {} points", if r.passed { "PASS" } else { "FAIL" }, r.problem, r.max_error, r.points);
    }
    if res.iter().all(|r| r.passed) {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("gradient check failed (tolerance {GRADIENT_TOL:e})");
        Ok(ExitCode::from(2))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let res = match cli.command {
        Command::Run { config, out, assert } => cmd_run(&config, out, assert),
        Command::Profile { records, stat, same_solution, out } => cmd_profile(&records, stat, same_solution, out),
        Command::Table1 { eps, out, assert } => cmd_table1(eps, out, assert),
        Command::CheckDerivatives { problem, seed } => cmd_check(problem.as_deref(), seed),
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
