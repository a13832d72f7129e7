//! `helmwave`: reproduces the iteration-count tables and Fourier-analysis figures from config files.

mod config;
mod figures;
mod tables;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::json;

use config::{ConfigError, Experiment, ExperimentConfig};
use figures::{FigurePlan, SweepRow};
use tables::{check_size_guard, resolve_series, run_level, series_manifest, SolverSettings, TableRow};

#[derive(Parser)]
#[command(name = "helmwave", version, about = "Multilevel Helmholtz experiments and 1D Fourier analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Runs a table (table1..table7), figure (fig1..fig5) or custom solver experiment.
    Run {
        config: PathBuf,
        #[arg(long, default_value = ".")]
        output_dir: PathBuf,
        /// Allows runs with more than 5e6 fine unknowns.
        #[arg(long)]
        override_size_guard: bool,
        /// Prints progress and writes residual histories and cycle traces.
        #[arg(long)]
        verbose: bool,
    },
    /// Runs a Fourier-analysis experiment: fig1..fig5 or a custom sweep.
    Lfa {
        config: PathBuf,
        #[arg(long, default_value = ".")]
        output_dir: PathBuf,
        #[arg(long)]
        verbose: bool,
    },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("invalid config: {0}")]
    Config(#[from] ConfigError),
    #[error("invalid config: {0}")]
    Usage(String),
    #[error("{0}")]
    Core(#[from] helmwave_core::HelmError),
    #[error("{0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Json(#[from] serde_json::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => 1,
            _ => 2,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn load_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    // An unreadable config file is the caller's input problem, not an internal failure.
    let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    Ok(ExperimentConfig::parse(&text)?)
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run {
            config,
            output_dir,
            override_size_guard,
            verbose,
        } => {
            let cfg = load_config(&config)?;
            if cfg.experiment().is_figure() {
                run_figure(&cfg, &output_dir, "run", verbose)
            } else {
                run_table(&cfg, &output_dir, override_size_guard, verbose)
            }
        }
        Command::Lfa { config, output_dir, verbose } => {
            let cfg = load_config(&config)?;
            match cfg.experiment() {
                Experiment::Table(_) => Err(CliError::Usage(format!("{} is a solver experiment; use `helmwave run`", cfg.experiment()))),
                _ => run_figure(&cfg, &output_dir, "lfa", verbose),
            }
        }
    }
}

/// CSV path from `output_path` (relative to the output directory) or `<experiment>.csv`.
fn output_paths(cfg: &ExperimentConfig, dir: &Path) -> Result<(PathBuf, PathBuf), CliError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let csv = dir.join(cfg.output_path.clone().unwrap_or_else(|| format!("{}.csv", cfg.experiment())));
    if let Some(parent) = csv.parent() {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    let manifest = csv.with_extension("manifest.json");
    Ok((csv, manifest))
}

fn write_manifest(path: &Path, value: &serde_json::Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

fn run_table(cfg: &ExperimentConfig, dir: &Path, override_guard: bool, verbose: bool) -> Result<(), CliError> {
    let series = resolve_series(cfg)?;
    let largest = check_size_guard(&series, override_guard)?;
    let settings = SolverSettings::from_config(cfg);
    let (csv_path, manifest_path) = output_paths(cfg, dir)?;
    let start = Instant::now();

    // Rows are flushed as they finish so a long table keeps its completed entries.
    let mut w = csv::Writer::from_path(&csv_path)?;
    w.write_record(["series", "level", "dofs", "iter"])?;
    w.flush().map_err(io_err(&csv_path))?;
    let mut rows: Vec<TableRow> = Vec::new();
    for s in &series {
        for (&grids, &label) in s.grids.iter().zip(&s.labels) {
            let r = run_level(s, &settings, grids, label, verbose)?;
            if verbose {
                eprintln!("{} level {}: {} unknowns, iter {} ({:.1} s)", r.series, r.level, r.dofs, r.iter_cell(settings.max_iter), r.wall_time);
            }
            w.write_record([r.series.clone(), r.level.to_string(), r.dofs.to_string(), r.iter_cell(settings.max_iter)])?;
            w.flush().map_err(io_err(&csv_path))?;
            rows.push(r);
        }
    }

    let mut outputs = vec![csv_path.display().to_string()];
    if verbose {
        for r in &rows {
            let base = csv_path.file_stem().and_then(|s| s.to_str()).unwrap_or("run");
            let stem = if base == r.series {
                format!("{base}_L{}", r.level)
            } else {
                format!("{base}_{}_L{}", r.series, r.level)
            };
            let hist = csv_path.with_file_name(format!("{stem}_history.csv"));
            let mut w = csv::Writer::from_path(&hist)?;
            w.write_record(["iteration", "relative_residual"])?;
            for (k, v) in r.history.iter().enumerate() {
                w.write_record([k.to_string(), v.to_string()])?;
            }
            w.flush().map_err(io_err(&hist))?;
            let trace = csv_path.with_file_name(format!("{stem}_trace.csv"));
            let mut w = csv::Writer::from_path(&trace)?;
            w.write_record(["stage", "pass", "level", "smoother", "residual_before", "residual_after"])?;
            for (i, pass, level, smoother, before, after) in &r.trace {
                w.write_record([i.to_string(), pass.clone(), level.to_string(), smoother.clone(), before.to_string(), after.to_string()])?;
            }
            w.flush().map_err(io_err(&trace))?;
            outputs.push(hist.display().to_string());
            outputs.push(trace.display().to_string());
        }
    }

    let manifest = json!({
        "command": "run",
        "experiment": cfg.experiment().to_string(),
        "version": env!("CARGO_PKG_VERSION"),
        "solver": {
            "m1": settings.m1,
            "mu": settings.mu,
            "alpha": settings.alpha,
            "omega": settings.omega,
            "classical": format!("{:?}", settings.classical),
            "tol": settings.tol,
            "max_iter": settings.max_iter,
            "source": format!("{:?}", settings.source),
        },
        "series": series.iter().map(|s| series_manifest(s, &settings)).collect::<Vec<_>>(),
        "largest_run_dofs": largest,
        "size_guard_overridden": override_guard,
        "runs": rows.iter().map(|r| json!({
            "series": r.series, "level": r.level, "dofs": r.dofs, "iterations": r.iterations,
            "converged": r.converged, "final_relative_residual": r.history.last(), "wall_time_s": r.wall_time,
        })).collect::<Vec<_>>(),
        "outputs": outputs,
        "wall_time_s": start.elapsed().as_secs_f64(),
    });
    write_manifest(&manifest_path, &manifest)?;
    if verbose {
        eprintln!("wrote {}", csv_path.display());
    }
    Ok(())
}

fn run_figure(cfg: &ExperimentConfig, dir: &Path, command: &str, verbose: bool) -> Result<(), CliError> {
    let plan = FigurePlan::from_config(cfg)?;
    let (csv_path, manifest_path) = output_paths(cfg, dir)?;
    let start = Instant::now();
    let rows: Vec<SweepRow> = plan.run()?;

    let mut w = csv::Writer::from_path(&csv_path)?;
    w.write_record(["theta0", "rho", "variant", "t", "sigma_re", "sigma_im", "omega", "beta"])?;
    for r in &rows {
        w.write_record([
            r.theta0.to_string(),
            r.rho.to_string(),
            r.variant.clone(),
            r.t.to_string(),
            r.sigma.re.to_string(),
            r.sigma.im.to_string(),
            r.omega.to_string(),
            r.beta.map(|b| b.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush().map_err(io_err(&csv_path))?;

    let manifest = json!({
        "command": command,
        "experiment": cfg.experiment().to_string(),
        "version": env!("CARGO_PKG_VERSION"),
        "analysis": plan.manifest(),
        "rows": rows.len(),
        "outputs": [csv_path.display().to_string()],
        "wall_time_s": start.elapsed().as_secs_f64(),
    });
    write_manifest(&manifest_path, &manifest)?;
    if verbose {
        eprintln!("wrote {} ({} rows)", csv_path.display(), rows.len());
    }
    Ok(())
}
