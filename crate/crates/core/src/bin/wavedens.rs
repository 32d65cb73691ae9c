use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use wavedens::basis::Family;
use wavedens::estimator::{
    expected_estimator, EvaluationGrid, WaveletDensityEstimator, DEFAULT_GRID_CAP,
};
use wavedens::experiments::{emit_report, run_experiment, ExperimentConfig};
use wavedens::grid::BoxRegion;
use wavedens::increments::{g_n_x, g_tilde_n_x};
use wavedens::kernel::ProjectionKernel;
use wavedens::limit_sets::gamma_interval;
use wavedens::sampling::{make_density, SeedSpec};
use wavedens::{Error, Result};

#[derive(Parser)]
#[command(
    name = "wavedens",
    version,
    about = "Wavelet-projection density estimation and its Monte Carlo harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum GridKind {
    Dyadic,
    Uniform,
}

#[derive(Clone, Copy, ValueEnum)]
enum IncrementKind {
    Gnx,
    Gtilde,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate a scaling function on its dyadic nodes.
    Basis {
        #[arg(long)]
        family: Family,
        #[arg(long, default_value_t = 12)]
        depth: u32,
        #[arg(long)]
        emit: PathBuf,
    },
    /// Sample the localized kernel section on its grid.
    Kernel {
        #[arg(long)]
        family: Family,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long)]
        level: u32,
        /// One coordinate, or `d` comma-separated coordinates.
        #[arg(long)]
        center: String,
        #[arg(long)]
        step: f64,
        #[arg(long)]
        emit: PathBuf,
    },
    /// Fit the estimator to a seeded sample and tabulate it on [0, 1]^d.
    Estimate {
        #[arg(long)]
        family: Family,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long)]
        level: u32,
        #[arg(long)]
        density: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = GridKind::Dyadic)]
        grid: GridKind,
        /// Points per axis for the uniform grid.
        #[arg(long, default_value_t = 101)]
        points: usize,
        #[arg(long)]
        emit: PathBuf,
    },
    /// Tabulate g_{n,x} or its counting analogue on the kernel grid.
    Increments {
        #[arg(long, value_enum)]
        kind: IncrementKind,
        #[arg(long)]
        family: Family,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long)]
        level: u32,
        #[arg(long)]
        center: String,
        #[arg(long, default_value_t = 1.0 / 256.0)]
        step: f64,
        #[arg(long)]
        density: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// The constant c of the counting version.
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long)]
        emit: PathBuf,
    },
    /// Endpoints of the kernel functional over the Poisson limit set.
    Limitsets {
        #[arg(long)]
        family: Family,
        #[arg(long)]
        v: f64,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long, default_value_t = 1.0 / 1024.0)]
        step: f64,
        #[arg(long)]
        emit: PathBuf,
    },
    /// Theorem-1 Monte Carlo run.
    Theorem1 {
        #[arg(long)]
        config: PathBuf,
    },
    /// Theorem-2 Monte Carlo run.
    Theorem2 {
        #[arg(long)]
        config: PathBuf,
    },
    /// Check a config's invariants without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_point(text: &str, dim: usize) -> Result<Vec<f64>> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("bad coordinate `{t}`")))
        })
        .collect::<Result<_>>()?;
    match parts.len() {
        1 => Ok(vec![parts[0]; dim]),
        n if n == dim => Ok(parts),
        n => Err(Error::Config(format!(
            "expected 1 or {dim} coordinates, got {n}"
        ))),
    }
}

fn write(path: &Path, text: String) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(fs::write(path, text)?)
}

fn header(prefix: &str, dim: usize, tail: &str) -> String {
    let cols: Vec<String> = (1..=dim).map(|i| format!("{prefix}_{i}")).collect();
    format!("{},{tail}\n", cols.join(","))
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Basis {
            family,
            depth,
            emit,
        } => {
            let phi = family.build(depth)?;
            let mut out = String::from("x,phi\n");
            for (x, v) in phi.table() {
                out.push_str(&format!("{},{}\n", num(x), num(v)));
            }
            write(&emit, out)?;
        }
        Command::Kernel {
            family,
            dim,
            level,
            center,
            step,
            emit,
        } => {
            let x = parse_point(&center, dim)?;
            let kernel = ProjectionKernel::new(Arc::new(family.build(12)?), dim)?;
            let lk = kernel.localize(level, &x, step)?;
            let mut out = header("s", dim, "ktilde");
            for (s, v) in lk.samples() {
                let coords: Vec<String> = s.iter().map(|&c| num(c)).collect();
                out.push_str(&format!("{},{}\n", coords.join(","), num(v)));
            }
            write(&emit, out)?;
            write(
                &emit.with_extension("json"),
                serde_json::to_string_pretty(&lk.summary())? + "\n",
            )?;
        }
        Command::Estimate {
            family,
            dim,
            level,
            density,
            n,
            seed,
            grid,
            points,
            emit,
        } => {
            let density = make_density(&density, dim)?;
            let basis = Arc::new(family.build(12)?);
            let sample = density.draw(SeedSpec::new(seed, 0), n);
            let est = WaveletDensityEstimator::fit(basis.clone(), level, &sample)?;
            let region = BoxRegion::cube(0.0, 1.0, dim)?;
            let grid = match grid {
                GridKind::Dyadic => EvaluationGrid::dyadic(&region, level, DEFAULT_GRID_CAP)?,
                GridKind::Uniform => EvaluationGrid::uniform(&region, points)?,
            };
            let mut out = header("x", dim, "fhat,efhat,f");
            for x in grid.points() {
                let coords: Vec<String> = x.iter().map(|&c| num(c)).collect();
                let ef = expected_estimator(&density, &basis, level, x)?;
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    coords.join(","),
                    num(est.evaluate(x)),
                    num(ef),
                    num(density.pdf(x))
                ));
            }
            write(&emit, out)?;
        }
        Command::Increments {
            kind,
            family,
            dim,
            level,
            center,
            step,
            density,
            n,
            seed,
            c,
            emit,
        } => {
            let x = parse_point(&center, dim)?;
            let density = make_density(&density, dim)?;
            let sample = density.draw(SeedSpec::new(seed, 0), n);
            let kernel = ProjectionKernel::new(Arc::new(family.build(12)?), dim)?;
            let lk = kernel.localize(level, &x, step)?;
            let g = match kind {
                IncrementKind::Gnx => g_n_x(&sample, &density, &x, level, lk.grid())?,
                IncrementKind::Gtilde => g_tilde_n_x(&sample, &density, &x, level, c, lk.grid())?,
            };
            let mut out = header("s", dim, "value");
            for (i, &v) in g.values().iter().enumerate() {
                let coords: Vec<String> = g.grid().node_point(i).iter().map(|&c| num(c)).collect();
                out.push_str(&format!("{},{}\n", coords.join(","), num(v)));
            }
            write(&emit, out)?;
        }
        Command::Limitsets {
            family,
            v,
            dim,
            step,
            emit,
        } => {
            let kernel = ProjectionKernel::new(Arc::new(family.build(12)?), dim)?;
            let lk = kernel.localize(0, &vec![0.0; dim], step)?;
            let j = gamma_interval(&lk, v)?;
            let csv = emit.with_extension("certificate.csv");
            write(&csv, j.certificate_csv(&lk))?;
            let doc = json!({
                "v": j.v,
                "lo": j.lo,
                "hi": j.hi,
                "eta_lo": j.eta_lo,
                "eta_hi": j.eta_hi,
                "certificate_grid_csv": csv.file_name().map(|f| f.to_string_lossy().into_owned()),
            });
            write(&emit, serde_json::to_string_pretty(&doc)? + "\n")?;
        }
        Command::Theorem1 { config } => return experiment(&config, 1),
        Command::Theorem2 { config } => return experiment(&config, 2),
        Command::Validate { config } => {
            ExperimentConfig::load(&config)?.validate()?;
            eprintln!("config ok");
        }
    }
    Ok(0)
}

fn experiment(config: &Path, theorem: u8) -> Result<u8> {
    let cfg = ExperimentConfig::load(config)?;
    if cfg.theorem != theorem {
        return Err(Error::Config(format!(
            "config is for theorem {}, not {theorem}",
            cfg.theorem
        )));
    }
    let report = run_experiment(&cfg)?;
    emit_report(&report, &cfg.output)?;
    for p in &report.summary.predicates {
        eprintln!(
            "{} {} (value {:.4}) {}",
            if p.pass { "PASS" } else { "FAIL" },
            p.name,
            p.value,
            p.detail
        );
    }
    eprintln!("wall time {:.1?}", report.wall_time);
    Ok(if report.passed() { 0 } else { 1 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
