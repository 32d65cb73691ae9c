//! Monte Carlo run of the normalized sup deviation under a CRS schedule.
//!
//! Without arguments a small run is made; pass a config path (for example
//! `configs/theorem1.json`) for the full one.
//!
//! ```bash
//! cargo run --release --example theorem1_monte_carlo -- configs/theorem1.json
//! ```

use wavedens::experiments::{
    emit_report, run_experiment, ExperimentConfig, GridSpec, ResolutionSchedule,
};
use wavedens::grid::BoxRegion;

fn small() -> wavedens::Result<ExperimentConfig> {
    Ok(ExperimentConfig {
        theorem: 1,
        density: "uniform01".into(),
        dimension: 1,
        basis: "haar".into(),
        h: BoxRegion::cube(0.25, 0.75, 1)?,
        schedule: ResolutionSchedule::Crs { gamma: 0.6 },
        n_grid: (10..=14).map(|k| 1usize << k).collect(),
        replications: 8,
        base_seed: 1,
        grid: GridSpec::default(),
        output: std::env::temp_dir()
            .join("wavedens-theorem1")
            .to_string_lossy()
            .into_owned(),
        contrast: None,
    })
}

pub fn run(config: Option<&str>) -> wavedens::Result<()> {
    let config = match config {
        Some(path) => ExperimentConfig::load(path)?,
        None => small()?,
    };
    let report = run_experiment(&config)?;
    for l in &report.summary.per_n {
        println!(
            "n = {:>8} j = {:>2} n h/ln n = {:>7.3}: median sup {:.3}, median inf {:.3}",
            l.n, l.j, l.nh_over_ln_n, l.sup_dev.median, l.inf_dev.median
        );
    }
    for p in &report.summary.predicates {
        println!(
            "{} {} = {:.4}",
            if p.pass { "pass" } else { "fail" },
            p.name,
            p.value
        );
    }
    emit_report(&report, &config.output)?;
    println!(
        "wrote {}/records.csv and summary.json in {:.1?}",
        config.output, report.wall_time
    );
    Ok(())
}

fn main() -> wavedens::Result<()> {
    run(std::env::args().nth(1).as_deref())
}
