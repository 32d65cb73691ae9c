//! Monte Carlo run of the sup relative deviation under an ER schedule, with a
//! CRS contrast at the largest n.
//!
//! ```bash
//! cargo run --release --example theorem2_monte_carlo -- configs/theorem2.json
//! ```

use wavedens::experiments::{
    emit_report, run_experiment, ExperimentConfig, GridSpec, ResolutionSchedule,
};
use wavedens::grid::BoxRegion;

fn small(c: f64) -> wavedens::Result<ExperimentConfig> {
    Ok(ExperimentConfig {
        theorem: 2,
        density: "uniform01".into(),
        dimension: 1,
        basis: "haar".into(),
        h: BoxRegion::cube(0.25, 0.75, 1)?,
        schedule: ResolutionSchedule::Er { c },
        n_grid: (10..=14).map(|k| 1usize << k).collect(),
        replications: 8,
        base_seed: 1,
        grid: GridSpec::default(),
        output: std::env::temp_dir()
            .join(format!("wavedens-theorem2-c{c}"))
            .to_string_lossy()
            .into_owned(),
        contrast: Some(ResolutionSchedule::Crs { gamma: 0.6 }),
    })
}

pub fn run(config: Option<&str>) -> wavedens::Result<()> {
    let configs = match config {
        Some(path) => vec![ExperimentConfig::load(path)?],
        None => vec![small(0.5)?, small(2.0)?],
    };
    for config in configs {
        let report = run_experiment(&config)?;
        let t = report
            .summary
            .threshold
            .as_ref()
            .expect("theorem 2 reports its threshold");
        println!(
            "{:?}: delta = {:.4}, epsilon* = {:.4}",
            config.schedule, t.detail.delta, t.epsilon
        );
        for l in &report.summary.per_n {
            println!(
                "  n = {:>8} j = {:>2} n h/ln n = {:.3}: median sup ratio {:.3}, fraction >= eps {:.2}",
                l.n,
                l.j,
                l.nh_over_ln_n,
                l.sup_dev.median,
                l.fraction_exceeding.unwrap_or(f64::NAN)
            );
        }
        if let Some(c) = &report.summary.contrast {
            println!(
                "  CRS contrast at n = {} (j = {}): median {:.3}, fraction below eps {:.2}",
                c.n, c.j, c.sup_dev.median, c.fraction_below
            );
        }
        emit_report(&report, &config.output)?;
    }
    Ok(())
}

fn main() -> wavedens::Result<()> {
    run(std::env::args().nth(1).as_deref())
}
