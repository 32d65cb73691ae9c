//! Extremal values of the kernel functional over the Strassen set and the
//! Poisson sets, and the distance of an empirical increment to the Strassen
//! set.
//!
//! ```bash
//! cargo run --release --example limit_sets
//! ```

use std::sync::Arc;

use wavedens::basis::Family;
use wavedens::increments::g_n_x;
use wavedens::kernel::ProjectionKernel;
use wavedens::limit_sets::{gamma_interval, strassen_distance, strassen_extremal};
use wavedens::sampling::{make_density, SeedSpec};

pub fn run() -> wavedens::Result<()> {
    for family in [Family::Haar, Family::Db4] {
        let kernel = ProjectionKernel::new(Arc::new(family.build(12)?), 1)?;
        let lk = kernel.localize(0, &[0.0], 1.0 / 1024.0)?;
        println!(
            "{family}: Strassen extremum {:.6}",
            strassen_extremal(&lk)?.value
        );
        for v in [0.5, 1.0, 10.0, 1e3, 1e6] {
            let j = gamma_interval(&lk, v)?;
            println!(
                "  v = {v:>9}: J = [{:.6}, {:.6}] (eta {:.4e}, {:.4e})",
                j.lo, j.hi, j.eta_lo, j.eta_hi
            );
        }
    }

    let density = make_density("uniform01", 1)?;
    let kernel = ProjectionKernel::new(Arc::new(Family::Haar.build(12)?), 1)?;
    let lk = kernel.localize(6, &[0.5], 1.0 / 128.0)?;
    for n in [1_000, 100_000] {
        let sample = density.draw(SeedSpec::new(3, 0), n);
        let g = g_n_x(&sample, &density, &[0.5], 6, lk.grid())?;
        let d = strassen_distance(&g);
        println!(
            "n = {n}: sup |g| = {:.4}, distance to S = {:.4} after {} iterations{}",
            g.sup_norm(),
            d.distance,
            d.iterations,
            d.warning.map(|w| format!(" ({w})")).unwrap_or_default()
        );
    }
    Ok(())
}

fn main() -> wavedens::Result<()> {
    run()
}
