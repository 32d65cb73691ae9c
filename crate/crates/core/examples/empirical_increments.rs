//! Increments of the empirical process around a point, the kernel functional
//! applied to them, and the identity linking it to the estimator deviation.
//!
//! ```bash
//! cargo run --release --example empirical_increments
//! ```

use std::sync::Arc;

use wavedens::basis::Family;
use wavedens::increments::{g_n_x, g_tilde_n_x, increment, relation_check, theta};
use wavedens::kernel::ProjectionKernel;
use wavedens::sampling::{make_density, SeedSpec};

pub fn run() -> wavedens::Result<()> {
    let density = make_density("trunc_gauss_mix", 1)?;
    let sample = density.draw(SeedSpec::new(5, 0), 50_000);
    let x = [0.3];
    let level = 6;
    let h = (-(level as f64)).exp2();

    let delta = increment(&sample, &density, &x, h, &[0.0], &[1.0])?;
    println!("Delta alpha_n(x, h, [0, 1]) = {delta:.5}");

    for family in [Family::Haar, Family::Db4] {
        let basis = Arc::new(family.build(12)?);
        let kernel = ProjectionKernel::new(basis.clone(), 1)?;
        let lk = kernel.localize(level, &x, 1.0 / 4096.0)?;
        let g = g_n_x(&sample, &density, &x, level, lk.grid())?;
        let gt = g_tilde_n_x(&sample, &density, &x, level, 1.0, lk.grid())?;
        println!(
            "{family}: sup |g_n,x| = {:.4}, g~(lo) = {:.4}, Theta(g) = {:.5}, Theta'(g~) = {:.5}",
            g.sup_norm(),
            gt.values()[0],
            theta(&lk, &g, true)?,
            theta(&lk, &gt, false)?
        );
        let r = relation_check(&sample, &density, &basis, &x, level, 1.0 / 4096.0)?;
        println!(
            "  estimator side {:.10}, increment side {:.10}, residual {:.2e}",
            r.lhs, r.rhs, r.residual
        );
    }
    Ok(())
}

fn main() -> wavedens::Result<()> {
    run()
}
