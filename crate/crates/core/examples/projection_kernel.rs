//! The projection kernel and its localized section at a point.
//!
//! ```bash
//! cargo run --example projection_kernel
//! ```

use std::sync::Arc;

use wavedens::basis::Family;
use wavedens::kernel::ProjectionKernel;

pub fn run() -> wavedens::Result<()> {
    for family in [Family::Haar, Family::Db4] {
        let kernel = ProjectionKernel::new(Arc::new(family.build(12)?), 1)?;
        println!(
            "{family}: K(0.25, 0.75) = {:.6}, K_3(0.5, 0.55) = {:.6}",
            kernel.kernel_k(&[0.25], &[0.75])?,
            kernel.kernel_kj(3, &[0.5], &[0.55])?
        );
        for x in [0.5, 0.53] {
            let lk = kernel.localize(3, &[x], 1.0 / 1024.0)?;
            let s = lk.summary();
            let grid = lk.grid();
            println!(
                "  x = {x}: grid [{:.4}, {:.4}] with {} cells, sigma {:.6}, tv {:.6}, integral {:.6}",
                grid.lo()[0],
                grid.top()[0],
                grid.n_cells(),
                s.sigma,
                s.tv.unwrap_or(f64::NAN),
                s.integral
            );
        }
    }
    let k2 = ProjectionKernel::new(Arc::new(Family::Haar.build(12)?), 2)?;
    let lk = k2.localize(2, &[0.5, 0.5], 1.0 / 64.0)?;
    println!(
        "haar d=2: sigma {:.6}, integral {:.6}",
        lk.sigma(),
        lk.integral()
    );
    Ok(())
}

fn main() -> wavedens::Result<()> {
    run()
}
