//! Fit the linear wavelet estimator to a seeded sample and compare it with
//! its expectation and the true density.
//!
//! ```bash
//! cargo run --release --example fit_estimator
//! ```

use std::sync::Arc;

use wavedens::basis::Family;
use wavedens::estimator::{
    evaluate_kernel_form, expected_estimator, sup_deviation, EvaluationGrid, Normalization,
    WaveletDensityEstimator,
};
use wavedens::grid::BoxRegion;
use wavedens::sampling::{make_density, SeedSpec};

pub fn run() -> wavedens::Result<()> {
    let density = make_density("cosine_bump", 1)?;
    let sample = density.draw(SeedSpec::new(42, 0), 20_000);
    let h = BoxRegion::cube(0.25, 0.75, 1)?;
    for family in [Family::Haar, Family::Db4] {
        let basis = Arc::new(family.build(12)?);
        let level = 5;
        let est = WaveletDensityEstimator::fit(basis.clone(), level, &sample)?;
        println!(
            "{family}, j = {level}: {} nonzero coefficients",
            est.n_coeffs()
        );
        for x in [0.3, 0.5, 0.7] {
            println!(
                "  x = {x}: fhat {:.5} (kernel form {:.5}), E fhat {:.5}, f {:.5}",
                est.evaluate(&[x]),
                evaluate_kernel_form(&basis, level, &sample, &[x])?,
                expected_estimator(&density, &basis, level, &[x])?,
                density.pdf(&[x])
            );
        }
        let grid = EvaluationGrid::dyadic(&h, level, 4096)?;
        let t1 = sup_deviation(&est, &density, &grid, Normalization::Theorem1)?;
        let ratio = sup_deviation(&est, &density, &grid, Normalization::Ratio)?;
        println!(
            "  over H: normalized deviation in [{:.3}, {:.3}], sup |fhat/f - 1| = {:.4} at {:?}",
            t1.inf_dev, t1.sup_dev, ratio.sup_dev, ratio.argmax
        );
    }
    Ok(())
}

fn main() -> wavedens::Result<()> {
    run()
}
