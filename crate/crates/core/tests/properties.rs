use std::sync::Arc;

use proptest::prelude::*;

use wavedens::basis::{build_daubechies, build_haar, ScalingFunction};
use wavedens::estimator::{expected_estimator, WaveletDensityEstimator};
use wavedens::grid::BoxGrid;
use wavedens::increments::{theta, IncrementFunction};
use wavedens::kernel::{LocalizedKernel, ProjectionKernel};
use wavedens::limit_sets::{gamma_interval, h_poisson};
use wavedens::sampling::{make_density, SeedSpec};

fn section(basis: ScalingFunction, level: u32, x: f64, step: f64) -> LocalizedKernel {
    ProjectionKernel::new(Arc::new(basis), 1)
        .unwrap()
        .localize(level, &[x], step)
        .unwrap()
}

fn values_on(grid: &BoxGrid, raw: &[f64]) -> Vec<f64> {
    (0..grid.n_nodes()).map(|i| raw[i % raw.len()]).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn orthant_sums_invert_differences(cells in proptest::collection::vec(-3.0f64..3.0, 12)) {
        let grid = BoxGrid::new(vec![0.0, -1.0], 0.5, vec![3, 4]).unwrap();
        let nodes = grid.upper_orthant_sums(&cells);
        let back = grid.cell_differences(&nodes);
        for (a, b) in cells.iter().zip(&back) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn theta_is_linear(a in -2.0f64..2.0, b in -2.0f64..2.0, raw1 in proptest::collection::vec(-1.0f64..1.0, 7), raw2 in proptest::collection::vec(-1.0f64..1.0, 5), x in 0.1f64..0.9) {
        let lk = section(build_daubechies(2, 12).unwrap(), 3, x, 1.0 / 256.0);
        let g1 = IncrementFunction::from_values(lk.grid(), values_on(lk.grid(), &raw1)).unwrap();
        let g2 = IncrementFunction::from_values(lk.grid(), values_on(lk.grid(), &raw2)).unwrap();
        let mix = g1.combine(a, &g2, b).unwrap();
        let lhs = theta(&lk, &mix, true).unwrap();
        let rhs = a * theta(&lk, &g1, true).unwrap() + b * theta(&lk, &g2, true).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-10);
    }

    #[test]
    fn theta_bounded_by_total_variation(raw in proptest::collection::vec(-1.0f64..1.0, 11), x in 0.05f64..0.95, haar in any::<bool>()) {
        let basis = if haar { build_haar() } else { build_daubechies(2, 12).unwrap() };
        let lk = section(basis, 2, x, 1.0 / 512.0);
        let g = IncrementFunction::from_values(lk.grid(), values_on(lk.grid(), &raw)).unwrap();
        let bound = g.sup_norm() * lk.tv().unwrap();
        prop_assert!(theta(&lk, &g, false).unwrap().abs() <= bound + 1e-9);
    }

    #[test]
    fn theta_bounded_on_strassen_ball(raw in proptest::collection::vec(-1.0f64..1.0, 13), x in 0.05f64..0.95) {
        let lk = section(build_daubechies(2, 12).unwrap(), 2, x, 1.0 / 512.0);
        let grid = lk.grid();
        let mut gdot: Vec<f64> = (0..grid.n_cells()).map(|c| raw[c % raw.len()]).collect();
        let norm = (gdot.iter().map(|v| v * v).sum::<f64>() * grid.cell_volume()).sqrt();
        gdot.iter_mut().for_each(|v| *v /= norm);
        let g = IncrementFunction::from_cell_density(grid, &gdot).unwrap();
        prop_assert!(theta(&lk, &g, true).unwrap().abs() <= 1.0 + 1e-3);
    }

    #[test]
    fn h_is_convex_and_nonnegative(s in 0.0f64..20.0, t in 0.0f64..20.0, w in 0.0f64..1.0) {
        prop_assert!(h_poisson(s) >= 0.0);
        let mid = h_poisson(w * s + (1.0 - w) * t);
        prop_assert!(mid <= w * h_poisson(s) + (1.0 - w) * h_poisson(t) + 1e-12);
    }

    #[test]
    fn gamma_interval_contains_one(v in 0.05f64..1e4, haar in any::<bool>()) {
        let basis = if haar { build_haar() } else { build_daubechies(2, 12).unwrap() };
        let lk = section(basis, 0, 0.0, 1.0 / 256.0);
        let j = gamma_interval(&lk, v).unwrap();
        prop_assert!(j.lo < 1.0 && 1.0 < j.hi);
    }

    #[test]
    fn haar_estimator_is_a_nonnegative_step_density(seed in any::<u64>(), n in 1usize..400, level in 0u32..7) {
        let density = make_density("cosine_bump", 1).unwrap();
        let sample = density.draw(SeedSpec::new(seed, 0), n);
        let est = WaveletDensityEstimator::fit(Arc::new(build_haar()), level, &sample).unwrap();
        let cells = 1usize << level;
        let mut mass = 0.0;
        for m in 0..cells {
            let v = est.evaluate(&[(m as f64 + 0.5) / cells as f64]);
            prop_assert!(v >= 0.0);
            mass += v / cells as f64;
        }
        prop_assert!((mass - 1.0).abs() < 1e-12);
    }

    #[test]
    fn prefixes_are_nested(seed in any::<u64>(), rep in 0u64..100, small in 1usize..50, extra in 0usize..50) {
        let density = make_density("trunc_gauss_mix", 2).unwrap();
        let spec = SeedSpec::new(seed, rep);
        let big = density.draw(spec, small + extra);
        let head = big.prefix(small);
        let direct = density.draw(spec, small);
        prop_assert_eq!(head.coords(), direct.coords());
    }

    #[test]
    fn expected_haar_estimator_of_uniform_is_one(x in 0.0f64..1.0, level in 0u32..10) {
        let density = make_density("uniform01", 1).unwrap();
        let ef = expected_estimator(&density, &build_haar(), level, &[x]).unwrap();
        prop_assert!((ef - 1.0).abs() < 1e-9);
    }
}
