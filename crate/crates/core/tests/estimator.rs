use std::sync::Arc;
use wavedens::basis::ScalingFunction;
use wavedens::basis::{build_daubechies, build_haar};
use wavedens::estimator::*;
use wavedens::grid::BoxRegion;
use wavedens::sampling::Sample;
use wavedens::sampling::{make_density, SeedSpec};
use wavedens::Error;

fn haar() -> Arc<ScalingFunction> {
    Arc::new(build_haar())
}

fn toy() -> Sample {
    Sample::from_scalars(&[0.1, 0.2, 0.3, 0.9])
}

#[test]
fn haar_coefficients_and_values() {
    let est = WaveletDensityEstimator::fit(haar(), 1, &toy()).unwrap();
    assert!((est.coeff(&[0]) - 3.0 * 2f64.sqrt() / 4.0).abs() < 1e-15);
    assert!((est.evaluate(&[0.25]) - 1.5).abs() < 1e-15);
    assert!((est.evaluate(&[0.75]) - 0.5).abs() < 1e-15);
    assert_eq!(est.evaluate(&[7.0]), 0.0);
    assert_eq!(est.evaluate(&[-3.0]), 0.0);
    let kf = evaluate_kernel_form(&haar(), 1, &toy(), &[0.25]).unwrap();
    assert!((kf - 1.5).abs() < 1e-15);
}

#[test]
fn single_point_kernel_form() {
    let s = Sample::from_scalars(&[0.4]);
    assert_eq!(evaluate_kernel_form(&haar(), 0, &s, &[0.6]).unwrap(), 1.0);
    for j in 0..6 {
        let est = WaveletDensityEstimator::fit(haar(), j, &Sample::from_scalars(&[0.37])).unwrap();
        let mass: f64 = est
            .coeffs()
            .map(|(_, c)| c * (-(j as f64) / 2.0).exp2())
            .sum();
        assert!((mass - 1.0).abs() < 1e-14);
    }
}

#[test]
fn d4_single_point_coefficient() {
    let d4 = Arc::new(build_daubechies(2, 12).unwrap());
    let est = WaveletDensityEstimator::fit(d4, 0, &Sample::from_scalars(&[1.0])).unwrap();
    assert!((est.coeff(&[0]) - 1.366_025_403_784_438_6).abs() < 1e-9);
}

#[test]
fn empty_sample_rejected() {
    let empty = Sample::new(1, vec![]).unwrap();
    assert!(matches!(
        WaveletDensityEstimator::fit(haar(), 2, &empty),
        Err(Error::Domain(_))
    ));
}

#[test]
fn coefficient_count_bound() {
    let d4 = Arc::new(build_daubechies(2, 10).unwrap());
    let density = make_density("cosine_bump", 2).unwrap();
    let sample = density.draw(SeedSpec::new(5, 0), 50);
    let est = WaveletDensityEstimator::fit(d4, 3, &sample).unwrap();
    assert!(est.n_coeffs() <= 50 * 3 * 3);
}

#[test]
fn expected_estimator_haar_uniform() {
    let u = make_density("uniform01", 1).unwrap();
    let b = build_haar();
    for j in 1..6u32 {
        let m = ((1u32 << j) / 2) as f64;
        let x = (m + 0.5) / (j as f64).exp2();
        assert!((expected_estimator(&u, &b, j, &[x]).unwrap() - 1.0).abs() < 1e-12);
    }
    assert!((expected_estimator(&u, &b, 1, &[0.25]).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn expected_estimator_haar_cosine_cell_average() {
    let c = make_density("cosine_bump", 1).unwrap();
    let b = build_haar();
    let antiderivative =
        |x: f64| x + (2.0 * std::f64::consts::PI * x).sin() / (4.0 * std::f64::consts::PI);
    for j in [1u32, 3, 6] {
        let h = (-(j as f64)).exp2();
        for m in (0i64..3).filter(|&m| m < 1 << j) {
            let x = (m as f64 + 0.3) * h;
            let oracle = (antiderivative((m + 1) as f64 * h) - antiderivative(m as f64 * h)) / h;
            let got = expected_estimator(&c, &b, j, &[x]).unwrap();
            assert!(
                (got - oracle).abs() < 1e-12,
                "j={j} m={m}: {got} vs {oracle}"
            );
        }
    }
}

#[test]
fn dyadic_grid_points() {
    let h = BoxRegion::cube(0.25, 0.75, 1).unwrap();
    let g = EvaluationGrid::dyadic(&h, 3, DEFAULT_GRID_CAP).unwrap();
    assert_eq!(
        g.points(),
        &[vec![0.25], vec![0.375], vec![0.5], vec![0.625], vec![0.75]]
    );
    assert!(g.is_dyadic());
    let m = EvaluationGrid::dyadic_with_midpoints(&h, 1, DEFAULT_GRID_CAP).unwrap();
    assert_eq!(m.len(), 1);
    let capped = EvaluationGrid::dyadic(&h, 16, 4096).unwrap();
    assert!(capped.len() <= 4096);
    let h2 = BoxRegion::cube(0.25, 0.75, 2).unwrap();
    assert_eq!(EvaluationGrid::dyadic(&h2, 2, 64).unwrap().len(), 9);
    assert!(EvaluationGrid::dyadic(&BoxRegion::cube(0.3, 0.4, 1).unwrap(), 1, 64).is_err());
}

#[test]
fn theorem1_against_histogram_reimplementation() {
    let density = make_density("uniform01", 1).unwrap();
    let n = 1 << 16;
    let j = 5u32;
    let sample = density.draw(SeedSpec::new(1, 0), n);
    let est = WaveletDensityEstimator::fit(haar(), j, &sample).unwrap();
    let h = BoxRegion::cube(0.25, 0.75, 1).unwrap();
    let grid = EvaluationGrid::dyadic(&h, j, DEFAULT_GRID_CAP).unwrap();
    let stat = sup_deviation(&est, &density, &grid, Normalization::Theorem1).unwrap();

    // histogram oracle: counts per dyadic cell, E fhat = 1 for the uniform law
    let cells = 1usize << j;
    let mut counts = vec![0usize; cells];
    for &x in sample.coords() {
        counts[(x * cells as f64).floor() as usize] += 1;
    }
    let norm = (n as f64 / cells as f64 / (2.0 * (cells as f64).ln())).sqrt();
    let vals: Vec<f64> = grid
        .points()
        .iter()
        .map(|x| {
            let c = counts[(x[0] * cells as f64).floor() as usize];
            norm * (cells as f64 * c as f64 / n as f64 - 1.0)
        })
        .collect();
    let sup = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let inf = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(
        (stat.sup_dev - sup).abs() < 1e-12,
        "{} vs {sup}",
        stat.sup_dev
    );
    assert!((stat.inf_dev - inf).abs() < 1e-12);
    assert!(stat.sup_dev >= stat.inf_dev);
    assert!(grid.points().contains(&stat.argmax));
}

#[test]
fn centred_statistic_vanishes_at_expectation() {
    let density = make_density("cosine_bump", 1).unwrap();
    let h = BoxRegion::cube(0.25, 0.75, 1).unwrap();
    let grid = EvaluationGrid::dyadic(&h, 4, DEFAULT_GRID_CAP).unwrap();
    let b = build_haar();
    let ef: Vec<f64> = grid
        .points()
        .iter()
        .map(|x| expected_estimator(&density, &b, 4, x).unwrap())
        .collect();
    let stat = theorem1_statistic(1000, 1, 4, &density, &grid, &ef, &ef).unwrap();
    assert!(stat.iter().all(|&v| v == 0.0));
}

#[test]
fn ratio_of_expectation_for_uniform_haar_is_zero() {
    let density = make_density("uniform01", 1).unwrap();
    let b = build_haar();
    let h = BoxRegion::cube(0.25, 0.75, 1).unwrap();
    let grid = EvaluationGrid::dyadic(&h, 5, DEFAULT_GRID_CAP).unwrap();
    let dev = grid
        .points()
        .iter()
        .map(|x| (expected_estimator(&density, &b, 5, x).unwrap() / density.pdf(x) - 1.0).abs())
        .fold(0.0, f64::max);
    assert!(dev < 1e-12);
}

#[test]
fn theorem1_rejects_level_zero_and_zero_density() {
    let density = make_density("uniform01", 1).unwrap();
    let sample = density.draw(SeedSpec::new(3, 0), 100);
    let est = WaveletDensityEstimator::fit(haar(), 0, &sample).unwrap();
    let h = BoxRegion::cube(0.25, 0.75, 1).unwrap();
    let grid = EvaluationGrid::uniform(&h, 5).unwrap();
    assert!(matches!(
        sup_deviation(&est, &density, &grid, Normalization::Theorem1),
        Err(Error::Domain(_))
    ));
    let est = WaveletDensityEstimator::fit(haar(), 3, &sample).unwrap();
    let outside = EvaluationGrid::uniform(&BoxRegion::cube(1.5, 2.0, 1).unwrap(), 3).unwrap();
    assert!(matches!(
        sup_deviation(&est, &density, &outside, Normalization::Ratio),
        Err(Error::Domain(_))
    ));
}
