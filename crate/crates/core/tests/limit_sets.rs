use std::sync::Arc;
use wavedens::basis::{build_daubechies, build_haar};
use wavedens::grid::{BoxGrid, BoxRegion};
use wavedens::increments::{theta, IncrementFunction};
use wavedens::kernel::LocalizedKernel;
use wavedens::kernel::ProjectionKernel;
use wavedens::limit_sets::*;
use wavedens::sampling::make_density;

fn lk(haar: bool) -> LocalizedKernel {
    let basis = if haar {
        build_haar()
    } else {
        build_daubechies(2, 12).unwrap()
    };
    ProjectionKernel::new(Arc::new(basis), 1)
        .unwrap()
        .localize(3, &[0.5], 1.0 / 4096.0)
        .unwrap()
}

// a ln a - a + 1 = b on a > 1
fn oracle_root(b: f64) -> f64 {
    let (mut lo, mut hi) = (1.0, 100.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h_poisson(mid) < b {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn h_values() {
    assert_eq!(h_poisson(1.0), 0.0);
    assert_eq!(h_poisson(0.0), 1.0);
    assert!((h_poisson(std::f64::consts::E) - 1.0).abs() < 1e-15);
    assert_eq!(h_poisson(-0.1), f64::INFINITY);
}

#[test]
fn strassen_extremal_is_one() {
    for haar in [true, false] {
        let lk = lk(haar);
        let ext = strassen_extremal(&lk).unwrap();
        assert!((ext.value - 1.0).abs() <= 1e-3, "{}", ext.value);
        let spec = LimitSetSpec::strassen(lk.grid().clone());
        assert!(spec.contains(&ext.gdot, 1e-12));
        let neg = IncrementFunction::from_cell_density(
            lk.grid(),
            &ext.gdot.iter().map(|g| -g).collect::<Vec<_>>(),
        )
        .unwrap();
        assert!((theta(&lk, &neg, true).unwrap() + 1.0).abs() <= 1e-3);
    }
    let haar = lk(true);
    let ext = strassen_extremal(&haar).unwrap();
    let inside: Vec<f64> = (0..haar.grid().n_cells())
        .filter(|&c| (0.0..1.0).contains(&haar.grid().cell_lower(c)[0]))
        .map(|c| ext.gdot[c])
        .collect();
    assert!(inside.iter().all(|&g| (g - 1.0).abs() < 1e-12));
}

#[test]
fn gamma_haar_closed_forms() {
    let lk = lk(true);
    let j = gamma_interval(&lk, 1.0).unwrap();
    assert!((j.hi - std::f64::consts::E).abs() <= 1e-6, "{}", j.hi);
    assert!((j.hi - oracle_root(1.0)).abs() <= 1e-6);
    assert!(j.lo.abs() <= 1e-6);
    assert!((j.hi_certificate.cost - 1.0).abs() <= 1e-9);
    let j2 = gamma_interval(&lk, 0.5).unwrap();
    assert!((j2.hi - oracle_root(2.0)).abs() <= 1e-6);
    assert!((j2.hi - 3.5911).abs() < 1e-4);
    assert_eq!(j2.lo, 0.0);
    let inf = gamma_interval(&lk, f64::INFINITY).unwrap();
    assert!((inf.lo - 1.0).abs() < 1e-12 && (inf.hi - 1.0).abs() < 1e-12);
    assert!(gamma_interval(&lk, 0.0).is_err());
}

#[test]
fn gamma_duality_gap_and_monotonicity() {
    for haar in [true, false] {
        let lk = lk(haar);
        let vs = [0.25, 0.5, 1.0, 2.0, 3.0, 5.0, 10.0, 30.0, 100.0, 1000.0];
        let mut prev: Option<IntervalJ> = None;
        for &v in &vs {
            let j = gamma_interval(&lk, v).unwrap();
            assert!((j.hi_certificate.cost - 1.0 / v).abs() <= 1e-9, "v={v}");
            if j.eta_lo > 0.0 {
                assert!((j.lo_certificate.cost - 1.0 / v).abs() <= 1e-9);
            }
            assert!(j.lo < 1.0 && j.hi > 1.0, "v={v}: {} {}", j.lo, j.hi);
            if v <= 10.0 {
                assert!(j.contains(1.0 / 1.05) && j.contains(1.05));
            }
            if let Some(p) = prev {
                assert!(j.hi <= p.hi + 1e-12 && j.lo >= p.lo - 1e-12);
            }
            prev = Some(j);
        }
    }
}

#[test]
fn gamma_d4_has_negative_lobes() {
    let lk = lk(false);
    assert!(lk.cell_means().iter().any(|&k| k < 0.0));
    let j = gamma_interval(&lk, 1.0).unwrap();
    assert!(j.eta_lo > 0.0 && j.lo < 1.0, "{}", j.lo);
    assert!((j.lo_certificate.cost - 1.0).abs() <= 1e-9);
    assert!(j.lo_certificate.gdot.iter().all(|&g| g > 0.0));
}

#[test]
fn threshold_examples() {
    let u = make_density("uniform01", 1).unwrap();
    let h = BoxRegion::cube(0.25, 0.75, 1).unwrap();
    let lk = lk(true);
    let t = theorem2_threshold(&u, &h, 1.0, &lk).unwrap();
    assert!((t.delta - 1.0).abs() < 1e-9);
    let t = theorem2_threshold(&u, &h, 0.5, &lk).unwrap();
    assert!((t.delta - 1.0).abs() < 1e-9);
    let big = theorem2_threshold(&u, &h, 1e8, &lk).unwrap();
    assert!(big.delta < 1e-3);
}

#[test]
fn distance_to_members() {
    let grid = BoxGrid::new(vec![0.0], 1.0 / 256.0, vec![256]).unwrap();
    let zero = IncrementFunction::from_values(&grid, vec![0.0; grid.n_nodes()]).unwrap();
    assert!(strassen_distance(&zero).distance <= 1e-6);

    let gdot: Vec<f64> = (0..256)
        .map(|c| 2f64.sqrt() * (std::f64::consts::PI * (c as f64 + 0.5) / 256.0).sin())
        .collect();
    let member = IncrementFunction::from_cell_density(&grid, &gdot).unwrap();
    let r = strassen_distance(&member);
    assert!(r.distance <= 1e-3, "{}", r.distance);

    // twice the unit member 1 - s: every member has G(0) <= 1
    let ones = IncrementFunction::from_cell_density(&grid, &vec![1.0; 256]).unwrap();
    let double = ones.combine(2.0, &ones, 0.0).unwrap();
    let r = strassen_distance(&double);
    let radial = (0..=1000)
        .map(|i| {
            let t = i as f64 / 1000.0;
            double
                .values()
                .iter()
                .zip(ones.values())
                .map(|(a, b)| (a - t * b).abs())
                .fold(0.0, f64::max)
        })
        .fold(f64::INFINITY, f64::min);
    assert!(r.distance > 0.0);
    assert!(
        r.distance <= double.sup_norm() / 2.0 + 1e-3,
        "{}",
        r.distance
    );
    assert!(r.distance <= radial + 1e-3);
    assert!((r.distance - 1.0).abs() <= 1e-3);
}
