//! The linear wavelet projection estimator and its normalized deviation
//! statistics.
//!
//! The level-`j` estimator is the empirical orthogonal projection onto the
//! span of `phi_{j,k} = 2^{dj/2} phi(2^j . - k)`:
//!
//! ```text
//! fhat(x) = sum_k alpha_k phi_{j,k}(x),   alpha_k = (1/n) sum_i phi_{j,k}(X_i)
//!         = (1/n) sum_i K_j(x, X_i).
//! ```

use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::basis::ScalingFunction;
use crate::error::{Error, Result};
use crate::grid::BoxRegion;
use crate::kernel::ProjectionKernel;
use crate::sampling::{gl5, Density, Factor, Sample};

pub type ShiftKey = SmallVec<[i64; 4]>;

/// Fitted empirical scaling coefficients at one resolution level, stored
/// sparsely over the occupied shifts.
#[derive(Debug, Clone)]
pub struct WaveletDensityEstimator {
    basis: Arc<ScalingFunction>,
    level: u32,
    dim: usize,
    n: usize,
    coeffs: HashMap<ShiftKey, f64>,
}

/// Calls `visit(k, prod_i phi(t_i - k_i))` for every shift whose product can
/// be nonzero.
fn for_each_shift(basis: &ScalingFunction, t: &[f64], mut visit: impl FnMut(&ShiftKey, f64)) {
    let ranges: SmallVec<[(i64, i64); 4]> = t
        .iter()
        .map(|&v| {
            let r = basis.shifts_covering(v);
            (*r.start(), *r.end())
        })
        .collect();
    if ranges.iter().any(|(lo, hi)| lo > hi) {
        return;
    }
    let mut k: ShiftKey = ranges.iter().map(|r| r.0).collect();
    loop {
        let w: f64 = t
            .iter()
            .zip(&k)
            .map(|(&v, &ki)| basis.eval(v - ki as f64))
            .product();
        if w != 0.0 {
            visit(&k, w);
        }
        // odometer increment
        let mut axis = t.len();
        loop {
            if axis == 0 {
                return;
            }
            axis -= 1;
            if k[axis] < ranges[axis].1 {
                k[axis] += 1;
                break;
            }
            k[axis] = ranges[axis].0;
        }
    }
}

impl WaveletDensityEstimator {
    /// Fit the level-`level` coefficients in one pass over the sample.
    pub fn fit(basis: Arc<ScalingFunction>, level: u32, sample: &Sample) -> Result<Self> {
        if sample.is_empty() {
            return Err(Error::domain("cannot fit an estimator to an empty sample"));
        }
        let dim = sample.dim();
        let scale = (level as f64).exp2();
        let norm = scale.powf(dim as f64 / 2.0);
        let mut coeffs: HashMap<ShiftKey, f64> = HashMap::new();
        let mut t = vec![0.0; dim];
        for p in sample.points() {
            for (ti, &pi) in t.iter_mut().zip(p) {
                *ti = scale * pi;
            }
            for_each_shift(&basis, &t, |k, w| {
                *coeffs.entry(k.clone()).or_insert(0.0) += norm * w;
            });
        }
        let inv_n = 1.0 / sample.len() as f64;
        coeffs.values_mut().for_each(|c| *c *= inv_n);
        Ok(Self {
            basis,
            level,
            dim,
            n: sample.len(),
            coeffs,
        })
    }

    pub fn basis(&self) -> &Arc<ScalingFunction> {
        &self.basis
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Empirical coefficient `alpha_{j,k}` (zero for unoccupied shifts).
    pub fn coeff(&self, k: &[i64]) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    pub fn n_coeffs(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (&ShiftKey, &f64)> {
        self.coeffs.iter()
    }

    /// `sum_k alpha_k phi_{j,k}(x)`.
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        let scale = (self.level as f64).exp2();
        let norm = scale.powf(self.dim as f64 / 2.0);
        let t: SmallVec<[f64; 4]> = x.iter().map(|&v| scale * v).collect();
        let mut acc = 0.0;
        for_each_shift(&self.basis, &t, |k, w| {
            if let Some(c) = self.coeffs.get(k) {
                acc += c * norm * w;
            }
        });
        acc
    }
}

/// Kernel form `(1/n) sum_i K_j(x, X_i)`, computed directly from the sample.
pub fn evaluate_kernel_form(
    basis: &Arc<ScalingFunction>,
    level: u32,
    sample: &Sample,
    x: &[f64],
) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::domain("kernel form needs a nonempty sample"));
    }
    let kernel = ProjectionKernel::new(basis.clone(), sample.dim())?;
    let mut acc = 0.0;
    for p in sample.points() {
        acc += kernel.kernel_kj(level, x, p)?;
    }
    Ok(acc / sample.len() as f64)
}

/// `E fhat(x) = int K_j(x, y) f(y) dy`.
///
/// Each product term of the density factorizes the integral per axis; each
/// axis is integrated by composite Gauss-Legendre on panels of width
/// `2^-(j+q)`, `q = max(8, r)`, aligned with the breakpoints of the table
/// interpolant. The result is accepted when halving the panels moves it by at
/// most `1e-7`.
pub fn expected_estimator(
    density: &Density,
    basis: &ScalingFunction,
    level: u32,
    x: &[f64],
) -> Result<f64> {
    if x.len() != density.dim() {
        return Err(Error::domain(
            "evaluation point does not match density dimension",
        ));
    }
    let q = basis.table_depth().max(8);
    let coarse = expectation_at_resolution(density, basis, level, x, q);
    let fine = expectation_at_resolution(density, basis, level, x, q + 1);
    if (coarse - fine).abs() > 1e-7 {
        return Err(Error::numerical(format!(
            "expected-estimator quadrature did not settle: {coarse} vs {fine} after halving"
        )));
    }
    Ok(fine)
}

fn expectation_at_resolution(
    density: &Density,
    basis: &ScalingFunction,
    level: u32,
    x: &[f64],
    q: u32,
) -> f64 {
    let mut cache: Vec<(Factor, f64, f64)> = Vec::new();
    density
        .terms()
        .iter()
        .map(|term| {
            term.weight
                * term
                    .factors
                    .iter()
                    .zip(x)
                    .map(|(f, &xi)| {
                        if let Some(&(_, _, v)) = cache.iter().find(|(g, y, _)| g == f && *y == xi)
                        {
                            return v;
                        }
                        let v = axis_expectation(f, basis, level, xi, q);
                        cache.push((*f, xi, v));
                        v
                    })
                    .product::<f64>()
        })
        .sum()
}

/// `int 2^j K(2^j x, 2^j y) f(y) dy` over `y` in `[0, 1]`.
fn axis_expectation(factor: &Factor, basis: &ScalingFunction, level: u32, x: f64, q: u32) -> f64 {
    let scale = (level as f64).exp2();
    let t = scale * x;
    let shifts = basis.shifts_covering(t);
    let (a, b) = basis.support();
    // supp K(t, .) in scaled units, intersected with the density's [0, 1]
    let u_lo = ((*shifts.start() + a) as f64).max(0.0);
    let u_hi = ((*shifts.end() + b) as f64).min(scale);
    if u_lo >= u_hi {
        return 0.0;
    }
    let per_unit = (q as f64).exp2();
    let panel = 1.0 / per_unit;
    let first = (u_lo * per_unit).floor() as i64;
    let last = (u_hi * per_unit).ceil() as i64;
    let integrand = |u: f64| {
        let k: f64 = shifts
            .clone()
            .map(|k| {
                let k = k as f64;
                basis.eval(t - k) * basis.eval(u - k)
            })
            .sum();
        k * factor.pdf(u / scale)
    };
    // in the scaled variable u = 2^j y the Jacobian cancels the 2^j prefactor
    (first..last)
        .map(|m| {
            let lo = (m as f64 * panel).max(u_lo);
            let hi = ((m + 1) as f64 * panel).min(u_hi);
            if hi > lo {
                gl5(&integrand, lo, hi)
            } else {
                0.0
            }
        })
        .sum()
}

/// Normalization of a deviation statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `(n h / (2 f(x) ln(1/h)))^{1/2} (fhat(x) - E fhat(x))` with `h = 2^{-dj}`.
    Theorem1,
    /// `|fhat(x) / f(x) - 1|`.
    Ratio,
}

/// Finite evaluation grid inside a box `H`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationGrid {
    region: BoxRegion,
    points: Vec<Vec<f64>>,
    dyadic: bool,
}

pub const DEFAULT_GRID_CAP: usize = 4096;

impl EvaluationGrid {
    /// Points `x` of `H` with `2^j x` on the integer lattice. When an axis
    /// has more than `cap` such points, an evenly strided subset is kept.
    pub fn dyadic(region: &BoxRegion, level: u32, cap: usize) -> Result<Self> {
        let axes: Vec<Vec<f64>> = (0..region.dim())
            .map(|i| dyadic_axis(region.lo[i], region.hi[i], level, cap))
            .collect();
        Self::from_axes(region, axes, true)
    }

    /// Dyadic points plus the midpoints between consecutive ones.
    pub fn dyadic_with_midpoints(region: &BoxRegion, level: u32, cap: usize) -> Result<Self> {
        let axes: Vec<Vec<f64>> = (0..region.dim())
            .map(|i| {
                let base = dyadic_axis(region.lo[i], region.hi[i], level, cap);
                let mut out = Vec::with_capacity(2 * base.len());
                for w in base.windows(2) {
                    out.push(w[0]);
                    out.push(0.5 * (w[0] + w[1]));
                }
                if let Some(&last) = base.last() {
                    out.push(last);
                }
                out
            })
            .collect();
        Self::from_axes(region, axes, false)
    }

    /// `per_axis` equispaced points per axis, endpoints included.
    pub fn uniform(region: &BoxRegion, per_axis: usize) -> Result<Self> {
        if per_axis == 0 {
            return Err(Error::config(
                "uniform grid needs at least one point per axis",
            ));
        }
        let axes: Vec<Vec<f64>> = (0..region.dim())
            .map(|i| {
                if per_axis == 1 {
                    return vec![0.5 * (region.lo[i] + region.hi[i])];
                }
                (0..per_axis)
                    .map(|m| {
                        region.lo[i]
                            + (region.hi[i] - region.lo[i]) * m as f64 / (per_axis - 1) as f64
                    })
                    .collect()
            })
            .collect();
        Self::from_axes(region, axes, false)
    }

    fn from_axes(region: &BoxRegion, axes: Vec<Vec<f64>>, dyadic: bool) -> Result<Self> {
        if axes.iter().any(|a| a.is_empty()) {
            return Err(Error::config("evaluation grid is empty along some axis"));
        }
        let total: usize = axes.iter().map(|a| a.len()).product();
        let mut points = Vec::with_capacity(total);
        for flat in 0..total {
            let mut rem = flat;
            let mut p = vec![0.0; axes.len()];
            for axis in (0..axes.len()).rev() {
                let len = axes[axis].len();
                p[axis] = axes[axis][rem % len];
                rem /= len;
            }
            points.push(p);
        }
        Ok(Self {
            region: region.clone(),
            points,
            dyadic,
        })
    }

    pub fn region(&self) -> &BoxRegion {
        &self.region
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn is_dyadic(&self) -> bool {
        self.dyadic
    }
}

fn dyadic_axis(lo: f64, hi: f64, level: u32, cap: usize) -> Vec<f64> {
    let scale = (level as f64).exp2();
    let first = (lo * scale).ceil() as i64;
    let last = (hi * scale).floor() as i64;
    if last < first {
        return Vec::new();
    }
    let count = (last - first + 1) as usize;
    let stride = count.div_ceil(cap.max(1)).max(1);
    (first..=last)
        .step_by(stride)
        .map(|m| m as f64 / scale)
        .collect()
}

/// Extremes of a normalized deviation over an evaluation grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupStatistic {
    pub sup_dev: f64,
    pub inf_dev: f64,
    pub argmax: Vec<f64>,
    pub normalization: Normalization,
    pub grid_points: usize,
}

/// `sup` and `inf` of the chosen statistic over `grid`.
pub fn sup_deviation(
    est: &WaveletDensityEstimator,
    density: &Density,
    grid: &EvaluationGrid,
    mode: Normalization,
) -> Result<SupStatistic> {
    let expectation = match mode {
        Normalization::Theorem1 => Some(
            grid.points()
                .par_iter()
                .map(|x| expected_estimator(density, est.basis(), est.level(), x))
                .collect::<Result<Vec<f64>>>()?,
        ),
        Normalization::Ratio => None,
    };
    sup_deviation_with_expectation(est, density, grid, mode, expectation.as_deref())
}

/// As [`sup_deviation`], with `E fhat` supplied per grid point (required for
/// [`Normalization::Theorem1`]). Experiments share one expectation table
/// across replications of the same `n`.
pub fn sup_deviation_with_expectation(
    est: &WaveletDensityEstimator,
    density: &Density,
    grid: &EvaluationGrid,
    mode: Normalization,
    expectation: Option<&[f64]>,
) -> Result<SupStatistic> {
    let values = match mode {
        Normalization::Theorem1 => {
            let ef = expectation
                .ok_or_else(|| Error::config("theorem1 statistic needs E fhat on the grid"))?;
            if ef.len() != grid.len() {
                return Err(Error::config("expectation table does not match the grid"));
            }
            let fhat: Vec<f64> = grid.points().par_iter().map(|x| est.evaluate(x)).collect();
            theorem1_statistic(est.n(), est.dim(), est.level(), density, grid, &fhat, ef)?
        }
        Normalization::Ratio => grid
            .points()
            .par_iter()
            .map(|x| {
                let f = density.pdf(x);
                if !(f > 0.0) {
                    return Err(Error::domain(format!(
                        "density vanishes at grid point {x:?}"
                    )));
                }
                Ok((est.evaluate(x) / f - 1.0).abs())
            })
            .collect::<Result<Vec<f64>>>()?,
    };
    Ok(extremes(&values, grid, mode))
}

/// The centred statistic for given `fhat` and `E fhat` tables on `grid`.
pub fn theorem1_statistic(
    n: usize,
    dim: usize,
    level: u32,
    density: &Density,
    grid: &EvaluationGrid,
    fhat: &[f64],
    expectation: &[f64],
) -> Result<Vec<f64>> {
    if level == 0 {
        return Err(Error::domain(
            "theorem1 normalization needs j >= 1 (log 2^{dj} = 0 at j = 0)",
        ));
    }
    let log_term = (dim as f64) * level as f64 * std::f64::consts::LN_2;
    // n h_n with h_n = 2^{-dj}
    let scale_n = n as f64 * (-((dim as u32 * level) as f64)).exp2();
    grid.points()
        .iter()
        .zip(fhat.iter().zip(expectation))
        .map(|(x, (&fh, &ef))| {
            let f = density.pdf(x);
            if !(f > 0.0) {
                return Err(Error::domain(format!(
                    "density vanishes at grid point {x:?}"
                )));
            }
            Ok((scale_n / (2.0 * f * log_term)).sqrt() * (fh - ef))
        })
        .collect()
}

fn extremes(values: &[f64], grid: &EvaluationGrid, mode: Normalization) -> SupStatistic {
    let mut sup = f64::NEG_INFINITY;
    let mut inf = f64::INFINITY;
    let mut arg = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > sup {
            sup = v;
            arg = i;
        }
        inf = inf.min(v);
    }
    SupStatistic {
        sup_dev: sup,
        inf_dev: inf,
        argmax: grid.points()[arg].clone(),
        normalization: mode,
        grid_points: grid.len(),
    }
}
