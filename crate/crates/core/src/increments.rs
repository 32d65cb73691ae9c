//! Increments of the empirical process over upper boxes `[s, top]`, and the
//! Stieltjes functionals that map them to the estimator's deviation.
//!
//! An [`IncrementFunction`] keeps both its node values `g(s_m)` and the signed
//! measure behind them: point atoms (the scaled observations) plus an
//! absolutely continuous part stored as per-cell masses. `g(s)` is the measure
//! of `[s, top]`, so after integration by parts
//! `int g dK~ = int K~ d(measure)`, which [`theta`] evaluates with `K~`
//! exact at every atom and cell-averaged against the continuous part.

use serde::{Deserialize, Serialize};

use crate::basis::ScalingFunction;
use crate::error::{Error, Result};
use crate::estimator::{expected_estimator, WaveletDensityEstimator};
use crate::grid::{unravel, BoxGrid};
use crate::kernel::{LocalizedKernel, ProjectionKernel};
use crate::sampling::{Density, Sample};
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IncrementKind {
    /// Normalized centred increments of the empirical process.
    Gnx,
    /// Scaled counting measure of upper boxes.
    Gtilde,
    /// A plain grid function, e.g. a limit-set member.
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaleMeta {
    pub f_x: f64,
    pub n: usize,
    pub c: Option<f64>,
}

/// A point mass of the increment measure.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub position: Vec<f64>,
    pub weight: f64,
}

/// A grid-discretized functional increment `s -> g(s)`.
#[derive(Debug, Clone)]
pub struct IncrementFunction {
    kind: IncrementKind,
    center: Vec<f64>,
    bandwidth: f64,
    grid: BoxGrid,
    values: Vec<f64>,
    atoms: Vec<Atom>,
    cell_mass: Vec<f64>,
    meta: Option<ScaleMeta>,
}

impl IncrementFunction {
    /// `g(s) = int_{[s, top]} gdot`, with `gdot` constant on each cell.
    pub fn from_cell_density(grid: &BoxGrid, gdot: &[f64]) -> Result<Self> {
        if gdot.len() != grid.n_cells() {
            return Err(Error::config("cell density does not match the grid"));
        }
        let vol = grid.cell_volume();
        let cell_mass: Vec<f64> = gdot.iter().map(|v| v * vol).collect();
        Ok(Self::plain(grid, cell_mass))
    }

    /// A grid function given by its node values; the measure is recovered by
    /// mixed finite differences.
    pub fn from_values(grid: &BoxGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_nodes() {
            return Err(Error::config("node values do not match the grid"));
        }
        let cell_mass = grid.cell_differences(&values);
        Ok(Self {
            kind: IncrementKind::Grid,
            center: Vec::new(),
            bandwidth: f64::NAN,
            grid: grid.clone(),
            values,
            atoms: Vec::new(),
            cell_mass,
            meta: None,
        })
    }

    fn plain(grid: &BoxGrid, cell_mass: Vec<f64>) -> Self {
        let values = grid.upper_orthant_sums(&cell_mass);
        Self {
            kind: IncrementKind::Grid,
            center: Vec::new(),
            bandwidth: f64::NAN,
            grid: grid.clone(),
            values,
            atoms: Vec::new(),
            cell_mass,
            meta: None,
        }
    }

    fn from_measure(
        kind: IncrementKind,
        center: &[f64],
        bandwidth: f64,
        grid: &BoxGrid,
        atoms: Vec<Atom>,
        cell_mass: Vec<f64>,
        meta: ScaleMeta,
    ) -> Self {
        let mut binned = cell_mass.clone();
        for a in &atoms {
            if let Some(c) = grid.cell_of(&a.position) {
                binned[c] += a.weight;
            }
        }
        let values = grid.upper_orthant_sums(&binned);
        Self {
            kind,
            center: center.to_vec(),
            bandwidth,
            grid: grid.clone(),
            values,
            atoms,
            cell_mass,
            meta: Some(meta),
        }
    }

    pub fn kind(&self) -> IncrementKind {
        self.kind
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    /// `h_n` in volume units.
    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn grid(&self) -> &BoxGrid {
        &self.grid
    }

    /// `g` at the grid nodes (top face included, where it vanishes).
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// Continuous part of the measure, one mass per cell.
    pub fn cell_mass(&self) -> &[f64] {
        &self.cell_mass
    }

    pub fn meta(&self) -> Option<ScaleMeta> {
        self.meta
    }

    /// Cell densities of the full measure, atoms binned into their cells.
    pub fn cell_density(&self) -> Vec<f64> {
        let vol = self.grid.cell_volume();
        let mut mass = self.cell_mass.clone();
        for a in &self.atoms {
            if let Some(c) = self.grid.cell_of(&a.position) {
                mass[c] += a.weight;
            }
        }
        mass.iter().map(|m| m / vol).collect()
    }

    /// `g` at an arbitrary point, by nearest-lower node lookup; zero on and
    /// beyond the top corner.
    pub fn value_at(&self, s: &[f64]) -> f64 {
        let top = self.grid.top();
        if s.iter().zip(&top).any(|(v, t)| v >= t) {
            return 0.0;
        }
        self.values[self.grid.nearest_lower_node(s)]
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `a * self + b * other` on a common grid.
    pub fn combine(&self, a: f64, other: &IncrementFunction, b: f64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::config(
                "cannot combine increment functions on different grids",
            ));
        }
        let mut atoms: Vec<Atom> = self
            .atoms
            .iter()
            .map(|x| Atom {
                position: x.position.clone(),
                weight: a * x.weight,
            })
            .collect();
        atoms.extend(other.atoms.iter().map(|x| Atom {
            position: x.position.clone(),
            weight: b * x.weight,
        }));
        let cell_mass: Vec<f64> = self
            .cell_mass
            .iter()
            .zip(&other.cell_mass)
            .map(|(p, q)| a * p + b * q)
            .collect();
        let values: Vec<f64> = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(p, q)| a * p + b * q)
            .collect();
        Ok(Self {
            kind: IncrementKind::Grid,
            center: self.center.clone(),
            bandwidth: self.bandwidth,
            grid: self.grid.clone(),
            values,
            atoms,
            cell_mass,
            meta: None,
        })
    }

    /// Node values resampled onto `target` by nearest-lower lookup.
    pub fn resample(&self, target: &BoxGrid) -> Result<Self> {
        if target.dim() != self.grid.dim() {
            return Err(Error::config("cannot resample across dimensions"));
        }
        let values: Vec<f64> = (0..target.n_nodes())
            .map(|i| self.value_at(&target.node_point(i)))
            .collect();
        Self::from_values(target, values)
    }
}

fn check_box(lo: &[f64], hi: &[f64]) -> Result<()> {
    if lo.len() != hi.len() {
        return Err(Error::domain("box corners have different dimensions"));
    }
    if lo.iter().zip(hi).any(|(a, b)| a > b) {
        return Err(Error::domain(
            "degenerate box: lower corner exceeds upper corner",
        ));
    }
    Ok(())
}

/// `Delta alpha_n(x, h, [lo, hi])`: the centred, `sqrt(n)`-scaled empirical
/// mass of `[lo, hi]` after mapping each observation to `(X - x) / h^{1/d}`.
pub fn increment(
    sample: &Sample,
    density: &Density,
    x: &[f64],
    h: f64,
    lo: &[f64],
    hi: &[f64],
) -> Result<f64> {
    check_box(lo, hi)?;
    if !(h > 0.0) {
        return Err(Error::domain("bandwidth must be positive"));
    }
    let d = sample.dim();
    if x.len() != d || lo.len() != d {
        return Err(Error::domain(
            "increment arguments have mismatched dimensions",
        ));
    }
    let side = h.powf(1.0 / d as f64);
    let count = sample
        .points()
        .filter(|p| {
            (0..d).all(|i| {
                let y = (p[i] - x[i]) / side;
                lo[i] <= y && y <= hi[i]
            })
        })
        .count();
    let abs_lo: Vec<f64> = (0..d).map(|i| x[i] + side * lo[i]).collect();
    let abs_hi: Vec<f64> = (0..d).map(|i| x[i] + side * hi[i]).collect();
    let prob = density.box_prob(&abs_lo, &abs_hi);
    let n = sample.len() as f64;
    Ok(n.sqrt() * (count as f64 / n - prob))
}

/// Probability of each cell of `grid` mapped through `s -> x + side * s`.
pub fn cell_probabilities(density: &Density, x: &[f64], side: f64, grid: &BoxGrid) -> Vec<f64> {
    let d = grid.dim();
    let cells = grid.cells_per_axis().to_vec();
    let mut out = vec![0.0; grid.n_cells()];
    for term in density.terms() {
        let axes: Vec<Vec<f64>> = (0..d)
            .map(|i| {
                (0..cells[i])
                    .map(|m| {
                        let a = x[i] + side * grid.axis_node(i, m);
                        let b = x[i] + side * grid.axis_node(i, m + 1);
                        term.factors[i].interval_prob(a, b)
                    })
                    .collect()
            })
            .collect();
        for (flat, slot) in out.iter_mut().enumerate() {
            let idx = unravel(flat, &cells);
            *slot += term.weight
                * idx
                    .iter()
                    .enumerate()
                    .map(|(i, &m)| axes[i][m])
                    .product::<f64>();
        }
    }
    out
}

fn scaled_atoms(
    sample: &Sample,
    x: &[f64],
    inv_side: f64,
    grid: &BoxGrid,
    weight: f64,
) -> Vec<Atom> {
    let lo = grid.lo().to_vec();
    let top = grid.top();
    sample
        .points()
        .filter_map(|p| {
            let position: Vec<f64> = p.iter().zip(x).map(|(a, b)| (a - b) * inv_side).collect();
            let inside = position
                .iter()
                .zip(lo.iter().zip(&top))
                .all(|(v, (l, t))| l <= v && v < t);
            inside.then_some(Atom { position, weight })
        })
        .collect()
}

fn level_bandwidth(dim: usize, level: u32) -> (f64, f64) {
    let side = (-(level as f64)).exp2();
    (side.powi(dim as i32), side)
}

/// `g_{n,x}(s) = Delta alpha_n(x, h, [s, top]) / sqrt(2 f(x) h ln(1/h))` with
/// `h = 2^{-dj}`, on the nodes of `grid`.
pub fn g_n_x(
    sample: &Sample,
    density: &Density,
    x: &[f64],
    level: u32,
    grid: &BoxGrid,
) -> Result<IncrementFunction> {
    let d = sample.dim();
    if x.len() != d || grid.dim() != d {
        return Err(Error::domain("g_n_x arguments have mismatched dimensions"));
    }
    if level == 0 {
        return Err(Error::domain("g_n_x needs j >= 1 (ln(1/h) = 0 at j = 0)"));
    }
    let f_x = density.pdf(x);
    if !(f_x > 0.0) {
        return Err(Error::domain(format!("density vanishes at {x:?}")));
    }
    let (h, side) = level_bandwidth(d, level);
    let norm = (2.0 * f_x * h * (1.0 / h).ln()).sqrt();
    let n = sample.len() as f64;
    let atoms = scaled_atoms(sample, x, 1.0 / side, grid, 1.0 / (n.sqrt() * norm));
    let cell_mass: Vec<f64> = cell_probabilities(density, x, side, grid)
        .into_iter()
        .map(|p| -n.sqrt() * p / norm)
        .collect();
    Ok(IncrementFunction::from_measure(
        IncrementKind::Gnx,
        x,
        h,
        grid,
        atoms,
        cell_mass,
        ScaleMeta {
            f_x,
            n: sample.len(),
            c: None,
        },
    ))
}

/// `g~_{n,x}(s) = count{(X_i - x) / h^{1/d} in [s, top]} / (c f(x) n h)`.
pub fn g_tilde_n_x(
    sample: &Sample,
    density: &Density,
    x: &[f64],
    level: u32,
    c: f64,
    grid: &BoxGrid,
) -> Result<IncrementFunction> {
    let d = sample.dim();
    if x.len() != d || grid.dim() != d {
        return Err(Error::domain(
            "g_tilde_n_x arguments have mismatched dimensions",
        ));
    }
    if !(c > 0.0) {
        return Err(Error::domain("the constant c must be positive"));
    }
    let f_x = density.pdf(x);
    if !(f_x > 0.0) {
        return Err(Error::domain(format!("density vanishes at {x:?}")));
    }
    let (h, side) = level_bandwidth(d, level);
    let weight = 1.0 / (c * f_x * sample.len() as f64 * h);
    let atoms = scaled_atoms(sample, x, 1.0 / side, grid, weight);
    Ok(IncrementFunction::from_measure(
        IncrementKind::Gtilde,
        x,
        h,
        grid,
        atoms,
        vec![0.0; grid.n_cells()],
        ScaleMeta {
            f_x,
            n: sample.len(),
            c: Some(c),
        },
    ))
}

/// `int_D g dK~` (divided by `sigma` when `normalized`).
///
/// Through integration by parts this is `int K~ d(measure of g)`: atoms are
/// weighted by `K~` at their exact positions and the continuous part by the
/// exact cell averages of `K~`. A function on a different grid is first
/// resampled onto the kernel's grid.
pub fn theta(lk: &LocalizedKernel, g: &IncrementFunction, normalized: bool) -> Result<f64> {
    let resampled;
    let g = if g.grid() == lk.grid() {
        g
    } else {
        resampled = g.resample(lk.grid())?;
        if resampled.grid() != lk.grid() {
            return Err(Error::config(
                "increment grid does not match the kernel grid",
            ));
        }
        &resampled
    };
    let atomic: f64 = g
        .atoms()
        .iter()
        .map(|a| a.weight * lk.eval(&a.position))
        .sum();
    let continuous: f64 = g
        .cell_mass()
        .iter()
        .zip(lk.cell_means())
        .map(|(m, k)| m * k)
        .sum();
    let raw = atomic + continuous;
    Ok(if normalized { raw / lk.sigma() } else { raw })
}

/// Both sides of the identity between the normalized estimator deviation and
/// the Stieltjes functional of `g_{n,x}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RelationCheck {
    /// `(n h / (2 f(x) ln(1/h)))^{1/2} (fhat(x) - E fhat(x))`.
    pub lhs: f64,
    /// `int g_{n,x} dK~_{n,x}`.
    pub rhs: f64,
    pub sigma: f64,
    pub residual: f64,
}

/// Certifies the estimator pipeline against the increment pipeline at one
/// point.
///
/// The left side is computed from the fitted coefficients and the quadrature
/// expectation; the right side from the localized kernel and the empirical
/// increments. The identity holds with the unnormalized functional; the
/// `sigma`-normalized one differs by the factor `sigma`, which is 1 for Haar.
pub fn relation_check(
    sample: &Sample,
    density: &Density,
    basis: &Arc<ScalingFunction>,
    x: &[f64],
    level: u32,
    grid_step: f64,
) -> Result<RelationCheck> {
    let d = sample.dim();
    let est = WaveletDensityEstimator::fit(basis.clone(), level, sample)?;
    let fhat = est.evaluate(x);
    let ef = expected_estimator(density, basis, level, x)?;
    let f_x = density.pdf(x);
    let (h, _) = level_bandwidth(d, level);
    let lhs = (sample.len() as f64 * h / (2.0 * f_x * (1.0 / h).ln())).sqrt() * (fhat - ef);

    let kernel = ProjectionKernel::new(basis.clone(), d)?;
    let lk = kernel.localize(level, x, grid_step)?;
    let g = g_n_x(sample, density, x, level, lk.grid())?;
    let rhs = theta(&lk, &g, false)?;
    Ok(RelationCheck {
        lhs,
        rhs,
        sigma: lk.sigma(),
        residual: (lhs - rhs).abs(),
    })
}
