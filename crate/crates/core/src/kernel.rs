//! Projection kernel `K(x, y) = sum_k phi(x - k) phi(y - k)`, its dyadic
//! rescalings and localized sections.

use std::sync::Arc;

use serde::Serialize;

use crate::basis::ScalingFunction;
use crate::error::{Error, Result};
use crate::grid::{unravel, BoxGrid};

/// Reproducing kernel of the level-0 approximation space of a tensor-product
/// scaling function on `R^d`.
#[derive(Debug, Clone)]
pub struct ProjectionKernel {
    basis: Arc<ScalingFunction>,
    dim: usize,
}

impl ProjectionKernel {
    pub fn new(basis: Arc<ScalingFunction>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::domain("kernel dimension must be at least 1"));
        }
        Ok(Self { basis, dim })
    }

    pub fn basis(&self) -> &ScalingFunction {
        &self.basis
    }

    pub fn basis_arc(&self) -> &Arc<ScalingFunction> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Univariate kernel. The sum runs over shifts where both factors can be
    /// nonzero.
    pub fn k1(&self, x: f64, y: f64) -> f64 {
        let kx = self.basis.shifts_covering(x);
        let ky = self.basis.shifts_covering(y);
        let lo = *kx.start().max(ky.start());
        let hi = *kx.end().min(ky.end());
        (lo..=hi)
            .map(|k| {
                let k = k as f64;
                self.basis.eval(x - k) * self.basis.eval(y - k)
            })
            .sum()
    }

    fn check_dims(&self, x: &[f64], y: &[f64]) -> Result<()> {
        if x.len() != self.dim || y.len() != self.dim {
            return Err(Error::domain(format!(
                "kernel of dimension {} evaluated at points of dimension {} and {}",
                self.dim,
                x.len(),
                y.len()
            )));
        }
        Ok(())
    }

    /// `K(x, y)`; the tensor structure factors the lattice sum per coordinate.
    pub fn kernel_k(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.check_dims(x, y)?;
        Ok(x.iter().zip(y).map(|(&a, &b)| self.k1(a, b)).product())
    }

    /// `K_j(x, y) = 2^{dj} K(2^j x, 2^j y)`.
    pub fn kernel_kj(&self, j: u32, x: &[f64], y: &[f64]) -> Result<f64> {
        self.check_dims(x, y)?;
        let scale = (j as f64).exp2();
        let value: f64 = x
            .iter()
            .zip(y)
            .map(|(&a, &b)| self.k1(scale * a, scale * b))
            .product();
        Ok(scale.powi(self.dim as i32) * value)
    }

    /// Localized section `s -> K(2^j x, 2^j x + s)` sampled on a grid of
    /// side `grid_step`.
    ///
    /// Along each axis the grid spans `[-W - o, W - o]`, where `W` is the
    /// support width of `phi` and `o` the fractional part of `2^j x_i`. This
    /// box contains the section's support and puts every breakpoint of the
    /// table interpolant on the lattice `-o + 2^-r Z`, so cell-aligned grids
    /// see discontinuities exactly on grid lines.
    pub fn localize(&self, j: u32, x: &[f64], grid_step: f64) -> Result<LocalizedKernel> {
        if x.len() != self.dim {
            return Err(Error::domain(
                "center dimension does not match kernel dimension",
            ));
        }
        if !(grid_step > 0.0) {
            return Err(Error::config("grid step must be positive"));
        }
        let width = self.basis.support_width() as f64;
        if grid_step > width {
            return Err(Error::config(format!(
                "grid step {grid_step} is too coarse for a section supported on a box of half-width {width}"
            )));
        }
        let cells_f = 2.0 * width / grid_step;
        let cells = cells_f.round();
        if (cells - cells_f).abs() > 1e-9 * cells_f.max(1.0) {
            return Err(Error::config(format!(
                "grid step {grid_step} does not tile the domain box of side {}",
                2.0 * width
            )));
        }
        let cells = cells as usize;

        let scale = (j as f64).exp2();
        let anchor: Vec<f64> = x.iter().map(|&v| v * scale).collect();
        let sections: Vec<Section> = anchor
            .iter()
            .map(|&y| Section::build(self, y, grid_step, cells))
            .collect();
        let lo: Vec<f64> = sections.iter().map(|s| s.lo).collect();
        let grid = BoxGrid::new(lo, grid_step, vec![cells; self.dim])?;

        let node_shape = vec![cells + 1; self.dim];
        let values: Vec<f64> = (0..grid.n_nodes())
            .map(|flat| {
                unravel(flat, &node_shape)
                    .iter()
                    .zip(&sections)
                    .map(|(&m, sec)| sec.nodes[m])
                    .product()
            })
            .collect();
        let cell_shape = vec![cells; self.dim];
        let cell_means: Vec<f64> = (0..grid.n_cells())
            .map(|flat| {
                unravel(flat, &cell_shape)
                    .iter()
                    .zip(&sections)
                    .map(|(&m, sec)| sec.means[m])
                    .product()
            })
            .collect();

        let sigma = sections
            .iter()
            .map(|s| (s.nodes[..cells].iter().map(|v| v * v).sum::<f64>() * grid_step).sqrt())
            .product();
        let integral = sections
            .iter()
            .map(|s| s.means.iter().sum::<f64>() * grid_step)
            .product();
        let tv = if self.dim == 1 {
            Some(
                sections[0]
                    .nodes
                    .windows(2)
                    .map(|w| (w[1] - w[0]).abs())
                    .sum(),
            )
        } else {
            None
        };

        Ok(LocalizedKernel {
            kernel: self.clone(),
            level: j,
            center: x.to_vec(),
            anchor,
            grid,
            values,
            cell_means,
            sigma,
            tv,
            integral,
        })
    }
}

/// One axis of a localized section, represented in the absolute coordinate
/// `u = y + s`.
struct Section {
    lo: f64,
    nodes: Vec<f64>,
    means: Vec<f64>,
}

impl Section {
    fn build(kernel: &ProjectionKernel, y: f64, step: f64, cells: usize) -> Self {
        let width = kernel.basis.support_width() as f64;
        let base = y.floor() - width;
        let offset = y - y.floor();
        let node_u = |m: usize| base + m as f64 * step;
        let nodes: Vec<f64> = (0..=cells).map(|m| kernel.k1(y, node_u(m))).collect();

        let spacing = kernel.basis.node_spacing();
        let inv = 1.0 / spacing;
        let means = (0..cells)
            .map(|m| {
                let (u0, u1) = (node_u(m), node_u(m + 1));
                // the interpolant is affine (or constant) between lattice
                // points of 2^-r Z, so midpoints integrate each piece exactly
                let mut acc = 0.0;
                let mut left = u0;
                let mut b = ((u0 * inv).floor() + 1.0) * spacing;
                while b < u1 - 1e-12 * spacing {
                    if b > left + 1e-12 * spacing {
                        acc += (b - left) * kernel.k1(y, 0.5 * (left + b));
                        left = b;
                    }
                    b += spacing;
                }
                acc += (u1 - left) * kernel.k1(y, 0.5 * (left + u1));
                acc / step
            })
            .collect();
        Self {
            lo: -width - offset,
            nodes,
            means,
        }
    }
}

/// The section `K~(s) = K(2^j x, 2^j x + s)` on a grid over a box containing
/// its support, with `sigma = ||K~||_2` and (for `d = 1`) its total variation.
#[derive(Debug, Clone)]
pub struct LocalizedKernel {
    kernel: ProjectionKernel,
    level: u32,
    center: Vec<f64>,
    anchor: Vec<f64>,
    grid: BoxGrid,
    values: Vec<f64>,
    cell_means: Vec<f64>,
    sigma: f64,
    tv: Option<f64>,
    integral: f64,
}

/// Scalars reported next to a sampled section.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SectionSummary {
    pub sigma: f64,
    pub tv: Option<f64>,
    pub integral: f64,
}

impl LocalizedKernel {
    pub fn kernel(&self) -> &ProjectionKernel {
        &self.kernel
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn grid(&self) -> &BoxGrid {
        &self.grid
    }

    /// `K~` at the grid nodes.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Exact cell averages of `K~`, one per grid cell.
    pub fn cell_means(&self) -> &[f64] {
        &self.cell_means
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Total variation over the grid; only measured for `d = 1`.
    pub fn tv(&self) -> Option<f64> {
        self.tv
    }

    /// `int K~ ds` from the cell averages.
    pub fn integral(&self) -> f64 {
        self.integral
    }

    pub fn summary(&self) -> SectionSummary {
        SectionSummary {
            sigma: self.sigma,
            tv: self.tv,
            integral: self.integral,
        }
    }

    /// Exact evaluation of `K~(s)` off the grid.
    pub fn eval(&self, s: &[f64]) -> f64 {
        self.anchor
            .iter()
            .zip(s)
            .map(|(&y, &v)| self.kernel.k1(y, y + v))
            .product()
    }

    /// Node coordinates paired with `K~` values.
    pub fn samples(&self) -> impl Iterator<Item = (Vec<f64>, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(|(i, &v)| (self.grid.node_point(i), v))
    }
}
