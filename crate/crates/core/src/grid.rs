//! Uniform tensor grids over axis-aligned boxes.
//!
//! A [`BoxGrid`] with `N_i` cells along axis `i` has `N_i + 1` nodes on that
//! axis. Node arrays and cell arrays are stored flat in row-major order (last
//! axis fastest).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis-aligned box `[lo, hi]` in `R^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxRegion {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxRegion {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::config(
                "box corners must be nonempty and of equal dimension",
            ));
        }
        if lo
            .iter()
            .zip(&hi)
            .any(|(a, b)| !(a <= b) || !a.is_finite() || !b.is_finite())
        {
            return Err(Error::domain(
                "box requires finite lo <= hi in every coordinate",
            ));
        }
        Ok(Self { lo, hi })
    }

    /// The cube `[lo, hi]^d`.
    pub fn cube(lo: f64, hi: f64, dim: usize) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(v, (a, b))| a <= v && v <= b)
    }

    /// Strict interior containment of `other` in `self`.
    pub fn strictly_contains(&self, other: &BoxRegion) -> bool {
        self.dim() == other.dim()
            && (0..self.dim()).all(|i| self.lo[i] < other.lo[i] && other.hi[i] < self.hi[i])
    }

    pub fn min_side(&self) -> f64 {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| b - a)
            .fold(f64::INFINITY, f64::min)
    }
}

/// A uniform grid of cubic cells of side `step` anchored at `lo`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxGrid {
    lo: Vec<f64>,
    step: f64,
    cells: Vec<usize>,
}

impl BoxGrid {
    pub fn new(lo: Vec<f64>, step: f64, cells: Vec<usize>) -> Result<Self> {
        if lo.is_empty() || lo.len() != cells.len() {
            return Err(Error::config(
                "grid origin and cell counts must share a nonzero dimension",
            ));
        }
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::config(format!(
                "grid step must be positive, got {step}"
            )));
        }
        if cells.contains(&0) {
            return Err(Error::config("grid needs at least one cell per axis"));
        }
        Ok(Self { lo, step, cells })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn cells_per_axis(&self) -> &[usize] {
        &self.cells
    }

    /// Upper corner of the grid box.
    pub fn top(&self) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.cells)
            .map(|(a, &n)| a + n as f64 * self.step)
            .collect()
    }

    pub fn cell_volume(&self) -> f64 {
        self.step.powi(self.dim() as i32)
    }

    pub fn n_cells(&self) -> usize {
        self.cells.iter().product()
    }

    pub fn n_nodes(&self) -> usize {
        self.cells.iter().map(|c| c + 1).product()
    }

    fn node_shape(&self) -> Vec<usize> {
        self.cells.iter().map(|c| c + 1).collect()
    }

    /// Coordinate of node `m` along `axis`.
    pub fn axis_node(&self, axis: usize, m: usize) -> f64 {
        self.lo[axis] + m as f64 * self.step
    }

    /// Node coordinates for a flat node index.
    pub fn node_point(&self, flat: usize) -> Vec<f64> {
        unravel(flat, &self.node_shape())
            .into_iter()
            .enumerate()
            .map(|(axis, m)| self.axis_node(axis, m))
            .collect()
    }

    /// Lower corner of a cell given its flat index.
    pub fn cell_lower(&self, flat: usize) -> Vec<f64> {
        unravel(flat, &self.cells)
            .into_iter()
            .enumerate()
            .map(|(axis, m)| self.axis_node(axis, m))
            .collect()
    }

    /// Flat index of the half-open cell `[s_m, s_m + step)` containing `x`.
    pub fn cell_of(&self, x: &[f64]) -> Option<usize> {
        let mut flat = 0usize;
        for (axis, &v) in x.iter().enumerate() {
            let t = ((v - self.lo[axis]) / self.step).floor();
            if !(t >= 0.0) || t >= self.cells[axis] as f64 {
                return None;
            }
            flat = flat * self.cells[axis] + t as usize;
        }
        Some(flat)
    }

    /// Flat index of the nearest node at or below `x` in every coordinate,
    /// clamped into the grid.
    pub fn nearest_lower_node(&self, x: &[f64]) -> usize {
        let shape = self.node_shape();
        let mut flat = 0usize;
        for (axis, &v) in x.iter().enumerate() {
            let t = ((v - self.lo[axis]) / self.step + 1e-9).floor();
            let m = t.clamp(0.0, self.cells[axis] as f64) as usize;
            flat = flat * shape[axis] + m;
        }
        flat
    }

    /// Box sums from cells to nodes: `out[m] = sum of cells c with c >= m`
    /// componentwise. Nodes on the top face receive 0.
    pub fn upper_orthant_sums(&self, cell_values: &[f64]) -> Vec<f64> {
        assert_eq!(cell_values.len(), self.n_cells());
        let shape = self.node_shape();
        let mut out = vec![0.0; self.n_nodes()];
        for (c, &v) in cell_values.iter().enumerate() {
            let idx = unravel(c, &self.cells);
            out[ravel(&idx, &shape)] = v;
        }
        for axis in 0..self.dim() {
            suffix_along(&mut out, &shape, axis);
        }
        out
    }

    /// Inverse of [`Self::upper_orthant_sums`]: the mixed finite difference of
    /// node values, one entry per cell.
    pub fn cell_differences(&self, node_values: &[f64]) -> Vec<f64> {
        assert_eq!(node_values.len(), self.n_nodes());
        let shape = self.node_shape();
        let mut work = node_values.to_vec();
        for axis in 0..self.dim() {
            difference_along(&mut work, &shape, axis);
        }
        (0..self.n_cells())
            .map(|c| work[ravel(&unravel(c, &self.cells), &shape)])
            .collect()
    }

    /// Flat node index to cell index, if the node is the lower corner of a cell.
    pub fn node_to_cell(&self, node: usize) -> Option<usize> {
        let idx = unravel(node, &self.node_shape());
        if idx.iter().zip(&self.cells).any(|(m, n)| m >= n) {
            None
        } else {
            Some(ravel(&idx, &self.cells))
        }
    }
}

pub(crate) fn unravel(mut flat: usize, shape: &[usize]) -> Vec<usize> {
    let mut idx = vec![0; shape.len()];
    for axis in (0..shape.len()).rev() {
        idx[axis] = flat % shape[axis];
        flat /= shape[axis];
    }
    idx
}

pub(crate) fn ravel(idx: &[usize], shape: &[usize]) -> usize {
    idx.iter().zip(shape).fold(0, |acc, (i, n)| acc * n + i)
}

fn stride_of(shape: &[usize], axis: usize) -> usize {
    shape[axis + 1..].iter().product()
}

fn suffix_along(data: &mut [f64], shape: &[usize], axis: usize) {
    let stride = stride_of(shape, axis);
    let len = shape[axis];
    let block = stride * len;
    for base in (0..data.len()).step_by(block) {
        for off in 0..stride {
            let mut acc = 0.0;
            for m in (0..len).rev() {
                let i = base + m * stride + off;
                acc += data[i];
                data[i] = acc;
            }
        }
    }
}

fn difference_along(data: &mut [f64], shape: &[usize], axis: usize) {
    let stride = stride_of(shape, axis);
    let len = shape[axis];
    let block = stride * len;
    for base in (0..data.len()).step_by(block) {
        for off in 0..stride {
            for m in 0..len - 1 {
                let i = base + m * stride + off;
                data[i] -= data[i + stride];
            }
        }
    }
}
