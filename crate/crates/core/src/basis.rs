//! Compactly supported scaling functions and their tensor products.
//!
//! Values are tabulated on the dyadic lattice `a + m 2^-r` of the support
//! `[a, b]`. Daubechies tables come from the cascade: the integer values are
//! the eigenvalue-one eigenvector of the refinement matrix, and each finer
//! level follows from the two-scale relation `phi(x) = sum_k c_k phi(2x - k)`.

use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_TABLE_DEPTH: u32 = 12;

/// Shipped scaling-function families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Haar,
    Db4,
    Db6,
}

impl Family {
    pub fn build(self, table_depth: u32) -> Result<ScalingFunction> {
        match self {
            Family::Haar => Ok(build_haar_with_depth(table_depth)),
            Family::Db4 => build_daubechies(2, table_depth),
            Family::Db6 => build_daubechies(3, table_depth),
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "haar" => Ok(Family::Haar),
            "db4" | "d4" => Ok(Family::Db4),
            "db6" | "d6" => Ok(Family::Db6),
            other => Err(Error::config(format!("unknown basis family `{other}`"))),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Haar => "haar",
            Family::Db4 => "db4",
            Family::Db6 => "db6",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Interpolation {
    /// Right-continuous step between nodes.
    Step,
    Linear,
}

/// A compactly supported scaling function with its refinement filter and a
/// dyadic value table.
#[derive(Debug, Clone)]
pub struct ScalingFunction {
    family: Family,
    filter: Vec<f64>,
    support: (i64, i64),
    table_depth: u32,
    values: Vec<f64>,
    interpolation: Interpolation,
}

/// The Haar scaling function `1_[0,1)` at the default table depth.
pub fn build_haar() -> ScalingFunction {
    build_haar_with_depth(DEFAULT_TABLE_DEPTH)
}

pub fn build_haar_with_depth(table_depth: u32) -> ScalingFunction {
    let n = 1usize << table_depth;
    let mut values = vec![1.0; n + 1];
    values[n] = 0.0;
    ScalingFunction {
        family: Family::Haar,
        filter: vec![1.0, 1.0],
        support: (0, 1),
        table_depth,
        values,
        interpolation: Interpolation::Step,
    }
}

/// Refinement filter of the Daubechies scaling function with `order`
/// vanishing moments, normalized so the taps sum to 2.
pub fn daubechies_filter(order: usize) -> Result<Vec<f64>> {
    match order {
        2 => {
            let s3 = 3f64.sqrt();
            Ok(vec![
                (1.0 + s3) / 4.0,
                (3.0 + s3) / 4.0,
                (3.0 - s3) / 4.0,
                (1.0 - s3) / 4.0,
            ])
        }
        3 => {
            let r = 10f64.sqrt();
            let q = (5.0 + 2.0 * r).sqrt();
            Ok([
                1.0 + r + q,
                5.0 + r + 3.0 * q,
                10.0 - 2.0 * r + 2.0 * q,
                10.0 - 2.0 * r - 2.0 * q,
                5.0 + r - 3.0 * q,
                1.0 + r - q,
            ]
            .iter()
            .map(|v| v / 16.0)
            .collect())
        }
        other => Err(Error::config(format!(
            "Daubechies order {other} is not supported (expected 2 or 3)"
        ))),
    }
}

/// Daubechies scaling function of the given order, tabulated to `table_depth`
/// dyadic levels by the cascade.
pub fn build_daubechies(order: usize, table_depth: u32) -> Result<ScalingFunction> {
    let filter = daubechies_filter(order)?;
    if table_depth < 1 {
        return Err(Error::config("table depth must be at least 1"));
    }
    let len = filter.len() as i64 - 1;
    let integer_values = integer_values(&filter)?;

    let mut level = integer_values;
    for r in 1..=table_depth {
        let half = 1usize << (r - 1);
        let size = len as usize * (1usize << r) + 1;
        let mut next = vec![0.0; size];
        for (m, slot) in next.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (k, &c) in filter.iter().enumerate() {
                let idx = m as i64 - (k * half) as i64;
                if idx >= 0 && (idx as usize) < level.len() {
                    acc += c * level[idx as usize];
                }
            }
            *slot = acc;
        }
        level = next;
    }

    Ok(ScalingFunction {
        family: if order == 2 { Family::Db4 } else { Family::Db6 },
        filter,
        support: (0, len),
        table_depth,
        values: level,
        interpolation: Interpolation::Linear,
    })
}

/// Values at the integers `0..=L`, as the eigenvalue-one eigenvector of the
/// refinement matrix normalized to unit sum.
fn integer_values(filter: &[f64]) -> Result<Vec<f64>> {
    let len = filter.len() - 1;
    // Interior integers 1..len-1; the endpoints vanish for these filters.
    let m = len - 1;
    let tap = |i: i64| -> f64 {
        if i >= 0 && (i as usize) < filter.len() {
            filter[i as usize]
        } else {
            0.0
        }
    };
    let mut a = DMatrix::<f64>::zeros(m, m);
    for row in 0..m {
        for col in 0..m {
            let x = (row + 1) as i64;
            let y = (col + 1) as i64;
            a[(row, col)] = tap(2 * x - y) - if row == col { 1.0 } else { 0.0 };
        }
    }
    // (A - I) is singular; swap its last row for the normalization sum = 1.
    for col in 0..m {
        a[(m - 1, col)] = 1.0;
    }
    let mut rhs = DVector::<f64>::zeros(m);
    rhs[m - 1] = 1.0;
    let v = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::numerical("refinement eigenproblem is degenerate"))?;
    let mut out = vec![0.0; len + 1];
    for i in 0..m {
        out[i + 1] = v[i];
    }
    Ok(out)
}

impl ScalingFunction {
    pub fn family(&self) -> Family {
        self.family
    }

    pub fn name(&self) -> String {
        self.family.to_string()
    }

    pub fn filter(&self) -> &[f64] {
        &self.filter
    }

    /// Integer support endpoints `[a, b]`.
    pub fn support(&self) -> (i64, i64) {
        self.support
    }

    pub fn support_width(&self) -> i64 {
        self.support.1 - self.support.0
    }

    pub fn table_depth(&self) -> u32 {
        self.table_depth
    }

    /// Spacing `2^-r` of the tabulated nodes.
    pub fn node_spacing(&self) -> f64 {
        (-(self.table_depth as f64)).exp2()
    }

    /// The dyadic table: `values()[m] = phi(a + m 2^-r)`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Table nodes paired with values, ascending.
    pub fn table(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let h = self.node_spacing();
        let a = self.support.0 as f64;
        self.values
            .iter()
            .enumerate()
            .map(move |(m, &v)| (a + m as f64 * h, v))
    }

    /// Evaluate `phi(x)`: exact on table nodes, interpolated between them,
    /// zero outside `[a, b)`.
    pub fn eval(&self, x: f64) -> f64 {
        let (a, b) = self.support;
        if !(x >= a as f64) || x >= b as f64 {
            return 0.0;
        }
        let t = (x - a as f64) * (self.table_depth as f64).exp2();
        let i = t.floor();
        let idx = i as usize;
        let frac = t - i;
        match self.interpolation {
            Interpolation::Step => self.values[idx],
            Interpolation::Linear => {
                if frac == 0.0 {
                    self.values[idx]
                } else {
                    self.values[idx] * (1.0 - frac) + self.values[idx + 1] * frac
                }
            }
        }
    }

    /// Tensor-product evaluation `prod_i phi(x_i)`.
    pub fn eval_tensor(&self, x: &[f64]) -> Result<f64> {
        if x.is_empty() {
            return Err(Error::domain(
                "tensor evaluation needs at least one coordinate",
            ));
        }
        Ok(x.iter().map(|&v| self.eval(v)).product())
    }

    /// Integers `k` for which `phi(t - k)` can be nonzero.
    pub fn shifts_covering(&self, t: f64) -> RangeInclusive<i64> {
        let (a, b) = self.support;
        let lo = (t - b as f64).floor() as i64 + 1;
        let hi = (t - a as f64).floor() as i64;
        lo..=hi
    }

    /// Integral of the table interpolant.
    pub fn integral(&self) -> f64 {
        let h = self.node_spacing();
        match self.interpolation {
            Interpolation::Step => self.values[..self.values.len() - 1].iter().sum::<f64>() * h,
            Interpolation::Linear => {
                let n = self.values.len();
                (self.values.iter().sum::<f64>() - 0.5 * (self.values[0] + self.values[n - 1])) * h
            }
        }
    }

    /// Gram entry `int phi(x) phi(x - k) dx` by the trapezoid rule on the
    /// table lattice.
    pub fn gram_entry(&self, k: i64) -> f64 {
        let (a, b) = self.support;
        let h = self.node_spacing();
        let per_unit = 1i64 << self.table_depth;
        let lo = a.max(a + k) * per_unit;
        let hi = b.min(b + k) * per_unit;
        if lo >= hi {
            return 0.0;
        }
        let f = |m: i64| {
            let x = m as f64 * h;
            self.eval(x) * self.eval(x - k as f64)
        };
        match self.interpolation {
            // right-continuous steps: left-endpoint sum is exact
            Interpolation::Step => (lo..hi).map(f).sum::<f64>() * h,
            Interpolation::Linear => ((lo..=hi).map(f).sum::<f64>() - 0.5 * (f(lo) + f(hi))) * h,
        }
    }

    /// Whether the table interpolant is piecewise linear (as opposed to a
    /// right-continuous step).
    pub fn is_piecewise_linear(&self) -> bool {
        self.interpolation == Interpolation::Linear
    }
}
