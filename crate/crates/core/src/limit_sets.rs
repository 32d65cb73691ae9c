//! Strassen-type and Poisson-type limit sets, described through cell
//! densities `gdot` on the localized kernel's grid, and the extremal values of
//! the kernel functional over them.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{unravel, BoxGrid, BoxRegion};
use crate::increments::{theta, IncrementFunction};
use crate::kernel::LocalizedKernel;
use crate::sampling::Density;

/// `t ln t - t + 1` on `t > 0`, `1` at zero, `+inf` for negative `t`.
pub fn h_poisson(t: f64) -> f64 {
    if t > 0.0 {
        t * t.ln() - t + 1.0
    } else if t == 0.0 {
        1.0
    } else {
        f64::INFINITY
    }
}

// h(exp(u)) without forming exp(u) twice
fn h_of_exp(u: f64) -> f64 {
    let e = u.exp();
    e * (u - 1.0) + 1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LimitSetKind {
    Strassen,
    Gamma,
}

/// A limit set on a grid over the domain box.
#[derive(Debug, Clone, Serialize)]
pub struct LimitSetSpec {
    pub kind: LimitSetKind,
    pub v: Option<f64>,
    pub domain: BoxGrid,
}

impl LimitSetSpec {
    pub fn strassen(domain: BoxGrid) -> Self {
        Self {
            kind: LimitSetKind::Strassen,
            v: None,
            domain,
        }
    }

    pub fn gamma(domain: BoxGrid, v: f64) -> Result<Self> {
        if !(v > 0.0) {
            return Err(Error::domain("v must be positive"));
        }
        Ok(Self {
            kind: LimitSetKind::Gamma,
            v: Some(v),
            domain,
        })
    }

    /// Value of the defining functional at a cell density.
    pub fn cost(&self, gdot: &[f64]) -> f64 {
        let vol = self.domain.cell_volume();
        match self.kind {
            LimitSetKind::Strassen => gdot.iter().map(|g| g * g).sum::<f64>() * vol,
            LimitSetKind::Gamma => gdot.iter().map(|&g| h_poisson(g)).sum::<f64>() * vol,
        }
    }

    pub fn budget(&self) -> f64 {
        match self.kind {
            LimitSetKind::Strassen => 1.0,
            LimitSetKind::Gamma => 1.0 / self.v.unwrap_or(f64::INFINITY),
        }
    }

    pub fn contains(&self, gdot: &[f64], tol: f64) -> bool {
        gdot.len() == self.domain.n_cells() && self.cost(gdot) <= self.budget() + tol
    }
}

/// The maximizer of the normalized functional over the Strassen set.
#[derive(Debug, Clone)]
pub struct StrassenExtremal {
    pub value: f64,
    pub gdot: Vec<f64>,
    pub function: IncrementFunction,
}

/// `gdot* = K~ / ||K~||_2` (cell averages), whose functional value is 1 up to
/// discretization; `-gdot*` attains `-1`.
pub fn strassen_extremal(lk: &LocalizedKernel) -> Result<StrassenExtremal> {
    let grid = lk.grid();
    let vol = grid.cell_volume();
    let norm = (lk.cell_means().iter().map(|k| k * k).sum::<f64>() * vol).sqrt();
    if !(norm > 0.0) || !(lk.sigma() > 0.0) {
        return Err(Error::numerical(
            "the localized kernel vanishes on its grid",
        ));
    }
    let gdot: Vec<f64> = lk.cell_means().iter().map(|k| k / norm).collect();
    let function = IncrementFunction::from_cell_density(grid, &gdot)?;
    let value = theta(lk, &function, true)?;
    Ok(StrassenExtremal {
        value,
        gdot,
        function,
    })
}

pub const DEFAULT_DISTANCE_BUDGET: usize = 5000;

#[derive(Debug, Clone, Serialize)]
pub struct StrassenDistance {
    pub distance: f64,
    pub iterations: usize,
    pub warning: Option<String>,
    #[serde(skip)]
    pub gdot: Vec<f64>,
}

/// Sup-norm distance from `g` to the discretized Strassen set, by projected
/// subgradient descent over cell densities in the unit L2 ball.
pub fn strassen_distance(g: &IncrementFunction) -> StrassenDistance {
    strassen_distance_with_budget(g, DEFAULT_DISTANCE_BUDGET)
}

pub fn strassen_distance_with_budget(g: &IncrementFunction, budget: usize) -> StrassenDistance {
    let grid = g.grid();
    let vol = grid.cell_volume();
    let target = g.values();
    let l2 = |x: &[f64]| (x.iter().map(|v| v * v).sum::<f64>() * vol).sqrt();
    let project = |x: &mut [f64]| {
        let n = l2(x);
        if n > 1.0 {
            x.iter_mut().for_each(|v| *v /= n);
        }
    };
    let objective = |x: &[f64]| -> (f64, usize, f64) {
        let member = grid.upper_orthant_sums(&x.iter().map(|v| v * vol).collect::<Vec<_>>());
        let mut best = (0.0, 0, 0.0);
        for (i, (a, b)) in target.iter().zip(&member).enumerate() {
            let r = a - b;
            if r.abs() > best.0 {
                best = (r.abs(), i, r.signum());
            }
        }
        best
    };

    let mut x = g.cell_density();
    project(&mut x);
    let (mut value, mut node, mut sign) = objective(&x);
    let mut best = value;
    let mut best_x = x.clone();
    let mut best_at_tail = f64::INFINITY;
    let tail_start = budget - budget / 10;
    let node_shape: Vec<usize> = grid.cells_per_axis().iter().map(|c| c + 1).collect();
    let cells = grid.cells_per_axis().to_vec();
    let mut iterations = 0;
    for k in 0..budget {
        if k == tail_start {
            best_at_tail = best;
        }
        if value == 0.0 {
            break;
        }
        iterations = k + 1;
        // the subgradient of |g(s*) - G(s*)| is the indicator of the cells above s*
        let corner = unravel(node, &node_shape);
        let above: Vec<usize> = (0..x.len())
            .filter(|&c| unravel(c, &cells).iter().zip(&corner).all(|(a, b)| a >= b))
            .collect();
        if above.is_empty() {
            break;
        }
        let step = 0.5 / ((k + 1) as f64).sqrt() / (above.len() as f64 * vol).sqrt();
        for &c in &above {
            x[c] += sign * step;
        }
        project(&mut x);
        (value, node, sign) = objective(&x);
        if value < best {
            best = value;
            best_x.clone_from(&x);
        }
    }
    let warning = (best_at_tail.is_finite() && best_at_tail - best > 1e-3).then(|| {
        format!(
            "not converged: objective improved by {:.3e} over the last 10% of {budget} iterations",
            best_at_tail - best
        )
    });
    StrassenDistance {
        distance: best,
        iterations,
        warning,
        gdot: best_x,
    }
}

/// One endpoint of the interval and the cell density attaining it.
#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    pub eta: f64,
    pub objective: f64,
    pub cost: f64,
    /// `exp(+-K~/eta)` on the cells, or zero where the boundary `h(0) = 1` is hit.
    pub rule: String,
    #[serde(skip)]
    pub gdot: Vec<f64>,
}

/// `J = {int K~ gdot : int h(gdot) <= 1/v}` with its certified endpoints.
#[derive(Debug, Clone, Serialize)]
pub struct IntervalJ {
    pub lo: f64,
    pub hi: f64,
    pub v: f64,
    pub eta_lo: f64,
    pub eta_hi: f64,
    pub lo_certificate: Certificate,
    pub hi_certificate: Certificate,
}

impl IntervalJ {
    pub fn contains(&self, t: f64) -> bool {
        self.lo <= t && t <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// `(s, K~ cell mean, gdot_lo, gdot_hi)` rows, one per cell.
    pub fn certificate_csv(&self, lk: &LocalizedKernel) -> String {
        let grid = lk.grid();
        let mut out = String::new();
        let d = grid.dim();
        let head: Vec<String> = (0..d).map(|i| format!("s{i}")).collect();
        out.push_str(&format!("{},kernel,gdot_lo,gdot_hi\n", head.join(",")));
        for c in 0..grid.n_cells() {
            let s: Vec<String> = grid
                .cell_lower(c)
                .iter()
                .map(|v| format!("{v:.17e}"))
                .collect();
            out.push_str(&format!(
                "{},{:.17e},{:.17e},{:.17e}\n",
                s.join(","),
                lk.cell_means()[c],
                self.lo_certificate.gdot[c],
                self.hi_certificate.gdot[c]
            ));
        }
        out
    }
}

const BISECTION_STEPS: usize = 400;

struct Dual<'a> {
    means: &'a [f64],
    vol: f64,
    sign: f64,
}

impl Dual<'_> {
    fn cost(&self, eta: f64) -> f64 {
        self.means
            .iter()
            .map(|&k| h_of_exp(self.sign * k / eta))
            .sum::<f64>()
            * self.vol
    }

    fn density(&self, eta: f64) -> Vec<f64> {
        self.means
            .iter()
            .map(|&k| (self.sign * k / eta).exp())
            .collect()
    }

    /// `eta` with `cost(eta) = budget`; the cost decreases in `eta`.
    fn solve(&self, budget: f64) -> Result<f64> {
        let mut lo = 1.0;
        let mut hi = 1.0;
        let mut guard = 0;
        while !(self.cost(lo) > budget) {
            lo *= 0.5;
            guard += 1;
            if guard > 2000 {
                return Err(Error::numerical(
                    "dual bisection failed to bracket from below",
                ));
            }
        }
        guard = 0;
        while !(self.cost(hi) <= budget) {
            hi *= 2.0;
            guard += 1;
            if guard > 2000 {
                return Err(Error::numerical(
                    "dual bisection failed to bracket from above",
                ));
            }
        }
        for _ in 0..BISECTION_STEPS {
            let mid = (lo * hi).sqrt();
            if mid <= lo || mid >= hi {
                break;
            }
            if self.cost(mid) > budget {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(hi)
    }
}

fn certificate(means: &[f64], vol: f64, gdot: Vec<f64>, eta: f64, rule: &str) -> Certificate {
    let objective = means.iter().zip(&gdot).map(|(k, g)| k * g).sum::<f64>() * vol;
    let cost = gdot.iter().map(|&g| h_poisson(g)).sum::<f64>() * vol;
    Certificate {
        eta,
        objective,
        cost,
        rule: rule.to_string(),
        gdot,
    }
}

/// Endpoints of the kernel functional over the Poisson set with parameter `v`.
///
/// Each endpoint comes from a one-dimensional dual: the pointwise optimizer of
/// `+-K~ gdot - eta h(gdot)` is `exp(+-K~/eta)`, and `eta` is tuned until the
/// constraint binds. Cells where `K~` vanishes get `gdot = 1` at zero cost.
/// If the kernel is nonnegative and its support is cheap enough to switch
/// off entirely, the lower endpoint is the boundary value 0.
/// `v = inf` returns the degenerate interval at `int K~`.
pub fn gamma_interval(lk: &LocalizedKernel, v: f64) -> Result<IntervalJ> {
    if !(v > 0.0) {
        return Err(Error::domain("v must be positive"));
    }
    let means = lk.cell_means();
    let vol = lk.grid().cell_volume();
    if v.is_infinite() {
        let ones = vec![1.0; means.len()];
        let c = certificate(means, vol, ones, f64::INFINITY, "exp(0)");
        return Ok(IntervalJ {
            lo: c.objective,
            hi: c.objective,
            v,
            eta_lo: f64::INFINITY,
            eta_hi: f64::INFINITY,
            lo_certificate: c.clone(),
            hi_certificate: c,
        });
    }
    let budget = 1.0 / v;

    let upper = Dual {
        means,
        vol,
        sign: 1.0,
    };
    let eta_hi = upper.solve(budget)?;
    let hi_certificate = certificate(means, vol, upper.density(eta_hi), eta_hi, "exp(K/eta)");

    let any_negative = means.iter().any(|&k| k < 0.0);
    let support = means.iter().filter(|&&k| k > 0.0).count() as f64 * vol;
    let (eta_lo, lo_certificate) = if !any_negative && support <= budget {
        let gdot: Vec<f64> = means
            .iter()
            .map(|&k| if k > 0.0 { 0.0 } else { 1.0 })
            .collect();
        (0.0, certificate(means, vol, gdot, 0.0, "0 on the support"))
    } else {
        let lower = Dual {
            means,
            vol,
            sign: -1.0,
        };
        let eta = lower.solve(budget)?;
        (
            eta,
            certificate(means, vol, lower.density(eta), eta, "exp(-K/eta)"),
        )
    };

    Ok(IntervalJ {
        lo: lo_certificate.objective,
        hi: hi_certificate.objective,
        v,
        eta_lo,
        eta_hi,
        lo_certificate,
        hi_certificate,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Theorem2Threshold {
    pub delta: f64,
    pub v: f64,
    pub x0: Vec<f64>,
    pub f_x0: f64,
    pub interval: IntervalJ,
}

/// `delta = min(hi - 1, 1 - lo)` for `v = c sup_H f`.
pub fn theorem2_threshold(
    density: &Density,
    h: &BoxRegion,
    c: f64,
    lk: &LocalizedKernel,
) -> Result<Theorem2Threshold> {
    if !(c > 0.0) {
        return Err(Error::domain("c must be positive"));
    }
    let (f_x0, x0) = density.sup_on(h);
    let v = c * f_x0;
    let interval = gamma_interval(lk, v)?;
    let delta = (interval.hi - 1.0).min(1.0 - interval.lo);
    Ok(Theorem2Threshold {
        delta,
        v,
        x0,
        f_x0,
        interval,
    })
}
