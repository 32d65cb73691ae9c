//! Target densities on `[0,1]^d` with analytic evaluation and exact samplers,
//! plus the seeding contract for replications.
//!
//! Every shipped density is a finite mixture of product densities, which
//! makes box probabilities and the expected estimator reducible to
//! one-dimensional integrals.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;

use crate::error::{Error, Result};
use crate::grid::BoxRegion;

const MIX_MEANS: [f64; 2] = [0.3, 0.7];
const MIX_SD: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityKind {
    Uniform01,
    CosineBump,
    TruncGaussMix,
}

impl FromStr for DensityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform01" => Ok(Self::Uniform01),
            "cosine_bump" => Ok(Self::CosineBump),
            "trunc_gauss_mix" => Ok(Self::TruncGaussMix),
            other => Err(Error::config(format!("unknown density `{other}`"))),
        }
    }
}

impl fmt::Display for DensityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Uniform01 => "uniform01",
            Self::CosineBump => "cosine_bump",
            Self::TruncGaussMix => "trunc_gauss_mix",
        })
    }
}

/// A univariate density on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Factor {
    Uniform,
    /// `1 + 0.5 cos(2 pi x)`.
    CosineBump,
    /// Normal(mean, sd) conditioned on `[0, 1]`.
    TruncNormal {
        mean: f64,
        sd: f64,
        mass: f64,
    },
}

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * (1.0 + erf(z / std::f64::consts::SQRT_2))
}

impl Factor {
    fn trunc_normal(mean: f64, sd: f64) -> Self {
        let mass = std_normal_cdf((1.0 - mean) / sd) - std_normal_cdf(-mean / sd);
        Factor::TruncNormal { mean, sd, mass }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if !(0.0..=1.0).contains(&x) {
            return 0.0;
        }
        match *self {
            Factor::Uniform => 1.0,
            Factor::CosineBump => 1.0 + 0.5 * (2.0 * PI * x).cos(),
            Factor::TruncNormal { mean, sd, mass } => {
                let z = (x - mean) / sd;
                (-0.5 * z * z).exp() / (sd * (2.0 * PI).sqrt() * mass)
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        match *self {
            Factor::Uniform => x,
            Factor::CosineBump => x + (2.0 * PI * x).sin() / (4.0 * PI),
            Factor::TruncNormal { mean, sd, mass } => {
                (std_normal_cdf((x - mean) / sd) - std_normal_cdf(-mean / sd)) / mass
            }
        }
    }

    /// `P(a <= X <= b)`.
    pub fn interval_prob(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        self.cdf(b) - self.cdf(a)
    }

    /// Maximum of the pdf over `[a, b] ∩ [0, 1]` and a maximizer.
    fn sup_on(&self, a: f64, b: f64) -> (f64, f64) {
        let (a, b) = (a.max(0.0), b.min(1.0));
        let candidates: Vec<f64> = match *self {
            Factor::Uniform => vec![a],
            Factor::CosineBump => {
                let mut c = vec![a, b];
                let k = a.ceil();
                if k <= b {
                    c.push(k);
                }
                c
            }
            Factor::TruncNormal { mean, .. } => vec![a, b, mean.clamp(a, b)],
        };
        candidates
            .into_iter()
            .map(|x| (self.pdf(x), x))
            .fold(
                (f64::NEG_INFINITY, a),
                |best, c| if c.0 > best.0 { c } else { best },
            )
    }

    fn inverse_cdf(&self, u: f64) -> f64 {
        match *self {
            Factor::Uniform => u,
            _ => {
                let (mut lo, mut hi) = (0.0f64, 1.0f64);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if self.cdf(mid) < u {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            }
        }
    }
}

/// One weighted product term `w * prod_i f_i(x_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparableTerm {
    pub weight: f64,
    pub factors: Vec<Factor>,
}

/// A density on `R^d` supported in `[0,1]^d`.
#[derive(Debug, Clone)]
pub struct Density {
    kind: DensityKind,
    dim: usize,
    terms: Vec<SeparableTerm>,
}

/// `n` points of `R^d`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    dim: usize,
    coords: Vec<f64>,
}

impl Sample {
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 || coords.len() % dim != 0 {
            return Err(Error::domain("sample coordinates do not form whole points"));
        }
        Ok(Self { dim, coords })
    }

    pub fn from_points(points: &[Vec<f64>]) -> Result<Self> {
        let dim = points.first().map(|p| p.len()).unwrap_or(1);
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::domain("sample points have mixed dimensions"));
        }
        Self::new(dim, points.concat())
    }

    /// A univariate sample.
    pub fn from_scalars(values: &[f64]) -> Self {
        Self {
            dim: 1,
            coords: values.to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// The first `n` points.
    pub fn prefix(&self, n: usize) -> Sample {
        Sample {
            dim: self.dim,
            coords: self.coords[..n.min(self.len()) * self.dim].to_vec(),
        }
    }
}

/// Identifies one replication's random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedSpec {
    pub base_seed: u64,
    pub replication_index: u64,
}

impl SeedSpec {
    pub fn new(base_seed: u64, replication_index: u64) -> Self {
        Self {
            base_seed,
            replication_index,
        }
    }

    /// ChaCha20 keyed by the base seed, with the replication index as the
    /// stream id. Streams are addressable directly, without generating the
    /// preceding ones.
    pub fn rng(&self) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.base_seed);
        rng.set_stream(self.replication_index);
        rng
    }
}

/// Builds one of the shipped densities.
pub fn make_density(name: &str, dim: usize) -> Result<Density> {
    Density::new(name.parse()?, dim)
}

impl Density {
    pub fn new(kind: DensityKind, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::config("density dimension must be at least 1"));
        }
        let terms = match kind {
            DensityKind::Uniform01 => vec![SeparableTerm {
                weight: 1.0,
                factors: vec![Factor::Uniform; dim],
            }],
            DensityKind::CosineBump => {
                vec![SeparableTerm {
                    weight: 1.0,
                    factors: vec![Factor::CosineBump; dim],
                }]
            }
            DensityKind::TruncGaussMix => {
                let comps: Vec<Factor> = MIX_MEANS
                    .iter()
                    .map(|&m| Factor::trunc_normal(m, MIX_SD))
                    .collect();
                let masses: Vec<f64> = comps
                    .iter()
                    .map(|c| match c {
                        Factor::TruncNormal { mass, .. } => mass.powi(dim as i32),
                        _ => unreachable!(),
                    })
                    .collect();
                let total: f64 = masses.iter().sum();
                comps
                    .into_iter()
                    .zip(masses)
                    .map(|(c, m)| SeparableTerm {
                        weight: m / total,
                        factors: vec![c; dim],
                    })
                    .collect()
            }
        };
        let density = Self { kind, dim, terms };
        let mass = density.total_mass_by_quadrature();
        if (mass - 1.0).abs() > 1e-8 {
            return Err(Error::numerical(format!(
                "density `{kind}` integrates to {mass}"
            )));
        }
        Ok(density)
    }

    fn total_mass_by_quadrature(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                t.weight
                    * t.factors
                        .iter()
                        .map(|f| gauss_legendre_on(|x| f.pdf(x), 0.0, 1.0, 256))
                        .product::<f64>()
            })
            .sum()
    }

    pub fn kind(&self) -> DensityKind {
        self.kind
    }

    pub fn name(&self) -> String {
        self.kind.to_string()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[SeparableTerm] {
        &self.terms
    }

    pub fn support(&self) -> BoxRegion {
        BoxRegion {
            lo: vec![0.0; self.dim],
            hi: vec![1.0; self.dim],
        }
    }

    pub fn pdf(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                t.weight
                    * t.factors
                        .iter()
                        .zip(x)
                        .map(|(f, &v)| f.pdf(v))
                        .product::<f64>()
            })
            .sum()
    }

    /// `P(X in [lo, hi])`, exact through the per-axis distribution functions.
    pub fn box_prob(&self, lo: &[f64], hi: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                t.weight
                    * t.factors
                        .iter()
                        .zip(lo.iter().zip(hi))
                        .map(|(f, (&a, &b))| f.interval_prob(a, b))
                        .product::<f64>()
            })
            .sum()
    }

    /// `f(x0) = sup{f(x) : x in H}` together with `x0`.
    pub fn sup_on(&self, h: &BoxRegion) -> (f64, Vec<f64>) {
        if self.terms.len() == 1 {
            let t = &self.terms[0];
            let mut value = t.weight;
            let mut arg = Vec::with_capacity(self.dim);
            for (f, (&a, &b)) in t.factors.iter().zip(h.lo.iter().zip(&h.hi)) {
                let (v, x) = f.sup_on(a, b);
                value *= v;
                arg.push(x);
            }
            return (value, arg);
        }
        self.sup_by_search(h)
    }

    fn sup_by_search(&self, h: &BoxRegion) -> (f64, Vec<f64>) {
        let per_axis = match self.dim {
            1 => 2049,
            2 => 129,
            3 => 33,
            _ => 9,
        };
        let mut best = (f64::NEG_INFINITY, h.lo.clone());
        let total = (per_axis as usize).pow(self.dim as u32);
        let mut x = vec![0.0; self.dim];
        for idx in 0..total {
            let mut rem = idx;
            for i in 0..self.dim {
                let m = rem % per_axis;
                rem /= per_axis;
                x[i] = h.lo[i] + (h.hi[i] - h.lo[i]) * m as f64 / (per_axis - 1) as f64;
            }
            let v = self.pdf(&x);
            if v > best.0 {
                best = (v, x.clone());
            }
        }
        // compass search around the best lattice point
        let mut step: Vec<f64> = (0..self.dim)
            .map(|i| (h.hi[i] - h.lo[i]) / (per_axis - 1) as f64)
            .collect();
        let (mut value, mut arg) = best;
        for _ in 0..200 {
            let mut improved = false;
            for i in 0..self.dim {
                for dir in [-1.0, 1.0] {
                    let mut cand = arg.clone();
                    cand[i] = (cand[i] + dir * step[i]).clamp(h.lo[i], h.hi[i]);
                    let v = self.pdf(&cand);
                    if v > value {
                        value = v;
                        arg = cand;
                        improved = true;
                    }
                }
            }
            if !improved {
                step.iter_mut().for_each(|s| *s *= 0.5);
            }
        }
        (value, arg)
    }

    /// `n` i.i.d. draws from the stream of `seed`. Draws consume the stream
    /// sequentially, so a smaller `n` yields a prefix of a larger one.
    pub fn draw(&self, seed: SeedSpec, n: usize) -> Sample {
        let mut rng = seed.rng();
        let mut coords = Vec::with_capacity(n * self.dim);
        match self.kind {
            DensityKind::Uniform01 => {
                for _ in 0..n * self.dim {
                    coords.push(rng.random::<f64>());
                }
            }
            DensityKind::CosineBump => {
                let f = Factor::CosineBump;
                for _ in 0..n * self.dim {
                    coords.push(f.inverse_cdf(rng.random::<f64>()));
                }
            }
            DensityKind::TruncGaussMix => {
                let mut point = vec![0.0; self.dim];
                while coords.len() < n * self.dim {
                    let mean = if rng.random::<bool>() {
                        MIX_MEANS[1]
                    } else {
                        MIX_MEANS[0]
                    };
                    for v in point.iter_mut() {
                        let z: f64 = rng.sample(StandardNormal);
                        *v = mean + MIX_SD * z;
                    }
                    if point.iter().all(|v| (0.0..=1.0).contains(v)) {
                        coords.extend_from_slice(&point);
                    }
                }
            }
        }
        Sample {
            dim: self.dim,
            coords,
        }
    }
}

/// Composite 5-point Gauss-Legendre rule on `[a, b]` with `pieces` panels.
pub fn gauss_legendre_on(f: impl Fn(f64) -> f64, a: f64, b: f64, pieces: usize) -> f64 {
    let h = (b - a) / pieces as f64;
    (0..pieces)
        .map(|p| {
            let lo = a + p as f64 * h;
            gl5(&f, lo, lo + h)
        })
        .sum()
}

const GL5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GL5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_47,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_47,
    0.236_926_885_056_189_1,
];

pub(crate) fn gl5(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    GL5_NODES
        .iter()
        .zip(GL5_WEIGHTS)
        .map(|(t, w)| w * f(mid + half * t))
        .sum::<f64>()
        * half
}
