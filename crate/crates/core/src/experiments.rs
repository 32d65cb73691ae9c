//! Resolution schedules and the seeded Monte Carlo drivers for the two
//! uniform-deviation theorems.
//!
//! One replication index owns one random stream; the sample of size `n` is
//! the first `n` draws of that stream, so every record can be regenerated on
//! its own from `(base_seed, rep, n)`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{Family, ScalingFunction, DEFAULT_TABLE_DEPTH};
use crate::error::{Error, Result};
use crate::estimator::{
    expected_estimator, sup_deviation_with_expectation, EvaluationGrid, Normalization,
    WaveletDensityEstimator, DEFAULT_GRID_CAP,
};
use crate::grid::BoxRegion;
use crate::kernel::ProjectionKernel;
use crate::limit_sets::{theorem2_threshold, Theorem2Threshold};
use crate::sampling::{make_density, Density, Sample, SeedSpec};

/// The Theorem-2 exceedance threshold as a fraction of the limit-set margin.
pub const THRESHOLD_FRACTION: f64 = 0.25;
/// Environment variable capping worker threads (`0` = automatic).
pub const THREADS_ENV: &str = "WAVEDENS_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "regime")]
pub enum ResolutionSchedule {
    #[serde(rename = "CRS")]
    Crs { gamma: f64 },
    #[serde(rename = "ER")]
    Er { c: f64 },
}

impl ResolutionSchedule {
    pub fn regime(&self) -> &'static str {
        match self {
            Self::Crs { .. } => "CRS",
            Self::Er { .. } => "ER",
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Self::Crs { gamma } if !(gamma > 0.0 && gamma < 1.0) => Err(Error::config(format!(
                "CRS gamma must lie in (0, 1), got {gamma}"
            ))),
            Self::Er { c } if !(c > 0.0 && c.is_finite()) => {
                Err(Error::config(format!("ER c must be positive, got {c}")))
            }
            _ => Ok(()),
        }
    }
}

/// `j_n` for the schedule; ER levels below zero are clamped to 0.
pub fn schedule_level(schedule: &ResolutionSchedule, n: usize, dim: usize) -> u32 {
    let nf = n as f64;
    let d = dim as f64;
    match *schedule {
        ResolutionSchedule::Crs { gamma } => ((gamma * nf.log2() / d).floor() as i64).max(1) as u32,
        ResolutionSchedule::Er { c } => ((nf / (c * nf.ln())).log2() / d).round().max(0.0) as u32,
    }
}

/// `h_n = 2^{-d j}` and the realized `n h_n / ln n`.
pub fn realized_ratio(n: usize, dim: usize, level: u32) -> (f64, f64) {
    let h = (-((dim as u32 * level) as f64)).exp2();
    (h, n as f64 * h / (n as f64).ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GridSpec {
    Dyadic {
        #[serde(default = "default_cap")]
        cap: usize,
    },
    DyadicMidpoints {
        #[serde(default = "default_cap")]
        cap: usize,
    },
    Uniform {
        per_axis: usize,
    },
}

fn default_cap() -> usize {
    DEFAULT_GRID_CAP
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::Dyadic {
            cap: DEFAULT_GRID_CAP,
        }
    }
}

impl GridSpec {
    pub fn build(&self, region: &BoxRegion, level: u32) -> Result<EvaluationGrid> {
        match *self {
            GridSpec::Dyadic { cap } => EvaluationGrid::dyadic(region, level, cap),
            GridSpec::DyadicMidpoints { cap } => {
                EvaluationGrid::dyadic_with_midpoints(region, level, cap)
            }
            GridSpec::Uniform { per_axis } => EvaluationGrid::uniform(region, per_axis),
        }
    }
}

/// A Monte Carlo experiment, as read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub theorem: u8,
    pub density: String,
    pub dimension: usize,
    pub basis: String,
    /// The box `H` on which deviations are measured.
    pub h: BoxRegion,
    pub schedule: ResolutionSchedule,
    pub n_grid: Vec<usize>,
    pub replications: usize,
    pub base_seed: u64,
    #[serde(default)]
    pub grid: GridSpec,
    pub output: String,
    /// Theorem 2 only: a CRS schedule run on the largest `n` for contrast.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contrast: Option<ResolutionSchedule>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn family(&self) -> Result<Family> {
        self.basis.parse()
    }

    /// Checks every invariant without sampling.
    pub fn validate(&self) -> Result<()> {
        match (self.theorem, &self.schedule) {
            (1, ResolutionSchedule::Crs { .. }) | (2, ResolutionSchedule::Er { .. }) => {}
            (1 | 2, s) => {
                return Err(Error::config(format!(
                    "theorem {} cannot run the {} schedule",
                    self.theorem,
                    s.regime()
                )))
            }
            (t, _) => return Err(Error::config(format!("theorem must be 1 or 2, got {t}"))),
        }
        self.schedule.validate()?;
        match (&self.contrast, self.theorem) {
            (None, _) => {}
            (Some(s @ ResolutionSchedule::Crs { .. }), 2) => s.validate()?,
            (Some(_), 2) => return Err(Error::config("the contrast schedule must be CRS")),
            (Some(_), _) => return Err(Error::config("a contrast run only applies to theorem 2")),
        }
        self.family()?;
        if self.dimension == 0 {
            return Err(Error::config("dimension must be at least 1"));
        }
        let density = make_density(&self.density, self.dimension)?;
        let h = BoxRegion::new(self.h.lo.clone(), self.h.hi.clone())?;
        if h.dim() != self.dimension {
            return Err(Error::config("H and the dimension disagree"));
        }
        if !density.support().strictly_contains(&h) {
            return Err(Error::config(
                "H must lie strictly inside the support of the density",
            ));
        }
        if self.n_grid.is_empty() {
            return Err(Error::config("n_grid is empty"));
        }
        if self.n_grid.iter().any(|&n| n < 4) {
            return Err(Error::config("every n in n_grid must be at least 4"));
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::config("n_grid must be strictly increasing"));
        }
        if self.replications == 0 {
            return Err(Error::config("replications must be at least 1"));
        }
        if let GridSpec::Uniform { per_axis: 0 } = self.grid {
            return Err(Error::config("uniform grid needs per_axis >= 1"));
        }
        if self.output.is_empty() {
            return Err(Error::config("output path is empty"));
        }
        Ok(())
    }
}

/// One `(n, replication)` outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub theorem: u8,
    pub rep: usize,
    pub n: usize,
    pub j: u32,
    pub sup_dev: f64,
    pub inf_dev: f64,
    pub argmax: Vec<f64>,
    pub seed: u64,
    #[serde(skip)]
    pub wall_time: Duration,
}

#[derive(Debug, Clone, Serialize)]
pub struct Quantiles {
    pub min: f64,
    pub q10: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub q90: f64,
    pub max: f64,
}

impl Quantiles {
    pub fn of(values: &[f64]) -> Self {
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let q = |p: f64| quantile_sorted(&v, p);
        Self {
            min: v[0],
            q10: q(0.1),
            q25: q(0.25),
            median: q(0.5),
            q75: q(0.75),
            q90: q(0.9),
            max: v[v.len() - 1],
        }
    }
}

// linear interpolation between order statistics
fn quantile_sorted(v: &[f64], p: f64) -> f64 {
    let pos = p * (v.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 < v.len() {
        v[i] + frac * (v[i + 1] - v[i])
    } else {
        v[i]
    }
}

pub fn median(values: &[f64]) -> f64 {
    Quantiles::of(values).median
}

/// Kendall's tau-a.
pub fn kendall_tau(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mut s = 0.0;
    for a in 0..n {
        for b in a + 1..n {
            s += (values[b] - values[a]).signum();
        }
    }
    s / (n * (n - 1) / 2) as f64
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelSummary {
    pub n: usize,
    pub j: u32,
    pub h: f64,
    pub nh_over_ln_n: f64,
    pub grid_points: usize,
    pub sup_dev: Quantiles,
    pub inf_dev: Quantiles,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fraction_exceeding: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Predicate {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    pub detail: String,
}

impl Predicate {
    fn new(name: &str, pass: bool, value: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            pass,
            value,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ContrastSummary {
    pub schedule: ResolutionSchedule,
    pub n: usize,
    pub j: u32,
    pub nh_over_ln_n: f64,
    pub sup_dev: Quantiles,
    pub fraction_below: f64,
    #[serde(skip)]
    pub records: Vec<RunRecord>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub config: ExperimentConfig,
    pub log_convention: &'static str,
    pub per_n: Vec<LevelSummary>,
    /// Informational schedule diagnostics; not part of the pass verdict.
    pub schedule_checks: Vec<Predicate>,
    pub predicates: Vec<Predicate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub largest_n_range: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<ThresholdEcho>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub contrast: Option<ContrastSummary>,
    pub passed: bool,
}

/// The limit-set certificate behind the Theorem-2 threshold.
#[derive(Debug, Clone, Serialize)]
pub struct ThresholdEcho {
    pub epsilon: f64,
    pub fraction: f64,
    pub detail: Theorem2Threshold,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub records: Vec<RunRecord>,
    pub summary: Summary,
    pub wall_time: Duration,
}

impl ExperimentReport {
    pub fn passed(&self) -> bool {
        self.summary.passed
    }

    pub fn predicate(&self, name: &str) -> Option<&Predicate> {
        self.summary.predicates.iter().find(|p| p.name == name)
    }

    /// Records as CSV; every float at 17 significant digits.
    pub fn records_csv(&self) -> String {
        let mut out = String::from("theorem,n,j,rep,sup_dev,inf_dev,argmax,seed\n");
        let contrast = self.summary.contrast.iter().flat_map(|c| c.records.iter());
        for r in self.records.iter().chain(contrast) {
            let arg: Vec<String> = r.argmax.iter().map(|v| format!("{v:.16e}")).collect();
            out.push_str(&format!(
                "{},{},{},{},{:.16e},{:.16e},{},{}\n",
                r.theorem,
                r.n,
                r.j,
                r.rep,
                r.sup_dev,
                r.inf_dev,
                arg.join(";"),
                r.seed
            ));
        }
        out
    }

    pub fn summary_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.summary)?)
    }
}

/// Writes `records.csv` and `summary.json` into the directory `path`.
pub fn emit_report(report: &ExperimentReport, path: impl AsRef<Path>) -> Result<()> {
    let dir = path.as_ref();
    fs::create_dir_all(dir)?;
    fs::write(dir.join("records.csv"), report.records_csv())?;
    fs::write(dir.join("summary.json"), report.summary_json()? + "\n")?;
    Ok(())
}

/// A pool honouring [`THREADS_ENV`].
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => v.trim().parse::<usize>().map_err(|_| {
            Error::config(format!(
                "{THREADS_ENV} must be a nonnegative integer, got `{v}`"
            ))
        })?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::config(format!("cannot build thread pool: {e}")))
}

struct Setup {
    density: Density,
    basis: Arc<ScalingFunction>,
    region: BoxRegion,
}

fn setup(config: &ExperimentConfig) -> Result<Setup> {
    config.validate()?;
    let density = make_density(&config.density, config.dimension)?;
    let basis = Arc::new(config.family()?.build(DEFAULT_TABLE_DEPTH)?);
    let region = config.h.clone();
    Ok(Setup {
        density,
        basis,
        region,
    })
}

struct Level {
    n: usize,
    j: u32,
    grid: EvaluationGrid,
    expectation: Option<Vec<f64>>,
}

fn prepare_levels(
    setup: &Setup,
    config: &ExperimentConfig,
    schedule: &ResolutionSchedule,
    ns: &[usize],
    mode: Normalization,
) -> Result<Vec<Level>> {
    let mut cache: BTreeMap<u32, (EvaluationGrid, Option<Vec<f64>>)> = BTreeMap::new();
    let mut out = Vec::with_capacity(ns.len());
    for &n in ns {
        let j = schedule_level(schedule, n, config.dimension);
        if mode == Normalization::Theorem1 && j == 0 {
            return Err(Error::config(format!("schedule gives j = 0 at n = {n}")));
        }
        if !cache.contains_key(&j) {
            let grid = config.grid.build(&setup.region, j)?;
            let expectation = match mode {
                Normalization::Theorem1 => Some(
                    grid.points()
                        .par_iter()
                        .map(|x| expected_estimator(&setup.density, &setup.basis, j, x))
                        .collect::<Result<Vec<f64>>>()?,
                ),
                Normalization::Ratio => None,
            };
            cache.insert(j, (grid, expectation));
        }
        let (grid, expectation) = cache[&j].clone();
        out.push(Level {
            n,
            j,
            grid,
            expectation,
        });
    }
    Ok(out)
}

fn replicate(
    setup: &Setup,
    config: &ExperimentConfig,
    levels: &[Level],
    mode: Normalization,
) -> Result<Vec<RunRecord>> {
    let n_max = levels.iter().map(|l| l.n).max().unwrap_or(0);
    let per_rep: Vec<Vec<RunRecord>> = (0..config.replications)
        .into_par_iter()
        .map(|rep| {
            let seed = SeedSpec::new(config.base_seed, rep as u64);
            let full = setup.density.draw(seed, n_max);
            levels
                .iter()
                .map(|level| record(setup, config, level, mode, &full.prefix(level.n), rep))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    // order by (n, rep)
    let mut records = Vec::with_capacity(levels.len() * config.replications);
    for i in 0..levels.len() {
        for rep_records in &per_rep {
            records.push(rep_records[i].clone());
        }
    }
    Ok(records)
}

fn record(
    setup: &Setup,
    config: &ExperimentConfig,
    level: &Level,
    mode: Normalization,
    sample: &Sample,
    rep: usize,
) -> Result<RunRecord> {
    let start = Instant::now();
    let est = WaveletDensityEstimator::fit(setup.basis.clone(), level.j, sample)?;
    let stat = sup_deviation_with_expectation(
        &est,
        &setup.density,
        &level.grid,
        mode,
        level.expectation.as_deref(),
    )?;
    Ok(RunRecord {
        theorem: config.theorem,
        rep,
        n: level.n,
        j: level.j,
        sup_dev: stat.sup_dev,
        inf_dev: stat.inf_dev,
        argmax: stat.argmax,
        seed: config.base_seed,
        wall_time: start.elapsed(),
    })
}

/// Recomputes the record for `(n, rep)` from the config alone, drawing a
/// fresh sample of size `n` instead of a prefix.
pub fn regenerate_record(config: &ExperimentConfig, n: usize, rep: usize) -> Result<RunRecord> {
    let setup = setup(config)?;
    let mode = match config.theorem {
        1 => Normalization::Theorem1,
        _ => Normalization::Ratio,
    };
    let levels = prepare_levels(&setup, config, &config.schedule, &[n], mode)?;
    let sample = setup
        .density
        .draw(SeedSpec::new(config.base_seed, rep as u64), n);
    record(&setup, config, &levels[0], mode, &sample, rep)
}

fn column(records: &[RunRecord], n: usize, f: impl Fn(&RunRecord) -> f64) -> Vec<f64> {
    records.iter().filter(|r| r.n == n).map(f).collect()
}

fn level_summaries(
    config: &ExperimentConfig,
    levels: &[Level],
    records: &[RunRecord],
    eps: Option<f64>,
) -> Vec<LevelSummary> {
    levels
        .iter()
        .map(|l| {
            let (h, ratio) = realized_ratio(l.n, config.dimension, l.j);
            let sup = column(records, l.n, |r| r.sup_dev);
            let inf = column(records, l.n, |r| r.inf_dev);
            LevelSummary {
                n: l.n,
                j: l.j,
                h,
                nh_over_ln_n: ratio,
                grid_points: l.grid.len(),
                sup_dev: Quantiles::of(&sup),
                inf_dev: Quantiles::of(&inf),
                fraction_exceeding: eps
                    .map(|e| sup.iter().filter(|&&v| v >= e).count() as f64 / sup.len() as f64),
            }
        })
        .collect()
}

fn schedule_checks(schedule: &ResolutionSchedule, per_n: &[LevelSummary]) -> Vec<Predicate> {
    let ratios: Vec<f64> = per_n.iter().map(|l| l.nh_over_ln_n).collect();
    let detail = format!("{ratios:.4?}");
    match *schedule {
        ResolutionSchedule::Crs { .. } => {
            let h_down = per_n.windows(2).all(|w| w[1].h <= w[0].h);
            let nh_up = per_n
                .windows(2)
                .all(|w| w[1].n as f64 * w[1].h >= w[0].n as f64 * w[0].h);
            let strict = ratios.windows(2).all(|w| w[1] > w[0]);
            let net = ratios.len() < 2 || ratios[ratios.len() - 1] > ratios[0];
            vec![
                Predicate::new("crs_h_nonincreasing", h_down, 0.0, ""),
                Predicate::new("crs_nh_nondecreasing", nh_up, 0.0, ""),
                Predicate::new(
                    "crs_ratio_grows_over_grid",
                    net,
                    ratios.last().copied().unwrap_or(f64::NAN),
                    detail.clone(),
                ),
                Predicate::new("crs_ratio_strictly_increasing", strict, 0.0, detail),
            ]
        }
        ResolutionSchedule::Er { c } => {
            let inside = ratios.iter().all(|&r| r >= c / 2.0 && r <= 2.0 * c);
            vec![Predicate::new(
                "er_ratio_within_c_over_2_and_2c",
                inside,
                c,
                detail,
            )]
        }
    }
}

/// Theorem-1 Monte Carlo: centred, normalized sup/inf deviations under a CRS
/// schedule.
pub fn run_theorem1(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    let setup = setup(config)?;
    if config.theorem != 1 {
        return Err(Error::config("run_theorem1 needs theorem = 1"));
    }
    let mode = Normalization::Theorem1;
    let levels = prepare_levels(&setup, config, &config.schedule, &config.n_grid, mode)?;
    let records = replicate(&setup, config, &levels, mode)?;
    let per_n = level_summaries(config, &levels, &records, None);
    let checks = schedule_checks(&config.schedule, &per_n);

    let last = per_n.last().expect("n_grid is nonempty");
    let sup_med = last.sup_dev.median;
    let inf_med = last.inf_dev.median;
    let top: Vec<&LevelSummary> = per_n.iter().rev().take(3).rev().collect();
    let tau_sup = kendall_tau(&top.iter().map(|l| l.sup_dev.median).collect::<Vec<_>>());
    let tau_inf = kendall_tau(&top.iter().map(|l| -l.inf_dev.median).collect::<Vec<_>>());
    let predicates = vec![
        Predicate::new(
            "median_sup_dev_at_largest_n",
            (0.75..=1.25).contains(&sup_med),
            sup_med,
            "in [0.75, 1.25]",
        ),
        Predicate::new(
            "median_inf_dev_at_largest_n",
            (-1.25..=-0.75).contains(&inf_med),
            inf_med,
            "in [-1.25, -0.75]",
        ),
        Predicate::new(
            "sup_median_trend_top3",
            tau_sup >= 0.0,
            tau_sup,
            "Kendall tau of medians >= 0",
        ),
        Predicate::new(
            "inf_median_trend_top3",
            tau_inf >= 0.0,
            tau_inf,
            "Kendall tau of negated medians >= 0",
        ),
        Predicate::new(
            "symmetry_at_largest_n",
            (sup_med + inf_med).abs() <= 0.15,
            sup_med + inf_med,
            "|median sup + median inf| <= 0.15",
        ),
    ];
    let sup_all = column(&records, last.n, |r| r.sup_dev);
    let inf_all = column(&records, last.n, |r| r.inf_dev);
    let range = [
        inf_all.iter().copied().fold(f64::INFINITY, f64::min),
        sup_all.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    ];
    let passed = predicates.iter().all(|p| p.pass);
    Ok(ExperimentReport {
        records,
        summary: Summary {
            config: config.clone(),
            log_convention: "natural",
            per_n,
            schedule_checks: checks,
            predicates,
            largest_n_range: Some(range),
            threshold: None,
            contrast: None,
            passed,
        },
        wall_time: start.elapsed(),
    })
}

/// Grid step for the section behind the Theorem-2 threshold.
fn threshold_step(dim: usize) -> f64 {
    if dim == 1 {
        1.0 / 1024.0
    } else {
        1.0 / 32.0
    }
}

/// The limit-set margin `delta` and threshold `epsilon* = 0.25 delta` for a
/// Theorem-2 config, from the section at the lattice origin.
pub fn theorem2_epsilon(config: &ExperimentConfig) -> Result<(f64, Theorem2Threshold)> {
    let c = match config.schedule {
        ResolutionSchedule::Er { c } => c,
        ResolutionSchedule::Crs { .. } => {
            return Err(Error::config("theorem 2 needs an ER schedule"))
        }
    };
    let density = make_density(&config.density, config.dimension)?;
    let basis = Arc::new(config.family()?.build(DEFAULT_TABLE_DEPTH)?);
    let kernel = ProjectionKernel::new(basis, config.dimension)?;
    let lk = kernel.localize(
        0,
        &vec![0.0; config.dimension],
        threshold_step(config.dimension),
    )?;
    let t = theorem2_threshold(&density, &config.h, c, &lk)?;
    Ok((THRESHOLD_FRACTION * t.delta, t))
}

/// Theorem-2 Monte Carlo: sup relative deviations under an ER schedule, and
/// optionally a CRS contrast at the largest `n`.
pub fn run_theorem2(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    let setup = setup(config)?;
    if config.theorem != 2 {
        return Err(Error::config("run_theorem2 needs theorem = 2"));
    }
    let (eps, threshold) = theorem2_epsilon(config)?;
    let mode = Normalization::Ratio;
    let levels = prepare_levels(&setup, config, &config.schedule, &config.n_grid, mode)?;
    let records = replicate(&setup, config, &levels, mode)?;
    let per_n = level_summaries(config, &levels, &records, Some(eps));
    let checks = schedule_checks(&config.schedule, &per_n);

    let min_fraction = per_n
        .iter()
        .filter_map(|l| l.fraction_exceeding)
        .fold(f64::INFINITY, f64::min);
    let mut predicates = vec![Predicate::new(
        "min_fraction_exceeding",
        min_fraction >= 0.9,
        min_fraction,
        format!("min over n of P(sup |fhat/f - 1| >= {eps}) >= 0.9"),
    )];

    let contrast = match config.contrast {
        Some(schedule) => {
            let n = *config.n_grid.last().expect("n_grid is nonempty");
            let levels = prepare_levels(&setup, config, &schedule, &[n], mode)?;
            let records = replicate(&setup, config, &levels, mode)?;
            let sup = column(&records, n, |r| r.sup_dev);
            let below = sup.iter().filter(|&&v| v < eps).count() as f64 / sup.len() as f64;
            predicates.push(Predicate::new(
                "contrast_fraction_below",
                below >= 0.9,
                below,
                format!("CRS at n = {n}: P(sup |fhat/f - 1| < {eps}) >= 0.9"),
            ));
            let j = levels[0].j;
            Some(ContrastSummary {
                schedule,
                n,
                j,
                nh_over_ln_n: realized_ratio(n, config.dimension, j).1,
                sup_dev: Quantiles::of(&sup),
                fraction_below: below,
                records,
            })
        }
        None => None,
    };

    let passed = predicates.iter().all(|p| p.pass);
    Ok(ExperimentReport {
        records,
        summary: Summary {
            config: config.clone(),
            log_convention: "natural",
            per_n,
            schedule_checks: checks,
            predicates,
            largest_n_range: None,
            threshold: Some(ThresholdEcho {
                epsilon: eps,
                fraction: THRESHOLD_FRACTION,
                detail: threshold,
            }),
            contrast,
            passed,
        },
        wall_time: start.elapsed(),
    })
}

/// Dispatches on `config.theorem` inside a pool honouring [`THREADS_ENV`].
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let pool = thread_pool()?;
    pool.install(|| match config.theorem {
        1 => run_theorem1(config),
        2 => run_theorem2(config),
        t => Err(Error::config(format!("theorem must be 1 or 2, got {t}"))),
    })
}
