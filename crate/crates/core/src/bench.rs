//! Simulation harness: power, confounded false detections, runtime
//! scaling and empirical FWER, each emitting CSV.
//!
//! Repetition `r` of every sweep point uses seed `seed_base + r`, so all
//! sweep points and methods see common random numbers. Repetitions run in
//! parallel except in [`runtime_experiment`], which is sequential so the
//! timings do not compete for cores.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use rayon::prelude::*;

use crate::baselines::{run_method, Method, MethodParams, MethodResult};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::interval::{filter_overlaps, Interval};
use crate::synth::{gen_confounded, gen_standard, permute_labels_within_categories, ConfoundSpec, GenSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVar {
    PCase,
    Len,
    N,
    K,
    RhoCon,
}

impl SweepVar {
    pub fn name(self) -> &'static str {
        match self {
            SweepVar::PCase => "p_case",
            SweepVar::Len => "len",
            SweepVar::N => "n",
            SweepVar::K => "k",
            SweepVar::RhoCon => "rho_con",
        }
    }
}

impl fmt::Display for SweepVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepVar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [SweepVar::PCase, SweepVar::Len, SweepVar::N, SweepVar::K, SweepVar::RhoCon]
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown sweep variable {s:?}")))
    }
}

fn as_count(var: SweepVar, value: f64) -> Result<usize> {
    if value >= 1.0 && value.fract() == 0.0 {
        Ok(value as usize)
    } else {
        Err(Error::InvalidParameter(format!("{var} = {value} must be a positive integer")))
    }
}

fn unsupported(var: SweepVar) -> Error {
    Error::InvalidParameter(format!("sweep over {var} not supported for this scenario"))
}

/// A seeded dataset generator with a planted target.
pub trait Scenario: Clone + Send + Sync {
    fn with_sweep(&self, var: SweepVar, value: f64) -> Result<Self>;
    fn with_seed(&self, seed: u64) -> Self;
    fn generate(&self) -> Result<Dataset>;
    /// Windows whose detection is counted.
    fn targets(&self) -> Vec<Interval>;
}

impl Scenario for GenSpec {
    fn with_sweep(&self, var: SweepVar, value: f64) -> Result<Self> {
        let mut s = self.clone();
        match var {
            SweepVar::PCase => s.p_case = value,
            SweepVar::Len => s.len = as_count(var, value)?,
            SweepVar::N => s.n = as_count(var, value)?,
            SweepVar::K => s.k = as_count(var, value)?,
            SweepVar::RhoCon => return Err(unsupported(var)),
        }
        s.validate()?;
        Ok(s)
    }

    fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    fn generate(&self) -> Result<Dataset> {
        gen_standard(self)
    }

    fn targets(&self) -> Vec<Interval> {
        self.plants.clone()
    }
}

impl Scenario for ConfoundSpec {
    fn with_sweep(&self, var: SweepVar, value: f64) -> Result<Self> {
        let mut s = self.clone();
        match var {
            SweepVar::PCase => s.p_case = value,
            SweepVar::Len => s.len = as_count(var, value)?,
            SweepVar::N => s.n = as_count(var, value)?,
            SweepVar::RhoCon => s.rho_con = value,
            SweepVar::K => return Err(unsupported(var)),
        }
        s.validate()?;
        Ok(s)
    }

    fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    fn generate(&self) -> Result<Dataset> {
        gen_confounded(self)
    }

    fn targets(&self) -> Vec<Interval> {
        vec![self.confounded]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentGrid<S> {
    pub repetitions: usize,
    pub sweep: SweepVar,
    pub values: Vec<f64>,
    pub base: S,
    pub methods: Vec<Method>,
    pub params: MethodParams,
    pub seed_base: u64,
}

impl<S: Scenario> ExperimentGrid<S> {
    fn points(&self) -> Result<Vec<S>> {
        if self.repetitions == 0 {
            return Err(Error::InvalidParameter("repetitions must be at least 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidParameter("no methods selected".into()));
        }
        self.params.validate()?;
        self.values.iter().map(|&v| self.base.with_sweep(self.sweep, v)).collect()
    }
}

/// Desk-scale planted-signal sizes: n = 200, L = 1000, K = 2, p1 = 0.2 and
/// one window of length 5 at position 250.
pub fn desk_gen_spec() -> GenSpec {
    GenSpec {
        n: 200,
        len: 1000,
        k: 2,
        p1: 0.2,
        p_case: 0.5,
        plants: vec![Interval::new(250, 5)],
        seed: 0,
    }
}

/// Desk-scale confounded sizes on the same grid, with `p_eps = 0.1`.
pub fn desk_confound_spec() -> ConfoundSpec {
    ConfoundSpec {
        n: 200,
        len: 1000,
        p1: 0.2,
        rho_sig: 0.0,
        rho_con: 0.8,
        p_eps: 0.1,
        p_case: 0.95,
        confounded: Interval::new(250, 5),
        genuine: None,
        seed: 0,
    }
}

/// Desk power sweep over `p_case`. With `p1 = 0.2` a control window of
/// length 5 contains a 1 with probability 0.672, so points below that are
/// depleted windows and points above it enriched ones.
pub const DESK_POWER_SWEEP: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

/// Desk confounding sweep over `rho_con`.
pub const DESK_CONFOUND_SWEEP: [f64; 6] = [0.0, 0.2, 0.4, 0.6, 0.8, 0.85];

/// Desk runtime sweep over K.
pub const DESK_RUNTIME_SWEEP: [f64; 4] = [2.0, 4.0, 8.0, 12.0];

pub fn power_grid(values: Vec<f64>, repetitions: usize, seed_base: u64) -> ExperimentGrid<GenSpec> {
    ExperimentGrid {
        repetitions,
        sweep: SweepVar::PCase,
        values,
        base: desk_gen_spec(),
        methods: vec![Method::FastCmh, Method::BonferroniCmh, Method::FaisChi2],
        params: MethodParams::default(),
        seed_base,
    }
}

pub fn confounded_grid(values: Vec<f64>, repetitions: usize, seed_base: u64) -> ExperimentGrid<ConfoundSpec> {
    ExperimentGrid {
        repetitions,
        sweep: SweepVar::RhoCon,
        values,
        base: desk_confound_spec(),
        methods: vec![Method::FastCmh, Method::BonferroniCmh, Method::FaisChi2],
        params: MethodParams::default(),
        seed_base,
    }
}

/// Whether any overlap-filtered hit overlaps a target window.
pub fn detects(result: &MethodResult, targets: &[Interval]) -> bool {
    filter_overlaps(&result.hits)
        .iter()
        .any(|h| targets.iter().any(|t| h.pattern.overlaps(t)))
}

/// Detection frequency of one method at one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct RateRow {
    pub method: Method,
    pub sweep: SweepVar,
    pub value: f64,
    pub repetitions: usize,
    pub detections: usize,
    pub rate: f64,
    pub mean_wall_time_s: f64,
}

fn detection_rates<S: Scenario>(grid: &ExperimentGrid<S>) -> Result<Vec<RateRow>> {
    let points = grid.points()?;
    let jobs: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|p| (0..grid.repetitions).map(move |r| (p, r)))
        .collect();
    let outcomes: Vec<Vec<(bool, f64)>> = jobs
        .par_iter()
        .map(|&(p, r)| {
            let spec = points[p].with_seed(grid.seed_base.wrapping_add(r as u64));
            let data = spec.generate()?;
            let targets = spec.targets();
            grid.methods
                .iter()
                .map(|&m| {
                    let res = run_method(m, &data, &grid.params)?;
                    Ok((detects(&res, &targets), res.wall_time.as_secs_f64()))
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    for (p, &value) in grid.values.iter().enumerate() {
        let runs = &outcomes[p * grid.repetitions..(p + 1) * grid.repetitions];
        for (mi, &method) in grid.methods.iter().enumerate() {
            let detections = runs.iter().filter(|o| o[mi].0).count();
            let time: f64 = runs.iter().map(|o| o[mi].1).sum();
            rows.push(RateRow {
                method,
                sweep: grid.sweep,
                value,
                repetitions: grid.repetitions,
                detections,
                rate: detections as f64 / grid.repetitions as f64,
                mean_wall_time_s: time / grid.repetitions as f64,
            });
        }
    }
    Ok(rows)
}

/// Fraction of repetitions in which each method detects the planted
/// window.
pub fn power_experiment(grid: &ExperimentGrid<GenSpec>) -> Result<Vec<RateRow>> {
    detection_rates(grid)
}

/// Fraction of repetitions in which each method reports the confounded
/// window.
pub fn confounded_experiment(grid: &ExperimentGrid<ConfoundSpec>) -> Result<Vec<RateRow>> {
    detection_rates(grid)
}

fn rate_csv(rows: &[RateRow], count: &str, rate: &str) -> String {
    let mut out = format!("method,sweep,value,repetitions,{count},{rate},mean_wall_time_s\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{:.6}",
            r.method, r.sweep, r.value, r.repetitions, r.detections, r.rate, r.mean_wall_time_s
        );
    }
    out
}

pub fn power_csv(rows: &[RateRow]) -> String {
    rate_csv(rows, "detections", "power")
}

pub fn confounded_csv(rows: &[RateRow]) -> String {
    rate_csv(rows, "false_detections", "false_detection_rate")
}

/// One timed run.
#[derive(Debug, Clone, PartialEq)]
pub struct RuntimeRow {
    pub method: Method,
    pub sweep: SweepVar,
    pub value: f64,
    pub repetition: usize,
    pub wall_time_s: f64,
    pub visited: u64,
    pub prune_evaluations: u64,
    pub vertex_evaluations: u64,
    pub delta: f64,
    pub hits: usize,
}

/// Desk-scale runtime grid: signal-free data, n = 240, L = 200, sweeping K.
pub fn runtime_grid(values: Vec<f64>, repetitions: usize, seed_base: u64) -> ExperimentGrid<GenSpec> {
    ExperimentGrid {
        repetitions,
        sweep: SweepVar::K,
        values,
        base: GenSpec {
            n: 240,
            len: 200,
            k: 2,
            p1: 0.2,
            p_case: 0.5,
            plants: vec![],
            seed: 0,
        },
        methods: Method::ALL.to_vec(),
        params: MethodParams::default(),
        seed_base,
    }
}

pub fn runtime_experiment(grid: &ExperimentGrid<GenSpec>) -> Result<Vec<RuntimeRow>> {
    let points = grid.points()?;
    let mut rows = Vec::new();
    for (spec, &value) in points.iter().zip(&grid.values) {
        for r in 0..grid.repetitions {
            let data = spec.with_seed(grid.seed_base.wrapping_add(r as u64)).generate()?;
            for &method in &grid.methods {
                let res = run_method(method, &data, &grid.params)?;
                rows.push(RuntimeRow {
                    method,
                    sweep: grid.sweep,
                    value,
                    repetition: r,
                    wall_time_s: res.wall_time.as_secs_f64(),
                    visited: res.visited(),
                    prune_evaluations: res.prune_evaluations(),
                    vertex_evaluations: res.vertex_evaluations(),
                    delta: res.delta,
                    hits: res.hits.len(),
                });
            }
        }
    }
    Ok(rows)
}

pub fn runtime_csv(rows: &[RuntimeRow]) -> String {
    let mut out = String::from(
        "method,sweep,value,repetition,wall_time_s,visited,prune_evaluations,vertex_evaluations,delta_star,significant\n",
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{:.6},{},{},{},{:e},{}",
            r.method,
            r.sweep,
            r.value,
            r.repetition,
            r.wall_time_s,
            r.visited,
            r.prune_evaluations,
            r.vertex_evaluations,
            r.delta,
            r.hits
        );
    }
    out
}

/// Label-permutation null: one base dataset, labels shuffled within
/// categories for each repetition.
#[derive(Debug, Clone, PartialEq)]
pub struct NullGrid {
    pub repetitions: usize,
    pub base: GenSpec,
    pub methods: Vec<Method>,
    pub params: MethodParams,
    pub seed_base: u64,
}

pub fn null_grid(repetitions: usize, alpha: f64, seed_base: u64) -> NullGrid {
    NullGrid {
        repetitions,
        base: desk_gen_spec(),
        methods: vec![Method::FastCmh],
        params: MethodParams::with_alpha(alpha),
        seed_base,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FwerRow {
    pub method: Method,
    pub repetitions: usize,
    pub alpha: f64,
    /// Repetitions with at least one significant interval.
    pub false_positive_runs: usize,
    pub fwer: f64,
    /// 95% Wilson score interval.
    pub ci_low: f64,
    pub ci_high: f64,
    /// `alpha + 3 sqrt(alpha (1 - alpha) / R)`.
    pub bound: f64,
}

impl FwerRow {
    pub fn within_bound(&self) -> bool {
        self.fwer <= self.bound
    }
}

/// 95% Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: usize, n: usize) -> (f64, f64) {
    let z = 1.959963984540054;
    let n = n as f64;
    let p = k as f64 / n;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    let low = if k == 0 { 0.0 } else { (centre - half).max(0.0) };
    let high = if k as f64 == n { 1.0 } else { (centre + half).min(1.0) };
    (low, high)
}

pub fn null_fwer_experiment(grid: &NullGrid) -> Result<Vec<FwerRow>> {
    if grid.repetitions == 0 {
        return Err(Error::InvalidParameter("repetitions must be at least 1".into()));
    }
    grid.params.validate()?;
    let base = grid.base.with_seed(grid.seed_base).generate()?;
    let outcomes: Vec<Vec<bool>> = (0..grid.repetitions)
        .into_par_iter()
        .map(|r| {
            let null = permute_labels_within_categories(&base, grid.seed_base.wrapping_add(r as u64 + 1))?;
            grid.methods
                .iter()
                .map(|&m| Ok(!run_method(m, &null, &grid.params)?.hits.is_empty()))
                .collect()
        })
        .collect::<Result<_>>()?;
    let alpha = grid.params.alpha;
    let reps = grid.repetitions;
    Ok(grid
        .methods
        .iter()
        .enumerate()
        .map(|(mi, &method)| {
            let k = outcomes.iter().filter(|o| o[mi]).count();
            let (ci_low, ci_high) = wilson_interval(k, reps);
            FwerRow {
                method,
                repetitions: reps,
                alpha,
                false_positive_runs: k,
                fwer: k as f64 / reps as f64,
                ci_low,
                ci_high,
                bound: alpha + 3.0 * (alpha * (1.0 - alpha) / reps as f64).sqrt(),
            }
        })
        .collect())
}

pub fn fwer_csv(rows: &[FwerRow]) -> String {
    let mut out = String::from("method,repetitions,alpha,false_positive_runs,fwer,ci_low,ci_high,bound,within_bound\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{:.6},{:.6},{:.6},{}",
            r.method,
            r.repetitions,
            r.alpha,
            r.false_positive_runs,
            r.fwer,
            r.ci_low,
            r.ci_high,
            r.bound,
            r.within_bound()
        );
    }
    out
}
