//! FastCMH and the three comparison methods, all driven by the same
//! interval engine.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::interval::{interval_count, Interval, IntervalEnumerator};
use crate::prune::{NoPruning, PruneBound, PruneWorkspace, VertexOracle, MAX_VERTEX_CATEGORIES};
use crate::tarone::{mine, significant_pass, SearchTrace, Significant, TaroneState, DEFAULT_ALPHA, DEFAULT_MU, DEFAULT_N_STEPS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    FastCmh,
    BonferroniCmh,
    FaisChi2,
    FaisCmh,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::FastCmh, Method::BonferroniCmh, Method::FaisChi2, Method::FaisCmh];

    pub fn name(self) -> &'static str {
        match self {
            Method::FastCmh => "fastcmh",
            Method::BonferroniCmh => "bonferroni-cmh",
            Method::FaisChi2 => "fais-chi2",
            Method::FaisCmh => "fais-cmh",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown method {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodParams {
    pub alpha: f64,
    pub mu: f64,
    pub n_steps: usize,
    /// Longest interval considered; `None` means the sequence length.
    pub max_ell: Option<usize>,
}

impl Default for MethodParams {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
            mu: DEFAULT_MU,
            n_steps: DEFAULT_N_STEPS,
            max_ell: None,
        }
    }
}

impl MethodParams {
    pub fn with_alpha(alpha: f64) -> Self {
        Self { alpha, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidParameter(format!("alpha = {} not in (0, 1)", self.alpha)));
        }
        if self.max_ell == Some(0) {
            return Err(Error::InvalidParameter("max_ell must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodResult {
    pub method: Method,
    pub alpha: f64,
    /// Corrected significance threshold.
    pub delta: f64,
    /// Size of the correction family, `alpha / delta`: testable intervals
    /// at the final grid threshold for the Tarone methods, all candidate
    /// intervals for Bonferroni.
    pub family_size: u64,
    /// Intervals whose minimum attainable p-value is at most `delta`.
    pub testable_at_delta: u64,
    /// Categories the method tested in (1 for FAIS-chi2).
    pub categories: usize,
    /// Sorted by p-value. Supports are over the categories the method
    /// tested, so FAIS-chi2 reports a single collapsed category.
    pub hits: Vec<Significant<Interval>>,
    pub granularity_warning: bool,
    /// Threshold pass counters (empty for Bonferroni, which has none).
    pub threshold_trace: SearchTrace,
    pub significance_trace: SearchTrace,
    pub wall_time: Duration,
}

impl MethodResult {
    /// Intervals visited over both passes.
    pub fn visited(&self) -> u64 {
        self.threshold_trace.visited + self.significance_trace.visited
    }

    pub fn prune_evaluations(&self) -> u64 {
        self.threshold_trace.prune_evaluations + self.significance_trace.prune_evaluations
    }

    pub fn vertex_evaluations(&self) -> u64 {
        self.threshold_trace.vertex_evaluations + self.significance_trace.vertex_evaluations
    }
}

fn tarone_method<B: PruneBound>(method: Method, dataset: &Dataset, params: &MethodParams, bound: &mut B) -> Result<MethodResult> {
    params.validate()?;
    let start = Instant::now();
    let state = TaroneState::new(params.alpha, params.mu, params.n_steps)?;
    let mut intervals = IntervalEnumerator::new(dataset, params.max_ell);
    let (outcome, _) = mine(&mut intervals, state, bound)?;
    let sig = significant_pass(&mut intervals, outcome.delta_star, params.alpha, bound)?;
    Ok(MethodResult {
        method,
        alpha: params.alpha,
        delta: outcome.delta_star,
        family_size: outcome.m_final,
        testable_at_delta: sig.testable_at_threshold,
        categories: dataset.categories(),
        hits: sig.hits,
        granularity_warning: sig.granularity_warning,
        threshold_trace: outcome.trace,
        significance_trace: sig.trace,
        wall_time: start.elapsed(),
    })
}

/// Tarone-corrected CMH search with the exact fast prune bound.
pub fn fastcmh(dataset: &Dataset, params: &MethodParams) -> Result<MethodResult> {
    let mut bound = PruneWorkspace::with_capacity(dataset.categories());
    tarone_method(Method::FastCmh, dataset, params, &mut bound)
}

/// Same search with the prune bound computed over all `2^K` vertices.
pub fn fais_cmh(dataset: &Dataset, params: &MethodParams) -> Result<MethodResult> {
    let k = dataset.categories();
    if k > MAX_VERTEX_CATEGORIES {
        return Err(Error::BruteForceTooLarge {
            what: "categories",
            value: k as u64,
            limit: MAX_VERTEX_CATEGORIES as u64,
        });
    }
    tarone_method(Method::FaisCmh, dataset, params, &mut VertexOracle::new())
}

/// Tarone-corrected search ignoring the covariate: every sample is put in
/// one category, where the CMH statistic is Pearson's chi-squared.
pub fn fais_chi2(dataset: &Dataset, params: &MethodParams) -> Result<MethodResult> {
    let collapsed = dataset.collapsed();
    let mut bound = PruneWorkspace::with_capacity(1);
    tarone_method(Method::FaisChi2, &collapsed, params, &mut bound)
}

/// CMH test of every interval at `alpha / #intervals`.
pub fn bonferroni_cmh(dataset: &Dataset, params: &MethodParams) -> Result<MethodResult> {
    params.validate()?;
    let start = Instant::now();
    let family = interval_count(dataset.len(), params.max_ell);
    let delta = params.alpha / family as f64;
    let mut intervals = IntervalEnumerator::new(dataset, params.max_ell);
    // An interval whose minimum attainable p-value exceeds delta cannot be
    // significant, so testing only those is the same Bonferroni procedure.
    let sig = significant_pass(&mut intervals, delta, params.alpha, &mut NoPruning)?;
    Ok(MethodResult {
        method: Method::BonferroniCmh,
        alpha: params.alpha,
        delta,
        family_size: family,
        testable_at_delta: sig.testable_at_threshold,
        categories: dataset.categories(),
        hits: sig.hits,
        granularity_warning: false,
        threshold_trace: SearchTrace::default(),
        significance_trace: SearchTrace {
            prune_evaluations: 0,
            pruned: 0,
            ..sig.trace
        },
        wall_time: start.elapsed(),
    })
}

pub fn run_method(method: Method, dataset: &Dataset, params: &MethodParams) -> Result<MethodResult> {
    match method {
        Method::FastCmh => fastcmh(dataset, params),
        Method::BonferroniCmh => bonferroni_cmh(dataset, params),
        Method::FaisChi2 => fais_chi2(dataset, params),
        Method::FaisCmh => fais_cmh(dataset, params),
    }
}
