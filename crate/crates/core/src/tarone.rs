//! Tarone-style FWER control over a pattern search tree.
//!
//! The corrected threshold is searched on the logarithmic grid
//! `10^(-j * mu)`, `j = 0..n_steps`. Each testable pattern is dropped into
//! the bucket of its minimum attainable p-value; whenever
//! `delta * |testable| > alpha` the grid index advances and the patterns of
//! the bucket being left stop counting.

use crate::error::{Error, Result};
use crate::prune::PruneBound;
use crate::stats::{chi2_sf, cmh_statistic, min_attainable_pvalue, StratifiedCounts};

pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_MU: f64 = 0.06;
pub const DEFAULT_N_STEPS: usize = 500;

/// Grid value `10^(-j * mu)`. The only place a threshold is computed.
#[inline]
pub fn grid_threshold(j: usize, mu: f64) -> f64 {
    10f64.powf(-(j as f64) * mu)
}

/// Bucket `i` holds p-values in `(grid_threshold(i + 1), grid_threshold(i)]`;
/// the last bucket also takes everything below the grid floor.
pub fn bucket_index(p: f64, mu: f64, n_steps: usize) -> usize {
    debug_assert!(p > 0.0);
    let last = n_steps - 1;
    let raw = (-p.log10() / mu).floor();
    let mut i = if raw.is_nan() || raw < 0.0 {
        0
    } else if raw >= last as f64 {
        last
    } else {
        raw as usize
    };
    // Snap to the comparison used for testability so rounding in log10
    // cannot put a pattern on the wrong side of a grid point.
    while i < last && p <= grid_threshold(i + 1, mu) {
        i += 1;
    }
    while i > 0 && p > grid_threshold(i, mu) {
        i -= 1;
    }
    i
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaroneState {
    alpha: f64,
    mu: f64,
    n_steps: usize,
    j: usize,
    delta: f64,
    buckets: Vec<u64>,
    m_testable: u64,
}

impl TaroneState {
    pub fn new(alpha: f64, mu: f64, n_steps: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParameter(format!("alpha = {alpha} not in (0, 1)")));
        }
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::InvalidParameter(format!("mu = {mu} must be positive")));
        }
        if n_steps < 2 {
            return Err(Error::InvalidParameter(format!("n_steps = {n_steps} must be at least 2")));
        }
        Ok(Self {
            alpha,
            mu,
            n_steps,
            j: 0,
            delta: grid_threshold(0, mu),
            buckets: vec![0; n_steps],
            m_testable: 0,
        })
    }

    pub fn with_alpha(alpha: f64) -> Result<Self> {
        Self::new(alpha, DEFAULT_MU, DEFAULT_N_STEPS)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    /// Current grid index.
    pub fn index(&self) -> usize {
        self.j
    }

    /// Current tentative threshold.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn m_testable(&self) -> u64 {
        self.m_testable
    }

    pub fn buckets(&self) -> &[u64] {
        &self.buckets
    }

    /// Smallest threshold the grid can represent.
    pub fn grid_floor(&self) -> f64 {
        grid_threshold(self.n_steps - 1, self.mu)
    }

    pub fn is_testable(&self, psi: f64) -> bool {
        psi <= self.delta
    }

    /// Count a pattern testable at the current threshold and shrink the
    /// threshold until the FWER bound holds again. Returns whether `psi`
    /// itself ended up above the new threshold.
    pub fn register_testable(&mut self, psi: f64) -> Result<bool> {
        debug_assert!(psi <= self.delta, "registered psi {psi} above delta {}", self.delta);
        self.m_testable += 1;
        self.buckets[bucket_index(psi, self.mu, self.n_steps)] += 1;
        while self.delta * self.m_testable as f64 > self.alpha {
            self.m_testable -= self.buckets[self.j];
            self.j += 1;
            if self.j >= self.n_steps {
                return Err(Error::GridExhausted {
                    mu: self.mu,
                    n_steps: self.n_steps,
                });
            }
            self.delta = grid_threshold(self.j, self.mu);
        }
        Ok(psi > self.delta)
    }

    /// `alpha / |testable|`, or `alpha` when nothing is testable.
    pub fn corrected_threshold(&self) -> f64 {
        if self.m_testable == 0 {
            self.alpha
        } else {
            self.alpha / self.m_testable as f64
        }
    }
}

/// A search space arranged as a forest that can be walked depth first.
///
/// Every child must have per-category supports no larger than its parent's;
/// pruning is unsound otherwise. Each pattern is visited at most once.
pub trait PatternEnumerator {
    type Pattern: Clone + Ord;

    fn counts(&self) -> &StratifiedCounts;

    /// Walk the search space. `visit` receives each pattern with its
    /// supports (and case supports when `with_cases` is set) and returns
    /// whether to descend into its children.
    fn traverse<F>(&mut self, with_cases: bool, visit: F) -> Result<()>
    where
        F: FnMut(&Self::Pattern, &[u32], Option<&[u32]>) -> Result<bool>;

    /// Map supports as seen by the search into the supports reported to
    /// users. Identity unless the enumerator relabels patterns.
    fn present_support(&self, _x: &mut [u32], _a: &mut [u32]) {}
}

/// Counters collected during a traversal.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchTrace {
    pub visited: u64,
    pub registrations: u64,
    /// Patterns whose children were cut.
    pub pruned: u64,
    /// Calls into the prune bound (after the region short-circuit).
    pub prune_evaluations: u64,
    pub vertex_evaluations: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MineOutcome {
    /// Corrected significance threshold.
    pub delta_star: f64,
    /// Testable patterns at the final grid threshold.
    pub m_final: u64,
    pub final_delta: f64,
    pub final_index: usize,
    pub trace: SearchTrace,
}

fn descend<B: PruneBound + ?Sized>(
    bound: &mut B,
    counts: &StratifiedCounts,
    x: &[u32],
    delta: f64,
    trace: &mut SearchTrace,
) -> bool {
    if x.iter().enumerate().any(|(i, &xi)| xi > counts.prune_cap(i)) {
        return true;
    }
    trace.prune_evaluations += 1;
    let keep = chi2_sf(bound.t_prune(counts, x)) <= delta;
    if !keep {
        trace.pruned += 1;
    }
    keep
}

/// Threshold pass: finds the corrected significance threshold.
pub fn mine<E, B>(enumerator: &mut E, state: TaroneState, bound: &mut B) -> Result<(MineOutcome, TaroneState)>
where
    E: PatternEnumerator,
    B: PruneBound + ?Sized,
{
    mine_observed(enumerator, state, bound, |_, _| {})
}

/// [`mine`], reporting every visited pattern with its minimum attainable
/// p-value to `observer`.
pub fn mine_observed<E, B, O>(
    enumerator: &mut E,
    mut state: TaroneState,
    bound: &mut B,
    mut observer: O,
) -> Result<(MineOutcome, TaroneState)>
where
    E: PatternEnumerator,
    B: PruneBound + ?Sized,
    O: FnMut(&E::Pattern, f64),
{
    let counts = enumerator.counts().clone();
    let mut trace = SearchTrace::default();
    let vertices_before = bound.vertex_evaluations();
    enumerator.traverse(false, |pattern, x, _| {
        trace.visited += 1;
        let psi = min_attainable_pvalue(&counts, x);
        observer(pattern, psi);
        if state.is_testable(psi) {
            trace.registrations += 1;
            state.register_testable(psi)?;
        }
        Ok(descend(bound, &counts, x, state.delta(), &mut trace))
    })?;
    trace.vertex_evaluations = bound.vertex_evaluations() - vertices_before;
    let outcome = MineOutcome {
        delta_star: state.corrected_threshold(),
        m_final: state.m_testable(),
        final_delta: state.delta(),
        final_index: state.index(),
        trace,
    };
    Ok((outcome, state))
}

/// A pattern whose CMH p-value passed the corrected threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct Significant<P> {
    pub pattern: P,
    pub x: Vec<u32>,
    pub a: Vec<u32>,
    pub statistic: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignificanceOutcome<P> {
    /// Sorted by p-value, ties by pattern order.
    pub hits: Vec<Significant<P>>,
    /// Patterns with minimum attainable p-value at or below the threshold.
    pub testable_at_threshold: u64,
    /// Set when `testable_at_threshold * delta_star > alpha`: the grid was
    /// too coarse to resolve the threshold exactly.
    pub granularity_warning: bool,
    pub trace: SearchTrace,
}

/// Second pass: re-walk the space with pruning against `delta_star` and
/// report every pattern whose p-value does not exceed it.
pub fn significant_pass<E, B>(
    enumerator: &mut E,
    delta_star: f64,
    alpha: f64,
    bound: &mut B,
) -> Result<SignificanceOutcome<E::Pattern>>
where
    E: PatternEnumerator,
    B: PruneBound + ?Sized,
{
    let counts = enumerator.counts().clone();
    let mut trace = SearchTrace::default();
    let mut testable = 0u64;
    let mut hits = Vec::new();
    let vertices_before = bound.vertex_evaluations();
    enumerator.traverse(true, |pattern, x, a| {
        trace.visited += 1;
        if min_attainable_pvalue(&counts, x) <= delta_star {
            testable += 1;
            let a = a.expect("case supports requested");
            let statistic = cmh_statistic(&counts, x, a);
            let p_value = chi2_sf(statistic);
            if p_value <= delta_star {
                hits.push(Significant {
                    pattern: pattern.clone(),
                    x: x.to_vec(),
                    a: a.to_vec(),
                    statistic,
                    p_value,
                });
            }
        }
        Ok(descend(bound, &counts, x, delta_star, &mut trace))
    })?;
    trace.vertex_evaluations = bound.vertex_evaluations() - vertices_before;
    for hit in &mut hits {
        enumerator.present_support(&mut hit.x, &mut hit.a);
        debug_assert_eq!(
            cmh_statistic(&counts, &hit.x, &hit.a).to_bits(),
            hit.statistic.to_bits()
        );
    }
    sort_hits(&mut hits);
    Ok(SignificanceOutcome {
        hits,
        testable_at_threshold: testable,
        granularity_warning: testable as f64 * delta_star > alpha,
        trace,
    })
}

pub(crate) fn sort_hits<P: Ord>(hits: &mut [Significant<P>]) {
    hits.sort_by(|a, b| a.p_value.total_cmp(&b.p_value).then_with(|| a.pattern.cmp(&b.pattern)));
}
