//! Contiguous intervals of sequence positions as search patterns.
//!
//! A sample contains `[tau, tau + ell)` when any of those positions is 1,
//! so support grows with `ell`. The search engine needs supports that
//! shrink towards the leaves, so intervals are handed to it through their
//! complements: `w = n - x` and `n1 - a`. The CMH statistic and the minimum
//! attainable p-value are invariant under that relabelling, and the
//! growth chain `(tau, 1), (tau, 2), ...` becomes antitone.

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::stats::{PatternSupport, StratifiedCounts};
use crate::tarone::{PatternEnumerator, Significant};

/// Positions `[tau, tau + ell)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Interval {
    pub tau: usize,
    pub ell: usize,
}

impl Interval {
    pub fn new(tau: usize, ell: usize) -> Self {
        Self { tau, ell }
    }

    /// One past the last covered position.
    pub fn end(&self) -> usize {
        self.tau + self.ell
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.tau < other.end() && other.tau < self.end()
    }
}

/// Number of intervals of length at most `max_ell` in a sequence of length `len`.
pub fn interval_count(len: usize, max_ell: Option<usize>) -> u64 {
    let cap = max_ell.unwrap_or(len).min(len) as u64;
    let len = len as u64;
    // sum over ell = 1..=cap of (len - ell + 1)
    cap * (len + 1) - cap * (cap + 1) / 2
}

/// Supports of one interval computed sample by sample.
pub fn interval_support(dataset: &Dataset, interval: Interval) -> Result<PatternSupport> {
    if interval.ell == 0 || interval.end() > dataset.len() {
        return Err(Error::IntervalOutOfBounds {
            tau: interval.tau,
            ell: interval.ell,
            len: dataset.len(),
        });
    }
    let k = dataset.categories();
    let mut x = vec![0u32; k];
    let mut a = vec![0u32; k];
    for s in 0..dataset.n_samples() {
        if (interval.tau..interval.end()).any(|p| dataset.get(s, p)) {
            let c = dataset.covariates()[s] as usize;
            x[c] += 1;
            a[c] += dataset.labels()[s] as u32;
        }
    }
    Ok(PatternSupport::new(x, Some(a)))
}

/// Samples covered by a growing interval, with per-category counts.
#[derive(Debug, Clone)]
pub struct CoverState {
    mask: Vec<u64>,
    x: Vec<u32>,
    a: Vec<u32>,
}

impl CoverState {
    pub fn new(dataset: &Dataset) -> Self {
        Self {
            mask: vec![0; dataset.words()],
            x: vec![0; dataset.categories()],
            a: vec![0; dataset.categories()],
        }
    }

    pub fn reset(&mut self) {
        self.mask.fill(0);
        self.x.fill(0);
        self.a.fill(0);
    }

    /// Adds position `pos` to the interval.
    pub fn extend(&mut self, dataset: &Dataset, pos: usize, with_cases: bool) {
        for (m, &c) in self.mask.iter_mut().zip(dataset.column(pos)) {
            *m |= c;
        }
        let cases = dataset.case_mask();
        for (i, &(start, words)) in dataset.blocks().iter().enumerate() {
            let block = &self.mask[start..start + words];
            self.x[i] = block.iter().map(|w| w.count_ones()).sum();
            if with_cases {
                self.a[i] = block
                    .iter()
                    .zip(&cases[start..start + words])
                    .map(|(w, c)| (w & c).count_ones())
                    .sum();
            }
        }
    }

    pub fn x(&self) -> &[u32] {
        &self.x
    }

    /// Only maintained when extended with `with_cases`.
    pub fn a(&self) -> &[u32] {
        &self.a
    }
}

/// Interval search space over one dataset, fed to the engine through
/// complement supports.
pub struct IntervalEnumerator<'a> {
    dataset: &'a Dataset,
    max_ell: Option<usize>,
    cover: CoverState,
    w: Vec<u32>,
    wa: Vec<u32>,
}

impl<'a> IntervalEnumerator<'a> {
    pub fn new(dataset: &'a Dataset, max_ell: Option<usize>) -> Self {
        let k = dataset.categories();
        Self {
            dataset,
            max_ell,
            cover: CoverState::new(dataset),
            w: vec![0; k],
            wa: vec![0; k],
        }
    }

    pub fn dataset(&self) -> &Dataset {
        self.dataset
    }
}

impl PatternEnumerator for IntervalEnumerator<'_> {
    type Pattern = Interval;

    fn counts(&self) -> &StratifiedCounts {
        self.dataset.counts()
    }

    fn traverse<F>(&mut self, with_cases: bool, mut visit: F) -> Result<()>
    where
        F: FnMut(&Interval, &[u32], Option<&[u32]>) -> Result<bool>,
    {
        let d = self.dataset;
        let len = d.len();
        let cap = self.max_ell.unwrap_or(len);
        let n = d.counts().n();
        let n1 = d.counts().n1();
        for tau in 0..len {
            self.cover.reset();
            let longest = cap.min(len - tau);
            for ell in 1..=longest {
                self.cover.extend(d, tau + ell - 1, with_cases);
                for i in 0..self.w.len() {
                    let w = n[i] - self.cover.x()[i];
                    debug_assert!(ell == 1 || w <= self.w[i], "complement support grew");
                    self.w[i] = w;
                    if with_cases {
                        self.wa[i] = n1[i] - self.cover.a()[i];
                    }
                }
                let cases = with_cases.then_some(self.wa.as_slice());
                if !visit(&Interval::new(tau, ell), &self.w, cases)? {
                    break;
                }
            }
        }
        Ok(())
    }

    fn present_support(&self, x: &mut [u32], a: &mut [u32]) {
        let counts = self.dataset.counts();
        for i in 0..x.len() {
            x[i] = counts.n()[i] - x[i];
            a[i] = counts.n1()[i] - a[i];
        }
    }
}

/// Greedy clustering of hits sorted by p-value: keep the best remaining
/// interval and discard everything overlapping it.
pub fn filter_overlaps(hits: &[Significant<Interval>]) -> Vec<Significant<Interval>> {
    let mut kept: Vec<Significant<Interval>> = Vec::new();
    for hit in hits {
        if kept.iter().all(|k| !k.pattern.overlaps(&hit.pattern)) {
            kept.push(hit.clone());
        }
    }
    kept
}
