//! Scalar kernels shared by every search method: the Cochran-Mantel-Haenszel
//! statistic over K stratified 2x2 tables, the chi-squared (1 d.o.f.)
//! survival function, and Tarone's minimum attainable p-value.
//!
//! Deviations `a - gamma * x` are evaluated as `(a * n - n1 * x) / n` from
//! integers, and the variance term as `gamma (1 - gamma) / n * x (n - x)`.
//! Both forms are exactly symmetric under the relabelling
//! `(x, a) -> (n - x, n1 - a)`, so the statistic of a pattern and of its
//! complement agree bit for bit.

use crate::error::{Error, Result};

/// Fixed experiment design: per-category sample and case counts.
#[derive(Debug, Clone, PartialEq)]
pub struct StratifiedCounts {
    n: Vec<u32>,
    n1: Vec<u32>,
    gamma: Vec<f64>,
    n_f: Vec<f64>,
    var_scale: Vec<f64>,
}

impl StratifiedCounts {
    pub fn new(n: Vec<u32>, n1: Vec<u32>) -> Result<Self> {
        if n.is_empty() {
            return Err(Error::InvalidCounts("at least one category required".into()));
        }
        if n.len() != n1.len() {
            return Err(Error::InvalidCounts(format!(
                "{} sample counts but {} case counts",
                n.len(),
                n1.len()
            )));
        }
        for (i, (&ni, &n1i)) in n.iter().zip(&n1).enumerate() {
            if ni == 0 {
                return Err(Error::InvalidCounts(format!("category {i} has no samples")));
            }
            if n1i > ni {
                return Err(Error::InvalidCounts(format!(
                    "category {i} has {n1i} cases out of {ni} samples"
                )));
            }
        }
        let gamma: Vec<f64> = n.iter().zip(&n1).map(|(&a, &b)| b as f64 / a as f64).collect();
        let n_f: Vec<f64> = n.iter().map(|&v| v as f64).collect();
        let var_scale = gamma
            .iter()
            .zip(&n_f)
            .map(|(&g, &nf)| g * (1.0 - g) / nf)
            .collect();
        Ok(Self {
            n,
            n1,
            gamma,
            n_f,
            var_scale,
        })
    }

    /// Number of covariate states K.
    pub fn categories(&self) -> usize {
        self.n.len()
    }

    pub fn n(&self) -> &[u32] {
        &self.n
    }

    pub fn n1(&self) -> &[u32] {
        &self.n1
    }

    /// Case fractions `n1 / n`.
    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn total(&self) -> u64 {
        self.n.iter().map(|&v| v as u64).sum()
    }

    pub fn total_cases(&self) -> u64 {
        self.n1.iter().map(|&v| v as u64).sum()
    }

    /// All categories merged into one.
    pub fn collapsed(&self) -> Self {
        let n = self.n.iter().sum();
        let n1 = self.n1.iter().sum();
        Self::new(vec![n], vec![n1]).expect("merging valid categories stays valid")
    }

    /// Largest support per category for which pruning bounds are exact,
    /// `min(n1, n - n1)`.
    pub fn prune_cap(&self, i: usize) -> u32 {
        self.n1[i].min(self.n[i] - self.n1[i])
    }

    #[inline]
    pub(crate) fn deviation(&self, i: usize, x: u32, a: u32) -> f64 {
        let num = a as i64 * self.n[i] as i64 - self.n1[i] as i64 * x as i64;
        num as f64 / self.n_f[i]
    }

    #[inline]
    pub(crate) fn variance_term(&self, i: usize, x: u32) -> f64 {
        let spread = x as u64 * (self.n[i] - x) as u64;
        self.var_scale[i] * spread as f64
    }
}

/// Per-category supports of one pattern, with optional case supports.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternSupport {
    pub x: Vec<u32>,
    pub a: Option<Vec<u32>>,
}

impl PatternSupport {
    pub fn new(x: Vec<u32>, a: Option<Vec<u32>>) -> Self {
        Self { x, a }
    }

    pub fn validate(&self, counts: &StratifiedCounts) -> Result<()> {
        let k = counts.categories();
        if self.x.len() != k {
            return Err(Error::InvalidSupport(format!(
                "{} supports for {k} categories",
                self.x.len()
            )));
        }
        for (i, &xi) in self.x.iter().enumerate() {
            if xi > counts.n[i] {
                return Err(Error::InvalidSupport(format!(
                    "category {i}: support {xi} exceeds {} samples",
                    counts.n[i]
                )));
            }
        }
        if let Some(a) = &self.a {
            if a.len() != k {
                return Err(Error::InvalidSupport(format!(
                    "{} case supports for {k} categories",
                    a.len()
                )));
            }
            for (i, (&xi, &ai)) in self.x.iter().zip(a).enumerate() {
                let (lo, hi) = amin_amax(xi, counts.n1[i], counts.n[i]);
                if ai < lo || ai > hi {
                    return Err(Error::InvalidSupport(format!(
                        "category {i}: case support {ai} outside [{lo}, {hi}]"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Supports of the complementary pattern (presence and absence swapped).
    pub fn complement(&self, counts: &StratifiedCounts) -> Self {
        let x = self.x.iter().zip(counts.n()).map(|(&x, &n)| n - x).collect();
        let a = self
            .a
            .as_ref()
            .map(|a| a.iter().zip(counts.n1()).map(|(&a, &n1)| n1 - a).collect());
        Self { x, a }
    }

    pub fn statistic(&self, counts: &StratifiedCounts) -> Result<f64> {
        self.validate(counts)?;
        let a = self
            .a
            .as_ref()
            .ok_or_else(|| Error::InvalidSupport("case supports required".into()))?;
        Ok(cmh_statistic(counts, &self.x, a))
    }
}

/// Range of attainable case supports `[a_min, a_max]` for a pattern with
/// support `x` in a table with `n1` cases out of `n`.
#[inline]
pub fn amin_amax(x: u32, n1: u32, n: u32) -> (u32, u32) {
    debug_assert!(x <= n && n1 <= n);
    (x.saturating_sub(n - n1), x.min(n1))
}

/// CMH statistic; 0 when the variance term vanishes.
pub fn cmh_statistic(counts: &StratifiedCounts, x: &[u32], a: &[u32]) -> f64 {
    debug_assert_eq!(x.len(), counts.categories());
    debug_assert_eq!(a.len(), counts.categories());
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..x.len() {
        num += counts.deviation(i, x[i], a[i]);
        den += counts.variance_term(i, x[i]);
    }
    if den > 0.0 {
        num * num / den
    } else {
        0.0
    }
}

/// Largest CMH statistic attainable with supports `x`. The statistic is a
/// convex quadratic in the total case count, so only the two extremes where
/// every category sits at `a_min` or every category at `a_max` matter.
pub fn max_attainable_statistic(counts: &StratifiedCounts, x: &[u32]) -> f64 {
    debug_assert_eq!(x.len(), counts.categories());
    let mut low = 0.0;
    let mut high = 0.0;
    let mut den = 0.0;
    for (i, &xi) in x.iter().enumerate() {
        let (amin, amax) = amin_amax(xi, counts.n1[i], counts.n[i]);
        low += counts.deviation(i, xi, amin);
        high += counts.deviation(i, xi, amax);
        den += counts.variance_term(i, xi);
    }
    if den > 0.0 {
        (low * low).max(high * high) / den
    } else {
        0.0
    }
}

/// Minimum attainable p-value of a pattern with supports `x`.
pub fn min_attainable_pvalue(counts: &StratifiedCounts, x: &[u32]) -> f64 {
    chi2_sf(max_attainable_statistic(counts, x))
}

/// Survival function of the chi-squared distribution with one degree of
/// freedom, `erfc(sqrt(t / 2))`. Never returns 0: results are floored at
/// the smallest positive normal `f64` so that log-scale bucketing stays
/// finite.
pub fn chi2_sf(t: f64) -> f64 {
    debug_assert!(!t.is_nan(), "chi2_sf of NaN");
    if t <= 0.0 {
        return 1.0;
    }
    if t.is_infinite() {
        return f64::MIN_POSITIVE;
    }
    libm::erfc((0.5 * t).sqrt()).max(f64::MIN_POSITIVE)
}
