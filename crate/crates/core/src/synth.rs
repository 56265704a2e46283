//! Synthetic datasets for power, confounding and runtime studies.
//!
//! # Random streams
//!
//! Every generator uses ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded with
//! `seed_from_u64(seed)`. Sample `s` draws from its own stream, selected
//! with `set_stream(s)`, so samples are independent of each other and of
//! the sample count. A uniform draw is `(next_u64 >> 11) * 2^-53` and a
//! Bernoulli(p) cell is `uniform < p`. Per sample, draws happen in this
//! order:
//!
//! * standard generator: `L` background cells, then for cases the cells of
//!   every plant in list order (overwriting the background);
//! * confounded generator: one uniform for the `(z1, z2, z3)` triple, one
//!   for `z4`, `L` background cells, the confounded window if `z5 = 1`,
//!   then the genuine window if present and `z1 = 1`.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::interval::Interval;

fn sample_rng(seed: u64, sample: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(sample as u64);
    rng
}

#[inline]
fn bernoulli(rng: &mut ChaCha8Rng, p: f64) -> u8 {
    (rng.gen::<f64>() < p) as u8
}

/// Per-cell probability that makes a window of `ell` independent cells
/// contain at least one 1 with probability `p_case`.
pub fn window_cell_probability(p_case: f64, ell: usize) -> f64 {
    1.0 - (1.0 - p_case).powf(1.0 / ell as f64)
}

fn check_probability(name: &str, p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} = {p} not in (0, 1)")))
    }
}

fn check_window(w: &Interval, len: usize) -> Result<()> {
    if w.ell == 0 || w.end() > len {
        return Err(Error::IntervalOutOfBounds {
            tau: w.tau,
            ell: w.ell,
            len,
        });
    }
    Ok(())
}

/// Balanced design with background noise and planted case-enriched windows.
#[derive(Debug, Clone, PartialEq)]
pub struct GenSpec {
    pub n: usize,
    pub len: usize,
    pub k: usize,
    /// Background probability of a 1.
    pub p1: f64,
    /// Probability that a case window contains at least one 1.
    pub p_case: f64,
    pub plants: Vec<Interval>,
    pub seed: u64,
}

impl GenSpec {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.n == 0 || !self.n.is_multiple_of(2 * self.k) {
            return Err(Error::InvalidParameter(format!(
                "n = {} must be a positive multiple of 2K = {}",
                self.n,
                2 * self.k
            )));
        }
        if self.len == 0 {
            return Err(Error::InvalidParameter("sequence length must be positive".into()));
        }
        check_probability("p1", self.p1)?;
        check_probability("p_case", self.p_case)?;
        for plant in &self.plants {
            check_window(plant, self.len)?;
        }
        Ok(())
    }
}

/// Standard simulation: `n / K` samples per category, half of them cases.
/// Sample `s` belongs to category `s / (n / K)`; within a category the
/// first half are controls.
pub fn gen_standard(spec: &GenSpec) -> Result<Dataset> {
    spec.validate()?;
    let per = spec.n / spec.k;
    let len = spec.len;
    let q: Vec<f64> = spec
        .plants
        .iter()
        .map(|p| window_cell_probability(spec.p_case, p.ell))
        .collect();
    let mut cells = vec![0u8; spec.n * len];
    let mut labels = Vec::with_capacity(spec.n);
    let mut covariates = Vec::with_capacity(spec.n);
    for s in 0..spec.n {
        let mut rng = sample_rng(spec.seed, s);
        let case = s % per >= per / 2;
        let row = &mut cells[s * len..(s + 1) * len];
        for cell in row.iter_mut() {
            *cell = bernoulli(&mut rng, spec.p1);
        }
        if case {
            for (plant, &q) in spec.plants.iter().zip(&q) {
                for cell in &mut row[plant.tau..plant.end()] {
                    *cell = bernoulli(&mut rng, q);
                }
            }
        }
        labels.push(case as u8);
        covariates.push((s / per) as u32);
    }
    Dataset::from_rows(&cells, len, labels, covariates)
}

/// Joint law of three Bernoulli(1/2) variables with corr(z1, z3) = rho_sig,
/// corr(z2, z3) = rho_con, z1 and z2 uncorrelated and no three-way
/// interaction. Cell index is `z1 << 2 | z2 << 1 | z3`.
#[derive(Debug, Clone, PartialEq)]
pub struct TriplePmf {
    cells: [f64; 8],
}

impl TriplePmf {
    pub fn new(rho_sig: f64, rho_con: f64) -> Result<Self> {
        for (name, r) in [("rho_sig", rho_sig), ("rho_con", rho_con)] {
            if !(-1.0..=1.0).contains(&r) {
                return Err(Error::InvalidParameter(format!("{name} = {r} not in [-1, 1]")));
            }
        }
        let mut cells = [0.0; 8];
        for (idx, cell) in cells.iter_mut().enumerate() {
            let spin = |bit: usize| if idx >> bit & 1 == 1 { 1.0 } else { -1.0 };
            let (s1, s2, s3) = (spin(2), spin(1), spin(0));
            let p = (1.0 + rho_sig * s1 * s3 + rho_con * s2 * s3) / 8.0;
            if p < -1e-15 {
                return Err(Error::InfeasibleDistribution {
                    cell: idx as u8,
                    probability: p,
                });
            }
            *cell = p.max(0.0);
        }
        Ok(Self { cells })
    }

    pub fn cells(&self) -> &[f64; 8] {
        &self.cells
    }

    /// Draws `(z1, z2, z3)` from one uniform.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (bool, bool, bool) {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut idx = 7;
        for (i, &p) in self.cells.iter().enumerate() {
            acc += p;
            if u < acc {
                idx = i;
                break;
            }
        }
        (idx >> 2 & 1 == 1, idx >> 1 & 1 == 1, idx & 1 == 1)
    }
}

/// Draws the correlated `(z1, z2, z3)` triple.
pub fn sample_bernoulli_triple<R: Rng + ?Sized>(rho_sig: f64, rho_con: f64, rng: &mut R) -> Result<(bool, bool, bool)> {
    Ok(TriplePmf::new(rho_sig, rho_con)?.sample(rng))
}

/// A window whose association with the label runs entirely through the
/// covariate.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfoundSpec {
    pub n: usize,
    pub len: usize,
    pub p1: f64,
    pub rho_sig: f64,
    pub rho_con: f64,
    /// Probability that window presence disagrees with the category.
    pub p_eps: f64,
    /// Hit probability of a planted window.
    pub p_case: f64,
    pub confounded: Interval,
    /// Optional genuinely associated window, gated by `z1`.
    pub genuine: Option<Interval>,
    pub seed: u64,
}

impl ConfoundSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.len == 0 {
            return Err(Error::InvalidParameter("n and len must be positive".into()));
        }
        check_probability("p1", self.p1)?;
        check_probability("p_case", self.p_case)?;
        if !(0.0..1.0).contains(&self.p_eps) {
            return Err(Error::InvalidParameter(format!("p_eps = {} not in [0, 1)", self.p_eps)));
        }
        check_window(&self.confounded, self.len)?;
        if let Some(g) = &self.genuine {
            check_window(g, self.len)?;
        }
        TriplePmf::new(self.rho_sig, self.rho_con).map(|_| ())
    }
}

/// Confounded simulation. Per sample: `(z1, z2, z3)` from [`TriplePmf`],
/// category `z2`, label `z3`, `z4 ~ Bernoulli(p_eps)`, and the confounded
/// window is planted iff `z5 = z2 XOR z4` is 1.
pub fn gen_confounded(spec: &ConfoundSpec) -> Result<Dataset> {
    spec.validate()?;
    let pmf = TriplePmf::new(spec.rho_sig, spec.rho_con)?;
    let len = spec.len;
    let q_con = window_cell_probability(spec.p_case, spec.confounded.ell);
    let q_sig = spec.genuine.map(|g| window_cell_probability(spec.p_case, g.ell));
    let mut cells = vec![0u8; spec.n * len];
    let mut labels = Vec::with_capacity(spec.n);
    let mut covariates = Vec::with_capacity(spec.n);
    for s in 0..spec.n {
        let mut rng = sample_rng(spec.seed, s);
        let (z1, z2, z3) = pmf.sample(&mut rng);
        let z4 = rng.gen::<f64>() < spec.p_eps;
        let z5 = z2 ^ z4;
        let row = &mut cells[s * len..(s + 1) * len];
        for cell in row.iter_mut() {
            *cell = bernoulli(&mut rng, spec.p1);
        }
        if z5 {
            for cell in &mut row[spec.confounded.tau..spec.confounded.end()] {
                *cell = bernoulli(&mut rng, q_con);
            }
        }
        if let (Some(g), Some(q), true) = (spec.genuine, q_sig, z1) {
            for cell in &mut row[g.tau..g.end()] {
                *cell = bernoulli(&mut rng, q);
            }
        }
        labels.push(z3 as u8);
        covariates.push(z2 as u32);
    }
    Dataset::from_rows(&cells, len, labels, covariates)
}

/// Shuffles labels within each category, keeping every stratum's case
/// count fixed.
pub fn permute_labels_within_categories(dataset: &Dataset, seed: u64) -> Result<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels = dataset.labels().to_vec();
    for c in 0..dataset.categories() as u32 {
        let members: Vec<usize> = (0..dataset.n_samples())
            .filter(|&s| dataset.covariates()[s] == c)
            .collect();
        let mut values: Vec<u8> = members.iter().map(|&s| labels[s]).collect();
        values.shuffle(&mut rng);
        for (&s, v) in members.iter().zip(values) {
            labels[s] = v;
        }
    }
    dataset.with_labels(labels)
}
