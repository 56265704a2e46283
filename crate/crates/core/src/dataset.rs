//! Binary sequences with class labels and a categorical covariate.
//!
//! Each position is stored as a column bitset over samples. Samples are
//! grouped by category and every category starts on a fresh 64-bit word,
//! so per-category counts are popcounts over a contiguous word range.

use crate::error::{Error, Result};
use crate::stats::StratifiedCounts;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n_samples: usize,
    len: usize,
    labels: Vec<u8>,
    covariates: Vec<u32>,
    counts: StratifiedCounts,
    words: usize,
    blocks: Vec<(usize, usize)>,
    slots: Vec<(usize, u64)>,
    columns: Vec<u64>,
    case_mask: Vec<u64>,
}

impl Dataset {
    /// Builds a dataset from a row-major `n x len` matrix of 0/1 cells.
    /// The number of categories is `max(covariates) + 1`; every category
    /// must be non-empty.
    pub fn from_rows(cells: &[u8], len: usize, labels: Vec<u8>, covariates: Vec<u32>) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::InvalidDataset("no samples".into()));
        }
        if len == 0 {
            return Err(Error::InvalidDataset("sequences have length 0".into()));
        }
        if covariates.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{n} labels but {} covariates",
                covariates.len()
            )));
        }
        if cells.len() != n * len {
            return Err(Error::DimensionMismatch(format!(
                "{} cells for {n} samples of length {len}",
                cells.len()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&y| y > 1) {
            return Err(Error::InvalidDataset(format!("label {bad} is not 0 or 1")));
        }
        if let Some(&bad) = cells.iter().find(|&&c| c > 1) {
            return Err(Error::InvalidDataset(format!("cell value {bad} is not 0 or 1")));
        }

        let k = covariates.iter().max().map_or(0, |&m| m as usize + 1);
        let mut n_per = vec![0u32; k];
        let mut n1_per = vec![0u32; k];
        for (&c, &y) in covariates.iter().zip(&labels) {
            n_per[c as usize] += 1;
            n1_per[c as usize] += y as u32;
        }
        if let Some(empty) = n_per.iter().position(|&v| v == 0) {
            return Err(Error::EmptyCategory(empty));
        }
        let counts = StratifiedCounts::new(n_per.clone(), n1_per)?;

        let mut blocks = Vec::with_capacity(k);
        let mut start = 0;
        for &size in &n_per {
            let w = (size as usize).div_ceil(64);
            blocks.push((start, w));
            start += w;
        }
        let words = start;

        let mut filled = vec![0usize; k];
        let mut slots = Vec::with_capacity(n);
        let mut case_mask = vec![0u64; words];
        for (&c, &y) in covariates.iter().zip(&labels) {
            let c = c as usize;
            let r = filled[c];
            filled[c] += 1;
            let word = blocks[c].0 + r / 64;
            let bit = 1u64 << (r % 64);
            slots.push((word, bit));
            if y == 1 {
                case_mask[word] |= bit;
            }
        }

        let mut columns = vec![0u64; len * words];
        for (s, &(word, bit)) in slots.iter().enumerate() {
            let row = &cells[s * len..(s + 1) * len];
            for (pos, &v) in row.iter().enumerate() {
                if v == 1 {
                    columns[pos * words + word] |= bit;
                }
            }
        }

        Ok(Self {
            n_samples: n,
            len,
            labels,
            covariates,
            counts,
            words,
            blocks,
            slots,
            columns,
            case_mask,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    /// Sequence length L.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn categories(&self) -> usize {
        self.counts.categories()
    }

    pub fn counts(&self) -> &StratifiedCounts {
        &self.counts
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn covariates(&self) -> &[u32] {
        &self.covariates
    }

    pub fn get(&self, sample: usize, pos: usize) -> bool {
        let (word, bit) = self.slots[sample];
        self.columns[pos * self.words + word] & bit != 0
    }

    pub fn row(&self, sample: usize) -> Vec<u8> {
        (0..self.len).map(|p| self.get(sample, p) as u8).collect()
    }

    /// Row-major copy of all cells.
    pub fn cells(&self) -> Vec<u8> {
        (0..self.n_samples).flat_map(|s| self.row(s)).collect()
    }

    pub fn with_labels(&self, labels: Vec<u8>) -> Result<Self> {
        Self::from_rows(&self.cells(), self.len, labels, self.covariates.clone())
    }

    pub fn with_covariates(&self, covariates: Vec<u32>) -> Result<Self> {
        Self::from_rows(&self.cells(), self.len, self.labels.clone(), covariates)
    }

    /// Same samples with every covariate set to 0.
    pub fn collapsed(&self) -> Self {
        self.with_covariates(vec![0; self.n_samples])
            .expect("a single category is always valid")
    }

    pub(crate) fn words(&self) -> usize {
        self.words
    }

    pub(crate) fn column(&self, pos: usize) -> &[u64] {
        &self.columns[pos * self.words..(pos + 1) * self.words]
    }

    pub(crate) fn case_mask(&self) -> &[u64] {
        &self.case_mask
    }

    /// `(first word, word count)` of each category.
    pub(crate) fn blocks(&self) -> &[(usize, usize)] {
        &self.blocks
    }
}
