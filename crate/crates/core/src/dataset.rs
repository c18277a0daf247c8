//! The masked data matrix: observed values plus an observation mask.

use crate::error::{Error, Result};

/// An `n x p` matrix of reals paired with a mask of observed cells.
///
/// Values are stored row-major. Cells whose mask bit is unset are never read;
/// in debug builds they are overwritten with NaN so that accidental reads show
/// up in results. Every row has at least one observed feature.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskedDataset {
    n: usize,
    p: usize,
    values: Vec<f64>,
    mask: Vec<bool>,
    row_observed: Vec<usize>,
    p_bar: f64,
}

impl MaskedDataset {
    /// Builds a dataset from rows of optional values; `None` marks a missing cell.
    pub fn from_rows<R: AsRef<[Option<f64>]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::EmptyInput);
        }
        let p = rows[0].as_ref().len();
        if p == 0 {
            return Err(Error::RowAllMissing(0));
        }
        let mut values = Vec::with_capacity(n * p);
        let mut mask = Vec::with_capacity(n * p);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != p {
                return Err(Error::RaggedRows {
                    row: i,
                    expected: p,
                    found: row.len(),
                });
            }
            for cell in row {
                values.push(cell.unwrap_or(0.0));
                mask.push(cell.is_some());
            }
        }
        Self::from_parts(n, p, values, mask)
    }

    /// Builds a dataset from flat row-major buffers.
    pub fn from_parts(n: usize, p: usize, mut values: Vec<f64>, mask: Vec<bool>) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyInput);
        }
        if p == 0 || values.len() != n * p || mask.len() != n * p {
            return Err(Error::ShapeMismatch { n, p });
        }
        let mut row_observed = Vec::with_capacity(n);
        for i in 0..n {
            let mut count = 0;
            for j in 0..p {
                let idx = i * p + j;
                if mask[idx] {
                    if !values[idx].is_finite() {
                        return Err(Error::NonFiniteValue { row: i, col: j });
                    }
                    count += 1;
                } else if cfg!(debug_assertions) {
                    values[idx] = f64::NAN;
                }
            }
            if count == 0 {
                return Err(Error::RowAllMissing(i));
            }
            row_observed.push(count);
        }
        let total: usize = row_observed.iter().sum();
        Ok(Self {
            n,
            p,
            values,
            mask,
            row_observed,
            p_bar: total as f64 / n as f64,
        })
    }

    /// A fully observed dataset.
    pub fn complete(n: usize, p: usize, values: Vec<f64>) -> Result<Self> {
        Self::from_parts(n, p, values, vec![true; n * p])
    }

    /// Same observed values under a different mask. Values under newly unset
    /// mask bits are dropped.
    pub fn remask(&self, mask: Vec<bool>) -> Result<Self> {
        Self::from_parts(self.n, self.p, self.values.clone(), mask)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// Average number of observed features per row.
    pub fn p_bar(&self) -> f64 {
        self.p_bar
    }

    /// Number of observed features in each row.
    pub fn row_observed(&self) -> &[usize] {
        &self.row_observed
    }

    /// Total number of observed cells.
    pub fn total_observed(&self) -> usize {
        self.row_observed.iter().sum()
    }

    pub fn is_observed(&self, i: usize, j: usize) -> bool {
        self.mask[i * self.p + j]
    }

    pub fn value(&self, i: usize, j: usize) -> Option<f64> {
        let idx = i * self.p + j;
        self.mask[idx].then(|| self.values[idx])
    }

    /// Raw row values; entries with an unset mask bit are placeholders.
    #[inline]
    pub fn row_values(&self, i: usize) -> &[f64] {
        &self.values[i * self.p..(i + 1) * self.p]
    }

    #[inline]
    pub fn row_mask(&self, i: usize) -> &[bool] {
        &self.mask[i * self.p..(i + 1) * self.p]
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// Whether every cell is observed.
    pub fn is_complete(&self) -> bool {
        self.mask.iter().all(|&m| m)
    }

    /// Fraction of cells that are unobserved.
    pub fn missing_fraction(&self) -> f64 {
        1.0 - self.total_observed() as f64 / (self.n * self.p) as f64
    }

    /// Rows as optional values, mainly for writing out.
    pub fn rows(&self) -> impl Iterator<Item = Vec<Option<f64>>> + '_ {
        (0..self.n).map(move |i| (0..self.p).map(|j| self.value(i, j)).collect())
    }

    /// Per-column mean of observed cells, `None` for columns with no observations.
    pub fn column_means(&self) -> Vec<Option<f64>> {
        let mut sums = vec![0.0; self.p];
        let mut counts = vec![0usize; self.p];
        for i in 0..self.n {
            for j in 0..self.p {
                if let Some(x) = self.value(i, j) {
                    sums[j] += x;
                    counts[j] += 1;
                }
            }
        }
        sums.into_iter()
            .zip(counts)
            .map(|(s, c)| (c > 0).then(|| s / c as f64))
            .collect()
    }
}
