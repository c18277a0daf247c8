use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};

/// Cross-tabulation of two labelings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Contingency {
    /// Distinct labels of the first labeling, sorted; one table row each.
    pub row_labels: Vec<usize>,
    /// Distinct labels of the second labeling, sorted; one table column each.
    pub col_labels: Vec<usize>,
    pub counts: Vec<Vec<u64>>,
}

impl Contingency {
    pub fn new(a: &[usize], b: &[usize]) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::InvalidArgument(format!(
                "labelings differ in length ({} vs {})",
                a.len(),
                b.len()
            )));
        }
        let index = |xs: &[usize]| -> BTreeMap<usize, usize> {
            let mut m = BTreeMap::new();
            for &x in xs {
                m.entry(x).or_insert(0);
            }
            for (pos, v) in m.values_mut().enumerate() {
                *v = pos;
            }
            m
        };
        let (ra, cb) = (index(a), index(b));
        let mut counts = vec![vec![0u64; cb.len()]; ra.len()];
        for (x, y) in a.iter().zip(b) {
            counts[ra[x]][cb[y]] += 1;
        }
        Ok(Self {
            row_labels: ra.into_keys().collect(),
            col_labels: cb.into_keys().collect(),
            counts,
        })
    }
}

fn pairs(x: u64) -> i128 {
    let x = x as i128;
    x * (x - 1) / 2
}

/// Hubert-Arabie adjusted Rand index.
///
/// Evaluated in exact integer arithmetic up to one final division, so
/// identical partitions score exactly 1. When the chance-corrected denominator
/// vanishes (both labelings trivial) the index is 1 for identical partitions
/// and [`Error::DegenerateDenominator`] otherwise.
pub fn adjusted_rand(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() < 2 {
        return Err(Error::InvalidArgument("need at least two labels".into()));
    }
    let table = Contingency::new(a, b)?;
    let n = a.len() as u64;
    let index: i128 = table.counts.iter().flatten().map(|&c| pairs(c)).sum();
    let row_sums: i128 = table
        .counts
        .iter()
        .map(|r| pairs(r.iter().sum()))
        .sum();
    let col_sums: i128 = (0..table.col_labels.len())
        .map(|j| pairs(table.counts.iter().map(|r| r[j]).sum()))
        .sum();
    let total = pairs(n);
    // (index - E) / (M - E) with E = rows * cols / total and M = (rows + cols) / 2,
    // scaled by 2 * total.
    let num = 2 * (index * total - row_sums * col_sums);
    let den = (row_sums + col_sums) * total - 2 * row_sums * col_sums;
    if den == 0 {
        return if index == row_sums && index == col_sums {
            Ok(1.0)
        } else {
            Err(Error::DegenerateDenominator)
        };
    }
    Ok(num as f64 / den as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_is_one() {
        let a = [0, 0, 1, 1, 2, 2, 2];
        assert_eq!(adjusted_rand(&a, &a).unwrap(), 1.0);
        let relabeled = [5, 5, 3, 3, 9, 9, 9];
        assert_eq!(adjusted_rand(&a, &relabeled).unwrap(), 1.0);
    }

    #[test]
    fn hand_case() {
        assert_eq!(adjusted_rand(&[1, 1, 2, 2], &[1, 2, 1, 2]).unwrap(), -0.5);
    }

    #[test]
    fn symmetric() {
        let a = [0, 0, 1, 1, 1, 2, 0, 2];
        let b = [1, 0, 1, 1, 0, 2, 2, 2];
        assert_eq!(adjusted_rand(&a, &b).unwrap(), adjusted_rand(&b, &a).unwrap());
    }

    #[test]
    fn degenerate_cases() {
        assert_eq!(adjusted_rand(&[0, 0, 0], &[4, 4, 4]).unwrap(), 1.0);
        assert_eq!(adjusted_rand(&[0, 1, 2], &[0, 1, 2]).unwrap(), 1.0);
        // One trivial side only: the denominator stays positive.
        assert_eq!(adjusted_rand(&[0, 0, 0], &[0, 1, 2]).unwrap(), 0.0);
    }

    #[test]
    fn length_mismatch() {
        assert!(adjusted_rand(&[0, 1], &[0]).is_err());
        assert!(adjusted_rand(&[0], &[0]).is_err());
    }

    #[test]
    fn contingency_layout() {
        let t = Contingency::new(&[2, 2, 1], &[7, 8, 8]).unwrap();
        assert_eq!(t.row_labels, vec![1, 2]);
        assert_eq!(t.col_labels, vec![7, 8]);
        assert_eq!(t.counts, vec![vec![0, 1], vec![1, 1]]);
    }
}
