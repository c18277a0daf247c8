//! Per-column preprocessing: an optional value transform, then optional
//! centering and scaling by the observed-cell mean and sample SD.

use kmmeans::MaskedDataset;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum ColumnOp {
    None,
    Log10,
    /// `asinh(theta u) / theta`, the identity at `theta = 0`.
    Asinh { theta: f64 },
}

impl ColumnOp {
    pub fn apply(self, u: f64) -> f64 {
        match self {
            ColumnOp::None => u,
            ColumnOp::Log10 => u.log10(),
            ColumnOp::Asinh { theta: 0.0 } => u,
            ColumnOp::Asinh { theta } => (theta * u).asinh() / theta,
        }
    }

    pub fn invert(self, v: f64) -> f64 {
        match self {
            ColumnOp::None => v,
            ColumnOp::Log10 => 10f64.powf(v),
            ColumnOp::Asinh { theta: 0.0 } => v,
            ColumnOp::Asinh { theta } => (theta * v).sinh() / theta,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransformSpec {
    pub ops: Vec<ColumnOp>,
    pub center_scale: bool,
}

impl TransformSpec {
    pub fn identity(p: usize) -> Self {
        Self {
            ops: vec![ColumnOp::None; p],
            center_scale: false,
        }
    }

    pub fn is_identity(&self) -> bool {
        !self.center_scale && self.ops.iter().all(|&op| op == ColumnOp::None)
    }
}

/// Parameters needed to reproduce or undo a transform.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FittedTransform {
    pub ops: Vec<ColumnOp>,
    /// Present when centering and scaling were applied.
    pub means: Option<Vec<f64>>,
    pub sds: Option<Vec<f64>>,
}

impl FittedTransform {
    /// Maps a transformed value in column `j` back to the original scale.
    pub fn invert(&self, j: usize, v: f64) -> f64 {
        let v = match (&self.means, &self.sds) {
            (Some(m), Some(s)) => v * s[j] + m[j],
            _ => v,
        };
        self.ops[j].invert(v)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransformError {
    /// Column is 1-based.
    #[error("column {0}: log10 needs strictly positive observed values")]
    NonPositiveForLog(usize),
    #[error("column {0}: zero variance (or fewer than two observed values); cannot scale")]
    ZeroVariance(usize),
    #[error("asinh theta must be finite and nonnegative, got {0}")]
    InvalidTheta(f64),
    #[error("transform has {ops} column ops for {p} columns")]
    WidthMismatch { ops: usize, p: usize },
}

pub fn apply_transforms(ds: &MaskedDataset, spec: &TransformSpec) -> Result<(MaskedDataset, FittedTransform), TransformError> {
    let (n, p) = (ds.n(), ds.p());
    if spec.ops.len() != p {
        return Err(TransformError::WidthMismatch { ops: spec.ops.len(), p });
    }
    let mut values = vec![0.0; n * p];
    for (j, &op) in spec.ops.iter().enumerate() {
        if let ColumnOp::Asinh { theta } = op {
            if !(theta.is_finite() && theta >= 0.0) {
                return Err(TransformError::InvalidTheta(theta));
            }
        }
        for i in 0..n {
            if let Some(u) = ds.value(i, j) {
                if op == ColumnOp::Log10 && u <= 0.0 {
                    return Err(TransformError::NonPositiveForLog(j + 1));
                }
                values[i * p + j] = op.apply(u);
            }
        }
    }
    let (means, sds) = if spec.center_scale {
        let mut means = Vec::with_capacity(p);
        let mut sds = Vec::with_capacity(p);
        for j in 0..p {
            let col: Vec<f64> = (0..n).filter(|&i| ds.is_observed(i, j)).map(|i| values[i * p + j]).collect();
            let m = col.len() as f64;
            let mean = col.iter().sum::<f64>() / m;
            let var = col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
            let sd = var.sqrt();
            if col.len() < 2 || sd.is_nan() || sd <= 0.0 || !sd.is_finite() {
                return Err(TransformError::ZeroVariance(j + 1));
            }
            for i in 0..n {
                values[i * p + j] = (values[i * p + j] - mean) / sd;
            }
            means.push(mean);
            sds.push(sd);
        }
        (Some(means), Some(sds))
    } else {
        (None, None)
    };
    let out = MaskedDataset::from_parts(n, p, values, ds.mask().to_vec()).expect("mask unchanged");
    Ok((
        out,
        FittedTransform {
            ops: spec.ops.clone(),
            means,
            sds,
        },
    ))
}
