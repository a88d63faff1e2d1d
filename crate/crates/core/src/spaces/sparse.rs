use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};

/// Sparse vector with strictly increasing indices and cached L2 norm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    indices: Vec<u32>,
    values: Vec<f64>,
    norm: f64,
}

impl SparseVector {
    pub fn new(entries: Vec<(u32, f64)>) -> Result<Self> {
        for w in entries.windows(2) {
            ensure!(
                w[0].0 < w[1].0,
                "sparse indices must be strictly increasing ({} then {})",
                w[0].0,
                w[1].0
            );
        }
        for &(i, v) in &entries {
            ensure!(v.is_finite() && v != 0.0, "invalid value {v} at index {i}");
        }
        let (indices, values): (Vec<u32>, Vec<f64>) = entries.into_iter().unzip();
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        Ok(SparseVector {
            indices,
            values,
            norm,
        })
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    /// Inner product via ordered merge of the two index lists.
    pub fn dot(&self, other: &SparseVector) -> f64 {
        let (a, b) = (&self.indices, &other.indices);
        let (mut i, mut j) = (0, 0);
        let mut sum = 0.0;
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                Ordering::Less => i += 1,
                Ordering::Greater => j += 1,
                Ordering::Equal => {
                    sum += self.values[i] * other.values[j];
                    i += 1;
                    j += 1;
                }
            }
        }
        sum
    }
}

/// `1 - <x, y> / (|x| |y|)`, clamped to `[0, 2]`.
pub fn cosine_distance(x: &SparseVector, y: &SparseVector) -> Result<f64> {
    ensure!(
        !x.is_empty() && !y.is_empty() && x.norm > 0.0 && y.norm > 0.0,
        "cosine distance is undefined for zero-norm vectors"
    );
    Ok(cosine_unchecked(x, y))
}

#[inline]
pub(crate) fn cosine_unchecked(x: &SparseVector, y: &SparseVector) -> f64 {
    (1.0 - x.dot(y) / (x.norm * y.norm)).clamp(0.0, 2.0)
}
