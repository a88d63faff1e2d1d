use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};

pub const CENTROID_DIM: usize = 7;

const WEIGHT_SUM_TOLERANCE: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub centroid: [f64; CENTROID_DIM],
    pub weight: f64,
}

/// Feature signature: weighted cluster representatives.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Signature {
    pub clusters: Vec<Cluster>,
}

impl Signature {
    pub fn new(clusters: Vec<Cluster>) -> Result<Self> {
        let sig = Signature { clusters };
        sig.check()?;
        Ok(sig)
    }

    pub fn check(&self) -> Result<()> {
        ensure!(!self.clusters.is_empty(), "signature has no clusters");
        for c in &self.clusters {
            ensure!(
                c.centroid.iter().all(|v| v.is_finite()),
                "non-finite centroid coordinate"
            );
            ensure!(
                c.weight > 0.0 && c.weight <= 1.0,
                "cluster weight {} outside (0, 1]",
                c.weight
            );
        }
        let sum: f64 = self.clusters.iter().map(|c| c.weight).sum();
        ensure!(
            (sum - 1.0).abs() <= WEIGHT_SUM_TOLERANCE,
            "cluster weights sum to {sum}, expected 1"
        );
        Ok(())
    }

    fn total_cmp(&self, other: &Signature) -> Ordering {
        let flat = |s: &Signature| {
            s.clusters
                .iter()
                .flat_map(|c| c.centroid.into_iter().chain(std::iter::once(c.weight)))
                .collect::<Vec<_>>()
        };
        let (a, b) = (flat(self), flat(other));
        a.iter()
            .zip(&b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or_else(|| a.len().cmp(&b.len()))
    }
}

/// Similarity between cluster representatives feeding the quadratic form.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SqfdSimilarity {
    /// `1 / (1 + L2(r, s))`
    #[default]
    Heuristic,
    /// `exp(-alpha * L2(r, s)^2)`
    Gaussian { alpha: f64 },
}

impl SqfdSimilarity {
    #[inline]
    fn eval(self, r: &[f64; CENTROID_DIM], s: &[f64; CENTROID_DIM]) -> f64 {
        let sq: f64 = r.iter().zip(s).map(|(a, b)| (a - b) * (a - b)).sum();
        match self {
            SqfdSimilarity::Heuristic => 1.0 / (1.0 + sq.sqrt()),
            SqfdSimilarity::Gaussian { alpha } => (-alpha * sq).exp(),
        }
    }
}

fn cross_term(x: &Signature, y: &Signature, sim: SqfdSimilarity) -> f64 {
    let mut sum = 0.0;
    for a in &x.clusters {
        for b in &y.clusters {
            sum += a.weight * b.weight * sim.eval(&a.centroid, &b.centroid);
        }
    }
    sum
}

/// Signature quadratic form distance with the default heuristic similarity.
pub fn sqfd(x: &Signature, y: &Signature) -> f64 {
    sqfd_with(x, y, SqfdSimilarity::Heuristic)
}

/// `sqrt(w^T A w)` with `w = (w_x, -w_y)`. Evaluated as
/// `xx + yy - 2xy`, with the cross term always summed in a canonical
/// argument order so that `d(x, y) == d(y, x)` bitwise. Negative values of
/// the form, which the heuristic kernel can produce, clamp to zero.
pub(crate) fn sqfd_with(x: &Signature, y: &Signature, sim: SqfdSimilarity) -> f64 {
    let (x, y) = if x.total_cmp(y) == Ordering::Greater {
        (y, x)
    } else {
        (x, y)
    };
    let form = cross_term(x, x, sim) + cross_term(y, y, sim) - 2.0 * cross_term(x, y, sim);
    form.max(0.0).sqrt()
}
