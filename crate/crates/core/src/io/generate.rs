//! Seeded synthetic data. Every generator draws from ChaCha8, so the output
//! for a given seed is the same on every platform.

use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, Gamma, Normal};
use serde::{Deserialize, Serialize};

use crate::dataset::DataSet;
use crate::error::{ensure, Error, Result};
use crate::io::LoadedData;
use crate::rng;
use crate::spaces::{Cluster, Histogram, Sequence, Signature, SparseVector, CENTROID_DIM};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SyntheticKind {
    GaussianMixture,
    Uniform,
    Dirichlet,
    Dna,
    Sparse,
    Signatures,
}

impl SyntheticKind {
    pub const ALL: [SyntheticKind; 6] = [
        SyntheticKind::GaussianMixture,
        SyntheticKind::Uniform,
        SyntheticKind::Dirichlet,
        SyntheticKind::Dna,
        SyntheticKind::Sparse,
        SyntheticKind::Signatures,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SyntheticKind::GaussianMixture => "gaussian-mixture",
            SyntheticKind::Uniform => "uniform",
            SyntheticKind::Dirichlet => "dirichlet",
            SyntheticKind::Dna => "dna",
            SyntheticKind::Sparse => "sparse",
            SyntheticKind::Signatures => "signatures",
        }
    }
}

impl fmt::Display for SyntheticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SyntheticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SyntheticKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown generator `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticParams {
    pub n: usize,
    pub dim: usize,
    /// Mixture components (gaussian-mixture).
    pub clusters: usize,
    /// Per-coordinate standard deviation around each mixture center.
    pub spread: f64,
    /// Concentration of every Dirichlet component.
    pub alpha: f64,
    /// Non-zeros per sparse vector.
    pub nnz: usize,
    pub mean_length: f64,
    pub sd_length: f64,
    /// Clusters per feature signature.
    pub signature_clusters: usize,
}

impl Default for SyntheticParams {
    fn default() -> Self {
        SyntheticParams {
            n: 1000,
            dim: 16,
            clusters: 10,
            spread: 0.1,
            alpha: 1.0,
            nnz: 10,
            mean_length: 32.0,
            sd_length: 4.0,
            signature_clusters: 8,
        }
    }
}

pub fn generate(kind: SyntheticKind, params: &SyntheticParams, seed: u64) -> Result<LoadedData> {
    let p = params;
    Ok(match kind {
        SyntheticKind::GaussianMixture => {
            LoadedData::Dense(gaussian_mixture(p.n, p.dim, p.clusters, p.spread, seed)?)
        }
        SyntheticKind::Uniform => LoadedData::Dense(uniform(p.n, p.dim, seed)?),
        SyntheticKind::Dirichlet => LoadedData::Histograms(dirichlet(p.n, p.dim, p.alpha, seed)?),
        SyntheticKind::Dna => LoadedData::Sequences(dna(p.n, p.mean_length, p.sd_length, seed)?),
        SyntheticKind::Sparse => LoadedData::Sparse(random_sparse(p.n, p.dim, p.nnz, seed)?),
        SyntheticKind::Signatures => LoadedData::Signatures(random_signatures(p.n, p.signature_clusters, seed)?),
    })
}

/// Points scattered around `clusters` centers drawn uniformly from the
/// unit cube.
pub fn gaussian_mixture(n: usize, dim: usize, clusters: usize, spread: f64, seed: u64) -> Result<DataSet<Vec<f64>>> {
    ensure!(dim >= 1, "dimension must be positive");
    ensure!(clusters >= 1, "at least one cluster is required");
    ensure!(spread >= 0.0 && spread.is_finite(), "spread must be non-negative, got {spread}");
    let noise = Normal::new(0.0, spread).map_err(|e| Error::invalid(format!("spread {spread}: {e}")))?;
    let mut rng = rng::seeded(seed);
    let centers: Vec<Vec<f64>> = (0..clusters)
        .map(|_| (0..dim).map(|_| rng.gen::<f64>()).collect())
        .collect();
    Ok((0..n)
        .map(|_| {
            let c = &centers[rng.gen_range(0..clusters)];
            c.iter().map(|&x| x + noise.sample(&mut rng)).collect()
        })
        .collect())
}

/// Points uniform in the unit cube.
pub fn uniform(n: usize, dim: usize, seed: u64) -> Result<DataSet<Vec<f64>>> {
    ensure!(dim >= 1, "dimension must be positive");
    let mut rng = rng::seeded(seed);
    Ok((0..n).map(|_| (0..dim).map(|_| rng.gen::<f64>()).collect()).collect())
}

/// Histograms from a symmetric Dirichlet distribution.
pub fn dirichlet(n: usize, dim: usize, alpha: f64, seed: u64) -> Result<DataSet<Histogram>> {
    ensure!(dim >= 1, "dimension must be positive");
    let gamma = Gamma::new(alpha, 1.0).map_err(|e| Error::invalid(format!("alpha {alpha}: {e}")))?;
    let mut rng = rng::seeded(seed);
    (0..n)
        .map(|_| {
            // Underflowing draws are raised to the smallest normal value so
            // every component stays positive.
            let mut v: Vec<f64> = (0..dim)
                .map(|_| gamma.sample(&mut rng).max(f64::MIN_POSITIVE))
                .collect();
            let sum: f64 = v.iter().sum();
            v.iter_mut().for_each(|x| *x /= sum);
            Histogram::new(v)
        })
        .collect::<Result<Vec<_>>>()
        .map(DataSet::new)
}

/// Strings over `ACGT` whose lengths are normal draws rounded to the
/// nearest integer and raised to at least 1.
pub fn dna(n: usize, mean_length: f64, sd_length: f64, seed: u64) -> Result<DataSet<Sequence>> {
    ensure!(
        mean_length.is_finite() && sd_length.is_finite() && sd_length >= 0.0,
        "invalid length distribution N({mean_length}, {sd_length})"
    );
    let lengths = Normal::new(mean_length, sd_length)
        .map_err(|e| Error::invalid(format!("length distribution: {e}")))?;
    const ALPHABET: &[u8; 4] = b"ACGT";
    let mut rng = rng::seeded(seed);
    Ok((0..n)
        .map(|_| {
            let len = (lengths.sample(&mut rng).round() as i64).max(1) as usize;
            Sequence((0..len).map(|_| ALPHABET[rng.gen_range(0..4)]).collect())
        })
        .collect())
}

/// Sparse vectors with `nnz` distinct random indices below `dim` and
/// positive values.
pub fn random_sparse(n: usize, dim: usize, nnz: usize, seed: u64) -> Result<DataSet<SparseVector>> {
    ensure!(nnz >= 1 && nnz <= dim, "nnz = {nnz} must lie in 1..=dim = {dim}");
    ensure!(dim <= u32::MAX as usize, "dimension exceeds the index range");
    let mut rng = rng::seeded(seed);
    (0..n)
        .map(|_| {
            let mut idx = sample(&mut rng, dim, nnz).into_vec();
            idx.sort_unstable();
            let entries = idx
                .into_iter()
                .map(|i| (i as u32, rng.gen_range(0.01..1.0)))
                .collect();
            SparseVector::new(entries)
        })
        .collect::<Result<Vec<_>>>()
        .map(DataSet::new)
}

/// Signatures with `clusters` uniform centroids and weights summing to 1.
pub fn random_signatures(n: usize, clusters: usize, seed: u64) -> Result<DataSet<Signature>> {
    ensure!(clusters >= 1, "at least one cluster is required");
    let mut rng = rng::seeded(seed);
    (0..n)
        .map(|_| {
            let raw: Vec<f64> = (0..clusters).map(|_| rng.gen_range(0.1..1.0)).collect();
            let sum: f64 = raw.iter().sum();
            let clusters = raw
                .into_iter()
                .map(|w| {
                    let mut centroid = [0.0; CENTROID_DIM];
                    centroid.iter_mut().for_each(|c| *c = rng.gen::<f64>());
                    Cluster {
                        centroid,
                        weight: w / sum,
                    }
                })
                .collect();
            Signature::new(clusters)
        })
        .collect::<Result<Vec<_>>>()
        .map(DataSet::new)
}
