//! Object types, distance functions and the [`Space`] abstraction tying them
//! together.
//!
//! Every index in this crate is generic over a [`Space`]. A space fixes the
//! object representation and the distance, and for asymmetric distances it
//! also fixes which argument the stored object occupies (see [`QueryMode`]).

mod dense;
pub mod diagnostics;
mod edit;
mod sparse;
mod sqfd;

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use dense::{js_divergence, kl_divergence, l2, Histogram, HISTOGRAM_SUM_TOLERANCE};
pub use edit::{edit_distance, normalized_levenshtein, Sequence};
pub use sparse::{cosine_distance, SparseVector};
pub use sqfd::{sqfd, Cluster, Signature, SqfdSimilarity, CENTROID_DIM};

/// Dense real-valued vector compared with L2.
pub type DenseVector = Vec<f64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpaceKind {
    L2,
    CosineSparse,
    KlDiv,
    JsDiv,
    NormLevenshtein,
    Sqfd,
}

impl SpaceKind {
    pub const ALL: [SpaceKind; 6] = [
        SpaceKind::L2,
        SpaceKind::CosineSparse,
        SpaceKind::KlDiv,
        SpaceKind::JsDiv,
        SpaceKind::NormLevenshtein,
        SpaceKind::Sqfd,
    ];

    /// Only the KL-divergence is asymmetric.
    pub fn is_symmetric(self) -> bool {
        self != SpaceKind::KlDiv
    }

    pub fn is_histogram(self) -> bool {
        matches!(self, SpaceKind::KlDiv | SpaceKind::JsDiv)
    }

    /// Exponent of the polynomial VP-tree pruner appropriate for the space.
    pub fn default_pruner_beta(self) -> u32 {
        if self == SpaceKind::KlDiv {
            2
        } else {
            1
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SpaceKind::L2 => "l2",
            SpaceKind::CosineSparse => "cosine-sparse",
            SpaceKind::KlDiv => "kl-div",
            SpaceKind::JsDiv => "js-div",
            SpaceKind::NormLevenshtein => "norm-levenshtein",
            SpaceKind::Sqfd => "sqfd",
        }
    }
}

impl fmt::Display for SpaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SpaceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SpaceKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown space kind `{s}`")))
    }
}

/// Argument order used when comparing a stored object with a query.
///
/// With `Left` the stored object is the first argument, `d(x, q)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QueryMode {
    #[default]
    Left,
    Right,
}

impl FromStr for QueryMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "left" => Ok(QueryMode::Left),
            "right" => Ok(QueryMode::Right),
            _ => Err(Error::invalid(format!("unknown query mode `{s}`"))),
        }
    }
}

pub trait Space: Send + Sync {
    type Object: Clone + PartialEq + fmt::Debug + Send + Sync + Serialize + DeserializeOwned;

    fn kind(&self) -> SpaceKind;

    /// Raw distance `d(x, y)`. Objects are assumed to have passed
    /// [`Space::validate`]; use the free functions for checked evaluation.
    fn distance(&self, x: &Self::Object, y: &Self::Object) -> f64;

    /// Checks that an object can take part in distance evaluations.
    fn validate(&self, x: &Self::Object) -> Result<()>;

    fn query_mode(&self) -> QueryMode {
        QueryMode::Left
    }

    fn is_symmetric(&self) -> bool {
        self.kind().is_symmetric()
    }

    /// Distance between a stored object and a query, honoring the query mode.
    #[inline]
    fn query_distance(&self, data: &Self::Object, query: &Self::Object) -> f64 {
        match self.query_mode() {
            QueryMode::Left => self.distance(data, query),
            QueryMode::Right => self.distance(query, data),
        }
    }

    /// Distance from an object to a pivot when inducing its permutation.
    /// Left mode puts the object first, `d(x, pivot)`.
    #[inline]
    fn pivot_distance(&self, x: &Self::Object, pivot: &Self::Object) -> f64 {
        match self.query_mode() {
            QueryMode::Left => self.distance(x, pivot),
            QueryMode::Right => self.distance(pivot, x),
        }
    }
}

impl<S: Space + ?Sized> Space for Arc<S> {
    type Object = S::Object;

    fn kind(&self) -> SpaceKind {
        (**self).kind()
    }
    fn distance(&self, x: &Self::Object, y: &Self::Object) -> f64 {
        (**self).distance(x, y)
    }
    fn validate(&self, x: &Self::Object) -> Result<()> {
        (**self).validate(x)
    }
    fn query_mode(&self) -> QueryMode {
        (**self).query_mode()
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct L2Space;

impl Space for L2Space {
    type Object = DenseVector;

    fn kind(&self) -> SpaceKind {
        SpaceKind::L2
    }

    #[inline]
    fn distance(&self, x: &DenseVector, y: &DenseVector) -> f64 {
        dense::l2_unchecked(x, y)
    }

    fn validate(&self, x: &DenseVector) -> Result<()> {
        dense::check_finite(x)
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct CosineSpace;

impl Space for CosineSpace {
    type Object = SparseVector;

    fn kind(&self) -> SpaceKind {
        SpaceKind::CosineSparse
    }

    #[inline]
    fn distance(&self, x: &SparseVector, y: &SparseVector) -> f64 {
        sparse::cosine_unchecked(x, y)
    }

    fn validate(&self, x: &SparseVector) -> Result<()> {
        if x.is_empty() || x.norm() == 0.0 {
            return Err(Error::invalid("sparse vector has zero norm"));
        }
        Ok(())
    }
}

/// KL-divergence over histograms with cached logarithms.
#[derive(Clone, Copy, Debug, Default)]
pub struct KlSpace {
    pub mode: QueryMode,
}

impl KlSpace {
    pub fn new(mode: QueryMode) -> Self {
        KlSpace { mode }
    }
}

impl Space for KlSpace {
    type Object = Histogram;

    fn kind(&self) -> SpaceKind {
        SpaceKind::KlDiv
    }

    #[inline]
    fn distance(&self, x: &Histogram, y: &Histogram) -> f64 {
        x.kl(y)
    }

    fn validate(&self, x: &Histogram) -> Result<()> {
        x.check_distribution()
    }

    fn query_mode(&self) -> QueryMode {
        self.mode
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct JsSpace;

impl Space for JsSpace {
    type Object = Histogram;

    fn kind(&self) -> SpaceKind {
        SpaceKind::JsDiv
    }

    #[inline]
    fn distance(&self, x: &Histogram, y: &Histogram) -> f64 {
        x.js(y)
    }

    fn validate(&self, x: &Histogram) -> Result<()> {
        x.check_distribution()
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct LevenshteinSpace;

impl Space for LevenshteinSpace {
    type Object = Sequence;

    fn kind(&self) -> SpaceKind {
        SpaceKind::NormLevenshtein
    }

    #[inline]
    fn distance(&self, x: &Sequence, y: &Sequence) -> f64 {
        normalized_levenshtein(x, y)
    }

    fn validate(&self, _x: &Sequence) -> Result<()> {
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SqfdSpace {
    pub similarity: SqfdSimilarity,
}

impl Space for SqfdSpace {
    type Object = Signature;

    fn kind(&self) -> SpaceKind {
        SpaceKind::Sqfd
    }

    #[inline]
    fn distance(&self, x: &Signature, y: &Signature) -> f64 {
        sqfd::sqfd_with(x, y, self.similarity)
    }

    fn validate(&self, x: &Signature) -> Result<()> {
        x.check()
    }
}

/// Wraps a space and counts every distance evaluation.
#[derive(Debug, Default)]
pub struct CountingSpace<S> {
    inner: S,
    count: AtomicU64,
}

impl<S> CountingSpace<S> {
    pub fn new(inner: S) -> Self {
        CountingSpace {
            inner,
            count: AtomicU64::new(0),
        }
    }

    pub fn count(&self) -> u64 {
        self.count.load(Ordering::Relaxed)
    }

    pub fn reset(&self) {
        self.count.store(0, Ordering::Relaxed);
    }

    pub fn inner(&self) -> &S {
        &self.inner
    }
}

impl<S: Space> Space for CountingSpace<S> {
    type Object = S::Object;

    fn kind(&self) -> SpaceKind {
        self.inner.kind()
    }

    fn distance(&self, x: &Self::Object, y: &Self::Object) -> f64 {
        self.count.fetch_add(1, Ordering::Relaxed);
        self.inner.distance(x, y)
    }

    fn validate(&self, x: &Self::Object) -> Result<()> {
        self.inner.validate(x)
    }

    fn query_mode(&self) -> QueryMode {
        self.inner.query_mode()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_round_trips_through_its_name() {
        for kind in SpaceKind::ALL {
            assert_eq!(kind.name().parse::<SpaceKind>().unwrap(), kind);
        }
        assert!("euclid".parse::<SpaceKind>().is_err());
    }

    #[test]
    fn only_kl_is_asymmetric() {
        let asym: Vec<_> = SpaceKind::ALL.into_iter().filter(|k| !k.is_symmetric()).collect();
        assert_eq!(asym, vec![SpaceKind::KlDiv]);
    }

    #[test]
    fn query_mode_swaps_arguments() {
        let a = Histogram::new(vec![0.9, 0.1]).unwrap();
        let b = Histogram::new(vec![0.5, 0.5]).unwrap();
        let left = KlSpace::new(QueryMode::Left);
        let right = KlSpace::new(QueryMode::Right);
        assert_eq!(left.query_distance(&a, &b), a.kl(&b));
        assert_eq!(right.query_distance(&a, &b), b.kl(&a));
        assert_eq!(left.pivot_distance(&a, &b), a.kl(&b));
        assert_eq!(right.pivot_distance(&a, &b), b.kl(&a));
    }

    #[test]
    fn counting_space_counts() {
        let space = CountingSpace::new(L2Space);
        let x = vec![0.0, 0.0];
        let y = vec![3.0, 4.0];
        assert_eq!(space.distance(&x, &y), 5.0);
        assert_eq!(space.query_distance(&x, &y), 5.0);
        assert_eq!(space.count(), 2);
        space.reset();
        assert_eq!(space.count(), 0);
    }
}
