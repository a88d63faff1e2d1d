//! Search indexes. Each index keeps a shared reference to the data set it
//! was built over and never mutates after construction, so queries may run
//! concurrently.

mod brute_force;
mod method;
mod mifile;
mod napp;
mod permfilter;
mod swgraph;
mod vptree;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{DataSet, ObjectId};
use crate::error::{ensure, Error, Result};
use crate::result::{Neighbor, TopK};
use crate::spaces::Space;

pub use brute_force::BruteForce;
pub use method::{AnyIndex, MethodConfig};
pub use mifile::{AccumulatorMetric, MiFileAccumulators, MiFileIndex, MiFileParams, MiFileSearch, Posting};
pub use napp::{NappIndex, NappParams, NappSearch, DEFAULT_CHUNK_SIZE};
pub(crate) use permfilter::PermStorage;
pub(crate) use vptree::Node;
pub use permfilter::{PermDistance, PermFilterIndex, PermFilterParams, PermFilterSearch, PermMode};
pub use swgraph::{SwGraph, SwGraphParams, SwSearch};
pub use vptree::{
    tune_vptree, GridSpec, PrunerParams, TuneOutcome, TuneTraceEntry, VpTree, VpTreeParams,
    DEFAULT_BUCKET_SIZE,
};

/// Number of filter-stage candidates handed to refinement.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Gamma {
    Count(usize),
    /// Fraction of the data set size, rounded up.
    Fraction(f64),
}

impl Gamma {
    pub fn resolve(self, n: usize) -> Result<usize> {
        match self {
            Gamma::Count(c) => Ok(c),
            Gamma::Fraction(f) => {
                ensure!(
                    f.is_finite() && f > 0.0,
                    "candidate fraction must be positive, got {f}"
                );
                Ok(((f * n as f64).ceil() as usize).min(n.max(1)))
            }
        }
    }
}

impl fmt::Display for Gamma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gamma::Count(c) => write!(f, "{c}"),
            Gamma::Fraction(x) => write!(f, "{x}"),
        }
    }
}

impl FromStr for Gamma {
    type Err = Error;

    /// Integers are counts; anything with a decimal point or a trailing `%`
    /// is a fraction.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::invalid(format!("invalid candidate budget `{s}`"));
        if let Some(pct) = s.strip_suffix('%') {
            let v: f64 = pct.parse().map_err(|_| bad())?;
            return Ok(Gamma::Fraction(v / 100.0));
        }
        if s.contains(['.', 'e', 'E']) {
            return s.parse().map(Gamma::Fraction).map_err(|_| bad());
        }
        s.parse().map(Gamma::Count).map_err(|_| bad())
    }
}

/// Exact distances from `query` to `candidates`, keeping the best `k`.
pub(crate) fn refine<S: Space>(
    space: &S,
    data: &DataSet<S::Object>,
    query: &S::Object,
    candidates: impl IntoIterator<Item = ObjectId>,
    k: usize,
) -> (Vec<Neighbor>, u64) {
    let mut top = TopK::new(k);
    let mut evaluated = 0;
    for id in candidates {
        top.push(id, space.query_distance(&data[id as usize], query));
        evaluated += 1;
    }
    (top.into_sorted(), evaluated)
}

pub(crate) fn check_k(k: usize) -> Result<()> {
    ensure!(k >= 1, "k must be at least 1");
    Ok(())
}

/// Runs `f` on a pool of `threads` workers (0 means the rayon default).
pub fn with_threads<R, F>(threads: usize, f: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    if threads == 0 {
        return f();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_parsing_and_rounding() {
        assert_eq!("25".parse::<Gamma>().unwrap(), Gamma::Count(25));
        assert_eq!("0.02".parse::<Gamma>().unwrap(), Gamma::Fraction(0.02));
        assert_eq!("2%".parse::<Gamma>().unwrap(), Gamma::Fraction(0.02));
        assert!("x".parse::<Gamma>().is_err());
        assert_eq!(Gamma::Fraction(0.02).resolve(10_000).unwrap(), 200);
        assert_eq!(Gamma::Fraction(0.001).resolve(1500).unwrap(), 2);
        assert_eq!(Gamma::Fraction(1.0).resolve(7).unwrap(), 7);
        assert!(Gamma::Fraction(0.0).resolve(7).is_err());
    }
}
