//! Brute-force filtering in permutation space.
//!
//! Every object's induced permutation is stored in one contiguous block
//! (full ranks, or packed bits after binarization). A query computes its own
//! permutation, scores all stored ones, keeps the `γ` best through a
//! linear-time partial selection and refines them with the original
//! distance.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dataset::{DataSet, ObjectId};
use crate::error::{ensure, Error, Result};
use crate::index::{check_k, refine, with_threads, Gamma};
use crate::permutation::{
    binarize_into, compute_permutation, compute_permutations, footrule_ranks, hamming_words,
    select_pivots, spearman_ranks, words_for, PivotSet, Rank,
};
use crate::result::{QueryResult, SearchStats};
use crate::spaces::Space;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PermMode {
    Full,
    /// Binarized permutations; `None` picks `m / 2`.
    Binary { threshold: Option<usize> },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PermDistance {
    #[default]
    Spearman,
    Footrule,
    Hamming,
}

impl fmt::Display for PermDistance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PermDistance::Spearman => "spearman",
            PermDistance::Footrule => "footrule",
            PermDistance::Hamming => "hamming",
        })
    }
}

impl FromStr for PermDistance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spearman" => Ok(PermDistance::Spearman),
            "footrule" => Ok(PermDistance::Footrule),
            "hamming" => Ok(PermDistance::Hamming),
            _ => Err(Error::invalid(format!("unknown permutation distance `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PermFilterParams {
    pub m: usize,
    pub mode: PermMode,
    pub seed: u64,
    pub threads: usize,
}

impl Default for PermFilterParams {
    fn default() -> Self {
        PermFilterParams {
            m: 128,
            mode: PermMode::Full,
            seed: 0,
            threads: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PermFilterSearch {
    pub gamma: Gamma,
    pub distance: PermDistance,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub(crate) enum PermStorage {
    Full(Vec<Rank>),
    Binary {
        threshold: Rank,
        words_per_object: usize,
        bits: Vec<u64>,
    },
}

#[derive(Debug)]
pub struct PermFilterIndex<S: Space> {
    space: S,
    data: Arc<DataSet<S::Object>>,
    pivots: PivotSet<S::Object>,
    storage: PermStorage,
}

impl<S: Space> PermFilterIndex<S> {
    /// Samples `m` pivots from the data and stores every permutation.
    pub fn build(space: S, data: Arc<DataSet<S::Object>>, params: &PermFilterParams) -> Result<Self> {
        let pivots = select_pivots(&data, params.m, params.seed)?;
        Self::build_with_pivots(space, data, pivots, params.mode, params.threads)
    }

    pub fn build_with_pivots(
        space: S,
        data: Arc<DataSet<S::Object>>,
        pivots: PivotSet<S::Object>,
        mode: PermMode,
        threads: usize,
    ) -> Result<Self> {
        let m = pivots.len();
        let threshold = match mode {
            PermMode::Full => None,
            PermMode::Binary { threshold } => {
                let b = threshold.unwrap_or((m / 2).max(1));
                ensure!((1..=m).contains(&b), "binarization threshold {b} outside 1..={m}");
                Some(b as Rank)
            }
        };
        let ranks = with_threads(threads, || compute_permutations(&data, &pivots, &space));
        let storage = match threshold {
            None => PermStorage::Full(ranks),
            Some(threshold) => {
                let words_per_object = words_for(m);
                let mut bits = vec![0u64; data.len() * words_per_object];
                if m > 0 {
                    for (row, out) in ranks.chunks(m).zip(bits.chunks_mut(words_per_object)) {
                        binarize_into(row, threshold, out);
                    }
                }
                PermStorage::Binary {
                    threshold,
                    words_per_object,
                    bits,
                }
            }
        };
        Ok(PermFilterIndex {
            space,
            data,
            pivots,
            storage,
        })
    }

    pub(crate) fn from_parts(
        space: S,
        data: Arc<DataSet<S::Object>>,
        pivots: PivotSet<S::Object>,
        storage: PermStorage,
    ) -> Self {
        PermFilterIndex {
            space,
            data,
            pivots,
            storage,
        }
    }

    pub(crate) fn storage(&self) -> &PermStorage {
        &self.storage
    }

    pub fn space(&self) -> &S {
        &self.space
    }

    pub fn data(&self) -> &Arc<DataSet<S::Object>> {
        &self.data
    }

    pub fn pivots(&self) -> &PivotSet<S::Object> {
        &self.pivots
    }

    pub fn num_pivots(&self) -> usize {
        self.pivots.len()
    }

    pub fn is_binary(&self) -> bool {
        matches!(self.storage, PermStorage::Binary { .. })
    }

    /// Stored full-rank permutation of `id` (full mode only).
    pub fn stored_ranks(&self, id: usize) -> Option<&[Rank]> {
        match &self.storage {
            PermStorage::Full(ranks) => {
                let m = self.pivots.len();
                ranks.get(id * m..(id + 1) * m)
            }
            PermStorage::Binary { .. } => None,
        }
    }

    /// Bytes held by the stored permutations.
    pub fn index_bytes(&self) -> usize {
        match &self.storage {
            PermStorage::Full(r) => r.len() * std::mem::size_of::<Rank>(),
            PermStorage::Binary { bits, .. } => bits.len() * 8,
        }
    }

    fn default_distance(&self) -> PermDistance {
        if self.is_binary() {
            PermDistance::Hamming
        } else {
            PermDistance::Spearman
        }
    }

    /// Permutation-space distance from the query permutation to every
    /// stored permutation, in id order.
    fn score_all(&self, query: &S::Object, distance: PermDistance) -> Result<Vec<u64>> {
        let q = compute_permutation(query, &self.pivots, &self.space);
        let m = self.pivots.len();
        let n = self.data.len();
        match (&self.storage, distance) {
            (PermStorage::Full(ranks), PermDistance::Spearman) => Ok(ranks
                .chunks(m)
                .take(n)
                .map(|row| spearman_ranks(row, q.ranks()))
                .collect()),
            (PermStorage::Full(ranks), PermDistance::Footrule) => Ok(ranks
                .chunks(m)
                .take(n)
                .map(|row| footrule_ranks(row, q.ranks()))
                .collect()),
            (
                PermStorage::Binary {
                    threshold,
                    words_per_object,
                    bits,
                },
                PermDistance::Hamming,
            ) => {
                let mut qbits = vec![0u64; *words_per_object];
                binarize_into(q.ranks(), *threshold, &mut qbits);
                Ok(bits
                    .chunks(*words_per_object)
                    .take(n)
                    .map(|row| hamming_words(row, &qbits) as u64)
                    .collect())
            }
            (PermStorage::Full(_), PermDistance::Hamming) => Err(Error::invalid(
                "hamming distance needs a binarized index",
            )),
            (PermStorage::Binary { .. }, d) => Err(Error::invalid(format!(
                "{d} distance needs full permutations; this index is binarized"
            ))),
        }
    }

    /// The `γ` ids closest to the query in permutation space, ordered by
    /// (permutation distance, id). Selection is a linear-time
    /// `select_nth_unstable` followed by sorting only the kept prefix.
    pub fn filter(&self, query: &S::Object, gamma: Gamma, distance: PermDistance) -> Result<Vec<ObjectId>> {
        let scores = self.score_all(query, distance)?;
        let n = scores.len();
        let gamma = gamma.resolve(n)?.min(n);
        let mut keyed: Vec<(u64, ObjectId)> = scores
            .into_iter()
            .enumerate()
            .map(|(id, s)| (s, id as ObjectId))
            .collect();
        if gamma == 0 {
            return Ok(Vec::new());
        }
        if gamma < n {
            keyed.select_nth_unstable(gamma - 1);
            keyed.truncate(gamma);
        }
        keyed.sort_unstable();
        Ok(keyed.into_iter().map(|(_, id)| id).collect())
    }

    pub fn search(&self, query: &S::Object, k: usize, params: &PermFilterSearch) -> Result<QueryResult> {
        check_k(k)?;
        let start = Instant::now();
        let n = self.data.len();
        let gamma = params.gamma.resolve(n)?;
        ensure!(gamma >= k, "candidate budget {gamma} is smaller than k = {k}");
        let candidates = self.filter(query, Gamma::Count(gamma), params.distance)?;
        let num_candidates = candidates.len();
        let (neighbors, refined) = refine(&self.space, &self.data, query, candidates, k);
        Ok(QueryResult {
            neighbors,
            stats: SearchStats {
                distance_computations: self.pivots.len() as u64 + refined,
                candidates: num_candidates,
                elapsed: start.elapsed(),
            },
        })
    }

    /// Search parameters using the index's natural permutation distance.
    pub fn default_search(&self, gamma: Gamma) -> PermFilterSearch {
        PermFilterSearch {
            gamma,
            distance: self.default_distance(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::L2Space;

    fn line(n: usize) -> Arc<DataSet<Vec<f64>>> {
        Arc::new((0..n).map(|i| vec![i as f64, (i * 7 % 5) as f64]).collect())
    }

    #[test]
    fn gamma_smaller_than_k_is_rejected() {
        let index = PermFilterIndex::build(
            L2Space,
            line(20),
            &PermFilterParams {
                m: 4,
                ..Default::default()
            },
        )
        .unwrap();
        let p = index.default_search(Gamma::Count(2));
        assert!(index.search(&vec![0.0, 0.0], 3, &p).is_err());
    }

    #[test]
    fn mode_and_distance_must_agree() {
        let full = PermFilterIndex::build(L2Space, line(10), &PermFilterParams { m: 4, ..Default::default() })
            .unwrap();
        let p = PermFilterSearch {
            gamma: Gamma::Count(5),
            distance: PermDistance::Hamming,
        };
        assert!(full.search(&vec![0.0, 0.0], 1, &p).is_err());
        let bin = PermFilterIndex::build(
            L2Space,
            line(10),
            &PermFilterParams {
                m: 4,
                mode: PermMode::Binary { threshold: None },
                ..Default::default()
            },
        )
        .unwrap();
        let p = PermFilterSearch {
            gamma: Gamma::Count(5),
            distance: PermDistance::Spearman,
        };
        assert!(bin.search(&vec![0.0, 0.0], 1, &p).is_err());
        assert!(bin.search(&vec![0.0, 0.0], 1, &bin.default_search(Gamma::Count(5))).is_ok());
    }

    #[test]
    fn single_pivot_scans_in_id_order() {
        let index = PermFilterIndex::build(L2Space, line(10), &PermFilterParams { m: 1, ..Default::default() })
            .unwrap();
        for id in 0..10 {
            assert_eq!(index.stored_ranks(id).unwrap(), &[1]);
        }
        let ids = index
            .filter(&vec![9.0, 0.0], Gamma::Count(4), PermDistance::Spearman)
            .unwrap();
        assert_eq!(ids, vec![0, 1, 2, 3]);
    }

    #[test]
    fn refinement_count_is_gamma() {
        let index = PermFilterIndex::build(L2Space, line(50), &PermFilterParams { m: 8, ..Default::default() })
            .unwrap();
        let res = index
            .search(&vec![3.0, 1.0], 2, &index.default_search(Gamma::Count(17)))
            .unwrap();
        assert_eq!(res.stats.candidates, 17);
        assert_eq!(res.stats.distance_computations, 8 + 17);
    }
}
