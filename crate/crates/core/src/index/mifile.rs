//! MI-file: an inverted file over the `m_i` closest pivots of every object,
//! with postings `(position of the pivot in the object's permutation, id)`.
//!
//! Queries read the lists of their `m_s` closest pivots and estimate the
//! Footrule (or Spearman) distance with per-object accumulators. When only a
//! prefix of the permutation is visible, unseen pivots are assumed to sit at
//! the last position `m`: accumulators start at `m_s * m` and each posting
//! subtracts `m - |pos_x - pos_q|`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{DataSet, ObjectId};
use crate::error::{ensure, Error, Result};
use crate::index::{check_k, refine, with_threads, Gamma};
use crate::permutation::{closest_pivots, select_pivots, PivotSet, Rank};
use crate::result::{QueryResult, SearchStats};
use crate::spaces::Space;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Posting {
    pub position: Rank,
    pub id: ObjectId,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MiFileParams {
    pub m: usize,
    pub m_i: usize,
    pub seed: u64,
    pub threads: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AccumulatorMetric {
    #[default]
    Footrule,
    Spearman,
}

impl fmt::Display for AccumulatorMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AccumulatorMetric::Footrule => "footrule",
            AccumulatorMetric::Spearman => "spearman",
        })
    }
}

impl FromStr for AccumulatorMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "footrule" => Ok(AccumulatorMetric::Footrule),
            "spearman" => Ok(AccumulatorMetric::Spearman),
            _ => Err(Error::invalid(format!("unknown accumulator metric `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MiFileSearch {
    pub m_s: usize,
    /// Maximum position difference `D`; `None` reads whole lists.
    pub max_position_diff: Option<usize>,
    pub gamma: Gamma,
    pub metric: AccumulatorMetric,
}

/// Accumulator state after reading the query's posting lists.
#[derive(Clone, Debug, PartialEq)]
pub struct MiFileAccumulators {
    /// One score per object, lower is closer.
    pub scores: Vec<i64>,
    /// Objects hit by at least one scanned posting, ascending.
    pub touched: Vec<ObjectId>,
    pub postings_read: usize,
}

impl MiFileAccumulators {
    /// All ids ordered by (score, id).
    pub fn ranking(&self) -> Vec<ObjectId> {
        let mut ids: Vec<ObjectId> = (0..self.scores.len() as ObjectId).collect();
        ids.sort_unstable_by_key(|&id| (self.scores[id as usize], id));
        ids
    }
}

#[derive(Debug)]
pub struct MiFileIndex<S: Space> {
    space: S,
    data: Arc<DataSet<S::Object>>,
    pivots: PivotSet<S::Object>,
    m_i: usize,
    postings: Vec<Vec<Posting>>,
}

impl<S: Space> MiFileIndex<S> {
    pub fn build(space: S, data: Arc<DataSet<S::Object>>, params: &MiFileParams) -> Result<Self> {
        ensure!(
            params.m_i >= 1 && params.m_i <= params.m,
            "m_i = {} must lie in 1..=m = {}",
            params.m_i,
            params.m
        );
        if data.is_empty() {
            ensure!(params.m >= 1, "number of pivots must be positive");
            return Ok(MiFileIndex {
                space,
                data,
                pivots: PivotSet::empty(),
                m_i: params.m_i,
                postings: vec![Vec::new(); params.m],
            });
        }
        let pivots = select_pivots(&data, params.m, params.seed)?;
        Self::build_with_pivots(space, data, pivots, params.m_i, params.threads)
    }

    pub fn build_with_pivots(
        space: S,
        data: Arc<DataSet<S::Object>>,
        pivots: PivotSet<S::Object>,
        m_i: usize,
        threads: usize,
    ) -> Result<Self> {
        let m = pivots.len();
        ensure!(m_i >= 1 && m_i <= m, "m_i = {m_i} must lie in 1..={m}");
        let closest: Vec<Vec<usize>> = with_threads(threads, || {
            data.objects()
                .par_iter()
                .map(|x| closest_pivots(&pivots.distances(&space, x), m_i))
                .collect()
        });
        let mut postings = vec![Vec::new(); m];
        for (id, pivs) in closest.iter().enumerate() {
            for (pos, &p) in pivs.iter().enumerate() {
                postings[p].push(Posting {
                    position: (pos + 1) as Rank,
                    id: id as ObjectId,
                });
            }
        }
        for list in &mut postings {
            list.sort_unstable();
        }
        Ok(MiFileIndex {
            space,
            data,
            pivots,
            m_i,
            postings,
        })
    }

    pub(crate) fn from_parts(
        space: S,
        data: Arc<DataSet<S::Object>>,
        pivots: PivotSet<S::Object>,
        m_i: usize,
        postings: Vec<Vec<Posting>>,
    ) -> Self {
        MiFileIndex {
            space,
            data,
            pivots,
            m_i,
            postings,
        }
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
        self.postings.len()
    }

    pub fn m_i(&self) -> usize {
        self.m_i
    }

    pub fn postings(&self, pivot: usize) -> &[Posting] {
        &self.postings[pivot]
    }

    pub(crate) fn all_postings(&self) -> &[Vec<Posting>] {
        &self.postings
    }

    pub fn index_bytes(&self) -> usize {
        self.postings.iter().map(|l| l.len()).sum::<usize>() * std::mem::size_of::<Posting>()
    }

    /// Reads the posting lists of the query's `m_s` closest pivots and
    /// returns the accumulator state.
    pub fn accumulate(&self, query: &S::Object, params: &MiFileSearch) -> Result<MiFileAccumulators> {
        let m = self.num_pivots();
        ensure!(
            params.m_s >= 1 && params.m_s <= self.m_i,
            "m_s = {} must lie in 1..=m_i = {}",
            params.m_s,
            self.m_i
        );
        let n = self.data.len();
        let qdist = self.pivots.distances(&self.space, query);
        let qorder = closest_pivots(&qdist, params.m_s);

        // Zero-initialized exact sums only when every posting of every pivot is read.
        let exact = params.m_s == m && params.max_position_diff.is_none();
        let (m_i64, ms_i64) = (m as i64, params.m_s as i64);
        let init = match (exact, params.metric) {
            (true, _) => 0,
            (false, AccumulatorMetric::Footrule) => ms_i64 * m_i64,
            (false, AccumulatorMetric::Spearman) => ms_i64 * m_i64 * m_i64,
        };
        let mut scores = vec![init; n];
        let mut hit = vec![false; n];
        let mut postings_read = 0;

        for (qpos, &pivot) in qorder.iter().enumerate() {
            let qpos = (qpos + 1) as i64;
            let list = &self.postings[pivot];
            let slice = match params.max_position_diff {
                None => list.as_slice(),
                Some(d) => {
                    let lo = (qpos - d as i64).max(0);
                    let hi = qpos + d as i64;
                    let from = list.partition_point(|p| (p.position as i64) < lo);
                    let to = list.partition_point(|p| (p.position as i64) <= hi);
                    &list[from..to]
                }
            };
            postings_read += slice.len();
            for p in slice {
                let diff = (p.position as i64 - qpos).abs();
                let id = p.id as usize;
                let delta = match (exact, params.metric) {
                    (true, AccumulatorMetric::Footrule) => diff,
                    (true, AccumulatorMetric::Spearman) => diff * diff,
                    (false, AccumulatorMetric::Footrule) => -(m_i64 - diff),
                    (false, AccumulatorMetric::Spearman) => -(m_i64 * m_i64 - diff * diff),
                };
                scores[id] += delta;
                hit[id] = true;
            }
        }
        let touched = hit
            .iter()
            .enumerate()
            .filter(|(_, h)| **h)
            .map(|(id, _)| id as ObjectId)
            .collect();
        Ok(MiFileAccumulators {
            scores,
            touched,
            postings_read,
        })
    }

    pub fn search(&self, query: &S::Object, k: usize, params: &MiFileSearch) -> Result<QueryResult> {
        check_k(k)?;
        let start = Instant::now();
        let acc = self.accumulate(query, params)?;
        let n = acc.scores.len();
        let gamma = params.gamma.resolve(n)?.min(n);
        ensure!(
            gamma >= k.min(n),
            "candidate budget {gamma} is smaller than k = {k}"
        );
        let mut keyed: Vec<(i64, ObjectId)> = acc
            .scores
            .iter()
            .enumerate()
            .map(|(id, &s)| (s, id as ObjectId))
            .collect();
        if gamma > 0 && gamma < n {
            keyed.select_nth_unstable(gamma - 1);
        }
        keyed.truncate(gamma);
        let (neighbors, refined) =
            refine(&self.space, &self.data, query, keyed.iter().map(|&(_, id)| id), k);
        Ok(QueryResult {
            neighbors,
            stats: SearchStats {
                distance_computations: self.num_pivots() as u64 + refined,
                candidates: gamma,
                elapsed: start.elapsed(),
            },
        })
    }
}
