//! Neighborhood approximation (NAPP): id-only posting lists for the `m_i`
//! closest pivots of every object. Candidates are objects sharing at least
//! `t` of the query's `m_i` closest pivots, found with ScanCount over
//! fixed-size id ranges so that the counter array stays cache resident.

use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{DataSet, ObjectId};
use crate::error::{ensure, Result};
use crate::index::{check_k, refine, with_threads, Gamma};
use crate::permutation::{closest_pivots, select_pivots, PivotSet};
use crate::result::{QueryResult, SearchStats};
use crate::spaces::Space;

pub const DEFAULT_CHUNK_SIZE: usize = 65536;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NappParams {
    pub m: usize,
    pub m_i: usize,
    pub chunk_size: usize,
    pub seed: u64,
    pub threads: usize,
}

impl Default for NappParams {
    fn default() -> Self {
        NappParams {
            m: 512,
            m_i: 32,
            chunk_size: DEFAULT_CHUNK_SIZE,
            seed: 0,
            threads: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NappSearch {
    /// Minimum number of shared closest pivots.
    pub t: usize,
    /// Optional cap on refined candidates; survivors are then ranked by
    /// shared-pivot count (descending), ties by id.
    pub gamma: Option<Gamma>,
}

#[derive(Debug)]
pub struct NappIndex<S: Space> {
    space: S,
    data: Arc<DataSet<S::Object>>,
    pivots: PivotSet<S::Object>,
    m_i: usize,
    chunk_size: usize,
    postings: Vec<Vec<ObjectId>>,
    /// Per pivot, offsets into its list where each id chunk begins; one
    /// extra trailing entry equal to the list length.
    chunk_starts: Vec<Vec<u32>>,
}

impl<S: Space> NappIndex<S> {
    pub fn build(space: S, data: Arc<DataSet<S::Object>>, params: &NappParams) -> Result<Self> {
        ensure!(
            params.m_i >= 1 && params.m_i <= params.m,
            "m_i = {} must lie in 1..=m = {}",
            params.m_i,
            params.m
        );
        if data.is_empty() {
            return Self::from_postings(space, data, PivotSet::empty(), params.m_i, params.chunk_size, vec![
                Vec::new();
                params.m
            ]);
        }
        let pivots = select_pivots(&data, params.m, params.seed)?;
        Self::build_with_pivots(space, data, pivots, params.m_i, params.chunk_size, params.threads)
    }

    pub fn build_with_pivots(
        space: S,
        data: Arc<DataSet<S::Object>>,
        pivots: PivotSet<S::Object>,
        m_i: usize,
        chunk_size: usize,
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
        // Ids are appended in increasing order, so every list is sorted.
        let mut postings = vec![Vec::new(); m];
        for (id, pivs) in closest.iter().enumerate() {
            for &p in pivs {
                postings[p].push(id as ObjectId);
            }
        }
        Self::from_postings(space, data, pivots, m_i, chunk_size, postings)
    }

    pub(crate) fn from_postings(
        space: S,
        data: Arc<DataSet<S::Object>>,
        pivots: PivotSet<S::Object>,
        m_i: usize,
        chunk_size: usize,
        postings: Vec<Vec<ObjectId>>,
    ) -> Result<Self> {
        ensure!(chunk_size >= 1, "chunk size must be positive");
        let n = data.len();
        let num_chunks = n.div_ceil(chunk_size);
        let chunk_starts = postings
            .iter()
            .map(|list| {
                (0..=num_chunks)
                    .map(|c| list.partition_point(|&id| (id as usize) < c * chunk_size) as u32)
                    .collect()
            })
            .collect();
        Ok(NappIndex {
            space,
            data,
            pivots,
            m_i,
            chunk_size,
            postings,
            chunk_starts,
        })
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

    pub fn chunk_size(&self) -> usize {
        self.chunk_size
    }

    pub fn postings(&self, pivot: usize) -> &[ObjectId] {
        &self.postings[pivot]
    }

    pub(crate) fn all_postings(&self) -> &[Vec<ObjectId>] {
        &self.postings
    }

    pub fn index_bytes(&self) -> usize {
        let ids: usize = self.postings.iter().map(|l| l.len()).sum();
        let offsets: usize = self.chunk_starts.iter().map(|l| l.len()).sum();
        (ids + offsets) * 4
    }

    /// Pivots whose lists a query reads: its `m_i` closest.
    pub fn query_pivots(&self, query: &S::Object) -> Vec<usize> {
        closest_pivots(&self.pivots.distances(&self.space, query), self.m_i)
    }

    /// ScanCount merge: `(id, shared pivot count)` for every object sharing
    /// at least `t` of the query's closest pivots, ascending by id.
    pub fn candidates(&self, query: &S::Object, t: usize) -> Result<Vec<(ObjectId, u16)>> {
        ensure!(
            t >= 1 && t <= self.m_i,
            "t = {t} must lie in 1..=m_i = {}",
            self.m_i
        );
        let lists = self.query_pivots(query);
        let n = self.data.len();
        let mut counters = vec![0u16; self.chunk_size.min(n.max(1))];
        let mut out = Vec::new();
        for (chunk, base) in (0..n).step_by(self.chunk_size).enumerate() {
            let width = self.chunk_size.min(n - base);
            let counters = &mut counters[..width];
            counters.fill(0);
            for &p in &lists {
                let starts = &self.chunk_starts[p];
                let ids = &self.postings[p][starts[chunk] as usize..starts[chunk + 1] as usize];
                for &id in ids {
                    counters[id as usize - base] += 1;
                }
            }
            let t = t as u16;
            out.extend(
                counters
                    .iter()
                    .enumerate()
                    .filter(|(_, &c)| c >= t)
                    .map(|(off, &c)| ((base + off) as ObjectId, c)),
            );
        }
        Ok(out)
    }

    pub fn search(&self, query: &S::Object, k: usize, params: &NappSearch) -> Result<QueryResult> {
        check_k(k)?;
        let start = Instant::now();
        let mut survivors = self.candidates(query, params.t)?;
        if let Some(gamma) = params.gamma {
            let gamma = gamma.resolve(self.data.len())?;
            if survivors.len() > gamma {
                let key = |&(id, c): &(ObjectId, u16)| (std::cmp::Reverse(c), id);
                if gamma > 0 {
                    survivors.select_nth_unstable_by_key(gamma - 1, key);
                }
                survivors.truncate(gamma);
            }
        }
        let num_candidates = survivors.len();
        let (neighbors, refined) = refine(
            &self.space,
            &self.data,
            query,
            survivors.into_iter().map(|(id, _)| id),
            k,
        );
        Ok(QueryResult {
            neighbors,
            stats: SearchStats {
                distance_computations: self.pivots.len() as u64 + refined,
                candidates: num_candidates,
                elapsed: start.elapsed(),
            },
        })
    }
}
