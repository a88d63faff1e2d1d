//! Small-world proximity graph. Points are inserted one at a time; each
//! insertion runs the same multi-restart greedy search used at query time
//! over the graph built so far and links the new node to the `NN` closest
//! points it found.

use std::collections::HashMap;
use std::sync::Arc;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{DataSet, ObjectId};
use crate::error::{ensure, Result};
use crate::index::check_k;
use crate::result::{Neighbor, QueryResult, SearchStats, TopK};
use crate::rng;
use crate::spaces::Space;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwGraphParams {
    /// Neighbors linked per inserted node.
    pub nn: usize,
    /// Greedy restarts per insertion.
    pub attempts: usize,
    pub seed: u64,
}

impl Default for SwGraphParams {
    fn default() -> Self {
        SwGraphParams {
            nn: 10,
            attempts: 2,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwSearch {
    pub attempts: usize,
    pub seed: u64,
}

#[derive(Debug)]
pub struct SwGraph<S: Space> {
    space: S,
    data: Arc<DataSet<S::Object>>,
    adjacency: Vec<Vec<ObjectId>>,
    nn: usize,
}

/// Distances evaluated during one search, shared by all restarts.
struct Visited {
    dist: HashMap<ObjectId, f64>,
}

impl Visited {
    fn new() -> Self {
        Visited { dist: HashMap::new() }
    }

    fn eval<S: Space>(&mut self, space: &S, data: &DataSet<S::Object>, query: &S::Object, id: ObjectId) -> f64 {
        *self
            .dist
            .entry(id)
            .or_insert_with(|| space.query_distance(&data[id as usize], query))
    }
}

/// Lazy Fisher-Yates over `0..n`: the first `j` draws are the same no
/// matter how many are requested, so adding restarts only adds starts.
fn distinct_starts(rng: &mut rng::Rng, n: usize, count: usize) -> Vec<ObjectId> {
    let mut swapped: HashMap<usize, usize> = HashMap::new();
    (0..count.min(n))
        .map(|i| {
            let j = rng.gen_range(i..n);
            let at_j = *swapped.get(&j).unwrap_or(&j);
            let at_i = *swapped.get(&i).unwrap_or(&i);
            swapped.insert(j, at_i);
            at_j as ObjectId
        })
        .collect()
}

fn greedy_walks<S: Space>(
    space: &S,
    data: &DataSet<S::Object>,
    adjacency: &[Vec<ObjectId>],
    query: &S::Object,
    starts: &[ObjectId],
) -> Visited {
    let mut visited = Visited::new();
    for &start in starts {
        let mut cur = Neighbor::new(start, visited.eval(space, data, query, start));
        loop {
            let mut best = cur;
            for &nb in &adjacency[cur.id as usize] {
                let cand = Neighbor::new(nb, visited.eval(space, data, query, nb));
                if cand < best {
                    best = cand;
                }
            }
            if best.id == cur.id {
                break;
            }
            cur = best;
        }
    }
    visited
}

impl<S: Space> SwGraph<S> {
    pub fn build(space: S, data: Arc<DataSet<S::Object>>, params: &SwGraphParams) -> Result<Self> {
        ensure!(params.nn >= 1, "NN must be at least 1");
        ensure!(params.attempts >= 1, "insertion attempts must be at least 1");
        let n = data.len();
        let mut rng = rng::seeded(params.seed);
        let mut adjacency: Vec<Vec<ObjectId>> = vec![Vec::new(); n];
        for i in 1..n {
            let new = i as ObjectId;
            let links: Vec<ObjectId> = if i <= params.nn {
                (0..new).collect()
            } else {
                let starts: Vec<ObjectId> =
                    (0..params.attempts).map(|_| rng.gen_range(0..new)).collect();
                let visited = greedy_walks(&space, &data, &adjacency[..i], &data[i], &starts);
                let mut top = TopK::new(params.nn);
                for (&id, &d) in &visited.dist {
                    top.push(id, d);
                }
                top.into_sorted().into_iter().map(|nb| nb.id).collect()
            };
            for &other in &links {
                adjacency[i].push(other);
                adjacency[other as usize].push(new);
            }
            debug_assert!(adjacency[i].iter().all(|&j| j != new));
        }
        Ok(SwGraph {
            space,
            data,
            adjacency,
            nn: params.nn,
        })
    }

    pub(crate) fn from_parts(space: S, data: Arc<DataSet<S::Object>>, adjacency: Vec<Vec<ObjectId>>, nn: usize) -> Self {
        SwGraph {
            space,
            data,
            adjacency,
            nn,
        }
    }

    /// Graph from an explicit adjacency list (edges must be listed both ways).
    pub fn from_adjacency(space: S, data: Arc<DataSet<S::Object>>, adjacency: Vec<Vec<ObjectId>>) -> Result<Self> {
        ensure!(adjacency.len() == data.len(), "adjacency size differs from data size");
        for (i, list) in adjacency.iter().enumerate() {
            for &j in list {
                ensure!((j as usize) < data.len() && j as usize != i, "invalid edge {i} -> {j}");
                ensure!(adjacency[j as usize].contains(&(i as ObjectId)), "edge {i} -> {j} is not mirrored");
            }
        }
        let nn = adjacency.iter().map(Vec::len).max().unwrap_or(0);
        Ok(SwGraph {
            space,
            data,
            adjacency,
            nn,
        })
    }

    pub fn space(&self) -> &S {
        &self.space
    }

    pub fn data(&self) -> &Arc<DataSet<S::Object>> {
        &self.data
    }

    pub fn nn(&self) -> usize {
        self.nn
    }

    pub fn neighbors(&self, id: usize) -> &[ObjectId] {
        &self.adjacency[id]
    }

    pub(crate) fn adjacency(&self) -> &[Vec<ObjectId>] {
        &self.adjacency
    }

    pub fn index_bytes(&self) -> usize {
        self.adjacency.iter().map(|l| l.len() * 4 + 24).sum()
    }

    /// Greedy search with `params.attempts` restarts from distinct random
    /// nodes; every evaluated node is a candidate.
    pub fn search(&self, query: &S::Object, k: usize, params: &SwSearch) -> Result<QueryResult> {
        ensure!(!self.data.is_empty(), "cannot search an empty graph");
        ensure!(params.attempts >= 1, "search attempts must be at least 1");
        let mut rng = rng::seeded(params.seed);
        let starts = distinct_starts(&mut rng, self.data.len(), params.attempts);
        self.search_from(query, k, &starts)
    }

    pub fn search_from(&self, query: &S::Object, k: usize, starts: &[ObjectId]) -> Result<QueryResult> {
        check_k(k)?;
        ensure!(
            starts.iter().all(|&s| (s as usize) < self.data.len()),
            "start node out of range"
        );
        let start = Instant::now();
        let visited = greedy_walks(&self.space, &self.data, &self.adjacency, query, starts);
        let mut top = TopK::new(k);
        for (&id, &d) in &visited.dist {
            top.push(id, d);
        }
        let evaluated = visited.dist.len();
        Ok(QueryResult {
            neighbors: top.into_sorted(),
            stats: SearchStats {
                distance_computations: evaluated as u64,
                candidates: evaluated,
                elapsed: start.elapsed(),
            },
        })
    }
}
