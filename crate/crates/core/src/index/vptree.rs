//! Vantage-point tree with a polynomial pruner.
//!
//! Every internal node splits its points by the ball of median radius `R`
//! around a random pivot (distance `<= R` goes left). k-NN search is a range
//! search whose radius `r` shrinks to the current k-th best distance. The
//! farther child is skipped when
//!
//! * the query is inside the ball and `(R - d(π, q))^β · α_left > r`, or
//! * the query is outside and `(d(π, q) - R)^β · α_right > r`.
//!
//! With `β = 1` and `α = 1` this is the triangle-inequality test, exact for
//! metric spaces.

use std::sync::Arc;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{DataSet, ObjectId};
use crate::error::{ensure, Error, Result};
use crate::index::{check_k, BruteForce};
use crate::result::{QueryResult, SearchStats, TopK};
use crate::rng;
use crate::spaces::Space;

pub const DEFAULT_BUCKET_SIZE: usize = 50;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VpTreeParams {
    pub bucket_size: usize,
    pub seed: u64,
}

impl Default for VpTreeParams {
    fn default() -> Self {
        VpTreeParams {
            bucket_size: DEFAULT_BUCKET_SIZE,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrunerParams {
    pub alpha_left: f64,
    pub alpha_right: f64,
    pub beta: u32,
}

impl PrunerParams {
    /// Triangle-inequality pruning.
    pub fn metric() -> Self {
        PrunerParams {
            alpha_left: 1.0,
            alpha_right: 1.0,
            beta: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(
            self.alpha_left > 0.0 && self.alpha_right > 0.0,
            "pruner alphas must be positive"
        );
        ensure!(
            self.beta == 1 || self.beta == 2,
            "pruner beta must be 1 or 2, got {}",
            self.beta
        );
        Ok(())
    }

    #[inline]
    fn prunes(&self, margin: f64, alpha: f64, radius: f64) -> bool {
        let scaled = if self.beta == 2 { margin * margin } else { margin };
        scaled * alpha > radius
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub(crate) enum Node {
    Internal {
        pivot: ObjectId,
        radius: f64,
        left: Option<u32>,
        right: Option<u32>,
    },
    /// Range into the contiguous bucket id array.
    Leaf { start: u32, end: u32 },
}

#[derive(Debug)]
pub struct VpTree<S: Space> {
    space: S,
    data: Arc<DataSet<S::Object>>,
    nodes: Vec<Node>,
    root: Option<u32>,
    buckets: Vec<ObjectId>,
    bucket_size: usize,
}

/// Lower median, the value at position `(n - 1) / 2` of the sorted input.
pub(crate) fn median_radius(distances: &[f64]) -> f64 {
    let mut d = distances.to_vec();
    let mid = (d.len() - 1) / 2;
    let (_, m, _) = d.select_nth_unstable_by(mid, f64::total_cmp);
    *m
}

impl<S: Space> VpTree<S> {
    pub fn build(space: S, data: Arc<DataSet<S::Object>>, params: &VpTreeParams) -> Result<Self> {
        ensure!(params.bucket_size >= 1, "bucket size must be positive");
        let mut rng = rng::seeded(params.seed);
        let mut nodes: Vec<Node> = Vec::new();
        let mut buckets: Vec<ObjectId> = Vec::with_capacity(data.len());
        let root = if data.is_empty() {
            None
        } else {
            Some(0)
        };
        // (node slot, ids); slots are reserved before their subtree is built.
        let mut work: Vec<(usize, Vec<ObjectId>)> = Vec::new();
        if root.is_some() {
            nodes.push(Node::Leaf { start: 0, end: 0 });
            work.push((0, (0..data.len() as ObjectId).collect()));
        }
        while let Some((slot, mut ids)) = work.pop() {
            if ids.len() <= params.bucket_size {
                let start = buckets.len() as u32;
                buckets.extend_from_slice(&ids);
                nodes[slot] = Node::Leaf {
                    start,
                    end: buckets.len() as u32,
                };
                continue;
            }
            let pick = rng.gen_range(0..ids.len());
            let pivot = ids.swap_remove(pick);
            let pobj = &data[pivot as usize];
            let dists: Vec<f64> = ids
                .iter()
                .map(|&id| space.query_distance(pobj, &data[id as usize]))
                .collect();
            let radius = median_radius(&dists);
            let (mut left, mut right) = (Vec::new(), Vec::new());
            for (&id, &d) in ids.iter().zip(&dists) {
                if d <= radius {
                    left.push(id);
                } else {
                    right.push(id);
                }
            }
            let mut child = |part: Vec<ObjectId>, nodes: &mut Vec<Node>| {
                if part.is_empty() {
                    return None;
                }
                nodes.push(Node::Leaf { start: 0, end: 0 });
                let idx = nodes.len() - 1;
                work.push((idx, part));
                Some(idx as u32)
            };
            let right = child(right, &mut nodes);
            let left = child(left, &mut nodes);
            nodes[slot] = Node::Internal {
                pivot,
                radius,
                left,
                right,
            };
        }
        Ok(VpTree {
            space,
            data,
            nodes,
            root,
            buckets,
            bucket_size: params.bucket_size,
        })
    }

    pub(crate) fn from_parts(
        space: S,
        data: Arc<DataSet<S::Object>>,
        nodes: Vec<Node>,
        root: Option<u32>,
        buckets: Vec<ObjectId>,
        bucket_size: usize,
    ) -> Self {
        VpTree {
            space,
            data,
            nodes,
            root,
            buckets,
            bucket_size,
        }
    }

    pub(crate) fn parts(&self) -> (&[Node], Option<u32>, &[ObjectId]) {
        (&self.nodes, self.root, &self.buckets)
    }

    pub fn space(&self) -> &S {
        &self.space
    }

    pub fn data(&self) -> &Arc<DataSet<S::Object>> {
        &self.data
    }

    pub fn bucket_size(&self) -> usize {
        self.bucket_size
    }

    pub fn num_internal_nodes(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Internal { .. }))
            .count()
    }

    pub fn num_leaves(&self) -> usize {
        self.nodes.len() - self.num_internal_nodes()
    }

    /// Radius of the root split, if the root is an internal node.
    pub fn root_split(&self) -> Option<(ObjectId, f64)> {
        match self.nodes.get(self.root? as usize)? {
            Node::Internal { pivot, radius, .. } => Some((*pivot, *radius)),
            Node::Leaf { .. } => None,
        }
    }

    pub fn index_bytes(&self) -> usize {
        self.nodes.len() * std::mem::size_of::<Node>() + self.buckets.len() * 4
    }

    pub fn search(&self, query: &S::Object, k: usize, pruner: &PrunerParams) -> Result<QueryResult> {
        check_k(k)?;
        pruner.validate()?;
        let start = Instant::now();
        let mut top = TopK::new(k);
        let mut evaluated = 0u64;
        if let Some(root) = self.root {
            self.visit(root, query, pruner, &mut top, &mut evaluated);
        }
        Ok(QueryResult {
            neighbors: top.into_sorted(),
            stats: SearchStats {
                distance_computations: evaluated,
                candidates: evaluated as usize,
                elapsed: start.elapsed(),
            },
        })
    }

    fn visit(&self, node: u32, query: &S::Object, pruner: &PrunerParams, top: &mut TopK, evaluated: &mut u64) {
        match &self.nodes[node as usize] {
            Node::Leaf { start, end } => {
                for &id in &self.buckets[*start as usize..*end as usize] {
                    top.push(id, self.space.query_distance(&self.data[id as usize], query));
                    *evaluated += 1;
                }
            }
            Node::Internal {
                pivot,
                radius,
                left,
                right,
            } => {
                let d = self.space.query_distance(&self.data[*pivot as usize], query);
                *evaluated += 1;
                top.push(*pivot, d);
                if d <= *radius {
                    if let Some(l) = left {
                        self.visit(*l, query, pruner, top, evaluated);
                    }
                    if let Some(r) = right {
                        if !pruner.prunes(radius - d, pruner.alpha_left, top.radius()) {
                            self.visit(*r, query, pruner, top, evaluated);
                        }
                    }
                } else {
                    if let Some(r) = right {
                        self.visit(*r, query, pruner, top, evaluated);
                    }
                    if let Some(l) = left {
                        if !pruner.prunes(d - radius, pruner.alpha_right, top.radius()) {
                            self.visit(*l, query, pruner, top, evaluated);
                        }
                    }
                }
            }
        }
    }
}

/// Search space of the shrinking-grid pruner tuning.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub min_alpha: f64,
    pub max_alpha: f64,
    /// Points per axis of the initial log-spaced grid.
    pub points: usize,
    /// Step divisor applied after every refinement round.
    pub shrink: f64,
    pub max_iterations: usize,
    pub beta: u32,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            min_alpha: 2f64.powi(-10),
            max_alpha: 2f64.powi(10),
            points: 9,
            shrink: 2.0,
            max_iterations: 8,
            beta: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuneTraceEntry {
    pub iteration: usize,
    pub params: PrunerParams,
    pub recall: f64,
    /// Data size divided by mean distance computations per query.
    pub efficiency: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuneOutcome {
    pub params: PrunerParams,
    pub recall: f64,
    pub efficiency: f64,
    /// Whether the recall band was met.
    pub reached: bool,
    pub trace: Vec<TuneTraceEntry>,
}

fn band_gap(recall: f64, band: (f64, f64)) -> f64 {
    if recall < band.0 {
        band.0 - recall
    } else if recall > band.1 {
        recall - band.1
    } else {
        0.0
    }
}

/// Better-than relation used by the tuner: in-band entries by efficiency,
/// then anything by closeness to the band.
fn better(a: &TuneTraceEntry, b: &TuneTraceEntry, band: (f64, f64)) -> bool {
    let (ga, gb) = (band_gap(a.recall, band), band_gap(b.recall, band));
    if ga != gb {
        return ga < gb;
    }
    if a.efficiency != b.efficiency {
        return a.efficiency > b.efficiency;
    }
    a.recall > b.recall
}

/// Shrinking-grid search over `(α_left, α_right)` in log space.
///
/// Speed is measured as the reduction in distance computations against a
/// linear scan, which keeps the outcome reproducible. Recall is measured on
/// `queries` against an exact scan of `tree`'s data.
pub fn tune_vptree<S: Space + Clone>(
    tree: &VpTree<S>,
    queries: &[S::Object],
    k: usize,
    band: (f64, f64),
    grid: &GridSpec,
) -> Result<TuneOutcome>
{
    ensure!(grid.points >= 1, "grid spec has no points");
    ensure!(
        grid.min_alpha > 0.0 && grid.max_alpha >= grid.min_alpha,
        "invalid alpha range"
    );
    ensure!(grid.shrink > 1.0, "grid shrink factor must exceed 1");
    ensure!(!queries.is_empty(), "tuning needs at least one query");
    ensure!(band.0 <= band.1, "empty recall band");
    check_k(k)?;

    let exact = BruteForce::new(tree.space().clone(), tree.data().clone());
    let gold: Vec<Vec<ObjectId>> = queries
        .iter()
        .map(|q| exact.search(q, k).map(|r| r.ids()))
        .collect::<Result<_>>()?;
    let n = tree.data().len().max(1) as f64;

    let evaluate = |params: PrunerParams, iteration: usize| -> Result<TuneTraceEntry> {
        let mut recall = 0.0;
        let mut comps = 0u64;
        for (q, truth) in queries.iter().zip(&gold) {
            let res = tree.search(q, k, &params)?;
            comps += res.stats.distance_computations;
            recall += crate::eval::recall(&res.ids(), truth);
        }
        let mean_comps = (comps as f64 / queries.len() as f64).max(1.0);
        Ok(TuneTraceEntry {
            iteration,
            params,
            recall: recall / queries.len() as f64,
            efficiency: n / mean_comps,
        })
    };

    let (lo, hi) = (grid.min_alpha.log2(), grid.max_alpha.log2());
    let axis: Vec<f64> = if grid.points == 1 {
        vec![lo]
    } else {
        (0..grid.points)
            .map(|j| lo + (hi - lo) * j as f64 / (grid.points - 1) as f64)
            .collect()
    };
    let mut step = if grid.points > 1 {
        (hi - lo) / (grid.points - 1) as f64
    } else {
        0.0
    };
    let mut trace = Vec::new();
    let mut best: Option<TuneTraceEntry> = None;
    let consider = |entry: TuneTraceEntry, best: &mut Option<TuneTraceEntry>, trace: &mut Vec<_>| {
        if best.as_ref().is_none_or(|b| better(&entry, b, band)) {
            *best = Some(entry.clone());
        }
        trace.push(entry);
    };
    let pruner = |l: f64, r: f64| PrunerParams {
        alpha_left: l.exp2(),
        alpha_right: r.exp2(),
        beta: grid.beta,
    };

    for &l in &axis {
        for &r in &axis {
            let entry = evaluate(pruner(l, r), 0)?;
            consider(entry, &mut best, &mut trace);
        }
    }
    // Refinement: halve the step around the incumbent until it is below 1%
    // of the value (log2(1.01) in log space) or the iteration cap is hit.
    let min_step = 1.01f64.log2();
    for iteration in 1..=grid.max_iterations {
        step /= grid.shrink;
        if step < min_step {
            break;
        }
        let center = best.as_ref().expect("grid is non-empty").params;
        let (cl, cr) = (center.alpha_left.log2(), center.alpha_right.log2());
        for dl in [-1.0, 0.0, 1.0] {
            for dr in [-1.0, 0.0, 1.0] {
                if dl == 0.0 && dr == 0.0 {
                    continue;
                }
                let entry = evaluate(pruner(cl + dl * step, cr + dr * step), iteration)?;
                consider(entry, &mut best, &mut trace);
            }
        }
    }

    let best = best.ok_or_else(|| Error::invalid("grid produced no candidates"))?;
    Ok(TuneOutcome {
        params: best.params,
        recall: best.recall,
        efficiency: best.efficiency,
        reached: band_gap(best.recall, band) == 0.0,
        trace,
    })
}
