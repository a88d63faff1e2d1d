use std::collections::HashSet;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{DataSet, ObjectId};
use crate::error::Result;
use crate::index::BruteForce;
use crate::result::Neighbor;
use crate::spaces::{Space, SpaceKind};

/// Exact k-NN lists for a query set, produced by exhaustive scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoldStandard {
    pub k: usize,
    pub space: SpaceKind,
    pub split: usize,
    /// Per query, ascending by distance, ties by id.
    pub lists: Vec<Vec<Neighbor>>,
}

impl GoldStandard {
    pub fn ids(&self, query: usize) -> Vec<ObjectId> {
        self.lists[query].iter().map(|n| n.id).collect()
    }
}

/// Exhaustive scan of `data` for every query; queries run in parallel.
pub fn compute_gold<S: Space + Clone>(
    data: &Arc<DataSet<S::Object>>,
    queries: &[S::Object],
    space: &S,
    k: usize,
    split: usize,
) -> Result<GoldStandard> {
    let exact = BruteForce::new(space.clone(), data.clone());
    let lists = queries
        .par_iter()
        .map(|q| exact.search(q, k).map(|r| r.neighbors))
        .collect::<Result<Vec<_>>>()?;
    Ok(GoldStandard {
        k,
        space: space.kind(),
        split,
        lists,
    })
}

/// Fraction of the gold ids present in `result`.
pub fn recall(result: &[ObjectId], gold: &[ObjectId]) -> f64 {
    if gold.is_empty() {
        return 1.0;
    }
    let truth: HashSet<ObjectId> = gold.iter().copied().collect();
    let hits = result.iter().filter(|id| truth.contains(id)).count();
    hits as f64 / gold.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::L2Space;

    #[test]
    fn recall_examples() {
        let gold: Vec<ObjectId> = (0..10).collect();
        assert_eq!(recall(&gold, &gold), 1.0);
        assert_eq!(recall(&[20, 21, 22], &gold), 0.0);
        let half: Vec<ObjectId> = vec![0, 2, 4, 6, 8, 11, 13, 15, 17, 19];
        assert_eq!(recall(&half, &gold), 0.5);
    }

    #[test]
    fn gold_contains_the_query_itself() {
        let data: Arc<DataSet<Vec<f64>>> = Arc::new((0..30).map(|i| vec![i as f64]).collect());
        let gold = compute_gold(&data, &[vec![7.0]], &L2Space, 1, 0).unwrap();
        assert_eq!(gold.lists[0], vec![Neighbor::new(7, 0.0)]);
        let all = compute_gold(&data, &[vec![7.0]], &L2Space, 100, 0).unwrap();
        assert_eq!(all.lists[0].len(), 30);
    }
}
