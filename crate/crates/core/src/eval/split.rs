use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};
use crate::rng;

/// One random partition of a data set into an indexed part and queries.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub index_ids: Vec<usize>,
    pub query_ids: Vec<usize>,
}

/// `num_splits` independent random partitions of `0..n`, each holding
/// `queries_per_split` queries. Both parts are returned in ascending order.
pub fn make_splits(n: usize, num_splits: usize, queries_per_split: usize, seed: u64) -> Result<Vec<Split>> {
    ensure!(num_splits >= 1, "at least one split is required");
    ensure!(queries_per_split >= 1, "at least one query per split is required");
    ensure!(
        queries_per_split < n,
        "{queries_per_split} queries leave nothing to index out of {n} objects"
    );
    Ok((0..num_splits)
        .map(|s| {
            let mut rng = rng::derived(seed, s as u64);
            let mut ids: Vec<usize> = (0..n).collect();
            ids.shuffle(&mut rng);
            let mut query_ids = ids[..queries_per_split].to_vec();
            let mut index_ids = ids[queries_per_split..].to_vec();
            query_ids.sort_unstable();
            index_ids.sort_unstable();
            Split { index_ids, query_ids }
        })
        .collect())
}
