use std::sync::Arc;
use std::time::Instant;

use crate::dataset::{DataSet, ObjectId};
use crate::error::Result;
use crate::index::{check_k, refine};
use crate::result::{QueryResult, SearchStats};
use crate::spaces::Space;

/// Exact k-NN by linear scan.
#[derive(Debug)]
pub struct BruteForce<S: Space> {
    space: S,
    data: Arc<DataSet<S::Object>>,
}

impl<S: Space> BruteForce<S> {
    pub fn new(space: S, data: Arc<DataSet<S::Object>>) -> Self {
        BruteForce { space, data }
    }

    pub fn space(&self) -> &S {
        &self.space
    }

    pub fn data(&self) -> &Arc<DataSet<S::Object>> {
        &self.data
    }

    pub fn search(&self, query: &S::Object, k: usize) -> Result<QueryResult> {
        check_k(k)?;
        let start = Instant::now();
        let (neighbors, evaluated) = refine(
            &self.space,
            &self.data,
            query,
            0..self.data.len() as ObjectId,
            k,
        );
        Ok(QueryResult {
            neighbors,
            stats: SearchStats {
                distance_computations: evaluated,
                candidates: self.data.len(),
                elapsed: start.elapsed(),
            },
        })
    }
}
