use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::dataset::ObjectId;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Neighbor {
    pub id: ObjectId,
    pub distance: f64,
}

impl Neighbor {
    pub fn new(id: ObjectId, distance: f64) -> Self {
        Neighbor { id, distance }
    }

    /// Ascending distance, ties broken by the smaller id.
    #[inline]
    pub fn cmp_by_distance(&self, other: &Neighbor) -> Ordering {
        self.distance
            .total_cmp(&other.distance)
            .then(self.id.cmp(&other.id))
    }
}

impl Eq for Neighbor {}

impl PartialOrd for Neighbor {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Neighbor {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cmp_by_distance(other)
    }
}

/// Per-query instrumentation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchStats {
    /// Original-space distance evaluations, including query-to-pivot ones.
    pub distance_computations: u64,
    /// Objects passed to refinement (or visited, for tree and graph search).
    pub candidates: usize,
    #[serde(with = "duration_nanos")]
    pub elapsed: Duration,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct QueryResult {
    /// Sorted ascending by distance, ties by id.
    pub neighbors: Vec<Neighbor>,
    pub stats: SearchStats,
}

impl QueryResult {
    pub fn ids(&self) -> Vec<ObjectId> {
        self.neighbors.iter().map(|n| n.id).collect()
    }
}

/// Bounded collection of the `k` best neighbors seen so far.
#[derive(Clone, Debug)]
pub struct TopK {
    k: usize,
    heap: BinaryHeap<Neighbor>,
}

impl TopK {
    pub fn new(k: usize) -> Self {
        TopK {
            k,
            heap: BinaryHeap::with_capacity(k + 1),
        }
    }

    /// Inserts a candidate; returns whether it was kept.
    #[inline]
    pub fn push(&mut self, id: ObjectId, distance: f64) -> bool {
        if self.k == 0 {
            return false;
        }
        let cand = Neighbor::new(id, distance);
        if self.heap.len() < self.k {
            self.heap.push(cand);
            return true;
        }
        let mut top = self.heap.peek_mut().expect("heap is full");
        if cand < *top {
            *top = cand;
            true
        } else {
            false
        }
    }

    /// Distance of the current k-th best, or infinity until `k` are held.
    #[inline]
    pub fn radius(&self) -> f64 {
        if self.heap.len() < self.k {
            f64::INFINITY
        } else {
            self.heap.peek().map_or(f64::INFINITY, |n| n.distance)
        }
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn into_sorted(self) -> Vec<Neighbor> {
        self.heap.into_sorted_vec()
    }
}

mod duration_nanos {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(d.as_nanos() as u64)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        Ok(Duration::from_nanos(u64::deserialize(d)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn top_k_keeps_smallest_with_id_ties() {
        let mut top = TopK::new(3);
        assert_eq!(top.radius(), f64::INFINITY);
        for (id, d) in [(5, 1.0), (1, 3.0), (2, 1.0), (9, 0.5), (0, 3.0), (7, 2.0)] {
            top.push(id, d);
        }
        assert_eq!(top.radius(), 1.0);
        let ids: Vec<_> = top.into_sorted().iter().map(|n| n.id).collect();
        assert_eq!(ids, vec![9, 2, 5]);
    }

    #[test]
    fn tie_at_radius_prefers_smaller_id() {
        let mut top = TopK::new(1);
        top.push(4, 1.0);
        assert!(top.push(3, 1.0));
        assert!(!top.push(8, 1.0));
        assert_eq!(top.into_sorted()[0].id, 3);
    }

    #[test]
    fn zero_k() {
        let mut top = TopK::new(0);
        assert!(!top.push(0, 0.0));
        assert!(top.into_sorted().is_empty());
    }
}
