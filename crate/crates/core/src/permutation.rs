//! Pivot selection, induced permutations and the distances between them.
//!
//! A permutation stores, for every pivot `i`, the 1-based position of that
//! pivot when all pivots are ordered by increasing distance from the
//! inducing point. Equal distances are ordered by pivot index.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::DataSet;
use crate::error::{ensure, Error, Result};
use crate::rng;
use crate::spaces::Space;

/// Rank of a pivot inside a permutation, `1..=m`.
pub type Rank = u16;

/// Largest supported number of pivots.
pub const MAX_PIVOTS: usize = Rank::MAX as usize;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PivotSet<T> {
    pivots: Vec<T>,
    /// Positions of the pivots in the data set they were sampled from.
    source_ids: Option<Vec<usize>>,
    seed: Option<u64>,
}

impl<T> PivotSet<T> {
    /// Pivot set from explicitly supplied objects, kept in the given order.
    pub fn from_objects(pivots: Vec<T>) -> Result<Self> {
        ensure!(!pivots.is_empty(), "at least one pivot is required");
        ensure!(
            pivots.len() <= MAX_PIVOTS,
            "at most {MAX_PIVOTS} pivots are supported"
        );
        Ok(PivotSet {
            pivots,
            source_ids: None,
            seed: None,
        })
    }

    /// Placeholder for indexes over an empty data set.
    pub(crate) fn empty() -> Self {
        PivotSet {
            pivots: Vec::new(),
            source_ids: Some(Vec::new()),
            seed: None,
        }
    }

    pub fn len(&self) -> usize {
        self.pivots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pivots.is_empty()
    }

    pub fn objects(&self) -> &[T] {
        &self.pivots
    }

    pub fn source_ids(&self) -> Option<&[usize]> {
        self.source_ids.as_deref()
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Distances from `x` to every pivot, in pivot order.
    pub fn distances<S>(&self, space: &S, x: &T) -> Vec<f64>
    where
        S: Space<Object = T>,
    {
        self.pivots.iter().map(|p| space.pivot_distance(x, p)).collect()
    }
}

/// Draws `m` distinct objects uniformly without replacement.
///
/// Objects equal to an already chosen pivot are skipped while enough
/// distinct objects remain, so duplicates in the data do not waste pivot
/// slots. The draw is a prefix of a seeded Fisher-Yates shuffle.
pub fn select_pivots<T>(data: &DataSet<T>, m: usize, seed: u64) -> Result<PivotSet<T>>
where
    T: Clone + PartialEq,
{
    ensure!(m >= 1, "number of pivots must be positive");
    ensure!(
        m <= data.len(),
        "cannot select {m} pivots from {} objects",
        data.len()
    );
    ensure!(m <= MAX_PIVOTS, "at most {MAX_PIVOTS} pivots are supported");

    let n = data.len();
    let mut rng = rng::seeded(seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut chosen: Vec<usize> = Vec::with_capacity(m);
    let mut skipped: Vec<usize> = Vec::new();
    let mut drawn = 0;
    while chosen.len() < m && drawn < n {
        let j = rng.gen_range(drawn..n);
        order.swap(drawn, j);
        let id = order[drawn];
        drawn += 1;
        if chosen.iter().any(|&c| data[c] == data[id]) {
            skipped.push(id);
        } else {
            chosen.push(id);
        }
    }
    // Too few distinct objects: fall back to duplicates in draw order.
    chosen.extend(skipped.into_iter().take(m - chosen.len()));

    Ok(PivotSet {
        pivots: chosen.iter().map(|&i| data[i].clone()).collect(),
        source_ids: Some(chosen),
        seed: Some(seed),
    })
}

/// Pivot indices ordered by increasing distance, ties by index.
pub fn pivot_order(distances: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..distances.len()).collect();
    order.sort_by(|&a, &b| distances[a].total_cmp(&distances[b]).then(a.cmp(&b)));
    order
}

/// Indices of the `count` closest pivots, closest first.
pub fn closest_pivots(distances: &[f64], count: usize) -> Vec<usize> {
    let cmp = |a: &usize, b: &usize| distances[*a].total_cmp(&distances[*b]).then(a.cmp(b));
    let mut order: Vec<usize> = (0..distances.len()).collect();
    if count < order.len() {
        if count > 0 {
            order.select_nth_unstable_by(count - 1, cmp);
        }
        order.truncate(count);
    }
    order.sort_by(cmp);
    order
}

/// Writes the rank vector induced by `distances` into `out`.
pub fn ranks_from_distances(distances: &[f64], out: &mut [Rank]) {
    debug_assert_eq!(distances.len(), out.len());
    for (pos, pivot) in pivot_order(distances).into_iter().enumerate() {
        out[pivot] = (pos + 1) as Rank;
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Permutation(Vec<Rank>);

impl Permutation {
    /// Checks that `ranks` is a permutation of `1..=m`.
    pub fn new(ranks: Vec<Rank>) -> Result<Self> {
        let m = ranks.len();
        ensure!((1..=MAX_PIVOTS).contains(&m), "invalid permutation size {m}");
        let mut seen = vec![false; m + 1];
        for &r in &ranks {
            let r = r as usize;
            ensure!(
                (1..=m).contains(&r) && !seen[r],
                "{ranks:?} is not a permutation of 1..={m}"
            );
            seen[r] = true;
        }
        Ok(Permutation(ranks))
    }

    pub fn from_distances(distances: &[f64]) -> Self {
        let mut ranks = vec![0; distances.len()];
        ranks_from_distances(distances, &mut ranks);
        Permutation(ranks)
    }

    pub fn ranks(&self) -> &[Rank] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Permutation induced by `x`: rank 1 for the closest pivot.
pub fn compute_permutation<S: Space>(
    x: &S::Object,
    pivots: &PivotSet<S::Object>,
    space: &S,
) -> Permutation {
    Permutation::from_distances(&pivots.distances(space, x))
}

/// Induced permutations of every object, row-major (`m` ranks per object).
/// Rows are computed in parallel; the output does not depend on the pool.
pub fn compute_permutations<S: Space>(
    data: &DataSet<S::Object>,
    pivots: &PivotSet<S::Object>,
    space: &S,
) -> Vec<Rank> {
    let m = pivots.len();
    let mut out = vec![0; data.len() * m];
    out.par_chunks_mut(m.max(1))
        .zip(data.objects().par_iter())
        .for_each(|(row, x)| ranks_from_distances(&pivots.distances(space, x), row));
    out
}

#[inline]
pub(crate) fn footrule_ranks(p: &[Rank], q: &[Rank]) -> u64 {
    p.iter()
        .zip(q)
        .map(|(&a, &b)| (a as i32 - b as i32).unsigned_abs() as u64)
        .sum()
}

#[inline]
pub(crate) fn spearman_ranks(p: &[Rank], q: &[Rank]) -> u64 {
    p.iter()
        .zip(q)
        .map(|(&a, &b)| {
            let d = a as i64 - b as i64;
            (d * d) as u64
        })
        .sum()
}

fn check_same_size(p: &Permutation, q: &Permutation) -> Result<()> {
    ensure!(
        p.len() == q.len(),
        "permutation size mismatch: {} vs {}",
        p.len(),
        q.len()
    );
    Ok(())
}

/// `Σ |p_i - q_i|`
pub fn footrule(p: &Permutation, q: &Permutation) -> Result<u64> {
    check_same_size(p, q)?;
    Ok(footrule_ranks(&p.0, &q.0))
}

/// `Σ (p_i - q_i)^2`
pub fn spearman_rho(p: &Permutation, q: &Permutation) -> Result<u64> {
    check_same_size(p, q)?;
    Ok(spearman_ranks(&p.0, &q.0))
}

/// Bit vector packed into 64-bit words; unused trailing bits are zero.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BitPermutation {
    words: Vec<u64>,
    len: usize,
}

impl BitPermutation {
    pub fn from_bits(bits: &[bool]) -> Self {
        let mut words = vec![0u64; words_for(bits.len())];
        for (i, _) in bits.iter().enumerate().filter(|(_, b)| **b) {
            words[i / 64] |= 1 << (i % 64);
        }
        BitPermutation {
            words,
            len: bits.len(),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit {i} out of range");
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn to_bits(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.get(i)).collect()
    }

    pub fn count_ones(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }
}

#[inline]
pub(crate) fn words_for(bits: usize) -> usize {
    bits.div_ceil(64)
}

/// Sets bit `i` of `out` when `ranks[i] >= threshold`.
#[inline]
pub(crate) fn binarize_into(ranks: &[Rank], threshold: Rank, out: &mut [u64]) {
    out.fill(0);
    for (i, &r) in ranks.iter().enumerate() {
        if r >= threshold {
            out[i / 64] |= 1 << (i % 64);
        }
    }
}

#[inline]
pub(crate) fn hamming_words(x: &[u64], y: &[u64]) -> u32 {
    x.iter().zip(y).map(|(a, b)| (a ^ b).count_ones()).sum()
}

/// Bit `i` is set iff `p_i >= b`.
pub fn binarize(p: &Permutation, b: usize) -> Result<BitPermutation> {
    let m = p.len();
    ensure!(
        (1..=m).contains(&b),
        "binarization threshold {b} outside 1..={m}"
    );
    let mut words = vec![0; words_for(m)];
    binarize_into(&p.0, b as Rank, &mut words);
    Ok(BitPermutation { words, len: m })
}

/// Population count of the XOR of two packed bit vectors.
pub fn hamming(x: &BitPermutation, y: &BitPermutation) -> Result<u32> {
    if x.len != y.len {
        return Err(Error::invalid(format!(
            "bit permutation length mismatch: {} vs {}",
            x.len, y.len
        )));
    }
    Ok(hamming_words(&x.words, &y.words))
}
