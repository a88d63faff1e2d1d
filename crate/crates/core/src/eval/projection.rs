use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{DataSet, ObjectId};
use crate::error::{ensure, Error, Result};
use crate::eval::{compute_gold, recall};
use crate::index::{Gamma, PermDistance, PermFilterIndex};
use crate::result::TopK;
use crate::permutation::{compute_permutation, footrule, select_pivots, spearman_rho};
use crate::rng;
use crate::spaces::Space;

/// Distance between two induced permutations used as the projected distance.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProjectionDistance {
    /// Euclidean distance between rank vectors.
    #[default]
    L2,
    Spearman,
    Footrule,
}

impl FromStr for ProjectionDistance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l2" => Ok(ProjectionDistance::L2),
            "spearman" => Ok(ProjectionDistance::Spearman),
            "footrule" => Ok(ProjectionDistance::Footrule),
            _ => Err(Error::invalid(format!("unknown projection distance `{s}`"))),
        }
    }
}

impl fmt::Display for ProjectionDistance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProjectionDistance::L2 => "l2",
            ProjectionDistance::Spearman => "spearman",
            ProjectionDistance::Footrule => "footrule",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stratum {
    /// Two objects drawn uniformly.
    Random,
    /// An object and one of its nearest neighbors.
    Neighbor,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScatterPoint {
    pub stratum: Stratum,
    pub a: ObjectId,
    pub b: ObjectId,
    pub original: f64,
    pub projected: f64,
}

/// Neighbors per sampled object in the near-pair stratum.
const NEAR_POOL: usize = 100;

/// Original versus projected distance for `num_pairs` pairs: half drawn
/// uniformly, half pairing an object with one of its `100` nearest
/// neighbors. Pivots are `m` objects sampled from `data`.
pub fn projection_scatter<S: Space>(
    space: &S,
    data: &DataSet<S::Object>,
    m: usize,
    distance: ProjectionDistance,
    num_pairs: usize,
    seed: u64,
) -> Result<Vec<ScatterPoint>> {
    ensure!(data.len() >= 2, "need at least two objects");
    let pivots = select_pivots(data, m, seed)?;
    let mut rng = rng::derived(seed, 1);
    let n = data.len();
    let pairs: Vec<(Stratum, usize, usize)> = (0..num_pairs)
        .map(|i| {
            let a = rng.gen_range(0..n);
            if i % 2 == 0 {
                let mut b = rng.gen_range(0..n - 1);
                if b >= a {
                    b += 1;
                }
                (Stratum::Random, a, b)
            } else {
                // Resolved below once neighbor lists are known.
                (Stratum::Neighbor, a, rng.gen_range(0..NEAR_POOL.min(n - 1)))
            }
        })
        .collect();

    pairs
        .into_par_iter()
        .map(|(stratum, a, b)| {
            let b = match stratum {
                Stratum::Random => b,
                Stratum::Neighbor => nearest_excluding(space, data, a, NEAR_POOL.min(n - 1))[b],
            };
            let (x, y) = (&data[a], &data[b]);
            let px = compute_permutation(x, &pivots, space);
            let py = compute_permutation(y, &pivots, space);
            let projected = match distance {
                ProjectionDistance::L2 => (spearman_rho(&px, &py)? as f64).sqrt(),
                ProjectionDistance::Spearman => spearman_rho(&px, &py)? as f64,
                ProjectionDistance::Footrule => footrule(&px, &py)? as f64,
            };
            Ok(ScatterPoint {
                stratum,
                a: a as ObjectId,
                b: b as ObjectId,
                original: space.query_distance(y, x),
                projected,
            })
        })
        .collect()
}

/// Ids of the `count` objects closest to `data[id]`, itself excluded.
fn nearest_excluding<S: Space>(space: &S, data: &DataSet<S::Object>, id: usize, count: usize) -> Vec<usize> {
    let mut all: Vec<(f64, usize)> = (0..data.len())
        .filter(|&j| j != id)
        .map(|j| (space.query_distance(&data[j], &data[id]), j))
        .collect();
    all.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
    all.truncate(count);
    all.into_iter().map(|(_, j)| j).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub fraction: f64,
    pub gamma: usize,
    pub recall: f64,
}

/// Mean k-NN recall when the `fraction · N` objects closest in permutation
/// space are refined, for each fraction. Candidate lists for smaller
/// fractions are prefixes of those for larger ones, so recall never drops
/// as the fraction grows.
pub fn recall_vs_fraction_curve<S: Space + Clone>(
    index: &PermFilterIndex<S>,
    queries: &[S::Object],
    k: usize,
    fractions: &[f64],
    distance: PermDistance,
) -> Result<Vec<CurvePoint>> {
    ensure!(!queries.is_empty(), "no queries");
    let data = index.data();
    let n = data.len();
    let gammas = fractions
        .iter()
        .map(|&f| Gamma::Fraction(f).resolve(n))
        .collect::<Result<Vec<_>>>()?;
    let max_gamma = gammas.iter().copied().max().unwrap_or(0);
    let gold = compute_gold(data, queries, index.space(), k, 0)?;
    let space = index.space();

    let per_query = queries
        .par_iter()
        .enumerate()
        .map(|(qi, q)| {
            let ranked = index.filter(q, Gamma::Count(max_gamma), distance)?;
            let truth = gold.ids(qi);
            let dists: Vec<f64> = ranked
                .iter()
                .map(|&id| space.query_distance(&data[id as usize], q))
                .collect();
            Ok(gammas
                .iter()
                .map(|&g| {
                    let mut top = TopK::new(k);
                    for (&id, &d) in ranked.iter().zip(&dists).take(g) {
                        top.push(id, d);
                    }
                    let found: Vec<ObjectId> = top.into_sorted().iter().map(|nb| nb.id).collect();
                    recall(&found, &truth)
                })
                .collect::<Vec<f64>>())
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(fractions
        .iter()
        .zip(&gammas)
        .enumerate()
        .map(|(i, (&fraction, &gamma))| CurvePoint {
            fraction,
            gamma,
            recall: per_query.iter().map(|r| r[i]).sum::<f64>() / queries.len() as f64,
        })
        .collect())
}
