//! Empirical probes of how far a distance is from being a metric.

use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::DataSet;
use crate::error::{Error, Result};
use crate::rng;
use crate::spaces::Space;

const TRIANGLE_SLACK: f64 = 1e-9;
const MIN_PAIR_DISTANCE: f64 = 1e-12;

/// Monotone transform applied to distances before the defectiveness test.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Transform {
    #[default]
    Identity,
    Sqrt,
}

impl Transform {
    #[inline]
    pub fn apply(self, d: f64) -> f64 {
        match self {
            Transform::Identity => d,
            Transform::Sqrt => d.sqrt(),
        }
    }
}

impl FromStr for Transform {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "id" | "identity" => Ok(Transform::Identity),
            "sqrt" => Ok(Transform::Sqrt),
            _ => Err(Error::invalid(format!("unknown transform `{s}`"))),
        }
    }
}

fn sample_triple(rng: &mut rng::Rng, n: usize) -> (usize, usize, usize) {
    (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n))
}

/// Fraction of uniformly sampled ordered triples `(a, b, c)` with
/// `d(a, c) > d(a, b) + d(b, c) + 1e-9`.
pub fn triangle_violation_rate<S: Space>(
    data: &DataSet<S::Object>,
    space: &S,
    num_triples: usize,
    seed: u64,
) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::invalid("triangle probe needs a non-empty data set"));
    }
    if num_triples == 0 {
        return Ok(0.0);
    }
    let mut rng = rng::seeded(seed);
    let mut violations = 0usize;
    for _ in 0..num_triples {
        let (a, b, c) = sample_triple(&mut rng, data.len());
        let (a, b, c) = (&data[a], &data[b], &data[c]);
        let direct = space.distance(a, c);
        if direct > space.distance(a, b) + space.distance(b, c) + TRIANGLE_SLACK {
            violations += 1;
        }
    }
    Ok(violations as f64 / num_triples as f64)
}

/// Smallest `mu` for which every sampled triple `(q, a, b)` satisfies
/// `|f(d(q,a)) - f(d(q,b))| <= mu * f(d(a,b))`. Triples whose `f(d(a,b))`
/// is below 1e-12 are skipped.
pub fn mu_defectiveness_probe<S: Space>(
    data: &DataSet<S::Object>,
    space: &S,
    transform: Transform,
    num_triples: usize,
    seed: u64,
) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::invalid("defectiveness probe needs a non-empty data set"));
    }
    let mut rng = rng::seeded(seed);
    let mut mu: f64 = 0.0;
    for _ in 0..num_triples {
        let (q, a, b) = sample_triple(&mut rng, data.len());
        let (q, a, b) = (&data[q], &data[a], &data[b]);
        let base = transform.apply(space.distance(a, b));
        if base < MIN_PAIR_DISTANCE {
            continue;
        }
        let gap = (transform.apply(space.distance(q, a)) - transform.apply(space.distance(q, b))).abs();
        mu = mu.max(gap / base);
    }
    Ok(mu)
}
