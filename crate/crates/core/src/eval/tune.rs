use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dataset::{DataSet, ObjectId};
use crate::error::{ensure, Result};
use crate::eval::{compute_gold, recall};
use crate::index::{tune_vptree, AnyIndex, Gamma, GridSpec, MethodConfig};
use crate::spaces::Space;

/// One evaluated parameter setting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuneTrial {
    pub iteration: usize,
    pub config: MethodConfig,
    pub recall: f64,
    /// Data size divided by mean distance computations per query.
    pub efficiency: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuneReport {
    pub best: MethodConfig,
    pub recall: f64,
    pub efficiency: f64,
    pub band: (f64, f64),
    /// False when no trial landed in the recall band; `best` is then the
    /// trial closest to it.
    pub reached: bool,
    pub trace: Vec<TuneTrial>,
}

/// Candidate-budget fractions swept for filter methods.
pub const GAMMA_FRACTIONS: [f64; 12] = [
    0.0005, 0.001, 0.002, 0.005, 0.01, 0.02, 0.03, 0.05, 0.1, 0.2, 0.3, 0.5,
];

/// Query-time restarts swept for the small-world graph.
pub const SW_ATTEMPTS: [usize; 9] = [1, 2, 4, 8, 16, 32, 64, 128, 256];

fn band_gap(recall: f64, band: (f64, f64)) -> f64 {
    if recall < band.0 {
        band.0 - recall
    } else if recall > band.1 {
        recall - band.1
    } else {
        0.0
    }
}

fn better(a: &TuneTrial, b: &TuneTrial, band: (f64, f64)) -> bool {
    let (ga, gb) = (band_gap(a.recall, band), band_gap(b.recall, band));
    if ga != gb {
        return ga < gb;
    }
    a.efficiency > b.efficiency
}

/// The query-time settings swept for `base`, keeping its build parameters.
fn search_grid(base: &MethodConfig) -> Vec<MethodConfig> {
    let with_gamma = |g: f64| {
        let mut c = base.clone();
        match &mut c {
            MethodConfig::PermFilter { gamma, .. } | MethodConfig::MiFile { gamma, .. } => {
                *gamma = Gamma::Fraction(g)
            }
            _ => unreachable!(),
        }
        c
    };
    match base {
        MethodConfig::BruteForce | MethodConfig::VpTree { .. } => vec![base.clone()],
        MethodConfig::PermFilter { .. } => GAMMA_FRACTIONS.iter().map(|&g| with_gamma(g)).collect(),
        MethodConfig::MiFile {
            m_i, ..
        } => {
            let mut out = Vec::new();
            let mut m_s_values: Vec<usize> = [*m_i / 4, *m_i / 2, *m_i].into_iter().filter(|&v| v >= 1).collect();
            m_s_values.dedup();
            let mut d_values = vec![None, Some(*m_i / 2), Some(*m_i / 4)];
            d_values.dedup();
            for m_s in m_s_values {
                for &d in &d_values {
                    for &g in &GAMMA_FRACTIONS {
                        let mut c = with_gamma(g);
                        if let MethodConfig::MiFile {
                            m_s: s,
                            max_position_diff: dd,
                            ..
                        } = &mut c
                        {
                            *s = m_s;
                            *dd = d;
                        }
                        out.push(c);
                    }
                }
            }
            out
        }
        MethodConfig::Napp { m_i, .. } => (1..=*m_i)
            .map(|t| {
                let mut c = base.clone();
                if let MethodConfig::Napp { t: tt, .. } = &mut c {
                    *tt = t;
                }
                c
            })
            .collect(),
        MethodConfig::SwGraph { .. } => SW_ATTEMPTS
            .iter()
            .map(|&a| {
                let mut c = base.clone();
                if let MethodConfig::SwGraph { search_attempts, .. } = &mut c {
                    *search_attempts = a;
                }
                c
            })
            .collect(),
    }
}

/// Copies the query-time settings of `config` into a built index.
fn apply_search<S: Space>(index: &mut AnyIndex<S>, config: &MethodConfig) {
    match (index, config) {
        (AnyIndex::PermFilter(_, p), MethodConfig::PermFilter { gamma, distance, .. }) => {
            p.gamma = *gamma;
            if let Some(d) = distance {
                p.distance = *d;
            }
        }
        (
            AnyIndex::MiFile(_, p),
            MethodConfig::MiFile {
                m_s,
                max_position_diff,
                gamma,
                metric,
                ..
            },
        ) => {
            p.m_s = *m_s;
            p.max_position_diff = *max_position_diff;
            p.gamma = *gamma;
            p.metric = *metric;
        }
        (AnyIndex::Napp(_, p), MethodConfig::Napp { t, gamma, .. }) => {
            p.t = *t;
            p.gamma = *gamma;
        }
        (AnyIndex::VpTree(_, p), MethodConfig::VpTree { pruner, .. }) => *p = *pruner,
        (AnyIndex::SwGraph(_, p), MethodConfig::SwGraph { search_attempts, .. }) => p.attempts = *search_attempts,
        _ => {}
    }
}

/// Searches query-time parameters of `base` for the best efficiency with
/// recall inside `band`, measured on `queries` against `data`. The index
/// is built once with the build parameters of `base`. Efficiency counts
/// distance computations, so the outcome is reproducible.
#[allow(clippy::too_many_arguments)]
pub fn tune_method<S: Space + Clone>(
    base: &MethodConfig,
    space: &S,
    data: Arc<DataSet<S::Object>>,
    queries: &[S::Object],
    k: usize,
    band: (f64, f64),
    seed: u64,
    threads: usize,
) -> Result<TuneReport> {
    ensure!(!queries.is_empty(), "tuning needs at least one query");
    ensure!(band.0 <= band.1, "empty recall band");
    let mut index = AnyIndex::build(base, space.clone(), data.clone(), seed, threads)?;

    if let (AnyIndex::VpTree(tree, _), MethodConfig::VpTree { bucket_size, pruner }) = (&index, base) {
        let grid = GridSpec {
            beta: pruner.beta,
            ..GridSpec::default()
        };
        let out = tune_vptree(tree, queries, k, band, &grid)?;
        let to_config = |p| MethodConfig::VpTree {
            bucket_size: *bucket_size,
            pruner: p,
        };
        return Ok(TuneReport {
            best: to_config(out.params),
            recall: out.recall,
            efficiency: out.efficiency,
            band,
            reached: out.reached,
            trace: out
                .trace
                .into_iter()
                .map(|e| TuneTrial {
                    iteration: e.iteration,
                    config: to_config(e.params),
                    recall: e.recall,
                    efficiency: e.efficiency,
                })
                .collect(),
        });
    }

    let gold = compute_gold(&data, queries, space, k, 0)?;
    let truth: Vec<Vec<ObjectId>> = (0..queries.len()).map(|i| gold.ids(i)).collect();
    let n = data.len().max(1) as f64;
    let mut trace = Vec::new();
    let mut best: Option<TuneTrial> = None;
    for config in search_grid(base) {
        apply_search(&mut index, &config);
        let mut total_recall = 0.0;
        let mut comps = 0u64;
        let mut failed = false;
        for (q, t) in queries.iter().zip(&truth) {
            match index.search(q, k) {
                Ok(res) => {
                    total_recall += recall(&res.ids(), t);
                    comps += res.stats.distance_computations;
                }
                // Settings the index rejects (e.g. a budget below k) are skipped.
                Err(_) => {
                    failed = true;
                    break;
                }
            }
        }
        if failed {
            continue;
        }
        let nq = queries.len() as f64;
        let trial = TuneTrial {
            iteration: 0,
            config,
            recall: total_recall / nq,
            efficiency: n / (comps as f64 / nq).max(1.0),
        };
        if best.as_ref().is_none_or(|b| better(&trial, b, band)) {
            best = Some(trial.clone());
        }
        trace.push(trial);
    }
    let best = best.ok_or_else(|| crate::error::Error::invalid("no parameter setting could be evaluated"))?;
    Ok(TuneReport {
        reached: band_gap(best.recall, band) == 0.0,
        best: best.config,
        recall: best.recall,
        efficiency: best.efficiency,
        band,
        trace,
    })
}
