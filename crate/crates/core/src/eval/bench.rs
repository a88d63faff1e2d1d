use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::dataset::DataSet;
use crate::error::Result;
use crate::eval::{compute_gold, recall, GoldStandard, Split};
use crate::index::{with_threads, AnyIndex, BruteForce, MethodConfig};
use crate::spaces::Space;

/// Measurements of one method on one split.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub method: String,
    pub split: usize,
    pub config: MethodConfig,
    pub k: usize,
    pub num_queries: usize,
    pub index_size: usize,
    pub recall: f64,
    /// Exhaustive-scan query time divided by the method's query time.
    pub improvement_in_efficiency: f64,
    pub mean_query_time_ms: f64,
    pub brute_force_query_time_ms: f64,
    pub mean_distance_computations: f64,
    pub mean_candidates: f64,
    pub index_bytes: usize,
    pub build_time_ms: f64,
    /// Set when the build or a query failed; the metrics are then zero.
    pub error: Option<String>,
}

impl BenchReport {
    pub const CSV_HEADER: &'static str = "method,split,k,num_queries,index_size,recall,improvement_in_efficiency,\
mean_query_time_ms,brute_force_query_time_ms,mean_distance_computations,mean_candidates,index_bytes,build_time_ms,error";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{:.6},{:.4},{:.6},{:.6},{:.2},{:.2},{},{:.3},{}",
            self.method,
            self.split,
            self.k,
            self.num_queries,
            self.index_size,
            self.recall,
            self.improvement_in_efficiency,
            self.mean_query_time_ms,
            self.brute_force_query_time_ms,
            self.mean_distance_computations,
            self.mean_candidates,
            self.index_bytes,
            self.build_time_ms,
            self.error.as_deref().unwrap_or("").replace([',', '\n'], ";")
        )
    }
}

/// Mean of the per-split figures of one method.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: String,
    pub splits: usize,
    pub recall: f64,
    pub improvement_in_efficiency: f64,
    pub mean_query_time_ms: f64,
    pub mean_distance_computations: f64,
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

/// Runs every method on every split. The gold standard and the indexes are
/// built with `threads` workers; queries are always timed one at a time on
/// the calling thread after one untimed warm-up pass, and the exhaustive
/// scan is timed the same way in the same process.
pub fn run_benchmark<S: Space + Clone>(
    methods: &[MethodConfig],
    space: &S,
    data: &DataSet<S::Object>,
    splits: &[Split],
    k: usize,
    seed: u64,
    threads: usize,
) -> Result<Vec<BenchReport>> {
    let mut reports = Vec::new();
    for (s, split) in splits.iter().enumerate() {
        let indexed = Arc::new(data.subset(&split.index_ids));
        let queries = data.subset(&split.query_ids).into_objects();
        let gold = with_threads(threads, || compute_gold(&indexed, &queries, space, k, s))?;

        let exact = BruteForce::new(space.clone(), indexed.clone());
        let start = Instant::now();
        for q in &queries {
            exact.search(q, k)?;
        }
        let bf_time = ms(start.elapsed()) / queries.len() as f64;

        for config in methods {
            let report = bench_one(config, space, &indexed, &queries, &gold, k, seed, threads, bf_time, s)
                .unwrap_or_else(|e| BenchReport {
                    method: config.name().to_string(),
                    split: s,
                    config: config.clone(),
                    k,
                    num_queries: queries.len(),
                    index_size: indexed.len(),
                    recall: 0.0,
                    improvement_in_efficiency: 0.0,
                    mean_query_time_ms: 0.0,
                    brute_force_query_time_ms: bf_time,
                    mean_distance_computations: 0.0,
                    mean_candidates: 0.0,
                    index_bytes: 0,
                    build_time_ms: 0.0,
                    error: Some(e.to_string()),
                });
            reports.push(report);
        }
    }
    Ok(reports)
}

#[allow(clippy::too_many_arguments)]
fn bench_one<S: Space + Clone>(
    config: &MethodConfig,
    space: &S,
    indexed: &Arc<DataSet<S::Object>>,
    queries: &[S::Object],
    gold: &GoldStandard,
    k: usize,
    seed: u64,
    threads: usize,
    bf_time: f64,
    split: usize,
) -> Result<BenchReport> {
    let build_start = Instant::now();
    let index = with_threads(threads, || {
        AnyIndex::build(config, space.clone(), indexed.clone(), seed, threads)
    })?;
    let build_time_ms = ms(build_start.elapsed());
    for q in queries {
        index.search(q, k)?;
    }
    let start = Instant::now();
    let results = queries
        .iter()
        .map(|q| index.search(q, k))
        .collect::<Result<Vec<_>>>()?;
    let elapsed = start.elapsed();
    let mut total_recall = 0.0;
    let mut total_dist = 0u64;
    let mut total_cand = 0usize;
    for (qi, res) in results.iter().enumerate() {
        total_recall += recall(&res.ids(), &gold.ids(qi));
        total_dist += res.stats.distance_computations;
        total_cand += res.stats.candidates;
    }
    let nq = queries.len() as f64;
    let query_time = ms(elapsed) / nq;
    Ok(BenchReport {
        method: config.name().to_string(),
        split,
        config: config.clone(),
        k,
        num_queries: queries.len(),
        index_size: indexed.len(),
        recall: total_recall / nq,
        improvement_in_efficiency: bf_time / query_time.max(1e-9),
        mean_query_time_ms: query_time,
        brute_force_query_time_ms: bf_time,
        mean_distance_computations: total_dist as f64 / nq,
        mean_candidates: total_cand as f64 / nq,
        index_bytes: index.index_bytes(),
        build_time_ms,
        error: None,
    })
}

/// Per-method means over splits, in first-seen method order.
pub fn summarize(reports: &[BenchReport]) -> Vec<MethodSummary> {
    let mut names: Vec<&str> = Vec::new();
    for r in reports {
        if !names.contains(&r.method.as_str()) {
            names.push(&r.method);
        }
    }
    names
        .into_iter()
        .map(|name| {
            let rows: Vec<&BenchReport> = reports
                .iter()
                .filter(|r| r.method == name && r.error.is_none())
                .collect();
            let n = rows.len().max(1) as f64;
            let mean = |f: fn(&BenchReport) -> f64| rows.iter().map(|r| f(r)).sum::<f64>() / n;
            MethodSummary {
                method: name.to_string(),
                splits: rows.len(),
                recall: mean(|r| r.recall),
                improvement_in_efficiency: mean(|r| r.improvement_in_efficiency),
                mean_query_time_ms: mean(|r| r.mean_query_time_ms),
                mean_distance_computations: mean(|r| r.mean_distance_computations),
            }
        })
        .collect()
}
