use std::collections::BTreeSet;
use std::sync::Arc;

use permkit::eval::{compute_gold, recall, GoldStandard};
use permkit::index::{
    AccumulatorMetric, Gamma, MiFileIndex, MiFileParams, MiFileSearch, NappIndex, NappParams, NappSearch, PermFilterIndex,
    PermFilterParams, PrunerParams, SwGraph, SwGraphParams, SwSearch, VpTree, VpTreeParams,
};
use permkit::io::uniform;
use permkit::spaces::L2Space;
use permkit::{DataSet, ObjectId, QueryResult};

const QUERIES: usize = 100;

type Fixture = (Arc<DataSet<Vec<f64>>>, Vec<Vec<f64>>, GoldStandard);

fn fixture(n: usize, dim: usize, seed: u64) -> Fixture {
    let all = uniform(n + QUERIES, dim, seed).unwrap().into_objects();
    let data = Arc::new(DataSet::new(all[..n].to_vec()));
    let queries = all[n..].to_vec();
    let gold = compute_gold(&data, &queries, &L2Space, 10, 0).unwrap();
    (data, queries, gold)
}

fn mean_recall(results: &[QueryResult], gold: &GoldStandard) -> f64 {
    results.iter().enumerate().map(|(i, r)| recall(&r.ids(), &gold.ids(i))).sum::<f64>() / results.len() as f64
}

#[test]
fn permfilter_recall_grows_with_gamma() {
    let (data, queries, gold) = fixture(5000, 12, 1);
    let index = PermFilterIndex::build(L2Space, data, &PermFilterParams { m: 32, ..Default::default() }).unwrap();
    let mut last = 0.0;
    for gamma in [10, 20, 50, 100, 250, 500, 1000, 5000] {
        let p = index.default_search(Gamma::Count(gamma));
        let results: Vec<_> = queries.iter().map(|q| index.search(q, 10, &p).unwrap()).collect();
        let r = mean_recall(&results, &gold);
        assert!(r >= last, "gamma {gamma}: {r} < {last}");
        last = r;
    }
    assert_eq!(last, 1.0);
}

#[test]
fn napp_candidates_shrink_as_t_grows() {
    let (data, queries, _) = fixture(5000, 8, 2);
    let index = NappIndex::build(
        L2Space,
        data,
        &NappParams {
            m: 64,
            m_i: 8,
            chunk_size: 1000,
            seed: 1,
            threads: 0,
        },
    )
    .unwrap();
    for q in &queries {
        let sets: Vec<BTreeSet<ObjectId>> = (1..=8)
            .map(|t| index.candidates(q, t).unwrap().into_iter().map(|(id, _)| id).collect())
            .collect();
        for w in sets.windows(2) {
            assert!(w[1].is_subset(&w[0]));
        }
        // t = 1 is the union of the scanned lists.
        let union: BTreeSet<ObjectId> = index
            .query_pivots(q)
            .into_iter()
            .flat_map(|p| index.postings(p).to_vec())
            .collect();
        assert_eq!(sets[0], union);
    }
}

#[test]
fn mifile_candidates_shrink_as_d_decreases() {
    let (data, queries, _) = fixture(5000, 8, 3);
    let index = MiFileIndex::build(L2Space, data, &MiFileParams { m: 32, m_i: 8, seed: 4, threads: 0 }).unwrap();
    let touched = |q: &Vec<f64>, d: Option<usize>| -> BTreeSet<ObjectId> {
        let p = MiFileSearch {
            m_s: 8,
            max_position_diff: d,
            gamma: Gamma::Count(10),
            metric: AccumulatorMetric::Footrule,
        };
        index.accumulate(q, &p).unwrap().touched.into_iter().collect()
    };
    for q in &queries {
        let mut prev = touched(q, None);
        for d in (0..=8).rev() {
            let cur = touched(q, Some(d));
            assert!(cur.is_subset(&prev), "D = {d}");
            prev = cur;
        }
    }
}

#[test]
fn mifile_zero_window_reads_matching_positions_only() {
    let (data, queries, _) = fixture(2000, 8, 4);
    let index = MiFileIndex::build(L2Space, data, &MiFileParams { m: 16, m_i: 4, seed: 4, threads: 0 }).unwrap();
    for q in queries.iter().take(20) {
        let qd = index.pivots().distances(&L2Space, q);
        let closest = permkit::permutation::closest_pivots(&qd, 4);
        let expected: usize = closest
            .iter()
            .enumerate()
            .map(|(pos, &p)| index.postings(p).iter().filter(|x| x.position as usize == pos + 1).count())
            .sum();
        let p = MiFileSearch {
            m_s: 4,
            max_position_diff: Some(0),
            gamma: Gamma::Count(10),
            metric: AccumulatorMetric::Footrule,
        };
        assert_eq!(index.accumulate(q, &p).unwrap().postings_read, expected);
    }
}

#[test]
fn swgraph_recall_grows_with_attempts() {
    let (data, queries, gold) = fixture(3000, 8, 5);
    let graph = SwGraph::build(L2Space, data, &SwGraphParams { nn: 4, attempts: 1, seed: 2 }).unwrap();
    let mut last = 0.0;
    for attempts in [1, 2, 3, 5, 8, 13, 40] {
        let results: Vec<_> = queries
            .iter()
            .enumerate()
            .map(|(i, q)| graph.search(q, 10, &SwSearch { attempts, seed: i as u64 }).unwrap())
            .collect();
        let r = mean_recall(&results, &gold);
        assert!(r >= last, "attempts {attempts}: {r} < {last}");
        last = r;
    }
}

#[test]
fn vptree_recall_falls_as_alpha_grows() {
    let (data, queries, gold) = fixture(5000, 8, 6);
    let tree = VpTree::build(L2Space, data, &VpTreeParams { bucket_size: 10, seed: 3 }).unwrap();
    let run = |alpha_left: f64, alpha_right: f64| {
        let p = PrunerParams {
            alpha_left,
            alpha_right,
            beta: 1,
        };
        let results: Vec<_> = queries.iter().map(|q| tree.search(q, 10, &p).unwrap()).collect();
        mean_recall(&results, &gold)
    };
    let alphas = [0.5, 1.0, 2.0, 4.0, 8.0, 16.0];
    let mut last = f64::INFINITY;
    for a in alphas {
        let r = run(a, 1.0);
        assert!(r <= last, "alpha_left {a}: {r} > {last}");
        last = r;
    }
    let mut last = f64::INFINITY;
    for a in alphas {
        let r = run(1.0, a);
        assert!(r <= last, "alpha_right {a}: {r} > {last}");
        last = r;
    }
}

#[test]
fn napp_recall_falls_as_t_grows() {
    let (data, queries, gold) = fixture(5000, 8, 7);
    let index = NappIndex::build(
        L2Space,
        data,
        &NappParams {
            m: 64,
            m_i: 8,
            chunk_size: 4096,
            seed: 8,
            threads: 0,
        },
    )
    .unwrap();
    let mut last = f64::INFINITY;
    for t in 1..=8 {
        let p = NappSearch { t, gamma: None };
        let results: Vec<_> = queries.iter().map(|q| index.search(q, 10, &p).unwrap()).collect();
        let r = mean_recall(&results, &gold);
        assert!(r <= last, "t {t}: {r} > {last}");
        last = r;
    }
}
