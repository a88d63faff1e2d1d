//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on
//! any failure. Run with `cargo test -p permkit --test acceptance`.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use permkit::eval::{
    compute_gold, recall, recall_vs_fraction_curve, run_benchmark, tune_method, BenchReport, Split,
};
use permkit::index::{
    AccumulatorMetric, AnyIndex, BruteForce, Gamma, MethodConfig, MiFileIndex, MiFileParams, MiFileSearch,
    NappIndex, NappParams, NappSearch, PermDistance, PermFilterIndex, PermFilterParams, PermFilterSearch,
    PrunerParams, SwGraph, SwGraphParams, SwSearch, VpTree, VpTreeParams, DEFAULT_CHUNK_SIZE,
};
use permkit::io::{dirichlet, dna, gaussian_mixture, save_snapshot, uniform};
use permkit::permutation::{
    binarize, compute_permutation, compute_permutations, footrule, hamming, BitPermutation, Permutation, PivotSet,
};
use permkit::spaces::diagnostics::{mu_defectiveness_probe, triangle_violation_rate, Transform};
use permkit::spaces::{
    cosine_distance, js_divergence, kl_divergence, l2, normalized_levenshtein, sqfd, Cluster, Histogram, JsSpace,
    L2Space, LevenshteinSpace, Sequence, Signature, SparseVector, CENTROID_DIM,
};
use permkit::{DataSet, ObjectId, QueryResult};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! require {
    ($cond:expr, $($fmt:tt)+) => {
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn split(n: usize, q: usize, dim: usize, seed: u64) -> (Arc<DataSet<Vec<f64>>>, Vec<Vec<f64>>) {
    let all = uniform(n + q, dim, seed).unwrap().into_objects();
    let queries = all[n..].to_vec();
    (Arc::new(DataSet::new(all[..n].to_vec())), queries)
}

fn same(res: &QueryResult, exact: &QueryResult) -> bool {
    res.neighbors == exact.neighbors
}

fn perm(ranks: &[u16]) -> Permutation {
    Permutation::new(ranks.to_vec()).unwrap()
}

fn worked_example() -> Outcome {
    let pivots =
        PivotSet::from_objects(vec![vec![6.0, 8.5], vec![6.5, 4.0], vec![9.0, 5.0], vec![4.0, 1.5]]).unwrap();
    let points = vec![vec![2.5, 10.0], vec![1.5, 9.5], vec![8.0, 7.0], vec![2.0, 5.5]];
    let expected: [[u16; 4]; 4] = [[1, 2, 3, 4], [1, 2, 4, 3], [2, 3, 1, 4], [3, 2, 4, 1]];
    for (x, e) in points.iter().zip(&expected) {
        let p = compute_permutation(x, &pivots, &L2Space);
        require!(p.ranks() == e, "permutation {:?} != {:?}", p.ranks(), e);
    }
    let perms = expected.map(|r| perm(&r));
    let foot: Vec<u64> = perms[1..].iter().map(|p| footrule(&perms[0], p).unwrap()).collect();
    require!(foot == [2, 4, 6], "footrule {foot:?}");
    let bits: Vec<BitPermutation> = perms.iter().map(|p| binarize(p, 3).unwrap()).collect();
    let ham: Vec<u32> = bits[1..].iter().map(|b| hamming(&bits[0], b).unwrap()).collect();
    require!(ham == [0, 2, 2], "hamming {ham:?}");
    let index = MiFileIndex::build_with_pivots(L2Space, Arc::new(DataSet::new(points.clone())), pivots, 2, 1)
        .map_err(|e| e.to_string())?;
    let acc = index
        .accumulate(
            &points[0],
            &MiFileSearch {
                m_s: 2,
                max_position_diff: None,
                gamma: Gamma::Count(4),
                metric: AccumulatorMetric::Footrule,
            },
        )
        .map_err(|e| e.to_string())?;
    require!(acc.scores[1..] == [0, 5, 4], "accumulators {:?}", acc.scores);
    Ok("permutations, footrule, hamming and accumulators match".into())
}

fn vptree_oracle() -> Outcome {
    let (data, queries) = split(10_000, 100, 16, 21);
    let bf = BruteForce::new(L2Space, data.clone());
    let tree = VpTree::build(L2Space, data, &VpTreeParams { bucket_size: 50, seed: 1 }).unwrap();
    let mut comps = 0;
    for q in &queries {
        let res = tree.search(q, 10, &PrunerParams::metric()).unwrap();
        require!(same(&res, &bf.search(q, 10).unwrap()), "result differs from linear scan");
        comps += res.stats.distance_computations;
    }
    Ok(format!("100/100 identical, {:.0} distance computations per query", comps as f64 / 100.0))
}

fn exhaustive_limits() -> Outcome {
    let (data, queries) = split(1000, 100, 8, 22);
    let bf = BruteForce::new(L2Space, data.clone());
    let pf = PermFilterIndex::build(L2Space, data.clone(), &PermFilterParams { m: 16, ..Default::default() }).unwrap();
    let napp = NappIndex::build(
        L2Space,
        data.clone(),
        &NappParams {
            m: 16,
            m_i: 16,
            chunk_size: DEFAULT_CHUNK_SIZE,
            seed: 2,
            threads: 0,
        },
    )
    .unwrap();
    let mifile = MiFileIndex::build(L2Space, data.clone(), &MiFileParams { m: 16, m_i: 16, seed: 3, threads: 0 }).unwrap();
    let pf_params = PermFilterSearch {
        gamma: Gamma::Count(1000),
        distance: PermDistance::Spearman,
    };
    let mi_params = MiFileSearch {
        m_s: 16,
        max_position_diff: None,
        gamma: Gamma::Count(1000),
        metric: AccumulatorMetric::Footrule,
    };
    for q in &queries {
        let exact = bf.search(q, 10).unwrap();
        require!(same(&pf.search(q, 10, &pf_params).unwrap(), &exact), "permfilter differs");
        require!(
            same(&napp.search(q, 10, &NappSearch { t: 1, gamma: None }).unwrap(), &exact),
            "napp differs"
        );
        require!(same(&mifile.search(q, 10, &mi_params).unwrap(), &exact), "mifile differs");
    }
    Ok("permfilter, napp and mifile identical on 100 queries".into())
}

fn mifile_footrule() -> Outcome {
    let (data, queries) = split(10_000, 100, 8, 23);
    let m = 16;
    let index = MiFileIndex::build(L2Space, data.clone(), &MiFileParams { m, m_i: m, seed: 4, threads: 0 }).unwrap();
    let stored = compute_permutations(&data, index.pivots(), &L2Space);
    let stored: Vec<Permutation> = stored.chunks(m).map(|r| Permutation::new(r.to_vec()).unwrap()).collect();
    let params = MiFileSearch {
        m_s: m,
        max_position_diff: None,
        gamma: Gamma::Count(10),
        metric: AccumulatorMetric::Footrule,
    };
    for q in &queries {
        let qp = Permutation::from_distances(&index.pivots().distances(&L2Space, q));
        let direct: Vec<u64> = stored.iter().map(|p| footrule(p, &qp).unwrap()).collect();
        let mut order: Vec<ObjectId> = (0..data.len() as ObjectId).collect();
        order.sort_by_key(|&id| (direct[id as usize], id));
        let acc = index.accumulate(q, &params).unwrap();
        require!(acc.ranking() == order, "accumulator ordering differs from footrule ordering");
    }
    Ok("100 queries x 10^4 points".into())
}

fn hamming_bits() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    for m in [64usize, 127, 256] {
        for _ in 0..10_000 {
            let x: Vec<bool> = (0..m).map(|_| rng.gen()).collect();
            let y: Vec<bool> = (0..m).map(|_| rng.gen()).collect();
            let naive = x.iter().zip(&y).filter(|(a, b)| a != b).count() as u32;
            let packed = hamming(&BitPermutation::from_bits(&x), &BitPermutation::from_bits(&y)).unwrap();
            require!(packed == naive, "m = {m}: {packed} != {naive}");
        }
    }
    Ok("3 x 10^4 pairs".into())
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * b.abs().max(a.abs()) + 1e-15
}

fn edit_oracle(a: &[u8], b: &[u8]) -> usize {
    let mut t = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in t.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in t[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = t[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
            t[i][j] = sub.min(t[i - 1][j] + 1).min(t[i][j - 1] + 1);
        }
    }
    t[a.len()][b.len()]
}

fn quadratic_form(x: &Signature, y: &Signature) -> f64 {
    let reps: Vec<([f64; CENTROID_DIM], f64)> = x
        .clusters
        .iter()
        .map(|c| (c.centroid, c.weight))
        .chain(y.clusters.iter().map(|c| (c.centroid, -c.weight)))
        .collect();
    let mut total = 0.0;
    for (ri, wi) in &reps {
        for (rj, wj) in &reps {
            let d = ri.iter().zip(rj).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            total += wi * wj / (1.0 + d);
        }
    }
    total.max(0.0).sqrt()
}

fn distances() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    let hist = |rng: &mut ChaCha8Rng| {
        let v: Vec<f64> = (0..12).map(|_| rng.gen_range(0.01..1.0)).collect();
        let s: f64 = v.iter().sum();
        v.into_iter().map(|x| x / s).collect::<Vec<f64>>()
    };
    let sparse = |rng: &mut ChaCha8Rng| {
        let mut dense = [0.0f64; 40];
        for _ in 0..8 {
            dense[rng.gen_range(0..40)] = rng.gen_range(-3.0..3.0);
        }
        dense[rng.gen_range(0..40)] = 1.0;
        let entries: Vec<(u32, f64)> =
            dense.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(i, &v)| (i as u32, v)).collect();
        (SparseVector::new(entries).unwrap(), dense)
    };
    let signature = |rng: &mut ChaCha8Rng| {
        let k = rng.gen_range(1..6);
        let w: Vec<f64> = (0..k).map(|_| rng.gen_range(0.1..1.0)).collect();
        let total: f64 = w.iter().sum();
        Signature::new(
            w.iter()
                .map(|w| Cluster {
                    centroid: std::array::from_fn(|_| rng.gen_range(-2.0..2.0)),
                    weight: w / total,
                })
                .collect(),
        )
        .unwrap()
    };
    for _ in 0..2000 {
        let x: Vec<f64> = (0..16).map(|_| rng.gen_range(-50.0..50.0)).collect();
        let y: Vec<f64> = (0..16).map(|_| rng.gen_range(-50.0..50.0)).collect();
        let naive = x.iter().zip(&y).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        require!(close(l2(&x, &y).unwrap(), naive), "l2");

        let ((sx, dx), (sy, dy)) = (sparse(&mut rng), sparse(&mut rng));
        let dot: f64 = dx.iter().zip(&dy).map(|(a, b)| a * b).sum();
        let norm = |v: &[f64; 40]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
        let oracle = 1.0 - dot / (norm(&dx) * norm(&dy));
        require!(
            (cosine_distance(&sx, &sy).unwrap() - oracle).abs() <= 1e-9,
            "cosine"
        );

        let (hx, hy) = (hist(&mut rng), hist(&mut rng));
        let logs: Vec<f64> = hx.iter().map(|v| v.ln()).collect();
        let plain = kl_divergence(&hx, &hy, None).unwrap();
        require!(kl_divergence(&hx, &hy, Some(&logs)).unwrap().to_bits() == plain.to_bits(), "kl cache");
        let (ax, ay) = (Histogram::new(hx.clone()).unwrap(), Histogram::new(hy.clone()).unwrap());
        require!(ax.kl(&ay).to_bits() == plain.to_bits(), "kl histogram cache");
        require!(js_divergence(&hx, &hy).unwrap() == js_divergence(&hy, &hx).unwrap(), "js symmetry");

        let len_a = rng.gen_range(1..40);
        let len_b = rng.gen_range(1..40);
        let a: Vec<u8> = (0..len_a).map(|_| b"ACGT"[rng.gen_range(0..4)]).collect();
        let b: Vec<u8> = (0..len_b).map(|_| b"ACGT"[rng.gen_range(0..4)]).collect();
        let expected = edit_oracle(&a, &b) as f64 / len_a.max(len_b) as f64;
        require!(normalized_levenshtein(&Sequence(a), &Sequence(b)) == expected, "levenshtein");

        let (gx, gy) = (signature(&mut rng), signature(&mut rng));
        require!(close(sqfd(&gx, &gy), quadratic_form(&gx, &gy)), "sqfd");
    }
    Ok("2000 random inputs per distance".into())
}

fn mean_recall(results: &[QueryResult], truth: &[Vec<ObjectId>]) -> f64 {
    results.iter().zip(truth).map(|(r, t)| recall(&r.ids(), t)).sum::<f64>() / results.len() as f64
}

fn recall_curve() -> Outcome {
    let all = gaussian_mixture(50_100, 32, 50, 0.1, 26).unwrap().into_objects();
    let data = Arc::new(DataSet::new(all[..50_000].to_vec()));
    let index = PermFilterIndex::build(L2Space, data, &PermFilterParams { m: 256, ..Default::default() }).unwrap();
    let fractions = [0.001, 0.002, 0.005, 0.01, 0.02, 0.05];
    let curve = recall_vs_fraction_curve(&index, &all[50_000..], 10, &fractions, PermDistance::Spearman)
        .map_err(|e| e.to_string())?;
    let recalls: Vec<f64> = curve.iter().map(|c| c.recall).collect();
    require!(recalls.windows(2).all(|w| w[0] <= w[1]), "curve not monotone: {recalls:?}");
    require!(recalls[3] > recalls[0], "recall(1%) {} <= recall(0.1%) {}", recalls[3], recalls[0]);
    Ok(format!("synthetic data, recall(0.1%) = {:.3}, recall(1%) = {:.3}", recalls[0], recalls[3]))
}

fn monotonicity() -> Outcome {
    let (data, queries) = split(5000, 100, 8, 27);
    let gold = compute_gold(&data, &queries, &L2Space, 10, 0).unwrap();
    let truth: Vec<Vec<ObjectId>> = (0..queries.len()).map(|i| gold.ids(i)).collect();

    let pf = PermFilterIndex::build(L2Space, data.clone(), &PermFilterParams { m: 32, ..Default::default() }).unwrap();
    let mut last = 0.0;
    for gamma in [10, 25, 50, 100, 250, 500, 5000] {
        let p = pf.default_search(Gamma::Count(gamma));
        let r = mean_recall(&queries.iter().map(|q| pf.search(q, 10, &p).unwrap()).collect::<Vec<_>>(), &truth);
        require!(r >= last, "permfilter recall fell at gamma {gamma}");
        last = r;
    }

    let napp = NappIndex::build(
        L2Space,
        data.clone(),
        &NappParams {
            m: 64,
            m_i: 8,
            chunk_size: 1024,
            seed: 5,
            threads: 0,
        },
    )
    .unwrap();
    let mifile = MiFileIndex::build(L2Space, data.clone(), &MiFileParams { m: 32, m_i: 8, seed: 6, threads: 0 }).unwrap();
    for q in &queries {
        let mut prev: Option<Vec<ObjectId>> = None;
        for t in 1..=8 {
            let cur: Vec<ObjectId> = napp.candidates(q, t).unwrap().into_iter().map(|(id, _)| id).collect();
            if let Some(prev) = &prev {
                require!(cur.iter().all(|id| prev.binary_search(id).is_ok()), "napp t = {t} not a subset");
            }
            prev = Some(cur);
        }
        let mut prev: Option<Vec<ObjectId>> = None;
        for d in std::iter::once(None).chain((0..=8).rev().map(Some)) {
            let params = MiFileSearch {
                m_s: 8,
                max_position_diff: d,
                gamma: Gamma::Count(10),
                metric: AccumulatorMetric::Footrule,
            };
            let mut cur = mifile.accumulate(q, &params).unwrap().touched;
            cur.sort_unstable();
            if let Some(prev) = &prev {
                require!(cur.iter().all(|id| prev.binary_search(id).is_ok()), "mifile D = {d:?} not a subset");
            }
            prev = Some(cur);
        }
    }

    let graph = SwGraph::build(L2Space, data, &SwGraphParams { nn: 4, attempts: 1, seed: 7 }).unwrap();
    let mut last = 0.0;
    for attempts in [1, 2, 4, 8, 16, 32] {
        let results: Vec<_> = queries
            .iter()
            .enumerate()
            .map(|(i, q)| graph.search(q, 10, &SwSearch { attempts, seed: i as u64 }).unwrap())
            .collect();
        let r = mean_recall(&results, &truth);
        require!(r >= last, "swgraph recall fell at {attempts} attempts");
        last = r;
    }
    Ok("permfilter gamma, napp t, mifile D, swgraph attempts over 100 queries".into())
}

fn napp_efficiency() -> Outcome {
    let n = 100_000;
    let all = gaussian_mixture(n + 400, 32, 100, 0.1, 28).unwrap();
    let data = Arc::new(DataSet::new(all.objects()[..n].to_vec()));
    let tune_queries = all.objects()[n..n + 200].to_vec();
    let base = MethodConfig::Napp {
        m: 512,
        m_i: 32,
        t: 1,
        gamma: None,
        chunk_size: DEFAULT_CHUNK_SIZE,
    };
    let tuned = tune_method(&base, &L2Space, data, &tune_queries, 10, (0.85, 1.0), 9, 0).map_err(|e| e.to_string())?;
    require!(tuned.reached, "no t reached recall 0.85 (best {:.3})", tuned.recall);
    let split = Split {
        index_ids: (0..n).collect(),
        query_ids: (n + 200..n + 400).collect(),
    };
    let reports = run_benchmark(std::slice::from_ref(&tuned.best), &L2Space, &all, &[split], 10, 9, 0).map_err(|e| e.to_string())?;
    let r = &reports[0];
    require!(r.error.is_none(), "{:?}", r.error);
    require!(r.recall >= 0.85, "held-out recall {:.3}", r.recall);
    require!(
        r.improvement_in_efficiency > 2.0,
        "improvement {:.2} (napp {:.3} ms, brute force {:.3} ms)",
        r.improvement_in_efficiency,
        r.mean_query_time_ms,
        r.brute_force_query_time_ms
    );
    let t = match tuned.best {
        MethodConfig::Napp { t, .. } => t,
        _ => 0,
    };
    Ok(format!(
        "t = {t}, recall {:.3}, improvement {:.1}x",
        r.recall, r.improvement_in_efficiency
    ))
}

fn diagnostics() -> Outcome {
    let l2 = uniform(1000, 8, 29).unwrap();
    let rate = triangle_violation_rate(&l2, &L2Space, 100_000, 1).map_err(|e| e.to_string())?;
    require!(rate == 0.0, "L2 violation rate {rate}");
    let hist = dirichlet(1000, 16, 1.0, 30).unwrap();
    let mu = mu_defectiveness_probe(&hist, &JsSpace, Transform::Sqrt, 100_000, 2).map_err(|e| e.to_string())?;
    require!(mu <= 1.0 + 1e-6, "sqrt-JS mu {mu}");
    let seqs = dna(1000, 32.0, 4.0, 31).unwrap();
    let lev = triangle_violation_rate(&seqs, &LevenshteinSpace, 100_000, 3).map_err(|e| e.to_string())?;
    require!(lev < 0.05, "levenshtein violation rate {lev}");
    Ok(format!("L2 rate 0, sqrt-JS mu {mu:.6}, levenshtein rate {lev:.4}"))
}

fn strip_clock(mut r: BenchReport) -> BenchReport {
    r.mean_query_time_ms = 0.0;
    r.brute_force_query_time_ms = 0.0;
    r.improvement_in_efficiency = 0.0;
    r.build_time_ms = 0.0;
    r
}

fn determinism() -> Outcome {
    let data = Arc::new(uniform(3000, 8, 32).unwrap());
    let queries = uniform(50, 8, 33).unwrap().into_objects();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut methods = Vec::new();
    for name in MethodConfig::NAMES {
        let mut config = MethodConfig::default_for(name).unwrap();
        if let MethodConfig::Napp { m, m_i, .. } = &mut config {
            *m = 64;
            *m_i = 8;
        }
        methods.push(config);
    }
    for config in &methods {
        let mut files = Vec::new();
        for (run, threads) in [(0, 1), (1, 4)] {
            let index = AnyIndex::build(config, L2Space, data.clone(), 3, threads).map_err(|e| e.to_string())?;
            let path = dir.path().join(format!("{}-{run}", config.name()));
            save_snapshot(&index, &path).map_err(|e| e.to_string())?;
            files.push(std::fs::read(&path).map_err(|e| e.to_string())?);
        }
        require!(files[0] == files[1], "{} snapshots differ", config.name());
    }

    let splits = permkit::eval::make_splits(data.len(), 2, 50, 4).unwrap();
    let bench = || -> Result<String, String> {
        let reports = run_benchmark(&methods, &L2Space, &data, &splits, 10, 5, 2).map_err(|e| e.to_string())?;
        let stripped: Vec<BenchReport> = reports.into_iter().map(strip_clock).collect();
        serde_json::to_string(&stripped).map_err(|e| e.to_string())
    };
    require!(bench()? == bench()?, "bench reports differ");

    for config in &methods[1..] {
        let tune = || -> Result<String, String> {
            let report = tune_method(config, &L2Space, data.clone(), &queries, 10, (0.9, 1.0), 6, 2)
                .map_err(|e| e.to_string())?;
            serde_json::to_string(&report).map_err(|e| e.to_string())
        };
        require!(tune()? == tune()?, "{} tuning differs", config.name());
    }
    Ok("snapshots, bench reports and tuning traces repeat exactly".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("worked example", worked_example),
        ("vp-tree oracle equivalence", vptree_oracle),
        ("exhaustive-limit equivalence", exhaustive_limits),
        ("mi-file/footrule consistency", mifile_footrule),
        ("hamming bit-trick equivalence", hamming_bits),
        ("distance correctness", distances),
        ("recall vs candidate fraction", recall_curve),
        ("monotonicity", monotonicity),
        ("napp desk-scale efficiency", napp_efficiency),
        ("metric diagnostics", diagnostics),
        ("determinism", determinism),
    ];
    let filter: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let id = i + 1;
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {id:>2} {name} ({secs:.1}s): {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {id:>2} {name} ({secs:.1}s): {why}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
