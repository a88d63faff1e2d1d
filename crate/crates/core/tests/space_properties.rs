use approx::assert_relative_eq;
use proptest::prelude::*;

use permkit::spaces::{
    cosine_distance, js_divergence, kl_divergence, l2, normalized_levenshtein, sqfd, Cluster, Histogram,
    Sequence, Signature, SparseVector, CENTROID_DIM,
};

fn histogram(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, dim).prop_map(|v| {
        let s: f64 = v.iter().sum();
        v.into_iter().map(|x| x / s).collect()
    })
}

fn sparse() -> impl Strategy<Value = SparseVector> {
    prop::collection::btree_map(0u32..40, -5.0f64..5.0, 1..12).prop_filter_map("zero value", |m| {
        SparseVector::new(m.into_iter().filter(|(_, v)| *v != 0.0).collect())
            .ok()
            .filter(|s| !s.is_empty())
    })
}

fn dna(max: usize) -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(prop::sample::select(b"ACGT".to_vec()), 1..=max)
}

fn signature() -> impl Strategy<Value = Signature> {
    prop::collection::vec((prop::array::uniform7(-2.0f64..2.0), 0.1f64..1.0), 1..5).prop_map(|cs| {
        let total: f64 = cs.iter().map(|c| c.1).sum();
        Signature::new(
            cs.into_iter()
                .map(|(centroid, w)| Cluster {
                    centroid,
                    weight: w / total,
                })
                .collect(),
        )
        .unwrap()
    })
}

/// Textbook full-matrix edit distance.
fn dp_oracle(a: &[u8], b: &[u8]) -> usize {
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

/// Cosine distance from dense reconstructions of both vectors.
fn dense_cosine(x: &SparseVector, y: &SparseVector) -> f64 {
    let mut dx = vec![0.0; 64];
    let mut dy = vec![0.0; 64];
    x.entries().for_each(|(i, v)| dx[i as usize] = v);
    y.entries().for_each(|(i, v)| dy[i as usize] = v);
    let dot: f64 = dx.iter().zip(&dy).map(|(a, b)| a * b).sum();
    let nx = dx.iter().map(|a| a * a).sum::<f64>().sqrt();
    let ny = dy.iter().map(|a| a * a).sum::<f64>().sqrt();
    1.0 - dot / (nx * ny)
}

/// `sqrt(w^T A w)` with `w = (w_x, -w_y)` and `A_ij = 1 / (1 + L2(r_i, r_j))`.
fn quadratic_form_oracle(x: &Signature, y: &Signature) -> f64 {
    let reps: Vec<([f64; CENTROID_DIM], f64)> = x
        .clusters
        .iter()
        .map(|c| (c.centroid, c.weight))
        .chain(y.clusters.iter().map(|c| (c.centroid, -c.weight)))
        .collect();
    let mut total = 0.0;
    for (ri, wi) in &reps {
        for (rj, wj) in &reps {
            let d: f64 = ri.iter().zip(rj).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            total += wi * wj / (1.0 + d);
        }
    }
    total.max(0.0).sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn l2_symmetric_and_reflexive(x in prop::collection::vec(-100.0f64..100.0, 8), y in prop::collection::vec(-100.0f64..100.0, 8)) {
        prop_assert_eq!(l2(&x, &y).unwrap(), l2(&y, &x).unwrap());
        prop_assert_eq!(l2(&x, &x).unwrap(), 0.0);
    }

    #[test]
    fn kl_cache_is_bitwise_identical(x in histogram(10), y in histogram(10)) {
        let logs: Vec<f64> = x.iter().map(|v| v.ln()).collect();
        let cached = kl_divergence(&x, &y, Some(&logs)).unwrap();
        let plain = kl_divergence(&x, &y, None).unwrap();
        prop_assert_eq!(cached.to_bits(), plain.to_bits());
        let hx = Histogram::new(x.clone()).unwrap();
        let hy = Histogram::new(y.clone()).unwrap();
        prop_assert_eq!(hx.kl(&hy).to_bits(), plain.to_bits());
        prop_assert!(plain >= 0.0);
        prop_assert!(kl_divergence(&x, &x, None).unwrap().abs() <= 1e-12);
    }

    #[test]
    fn js_symmetric(x in histogram(10), y in histogram(10)) {
        prop_assert_eq!(js_divergence(&x, &y).unwrap(), js_divergence(&y, &x).unwrap());
        prop_assert!(js_divergence(&x, &x).unwrap().abs() <= 1e-12);
        let hx = Histogram::new(x.clone()).unwrap();
        let hy = Histogram::new(y.clone()).unwrap();
        prop_assert_eq!(hx.js(&hy), hy.js(&hx));
        assert_relative_eq!(hx.js(&hy), js_divergence(&x, &y).unwrap(), max_relative = 1e-9, epsilon = 1e-15);
    }

    #[test]
    fn cosine_matches_dense_oracle(x in sparse(), y in sparse()) {
        let d = cosine_distance(&x, &y).unwrap();
        prop_assert!((d - dense_cosine(&x, &y)).abs() <= 1e-9);
        prop_assert_eq!(d, cosine_distance(&y, &x).unwrap());
        prop_assert!((0.0..=2.0).contains(&d));
        prop_assert!(cosine_distance(&x, &x).unwrap().abs() <= 1e-12);
    }

    #[test]
    fn levenshtein_matches_dp(a in dna(64), b in dna(64)) {
        let expected = dp_oracle(&a, &b) as f64 / a.len().max(b.len()) as f64;
        let (sa, sb) = (Sequence(a), Sequence(b));
        prop_assert_eq!(normalized_levenshtein(&sa, &sb), expected);
        prop_assert_eq!(normalized_levenshtein(&sb, &sa), expected);
        prop_assert_eq!(normalized_levenshtein(&sa, &sa), 0.0);
    }

    #[test]
    fn sqfd_matches_quadratic_form(x in signature(), y in signature()) {
        let d = sqfd(&x, &y);
        prop_assert!((d - quadratic_form_oracle(&x, &y)).abs() <= 1e-9);
        prop_assert_eq!(d, sqfd(&y, &x));
        prop_assert_eq!(sqfd(&x, &x), 0.0);
    }
}

#[test]
fn documented_values() {
    assert_eq!(l2(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), 5.0);
    assert_eq!(l2(&[1.0, 2.0, 3.0], &[4.0, 6.0, 3.0]).unwrap(), 5.0);
    assert!(l2(&[1.0], &[1.0, 2.0]).is_err());

    let e1 = SparseVector::new(vec![(1, 1.0)]).unwrap();
    let e2 = SparseVector::new(vec![(2, 1.0)]).unwrap();
    let e12 = SparseVector::new(vec![(1, 1.0), (2, 1.0)]).unwrap();
    assert_relative_eq!(cosine_distance(&e1, &e2).unwrap(), 1.0);
    assert_relative_eq!(cosine_distance(&e12, &e1).unwrap(), 0.2928932188134524, max_relative = 1e-12);

    let kl = kl_divergence(&[0.5, 0.5], &[0.25, 0.75], None).unwrap();
    assert_relative_eq!(kl, 0.14384103622589045, max_relative = 1e-12);
    let (a, b) = ([0.9, 0.1], [0.5, 0.5]);
    assert!(kl_divergence(&a, &b, None).unwrap() != kl_divergence(&b, &a, None).unwrap());
    assert!(kl_divergence(&[0.0, 1.0], &[0.5, 0.5], None).is_err());

    assert_relative_eq!(
        js_divergence(&[0.5, 0.5], &[0.25, 0.75]).unwrap(),
        0.033822075568605,
        max_relative = 1e-12
    );

    let s = |t: &str| Sequence::from(t);
    assert_eq!(normalized_levenshtein(&s("ACGT"), &s("ACGT")), 0.0);
    assert_eq!(normalized_levenshtein(&s("ACGT"), &s("ACGA")), 0.25);
    assert_eq!(normalized_levenshtein(&s("A"), &s("")), 1.0);
    assert_eq!(normalized_levenshtein(&s(""), &s("")), 0.0);

    let one = |x: f64| {
        let mut centroid = [0.0; CENTROID_DIM];
        centroid[0] = x;
        Signature::new(vec![Cluster { centroid, weight: 1.0 }]).unwrap()
    };
    assert_relative_eq!(sqfd(&one(0.0), &one(1.0)), 1.0, max_relative = 1e-12);
}
