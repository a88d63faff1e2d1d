use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use permkit::permutation::{
    binarize, compute_permutation, footrule, hamming, select_pivots, spearman_rho, BitPermutation, Permutation,
    PivotSet,
};
use permkit::spaces::L2Space;
use permkit::DataSet;

fn permutation(m: usize) -> impl Strategy<Value = Permutation> {
    Just((1..=m as u16).collect::<Vec<_>>())
        .prop_shuffle()
        .prop_map(|r| Permutation::new(r).unwrap())
}

fn naive_hamming(x: &[bool], y: &[bool]) -> u32 {
    x.iter().zip(y).filter(|(a, b)| a != b).count() as u32
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn induced_permutations_are_valid(point in prop::collection::vec(-10.0f64..10.0, 3), seed in 0u64..50) {
        let data: DataSet<Vec<f64>> = (0..40).map(|i| vec![(i as f64).sin() * 9.0, (i as f64 * 0.3).cos() * 9.0, i as f64 / 4.0]).collect();
        let pivots = select_pivots(&data, 12, seed).unwrap();
        let p = compute_permutation(&point, &pivots, &L2Space);
        let mut ranks = p.ranks().to_vec();
        ranks.sort();
        prop_assert_eq!(ranks, (1..=12).collect::<Vec<u16>>());
    }

    #[test]
    fn footrule_is_a_metric(p in permutation(9), q in permutation(9), r in permutation(9)) {
        prop_assert_eq!(footrule(&p, &q).unwrap(), footrule(&q, &p).unwrap());
        prop_assert_eq!(footrule(&p, &p).unwrap(), 0);
        prop_assert_eq!(footrule(&p, &q).unwrap() == 0, p == q);
        prop_assert!(footrule(&p, &r).unwrap() <= footrule(&p, &q).unwrap() + footrule(&q, &r).unwrap());
        prop_assert_eq!(spearman_rho(&p, &q).unwrap(), spearman_rho(&q, &p).unwrap());
        prop_assert_eq!(spearman_rho(&p, &q).unwrap() == 0, p == q);
    }

    #[test]
    fn binarized_ones_count(p in permutation(70), b in 1usize..=70) {
        let bits = binarize(&p, b).unwrap();
        prop_assert_eq!(bits.count_ones() as usize, 70 - b + 1);
        for (i, &r) in p.ranks().iter().enumerate() {
            prop_assert_eq!(bits.get(i), r as usize >= b);
        }
    }
}

#[test]
fn packed_hamming_equals_bit_loop() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for m in [64usize, 127, 256, 1, 65] {
        for _ in 0..10_000 {
            let x: Vec<bool> = (0..m).map(|_| rng.gen()).collect();
            let y: Vec<bool> = (0..m).map(|_| rng.gen()).collect();
            let (px, py) = (BitPermutation::from_bits(&x), BitPermutation::from_bits(&y));
            assert_eq!(hamming(&px, &py).unwrap(), naive_hamming(&x, &y));
        }
    }
}

#[test]
fn hamming_of_binarized_permutations() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for m in [64usize, 127, 256] {
        for _ in 0..200 {
            let mut a: Vec<u16> = (1..=m as u16).collect();
            let mut b = a.clone();
            a.shuffle(&mut rng);
            b.shuffle(&mut rng);
            let t = rng.gen_range(1..=m);
            let (pa, pb) = (Permutation::new(a).unwrap(), Permutation::new(b).unwrap());
            let (ba, bb) = (binarize(&pa, t).unwrap(), binarize(&pb, t).unwrap());
            assert_eq!(hamming(&ba, &bb).unwrap(), naive_hamming(&ba.to_bits(), &bb.to_bits()));
        }
    }
}

#[test]
fn error_cases() {
    let p = Permutation::new(vec![2, 1, 3]).unwrap();
    let q = Permutation::new(vec![1, 2]).unwrap();
    assert!(footrule(&p, &q).is_err());
    assert!(spearman_rho(&p, &q).is_err());
    assert!(binarize(&p, 0).is_err());
    assert!(binarize(&p, 4).is_err());
    assert!(Permutation::new(vec![1, 1, 3]).is_err());
    assert!(Permutation::new(vec![0, 1, 2]).is_err());
    let x = BitPermutation::from_bits(&[true; 5]);
    let y = BitPermutation::from_bits(&[true; 6]);
    assert!(hamming(&x, &y).is_err());
}

#[test]
fn equal_distances_keep_pivot_order() {
    let pivots = PivotSet::from_objects(vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, 0.0], vec![0.0, -1.0]]).unwrap();
    let p = compute_permutation(&vec![0.0, 0.0], &pivots, &L2Space);
    assert_eq!(p.ranks(), &[1, 2, 3, 4]);
}

#[test]
fn pivot_selection() {
    let data: DataSet<Vec<f64>> = (0..30).map(|i| vec![i as f64]).collect();
    let a = select_pivots(&data, 10, 5).unwrap();
    assert_eq!(a, select_pivots(&data, 10, 5).unwrap());
    assert_ne!(a, select_pivots(&data, 10, 6).unwrap());
    let mut ids = a.source_ids().unwrap().to_vec();
    ids.sort();
    ids.dedup();
    assert_eq!(ids.len(), 10);

    let all = select_pivots(&data, 30, 1).unwrap();
    let mut ids = all.source_ids().unwrap().to_vec();
    ids.sort();
    assert_eq!(ids, (0..30).collect::<Vec<_>>());
    assert!(select_pivots(&data, 31, 1).is_err());

    // Duplicates are avoided while distinct objects remain.
    let dup: DataSet<Vec<f64>> = (0..20).map(|i| vec![(i % 5) as f64]).collect();
    let p = select_pivots(&dup, 5, 2).unwrap();
    let mut vals: Vec<f64> = p.objects().iter().map(|v| v[0]).collect();
    vals.sort_by(f64::total_cmp);
    assert_eq!(vals, vec![0.0, 1.0, 2.0, 3.0, 4.0]);
}
