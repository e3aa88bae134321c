//! Metrics verified against brute-force pair counting over every partition
//! of small sets.

mod common;

use netpls_core::metrics::{
    adjusted_rand_index, normalized_mutual_information, Partition,
};

/// All set partitions of `{0..n}`, as label vectors.
fn all_partitions(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut labels = vec![0usize; n];
    fn rec(labels: &mut Vec<usize>, pos: usize, max_used: usize, out: &mut Vec<Vec<usize>>) {
        if pos == labels.len() {
            out.push(labels.clone());
            return;
        }
        for l in 0..=max_used + 1 {
            labels[pos] = l;
            rec(labels, pos + 1, max_used.max(l), out);
        }
    }
    if n == 0 {
        return out;
    }
    labels[0] = 0;
    rec(&mut labels, 1, 0, &mut out);
    out
}

/// Rand-index style pair counting: for all unordered pairs, count
/// agreements and compute the chance-adjusted index directly.
fn ari_pair_counting(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len();
    let mut n11 = 0.0f64; // together in both
    let mut n00 = 0.0f64; // apart in both
    let mut n10 = 0.0f64;
    let mut n01 = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            let sa = a[i] == a[j];
            let sb = b[i] == b[j];
            match (sa, sb) {
                (true, true) => n11 += 1.0,
                (false, false) => n00 += 1.0,
                (true, false) => n10 += 1.0,
                (false, true) => n01 += 1.0,
            }
        }
    }
    let total = n11 + n00 + n10 + n01;
    let expected = (n11 + n10) * (n11 + n01) / total;
    let max_index = 0.5 * ((n11 + n10) + (n11 + n01));
    if (max_index - expected).abs() < 1e-300 {
        return 1.0;
    }
    (n11 - expected) / (max_index - expected)
}

#[test]
fn ari_matches_pair_counting_on_all_partitions_up_to_six() {
    for n in 2..=6usize {
        let parts = all_partitions(n);
        for a in &parts {
            for b in &parts {
                let want = ari_pair_counting(a, b);
                let got = adjusted_rand_index(
                    &Partition::new(a.iter().copied()),
                    &Partition::new(b.iter().copied()),
                )
                .unwrap();
                assert!(
                    (got - want).abs() < 1e-12,
                    "n={n} a={a:?} b={b:?}: {got} vs {want}"
                );
            }
        }
    }
}

#[test]
fn independent_partitions_have_near_zero_nmi() {
    use rand::Rng;
    let mut rng = common::seeded(404);
    let n = 10_000;
    let a: Vec<usize> = (0..n).map(|_| rng.random_range(0..4)).collect();
    let b: Vec<usize> = (0..n).map(|_| rng.random_range(0..4)).collect();
    let nmi = normalized_mutual_information(
        &Partition::new(a.iter().copied()),
        &Partition::new(b.iter().copied()),
    )
    .unwrap();
    assert!(nmi < 0.01, "nmi {nmi}");
}

#[test]
fn nmi_normalization_variants_agree_on_balanced_partitions() {
    use netpls_core::metrics::{normalized_mutual_information_with, NmiNormalization};
    // Equal-entropy partitions: geometric and arithmetic means coincide.
    let a = Partition::new([0, 0, 1, 1, 2, 2]);
    let b = Partition::new([0, 1, 1, 2, 2, 0]);
    let g = normalized_mutual_information_with(&a, &b, NmiNormalization::Geometric).unwrap();
    let m = normalized_mutual_information_with(&a, &b, NmiNormalization::Arithmetic).unwrap();
    assert!((g - m).abs() < 1e-12);
}
