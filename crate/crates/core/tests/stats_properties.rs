use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use sqkd_core::stats::{
    bhattacharyya, bhattacharyya_gaussian, bhattacharyya_vs_gaussian, hellinger, BinPolicy, Histogram,
};

fn counts(n: usize) -> impl Strategy<Value = Vec<u64>> {
    prop::collection::vec(0u64..1000, n).prop_filter("non-empty", |c| c.iter().any(|&x| x > 0))
}

fn edges(n: usize) -> Vec<f64> {
    (0..=n).map(|i| i as f64 * 0.5 - 3.0).collect()
}

proptest! {
    #[test]
    fn overlap_is_a_probability(a in counts(12), b in counts(12)) {
        let ha = Histogram::from_parts(edges(12), a).unwrap();
        let hb = Histogram::from_parts(edges(12), b).unwrap();
        let bc = bhattacharyya(&ha, &hb).unwrap();
        prop_assert!((0.0..=1.0).contains(&bc), "{bc}");
        prop_assert_eq!(hellinger(bc).unwrap(), (1.0 - bc).sqrt());
        let self_overlap = bhattacharyya(&ha, &ha).unwrap();
        prop_assert!((self_overlap - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hellinger_triangle_inequality(
        m in prop::array::uniform3(-3.0..3.0f64),
        v in prop::array::uniform3(0.05..5.0f64),
    ) {
        let h = |i: usize, j: usize| hellinger(bhattacharyya_gaussian(m[i], v[i], m[j], v[j]).unwrap()).unwrap();
        prop_assert!(h(0, 2) <= h(0, 1) + h(1, 2) + 1e-12);
        prop_assert!(h(0, 1) <= h(0, 2) + h(2, 1) + 1e-12);
    }

    #[test]
    fn gaussian_overlap_is_bounded(m1 in -5.0..5.0f64, v1 in 0.01..10.0f64, m2 in -5.0..5.0f64, v2 in 0.01..10.0f64) {
        let b = bhattacharyya_gaussian(m1, v1, m2, v2).unwrap();
        prop_assert!((0.0..=1.0).contains(&b));
    }
}

fn sample(n: usize, seed: u64, mean: f64, sd: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = Normal::new(mean, sd).unwrap();
    (0..n).map(|_| d.sample(&mut rng)).collect()
}

#[test]
fn histogram_overlap_converges_to_analytic() {
    for seed in 0..5 {
        let xs = sample(16665, seed, 0.4, 1.7);
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let h = Histogram::build(&xs, &BinPolicy::FreedmanDiaconis).unwrap();
        let b = bhattacharyya_vs_gaussian(&h, mean, var).unwrap();
        assert!(b > 0.998 && b <= 1.0, "seed {seed}: B = {b}");
    }
}

#[test]
fn overlap_error_shrinks_with_sample_size() {
    let deficit = |n: usize| {
        let xs = sample(n, 3, 0.0, 1.0);
        let h = Histogram::build(&xs, &BinPolicy::FreedmanDiaconis).unwrap();
        1.0 - bhattacharyya_vs_gaussian(&h, 0.0, 1.0).unwrap()
    };
    let (small, large) = (deficit(1_000), deficit(200_000));
    assert!(large < small, "{large} !< {small}");
    assert!(large < 5e-4);
}
