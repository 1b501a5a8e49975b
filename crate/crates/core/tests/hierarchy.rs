use pinning_core::hierarchy::enumeration::enumerated_product_expectation;
use pinning_core::hierarchy::*;
use pinning_core::hierarchy_mc::annealed_log_iterate;
use pinning_core::rng::StreamSeed;
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

#[test]
fn product_expectations_match_enumeration() {
    for n in 0..=3usize {
        let leaves = 1usize << n;
        for mask in 1u32..1 << leaves {
            let idx: Vec<usize> = (0..leaves).filter(|i| mask >> i & 1 == 1).map(|i| i + 1).collect();
            for b in [1.1, B_C, 1.9] {
                let set = TreeIndexSet::new(n, idx.clone()).unwrap();
                let exact = gw_product_expectation(&set, b);
                let brute = enumerated_product_expectation(n, b, &idx).unwrap();
                assert!((exact - brute).abs() < 1e-12, "n={n} I={idx:?}");
            }
        }
    }
}

#[test]
fn overlap_sum_is_n_at_the_marginal_point() {
    for n in 1..=30 {
        assert!((pair_overlap_sum(n, B_C) - n as f64).abs() < 1e-12 * n as f64);
    }
    for n in 1..=4usize {
        let leaves = 1 << n;
        let mut brute = 0.0;
        for i in 1..=leaves {
            for j in 1..=leaves {
                if i != j {
                    let e = enumerated_product_expectation(n, B_C, &[i, j]).unwrap();
                    brute += e * e;
                }
            }
        }
        assert!((brute - n as f64).abs() < 1e-12);
    }
}

#[test]
fn second_moment_dp_matches_quadruple_enumeration() {
    for n in [4, 5, 6] {
        let dp = y_second_moment_at(n, B_C).unwrap();
        let brute = y_second_moment_enumerated(n, B_C).unwrap();
        assert!((dp - brute).abs() < 1e-10 * brute, "n = {n}");
    }
}

#[test]
fn zero_disorder_reproduces_the_annealed_iterate() {
    for n in 0..=20 {
        for (b, h) in [(1.3, 0.05), (B_C, -0.2), (1.7, 0.4)] {
            let p = HierParams::new(b, 0.0, h).unwrap();
            let got = hier_log_partition(&p, n, &vec![0.0; 1 << n]).unwrap();
            let want = annealed_log_iterate(b, h, n);
            assert!((got - want).abs() <= 1e-12 * want.abs().max(1e-300), "n={n}");
        }
    }
}

#[test]
fn mean_partition_function_is_annealed() {
    let (n, samples) = (6, 20_000);
    let p = HierParams::marginal(0.5, 0.02).unwrap();
    let seed = StreamSeed::new(4);
    let xs: Vec<f64> = (0..samples)
        .map(|i| {
            let mut rng = seed.rng(i);
            let omega: Vec<f64> = (0..1 << n).map(|_| rng.sample(StandardNormal)).collect();
            hier_log_partition(&p, n, &omega).unwrap().exp()
        })
        .collect();
    let mean = xs.iter().sum::<f64>() / samples as f64;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (samples as f64 - 1.0);
    let se = (var / samples as f64).sqrt();
    let annealed = annealed_log_iterate(B_C, 0.02, n).exp();
    assert!((mean - annealed).abs() < 3.0 * se, "{mean} ± {se} vs {annealed}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn swapping_halves_is_a_symmetry(
        omega in prop::collection::vec(-3.0f64..3.0, 32),
        beta in 0.0f64..2.0,
        h in -1.0f64..1.0,
    ) {
        let p = HierParams::marginal(beta, h).unwrap();
        let mut swapped = omega[16..].to_vec();
        swapped.extend_from_slice(&omega[..16]);
        prop_assert_eq!(
            hier_log_partition(&p, 5, &omega).unwrap(),
            hier_log_partition(&p, 5, &swapped).unwrap()
        );
    }

    #[test]
    fn pair_expectation_depends_on_the_join_level(n in 1usize..12, i in 0usize..4096, j in 0usize..4096, b in 1.05f64..1.95) {
        let leaves = 1usize << n;
        let (i, j) = (i % leaves + 1, j % leaves + 1);
        prop_assume!(i != j);
        let set = TreeIndexSet::new(n, vec![i, j]).unwrap();
        let a = join_level(i, j) as f64;
        let want = b.powf(-(n as f64 + a - 1.0));
        prop_assert!((gw_product_expectation(&set, b) - want).abs() < 1e-12 * want);
    }

    #[test]
    fn annealed_free_energy_is_monotone(h in 0.001f64..0.2, dh in 0.0001f64..0.05) {
        let f1 = annealed_free_energy(B_C, h).unwrap();
        let f2 = annealed_free_energy(B_C, h + dh).unwrap();
        prop_assert!(f1 > 0.0 && f2 >= f1);
    }
}
