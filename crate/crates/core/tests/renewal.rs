use pinning_core::renewal::*;
use pinning_core::rng::StreamSeed;
use proptest::prelude::*;
use std::f64::consts::PI;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn green_tables_solve_the_renewal_equation(alpha in 0.2f64..1.5, n_max in 50usize..600) {
        let law = make_power_law(alpha, n_max).unwrap();
        let g = green_function(&law, n_max).unwrap();
        prop_assert!(g.residual(&law) < 1e-12);
        prop_assert!(g.as_slice().iter().all(|&u| (0.0..=1.0).contains(&u)));
    }

    #[test]
    fn free_energy_is_monotone_and_convex(h0 in 0.001f64..0.3, step in 0.001f64..0.05) {
        let law = make_power_law(0.5, 1 << 12).unwrap();
        let f: Vec<f64> = (0..6)
            .map(|i| homogeneous_free_energy(&law, h0 + step * i as f64).unwrap())
            .collect();
        for w in f.windows(2) {
            prop_assert!(w[1] >= w[0]);
        }
        for w in f.windows(3) {
            // bisection tolerance is 1e-10 relative
            prop_assert!(w[0] + w[2] - 2.0 * w[1] >= -1e-9 * w[2]);
        }
    }

    #[test]
    fn two_point_laws_have_exact_greens(p in 0.05f64..0.95) {
        let law = RenewalLaw::from_masses(&[p, 1.0 - p], 0.5, 1.0).unwrap();
        let g = green_function(&law, 40).unwrap();
        // u(n) → 1/E τ₁
        prop_assert!((g.u(40) - 1.0 / (2.0 - p)).abs() < 1e-6 + (1.0 - p).powi(40));
    }
}

#[test]
fn partial_sums_of_the_green_function() {
    let law = make_power_law(0.5, 100_000).unwrap();
    let g = green_function(&law, 100_000).unwrap();
    let ratio = g.expected_points(100_000) / (100_000f64).sqrt();
    let limit = 1.0 / (PI * law.c_k());
    assert!((ratio / limit - 1.0).abs() < 0.03, "{ratio} vs {limit}");
}

#[test]
fn green_asymptotics_at_ten_thousand() {
    let law = make_power_law(0.5, 20_000).unwrap();
    let g = green_function(&law, 10_000).unwrap();
    let v = g.u(10_000) * 2.0 * PI * law.c_k() * 100.0;
    assert!((0.95..=1.05).contains(&v), "{v}");
}

#[test]
fn sampled_paths_hit_sites_at_the_green_rate() {
    let law = make_power_law(0.5, 4096).unwrap();
    let l = 200;
    let samples = 20_000;
    let seed = StreamSeed::new(11);
    let mut hits = vec![0u32; l + 1];
    for i in 0..samples {
        let path = sample_path(&law, l, &mut seed.rng(i));
        for &p in path.contacts_up_to(l) {
            hits[p] += 1;
        }
    }
    let g = green_function(&law, l).unwrap();
    let s = samples as f64;
    let chi2: f64 = (1..=l)
        .map(|n| {
            let e = s * g.u(n);
            let d = hits[n] as f64 - e;
            d * d / (e * (1.0 - g.u(n)))
        })
        .sum();
    // χ² with l degrees of freedom: mean l, sd √(2l)
    let bound = l as f64 + 4.0 * (2.0 * l as f64).sqrt();
    assert!(chi2 < bound, "chi2 = {chi2}");
}

#[test]
fn homogeneous_free_energy_solves_the_characteristic_equation() {
    let law = make_power_law(0.5, 1 << 14).unwrap();
    for h in [0.01, 0.1, 0.5] {
        let f = homogeneous_free_energy(&law, h).unwrap();
        assert!((law.laplace(f) - (-h).exp()).abs() < 1e-8);
    }
    assert_eq!(homogeneous_free_energy(&law, -0.2).unwrap(), 0.0);
}
