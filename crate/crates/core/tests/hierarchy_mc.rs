use pinning_core::hierarchy::{HierParams, B_C};
use pinning_core::hierarchy_mc::*;
use pinning_core::rng::StreamSeed;

#[test]
fn quenched_never_exceeds_annealed() {
    let seed = StreamSeed::new(31);
    for beta in [0.3, 1.0, 1.6] {
        for h in [-0.1, 0.05, 0.3] {
            let p = HierParams::marginal(beta, h).unwrap();
            let f = pool_free_energy(&p, 10, 200, &seed).unwrap();
            assert!(
                f.estimate.mean <= f.annealed + 3.0 * f.estimate.std_error,
                "beta={beta} h={h}: {} vs {}",
                f.estimate.mean,
                f.annealed
            );
        }
    }
}

#[test]
fn tilted_estimators_agree() {
    let seed = StreamSeed::new(2);
    for n in [2, 4, 6, 8, 10] {
        for beta in [0.25, 0.5] {
            for eps in [0.0, 0.1, 0.3] {
                let p = HierParams::marginal(beta, 0.0).unwrap();
                let t = tilted_mean(&p, n, eps, 20_000, &seed, TiltedEstimators::Both).unwrap();
                let d = t.disorder.unwrap();
                let r = t.renewal;
                let se = (d.std_error.powi(2) + r.std_error.powi(2)).sqrt();
                assert!(
                    (d.mean - r.mean).abs() < 3.0 * se,
                    "n={n} beta={beta} eps={eps}: {} vs {}",
                    d.mean,
                    r.mean
                );
            }
        }
    }
}

// At β = 1 the disorder average of X_n is carried by rare fields: with
// ε = 0 the exact value is 1, and 2·10⁴ samples sit far below it.
#[test]
fn disorder_average_is_heavy_tailed_at_unit_beta() {
    let p = HierParams::marginal(1.0, 0.0).unwrap();
    let t = tilted_mean(&p, 8, 0.0, 20_000, &StreamSeed::new(2), TiltedEstimators::Both).unwrap();
    assert_eq!(t.renewal.mean, 1.0);
    let d = t.disorder.unwrap();
    assert!(d.mean + 3.0 * d.std_error < 1.0);
}

#[test]
fn paley_zygmund_bound_holds() {
    for n in [6, 10] {
        let pz = paley_zygmund_check(n, 20_000, &StreamSeed::new(n as u64)).unwrap();
        assert!(pz.pass, "{pz:?}");
    }
}

#[test]
fn reference_constants_are_infeasible() {
    let c = certify_delocalization(1.0, &CertifyOptions::paper(200, 1)).unwrap();
    assert_eq!(c.verdict, Verdict::InfeasibleAtPaperConstants);
    assert!(c.n_paper > CERTIFY_MAX_N as f64);
    assert!((c.b - B_C).abs() < 1e-15);
}
