use std::path::Path;

use pinninglab::experiments::run;
use pinninglab::record::Uncertainty;
use pinninglab::{Experiment, ExperimentConfig};

#[test]
fn annealed_scan_slope_column_at_the_marginal_point() {
    let out = run(&ExperimentConfig::new(Experiment::AnnealedScan, 1), 1).unwrap();
    let table = &out.tables[0];
    for cell in table.column("slope").unwrap() {
        assert!((cell.as_f64().unwrap() - 2.0).abs() <= 0.1);
    }
    assert!(out.record.passed());
}

#[test]
fn certificate_carries_tuning_constants_and_margins() {
    let cfg = ExperimentConfig {
        beta: Some(1.0),
        zeta: Some(0.03),
        gamma: Some(0.98),
        epsilon: Some(0.0198),
        n: Some(12),
        samples: Some(500),
        ..ExperimentConfig::new(Experiment::HierCertify, 4)
    };
    let out = run(&cfg, 1).unwrap();
    let d = &out.record.details;
    for key in ["zeta", "gamma", "epsilon", "n"] {
        assert!(d[key].is_number(), "{key}");
    }
    for key in ["condition_a", "condition_b", "direct"] {
        assert!(d[key]["value"].is_number() && d[key]["threshold"].is_number(), "{key}");
    }
    assert!(d["verdict"].is_string());
    assert!(out.record.empirical_constants.contains_key("K_hat"));
}

#[test]
fn every_estimate_has_an_error_or_is_exact() {
    for e in [Experiment::QuenchedScan, Experiment::RenewalGreen, Experiment::GwCheck] {
        let cfg = ExperimentConfig {
            size: Some(200),
            samples: Some(10),
            ..ExperimentConfig::new(e, 3)
        };
        let out = run(&cfg, 2).unwrap();
        assert!(!out.record.estimates.is_empty());
        for q in &out.record.estimates {
            match q.std_error {
                Uncertainty::Exact => {}
                Uncertainty::StdError(se) => assert!(se.is_finite() && se >= 0.0),
            }
        }
        let json = serde_json::to_value(&out.record).unwrap();
        for q in json["estimates"].as_array().unwrap() {
            assert!(q["std_error"].is_number() || q["std_error"] == "exact");
        }
        assert_eq!(json["version"], pinninglab::VERSION);
    }
}

#[test]
fn thread_count_does_not_change_estimates() {
    let cfg = ExperimentConfig {
        n: Some(7),
        samples: Some(100),
        beta_grid: Some(vec![0.5, 1.5]),
        h_grid: Some(vec![-0.1, 0.2]),
        ..ExperimentConfig::new(Experiment::HierFreeEnergy, 9)
    };
    let a = run(&cfg, 1).unwrap();
    let b = run(&cfg, 4).unwrap();
    assert_eq!(a.record.estimates, b.record.estimates);
    assert_eq!(a.csv_bytes().unwrap(), b.csv_bytes().unwrap());
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut seen = Vec::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let cfg = ExperimentConfig::load(&entry.unwrap().path()).unwrap();
        let (e, _) = cfg.validate().unwrap();
        seen.push(e);
    }
    for e in Experiment::ALL {
        assert!(seen.contains(&e), "no config for {}", e.name());
    }
}
