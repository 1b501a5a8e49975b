//! Experiment configuration files.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{LabError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    AnnealedScan,
    GwCheck,
    OverlapIdentity,
    SecondMomentScan,
    HierFreeEnergy,
    HierCertify,
    RenewalGreen,
    QuenchedScan,
    DecompositionCheck,
    Lemma51Scan,
    CltCheck,
    SmoothingDiagnostic,
}

impl Experiment {
    pub const ALL: [Experiment; 12] = [
        Experiment::AnnealedScan,
        Experiment::GwCheck,
        Experiment::OverlapIdentity,
        Experiment::SecondMomentScan,
        Experiment::HierFreeEnergy,
        Experiment::HierCertify,
        Experiment::RenewalGreen,
        Experiment::QuenchedScan,
        Experiment::DecompositionCheck,
        Experiment::Lemma51Scan,
        Experiment::CltCheck,
        Experiment::SmoothingDiagnostic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::AnnealedScan => "annealed-scan",
            Experiment::GwCheck => "gw-check",
            Experiment::OverlapIdentity => "overlap-identity",
            Experiment::SecondMomentScan => "second-moment-scan",
            Experiment::HierFreeEnergy => "hier-free-energy",
            Experiment::HierCertify => "hier-certify",
            Experiment::RenewalGreen => "renewal-green",
            Experiment::QuenchedScan => "quenched-scan",
            Experiment::DecompositionCheck => "decomposition-check",
            Experiment::Lemma51Scan => "lemma51-scan",
            Experiment::CltCheck => "clt-check",
            Experiment::SmoothingDiagnostic => "smoothing-diagnostic",
        }
    }
}

/// Which model an `annealed-scan` runs on.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    #[default]
    Hierarchical,
    Renewal,
}

/// One experiment. Keys are flat; anything an experiment does not use is
/// ignored by it, but unknown keys are rejected.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Option<Experiment>,
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<Model>,
    /// Hierarchical branching parameter `B`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    /// Tail exponent of the renewal law.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Number of stored masses of the renewal law.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub law_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta: Option<f64>,
    /// Hierarchical generation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Renewal system size.
    #[serde(default, rename = "N", skip_serializing_if = "Option::is_none")]
    pub size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, rename = "L", skip_serializing_if = "Option::is_none")]
    pub l: Option<usize>,
    #[serde(default, rename = "L_grid", skip_serializing_if = "Option::is_none")]
    pub l_grid: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment, seed: u64) -> Self {
        ExperimentConfig {
            experiment: Some(experiment),
            seed: Some(seed),
            ..Default::default()
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| LabError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Checks the mandatory keys.
    pub fn validate(&self) -> Result<(Experiment, u64)> {
        let experiment = self
            .experiment
            .ok_or_else(|| LabError::Config("missing `experiment`".into()))?;
        let seed = self.seed.ok_or_else(|| LabError::Config("missing `seed`".into()))?;
        Ok((experiment, seed))
    }

    /// Hex sha256 of the canonical JSON form.
    pub fn digest(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        format!("{:x}", Sha256::digest(&canonical))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_rejects() {
        let c = ExperimentConfig::from_json(r#"{"experiment": "quenched-scan", "seed": 3, "N": 100, "h_grid": [0.1]}"#)
            .unwrap();
        assert_eq!(c.validate().unwrap(), (Experiment::QuenchedScan, 3));
        assert_eq!(c.size, Some(100));
        assert!(ExperimentConfig::from_json(r#"{"experiment": "gw-check", "seed": 1, "bogus": 2}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"experiment": "nope", "seed": 1}"#).is_err());
        let unseeded = ExperimentConfig::from_json(r#"{"experiment": "gw-check"}"#).unwrap();
        assert!(unseeded.validate().is_err());
    }

    #[test]
    fn digest_depends_on_content() {
        let a = ExperimentConfig::new(Experiment::GwCheck, 1);
        let b = ExperimentConfig::new(Experiment::GwCheck, 2);
        assert_eq!(a.digest(), a.clone().digest());
        assert_ne!(a.digest(), b.digest());
        assert_eq!(a.digest().len(), 64);
    }
}
