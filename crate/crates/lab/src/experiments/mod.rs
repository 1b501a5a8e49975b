//! Named experiments. Each one turns a config into estimates, flags and
//! CSV tables; the numbers come from `pinning-core`.

mod hier;
mod renewal;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use pinning_core::estimate::PoolEstimate;
use pinning_core::renewal::{make_power_law, RenewalLaw};
use pinning_core::rng::StreamSeed;

use crate::config::{Experiment, ExperimentConfig};
use crate::error::Result;
use crate::record::{Quantity, RunRecord, Table, VERSION};

pub use hier::{overlap_table, OVERLAP_NORMALIZATION};

pub(crate) struct Ctx<'a> {
    pub cfg: &'a ExperimentConfig,
    pub seed: StreamSeed,
    pub threads: usize,
}

impl Ctx<'_> {
    /// Power law with `alpha` (default 1/2) and at least `min_size` stored masses.
    pub fn law(&self, min_size: usize) -> Result<RenewalLaw> {
        let size = self.cfg.law_size.unwrap_or(min_size.max(1024));
        Ok(make_power_law(self.cfg.alpha.unwrap_or(0.5), size)?)
    }

    /// `(β, h)` pairs: `beta_grid × h_grid`, falling back to the scalar keys.
    pub fn beta_h_grid(&self, beta: f64, h_grid: &[f64]) -> Vec<(f64, f64)> {
        let betas = self
            .cfg
            .beta_grid
            .clone()
            .unwrap_or_else(|| vec![self.cfg.beta.unwrap_or(beta)]);
        let hs = self
            .cfg
            .h_grid
            .clone()
            .or_else(|| self.cfg.h.map(|h| vec![h]))
            .unwrap_or_else(|| h_grid.to_vec());
        betas.iter().flat_map(|&b| hs.iter().map(move |&h| (b, h))).collect()
    }

    pub fn map<T: Send, F: Fn(usize) -> Result<T> + Sync>(&self, count: usize, f: F) -> Result<Vec<T>> {
        par_map(self.threads, count, f).into_iter().collect()
    }
}

#[derive(Debug, Default)]
pub struct Outcome {
    pub estimates: Vec<Quantity>,
    pub constants: BTreeMap<String, f64>,
    pub flags: BTreeMap<String, bool>,
    pub tables: Vec<Table>,
    pub details: serde_json::Value,
}

impl Outcome {
    pub(crate) fn exact(&mut self, name: &str, value: f64) -> &mut Quantity {
        self.estimates.push(Quantity::exact(name, value));
        self.estimates.last_mut().unwrap()
    }

    pub(crate) fn estimate(&mut self, name: &str, est: &PoolEstimate) -> &mut Quantity {
        self.estimates.push(Quantity::estimate(name, est));
        self.estimates.last_mut().unwrap()
    }

    pub(crate) fn flag(&mut self, name: &str, value: bool) {
        self.flags.insert(name.into(), value);
    }

    pub(crate) fn constant(&mut self, name: &str, value: f64) {
        self.constants.insert(name.into(), value);
    }
}

/// Evaluates `f(0..count)` on up to `threads` scoped workers. Results come
/// back in index order, so the output does not depend on `threads`.
pub fn par_map<T: Send, F: Fn(usize) -> T + Sync>(threads: usize, count: usize, f: F) -> Vec<T> {
    let threads = threads.clamp(1, count.max(1));
    if threads == 1 {
        return (0..count).map(f).collect();
    }
    let mut slots: Vec<Option<T>> = (0..count).map(|_| None).collect();
    std::thread::scope(|s| {
        let f = &f;
        let workers: Vec<_> = (0..threads)
            .map(|t| s.spawn(move || (t..count).step_by(threads).map(|i| (i, f(i))).collect::<Vec<_>>()))
            .collect();
        for w in workers {
            for (i, v) in w.join().expect("worker panicked") {
                slots[i] = Some(v);
            }
        }
    });
    slots.into_iter().map(|v| v.expect("every index is visited")).collect()
}

pub struct RunOutput {
    pub record: RunRecord,
    pub tables: Vec<Table>,
    pub seed: u64,
}

impl RunOutput {
    pub fn csv_bytes(&self) -> Result<Vec<(String, Vec<u8>)>> {
        self.tables
            .iter()
            .map(|t| {
                let name = format!("{}-{}.csv", self.record.experiment, t.name);
                Ok((name, t.to_csv_bytes(self.seed, &self.record.config_sha256)?))
            })
            .collect()
    }

    /// Writes `<experiment>.json` and one CSV per table into `dir`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let json = dir.join(format!("{}.json", self.record.experiment));
        std::fs::write(&json, serde_json::to_string_pretty(&self.record)?)?;
        written.push(json);
        for (name, bytes) in self.csv_bytes()? {
            let path = dir.join(name);
            std::fs::write(&path, bytes)?;
            written.push(path);
        }
        Ok(written)
    }
}

pub fn run(cfg: &ExperimentConfig, threads: usize) -> Result<RunOutput> {
    let (experiment, seed) = cfg.validate()?;
    let start = Instant::now();
    let ctx = Ctx {
        cfg,
        seed: StreamSeed::new(seed),
        threads,
    };
    let outcome = match experiment {
        Experiment::AnnealedScan => hier::annealed_scan(&ctx)?,
        Experiment::GwCheck => hier::gw_check(&ctx)?,
        Experiment::OverlapIdentity => hier::overlap_identity(&ctx, OVERLAP_NORMALIZATION)?,
        Experiment::SecondMomentScan => hier::second_moment_scan(&ctx)?,
        Experiment::HierFreeEnergy => hier::hier_free_energy(&ctx)?,
        Experiment::HierCertify => hier::hier_certify(&ctx)?,
        Experiment::SmoothingDiagnostic => hier::smoothing_diagnostic(&ctx)?,
        Experiment::RenewalGreen => renewal::renewal_green(&ctx)?,
        Experiment::QuenchedScan => renewal::quenched_scan(&ctx)?,
        Experiment::DecompositionCheck => renewal::decomposition_check(&ctx)?,
        Experiment::Lemma51Scan => renewal::lemma51_scan(&ctx)?,
        Experiment::CltCheck => renewal::clt_check(&ctx)?,
    };
    let record = RunRecord {
        version: VERSION,
        experiment: experiment.name(),
        config: cfg.clone(),
        config_sha256: cfg.digest(),
        estimates: outcome.estimates,
        empirical_constants: outcome.constants,
        flags: outcome.flags,
        details: outcome.details,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    Ok(RunOutput {
        record,
        tables: outcome.tables,
        seed,
    })
}

/// `count` log-spaced points from `lo` to `hi`.
pub(crate) fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.log10(), hi.log10());
    (0..count)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / (count - 1) as f64))
        .collect()
}
