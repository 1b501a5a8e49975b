//! The non-hierarchical disordered pinning model.
//!
//! `Z_{N,ω} = E[exp(Σ_{n≤N} (βω_n + h − β²/2) δ_n) δ_N]` computed exactly
//! by dynamic programming, its coarse-grained decomposition over blocks of
//! size `k = ⌊1/h⌋`, and the estimates that feed the fractional moment
//! bound.

mod clt;
mod coarse;
mod fractional;
mod uweight;

pub use clt::{chung_erdos_check, sample_w, w_statistic, ChungErdos, CHUNG_ERDOS_MAX_L};
pub use coarse::{
    all_target_sets, coarse_grain_term, decomposition_check, pinned_profile, site_weights, CoarseGrainPlan,
    DecompositionCheck, MAX_ENUMERATED_BLOCKS,
};
pub use fractional::{fractional_sum_bound, FractionalSumBound, TermBound, MAX_FRACTIONAL_BLOCKS};
pub use uweight::{
    c2_estimate, delta_for_eta, exp_moment_profile, h_hat, lemma51_conditions, split_estimate, u_weight,
    u_weight_profile, Lemma51Options, Lemma51Report, SplitEstimate,
};

use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{param, Error, Result};
use crate::estimate::PoolEstimate;
use crate::renewal::{homogeneous_free_energy, RenewalLaw};
use crate::rng::{map_samples, StreamSeed};
use crate::special::{exp, ln};

/// Largest system size accepted by [`quenched_free_energy`].
pub const MAX_DP_SIZE: usize = 100_000;

/// `k = ⌊1/h⌋`, the coarse-graining length.
pub fn block_size(h: f64) -> Result<usize> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(param("h", h, "the block size needs h > 0"));
    }
    Ok(libm::floor(1.0 / h) as usize)
}

#[derive(Clone, Copy, Debug)]
pub struct QuenchedConfig<'a> {
    pub law: &'a RenewalLaw,
    pub beta: f64,
    pub h: f64,
    /// System size `N`.
    pub n: usize,
}

impl<'a> QuenchedConfig<'a> {
    pub fn new(law: &'a RenewalLaw, beta: f64, h: f64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidHorizon(0));
        }
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(param("beta", beta, "must be finite and nonnegative"));
        }
        if !h.is_finite() {
            return Err(param("h", h, "must be finite"));
        }
        Ok(QuenchedConfig { law, beta, h, n })
    }

    /// `βω + h − β²/2`.
    #[inline]
    pub fn log_weight(&self, omega: f64) -> f64 {
        self.beta * omega + self.h - 0.5 * self.beta * self.beta
    }

    fn check_omega(&self, omega: &[f64]) -> Result<()> {
        if omega.len() < self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: omega.len(),
            });
        }
        Ok(())
    }
}

/// `log Z_{n,ω}` for every `n = 0..=N` (entry 0 is 0).
pub fn log_partition_profile(cfg: &QuenchedConfig, omega: &[f64]) -> Result<Vec<f64>> {
    log_partition_banded_profile(cfg, omega, cfg.n)
}

/// `log Z_{N,ω}`, `O(N²)`.
pub fn log_partition_dp(cfg: &QuenchedConfig, omega: &[f64]) -> Result<f64> {
    Ok(log_partition_profile(cfg, omega)?[cfg.n])
}

/// The DP with jumps longer than `band` dropped, `O(N·band)`. A lower
/// bound on `log Z`, exact when `band ≥ N`; this is the route for `N`
/// beyond [`MAX_DP_SIZE`].
pub fn log_partition_banded(cfg: &QuenchedConfig, omega: &[f64], band: usize) -> Result<f64> {
    Ok(log_partition_banded_profile(cfg, omega, band)?[cfg.n])
}

fn log_partition_banded_profile(cfg: &QuenchedConfig, omega: &[f64], band: usize) -> Result<Vec<f64>> {
    cfg.check_omega(omega)?;
    if band == 0 {
        return Err(Error::InvalidHorizon(0));
    }
    let n = cfg.n;
    let reach = band.min(n);
    let log_k: Vec<f64> = (0..=reach)
        .map(|d| {
            let m = cfg.law.mass_extended(d);
            if d == 0 || m <= 0.0 {
                f64::NEG_INFINITY
            } else {
                ln(m)
            }
        })
        .collect();
    let mut l = vec![f64::NEG_INFINITY; n + 1];
    l[0] = 0.0;
    for t in 1..=n {
        let lo = t.saturating_sub(reach);
        let mut mx = f64::NEG_INFINITY;
        for m in lo..t {
            mx = mx.max(l[m] + log_k[t - m]);
        }
        if mx == f64::NEG_INFINITY {
            continue;
        }
        let mut acc = 0.0;
        for m in lo..t {
            acc += exp(l[m] + log_k[t - m] - mx);
        }
        l[t] = mx + ln(acc) + cfg.log_weight(omega[t - 1]);
    }
    Ok(l)
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct QuenchedEstimate {
    /// Mean of `log Z_{N,ω}/N` over IID standard Gaussian `ω`.
    pub estimate: PoolEstimate,
    /// `F(0, h)`: the annealed free energy, which is the homogeneous one.
    pub annealed: f64,
}

/// Finite-volume quenched free energy. Sample `i` draws its disorder from
/// stream `i` of `seed`.
pub fn quenched_free_energy(cfg: &QuenchedConfig, samples: usize, seed: &StreamSeed) -> Result<QuenchedEstimate> {
    if cfg.n > MAX_DP_SIZE {
        return Err(Error::ResourceGuard {
            what: "system size",
            value: cfg.n,
            limit: MAX_DP_SIZE,
        });
    }
    let annealed = homogeneous_free_energy(cfg.law, cfg.h)?;
    let big_n = cfg.n as f64;
    let estimate = if cfg.beta == 0.0 {
        let omega = vec![0.0; cfg.n];
        PoolEstimate::exact(log_partition_dp(cfg, &omega)? / big_n, cfg.n, "dp")
    } else {
        if samples < 2 {
            return Err(param("samples", samples as f64, "need at least two disorder samples"));
        }
        let mut omega = vec![0.0; cfg.n];
        let values = map_samples(seed, samples, |rng| {
            fill_standard_normal(rng, &mut omega);
            log_partition_dp(cfg, &omega).map(|v| v / big_n)
        })
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;
        PoolEstimate::from_samples(&values, cfg.n, "dp")
    };
    Ok(QuenchedEstimate { estimate, annealed })
}

pub(crate) fn fill_standard_normal<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    for v in out.iter_mut() {
        *v = rng.sample(StandardNormal);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::renewal::{green_function, make_power_law};

    #[test]
    fn beta_zero_matches_green_function() {
        let law = make_power_law(0.5, 4096).unwrap();
        let cfg = QuenchedConfig::new(&law, 0.0, 0.0, 2000).unwrap();
        let prof = log_partition_profile(&cfg, &vec![0.0; 2000]).unwrap();
        let g = green_function(&law, 2000).unwrap();
        for n in [1, 2, 17, 500, 2000] {
            assert!((prof[n] - ln(g.u(n))).abs() < 1e-10, "n = {n}");
        }
    }

    #[test]
    fn single_site() {
        let law = make_power_law(0.5, 64).unwrap();
        let cfg = QuenchedConfig::new(&law, 0.7, -0.3, 1).unwrap();
        let got = log_partition_dp(&cfg, &[1.3]).unwrap();
        let want = ln(law.mass(1)) + 0.7 * 1.3 - 0.3 - 0.5 * 0.49;
        assert!((got - want).abs() < 1e-14);
    }

    #[test]
    fn banded_is_a_lower_bound() {
        let law = make_power_law(0.5, 256).unwrap();
        let cfg = QuenchedConfig::new(&law, 0.5, 0.1, 200).unwrap();
        let omega: Vec<f64> = (0..200).map(|i| ((i * 37 % 17) as f64 - 8.0) / 5.0).collect();
        let full = log_partition_dp(&cfg, &omega).unwrap();
        assert_eq!(log_partition_banded(&cfg, &omega, 200).unwrap(), full);
        assert!(log_partition_banded(&cfg, &omega, 20).unwrap() < full);
    }

    #[test]
    fn short_disorder_is_rejected() {
        let law = make_power_law(0.5, 64).unwrap();
        let cfg = QuenchedConfig::new(&law, 1.0, 0.0, 10).unwrap();
        assert!(matches!(
            log_partition_dp(&cfg, &[0.0; 5]),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(block_size(0.0).is_err());
        assert_eq!(block_size(0.3).unwrap(), 3);
    }
}
