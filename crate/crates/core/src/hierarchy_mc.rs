//! Monte Carlo estimators for the hierarchical model and the
//! delocalization certificate.
//!
//! Every estimator takes a [`StreamSeed`]; sample `i` always uses stream `i`,
//! so results are reproducible regardless of how work is scheduled.

use alloc::vec;
use alloc::vec::Vec;

use rand_distr::{Distribution, StandardNormal};

use crate::error::{param, Error, Result};
use crate::estimate::PoolEstimate;
use crate::gaussian::{build_hier_coupling, holder_cost};
use crate::hierarchy::tree::{overlap_form, second_moment_scan};
use crate::hierarchy::{
    annealed_envelope, annealed_map_step, envelope_generation, fractional_threshold, gamma_for_gap, pair_overlap_sum,
    reduce_log_leaves, sample_leafset, threshold_gap, y_second_moment, y_statistic, HierParams, B_C, MAX_GENERATION,
};
use crate::rng::{map_samples, StreamSeed};
use crate::special::{exp, ln, powf, sqrt};

pub const MIN_POOL_SAMPLES: usize = 100;
/// Detector threshold, in standard errors, for a positive free energy.
pub const DETECTION_SIGMAS: f64 = 4.0;

fn check_generation(n: usize) -> Result<()> {
    if n > MAX_GENERATION {
        return Err(Error::ResourceGuard {
            what: "hierarchical generation",
            value: n,
            limit: MAX_GENERATION,
        });
    }
    Ok(())
}

fn check_samples(samples: usize, min: usize) -> Result<()> {
    if samples < min {
        return Err(param(
            "samples",
            samples as f64,
            "too few samples for a pooled estimate",
        ));
    }
    Ok(())
}

/// `log x_n` for the annealed iteration started at `e^h`.
pub fn annealed_log_iterate(b: f64, h: f64, n: usize) -> f64 {
    let ln_b = ln(b);
    let ln_bm1 = ln(b - 1.0);
    (0..n).fold(h, |l, _| crate::hierarchy::log_parent(l, l, ln_bm1, ln_b))
}

/// `log X_n` for one IID standard Gaussian disorder draw.
fn draw_log_partition<R: rand::Rng + ?Sized>(params: &HierParams, rng: &mut R, buf: &mut [f64]) -> f64 {
    let shift = params.h - 0.5 * params.beta * params.beta;
    for v in buf.iter_mut() {
        let z: f64 = StandardNormal.sample(rng);
        *v = params.beta * z + shift;
    }
    reduce_log_leaves(params.b, buf)
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct FreeEnergyEstimate {
    pub estimate: PoolEstimate,
    /// `2^{-n} log x_n` of the annealed iteration at the same `(n, h)`.
    pub annealed: f64,
}

/// `2^{-n} E log X_n` over IID disorder.
pub fn pool_free_energy(
    params: &HierParams,
    n: usize,
    samples: usize,
    seed: &StreamSeed,
) -> Result<FreeEnergyEstimate> {
    check_generation(n)?;
    check_samples(samples, MIN_POOL_SAMPLES)?;
    let scale = powf(2.0, -(n as f64));
    let annealed = scale * annealed_log_iterate(params.b, params.h, n);
    if params.beta == 0.0 {
        return Ok(FreeEnergyEstimate {
            estimate: PoolEstimate {
                sample_count: samples,
                ..PoolEstimate::exact(annealed, n, "pool-free-energy")
            },
            annealed,
        });
    }
    let mut buf = vec![0.0; 1 << n];
    let values = map_samples(seed, samples, |rng| scale * draw_log_partition(params, rng, &mut buf));
    Ok(FreeEnergyEstimate {
        estimate: PoolEstimate::from_samples(&values, n, "pool-free-energy"),
        annealed,
    })
}

/// `[X − (B−1)]_+^γ` from `log X`.
pub fn positive_part_power(log_x: f64, b: f64, gamma: f64) -> f64 {
    let ln_bm1 = ln(b - 1.0);
    let d = log_x - ln_bm1;
    if d <= 0.0 {
        return 0.0;
    }
    let ln_excess = if d > 30.0 { d } else { ln(libm::expm1(d)) };
    exp(gamma * (ln_bm1 + ln_excess))
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct FractionalMoment {
    /// `A_n = E[X_n − (B−1)]_+^γ`.
    pub a_n: PoolEstimate,
    /// `E[X_n^γ]` on the same samples.
    pub x_gamma: PoolEstimate,
}

pub fn fractional_moment(
    params: &HierParams,
    n: usize,
    gamma: f64,
    samples: usize,
    seed: &StreamSeed,
) -> Result<FractionalMoment> {
    check_generation(n)?;
    check_samples(samples, 2)?;
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(param("gamma", gamma, "must lie in (0, 1)"));
    }
    let mut buf = vec![0.0; 1 << n];
    let pairs = map_samples(seed, samples, |rng| {
        let l = draw_log_partition(params, rng, &mut buf);
        (positive_part_power(l, params.b, gamma), exp(gamma * l))
    });
    let a: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let x: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    Ok(FractionalMoment {
        a_n: PoolEstimate::from_samples(&a, n, "fractional-moment"),
        x_gamma: PoolEstimate::from_samples(&x, n, "x-power-gamma"),
    })
}

/// `(A² + 2(B−1)^γ A)/B^γ`, the one-step bound on `A_{n+1}`.
pub fn fractional_recursion_bound(a: f64, b: f64, gamma: f64) -> f64 {
    (a * a + 2.0 * powf(b - 1.0, gamma) * a) / powf(b, gamma)
}

/// Whether `A_{n+1} ≤ (A_n² + 2(B−1)^γ A_n)/B^γ` is compatible with both
/// estimates at `sigmas` standard errors.
pub fn fractional_recursion_holds(a_n: &PoolEstimate, a_next: &PoolEstimate, b: f64, gamma: f64, sigmas: f64) -> bool {
    a_next.lower(sigmas) <= fractional_recursion_bound(a_n.upper(sigmas).max(0.0), b, gamma)
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TiltedMean {
    /// Average of `X_n` over disorder drawn from `I − εV`.
    pub disorder: Option<PoolEstimate>,
    /// Average of `exp(−εβ²(Vδ,δ)/2 + h|R_n|)` over Galton–Watson leaf sets.
    pub renewal: PoolEstimate,
    /// `e^{2ⁿh}·E[exp(−εβ²(Vδ,δ)/2)]` on the same leaf sets.
    pub upper_bound: PoolEstimate,
}

/// Which estimators [`tilted_mean`] runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TiltedEstimators {
    Both,
    RenewalOnly,
}

/// `Ẽ_n X_n` under the hierarchical tilt `I − εV`.
pub fn tilted_mean(
    params: &HierParams,
    n: usize,
    epsilon: f64,
    samples: usize,
    seed: &StreamSeed,
    which: TiltedEstimators,
) -> Result<TiltedMean> {
    check_generation(n)?;
    check_samples(samples, 2)?;
    if n == 0 {
        return Err(Error::InvalidHorizon(0));
    }
    let spec = build_hier_coupling(n, params.b)?.factorize()?;
    if epsilon * spec.max_eigenvalue()? >= 1.0 {
        return Err(Error::NotPositiveDefinite);
    }
    let disorder = if which == TiltedEstimators::Both {
        let dseed = seed.derive(1);
        let shift = params.h - 0.5 * params.beta * params.beta;
        let mut buf = vec![0.0; spec.dim()];
        let mut vals = Vec::with_capacity(samples);
        for i in 0..samples {
            let mut rng = dseed.rng(i as u64);
            spec.sample_into(epsilon, &mut rng, &mut buf)?;
            for v in buf.iter_mut() {
                *v = params.beta * *v + shift;
            }
            vals.push(exp(reduce_log_leaves(params.b, &mut buf)));
        }
        Some(PoolEstimate::from_samples(&vals, n, "tilted-mean-disorder"))
    } else {
        None
    };
    let root_s = sqrt(pair_overlap_sum(n, params.b));
    let coef = 0.5 * epsilon * params.beta * params.beta / root_s;
    let leaf_max = powf(2.0, n as f64);
    let rseed = seed.derive(2);
    let pairs = map_samples(&rseed, samples, |rng| {
        let ls = sample_leafset(n, params.b, rng);
        let damp = -coef * overlap_form(&ls, params.b);
        (
            exp(damp + params.h * ls.alive.len() as f64),
            exp(damp + params.h * leaf_max),
        )
    });
    let r: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let u: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    Ok(TiltedMean {
        disorder,
        renewal: PoolEstimate::from_samples(&r, n, "tilted-mean-renewal"),
        upper_bound: PoolEstimate::from_samples(&u, n, "tilted-mean-bound"),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct PaleyZygmund {
    pub n: usize,
    /// Monte Carlo `P(Y_n ≥ 1/2)`.
    pub tail: PoolEstimate,
    pub second_moment: f64,
    /// `1/(4 E[Y_n²])`.
    pub bound: f64,
    /// `1/(4 K̂)` with `K̂` the running maximum over `n ≤ 30`.
    pub bound_k_hat: f64,
    pub pass: bool,
}

/// Checks `P(Y_n ≥ 1/2) ≥ 1/(4E[Y_n²])` at `B = √2`.
pub fn paley_zygmund_check(n: usize, samples: usize, seed: &StreamSeed) -> Result<PaleyZygmund> {
    check_generation(n)?;
    check_samples(samples, 2)?;
    let second_moment = y_second_moment(n)?;
    let (_, k_hat) = second_moment_scan(30)?;
    let hits = map_samples(seed, samples, |rng| {
        let ls = sample_leafset(n, B_C, rng);
        if y_statistic(&ls, B_C) >= 0.5 {
            1.0
        } else {
            0.0
        }
    });
    let tail = PoolEstimate::from_samples(&hits, n, "paley-zygmund-tail");
    let bound = 1.0 / (4.0 * second_moment);
    Ok(PaleyZygmund {
        n,
        tail,
        second_moment,
        bound,
        bound_k_hat: 1.0 / (4.0 * k_hat),
        pass: tail.upper(3.0) >= bound,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum Verdict {
    Pass,
    Fail,
    InfeasibleAtPaperConstants,
}

/// Tuning overrides and sampling budget for [`certify_delocalization`].
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CertifyOptions {
    pub zeta: Option<f64>,
    pub gamma: Option<f64>,
    pub epsilon: Option<f64>,
    pub n: Option<usize>,
    pub samples: usize,
    pub seed: u64,
}

impl CertifyOptions {
    pub fn paper(samples: usize, seed: u64) -> Self {
        CertifyOptions {
            zeta: None,
            gamma: None,
            epsilon: None,
            n: None,
            samples,
            seed,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Condition {
    pub value: f64,
    pub threshold: f64,
    pub holds: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Certificate {
    pub beta: f64,
    pub b: f64,
    pub k_hat: f64,
    pub zeta: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub n: usize,
    pub n_zeta: usize,
    /// `50K̂/(β⁴ε²)`.
    pub n_paper: f64,
    pub h_certified: f64,
    /// Exact Hölder factor vs `1 − ζ/4`.
    pub condition_a: Condition,
    /// The analytic bound `exp(−ε²/(2γ(1−γ)))` when applicable.
    pub holder_bound: Option<f64>,
    /// `Ẽ X_n + 3σ` vs `1 − ζ`.
    pub condition_b: Condition,
    pub tilted_mean: PoolEstimate,
    /// `(B^γ − 2(B−1)^γ)^{1/γ}` vs `2 − B − ζ/4`.
    pub gap_ok: bool,
    pub n_ok: bool,
    /// `Ẽ X_n + 3σ − x_n^{(0)}` vs `H·(B^γ − 2(B−1)^γ)^{1/γ}`: a sufficient
    /// condition that does not need `γ = γ_ζ` or `n ≥ n_ζ`.
    pub direct: Condition,
    pub verdict: Verdict,
    pub samples: usize,
    pub seed: u64,
}

impl Certificate {
    pub fn direct_margin(&self) -> f64 {
        self.direct.threshold - self.direct.value
    }
}

/// Largest generation the certification pipeline evaluates.
pub const CERTIFY_MAX_N: usize = MAX_GENERATION;

/// Delocalization certificate at `B = √2`.
///
/// Unset options take the reference choices: `ζ = 1/(40K̂)`, `γ = γ_ζ`, the
/// largest `ε` with `exp(−ε²/(2γ(1−γ))) ≥ 1 − ζ/4` inside the positive
/// definite window, and `n = max(n_ζ, ⌈50K̂/(β⁴ε²)⌉)`. When that `n` exceeds
/// [`CERTIFY_MAX_N`] the conditions are evaluated at the cap and the verdict
/// is [`Verdict::InfeasibleAtPaperConstants`].
pub fn certify_delocalization(beta: f64, opts: &CertifyOptions) -> Result<Certificate> {
    if !(beta > 0.0) {
        return Err(param("beta", beta, "must be positive"));
    }
    let b = B_C;
    let (_, k_hat) = second_moment_scan(30)?;
    let zeta = opts.zeta.unwrap_or(1.0 / (40.0 * k_hat));
    if !(zeta > 0.0 && zeta < 1.0) {
        return Err(param("zeta", zeta, "must lie in (0, 1)"));
    }
    let gamma = match opts.gamma {
        Some(g) => g,
        None => gamma_for_gap(b, zeta)?,
    };
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(param("gamma", gamma, "must lie in (0, 1)"));
    }
    let n_zeta = envelope_generation(b, zeta / 4.0)?;

    // ε is chosen before n; the window depends on n only through the spectral
    // radius, which is at most ‖V‖ = 1.
    let eps_from_bound = sqrt(-2.0 * gamma * (1.0 - gamma) * ln(1.0 - zeta / 4.0));
    let mut epsilon = opts.epsilon.unwrap_or(eps_from_bound.min(0.999 * (1.0 - gamma)));
    let n_paper = 50.0 * k_hat / (powf(beta, 4.0) * epsilon * epsilon);
    let requested = opts.n.map_or(libm::ceil(n_paper), |v| v as f64);
    let n_target = requested.max(n_zeta as f64);
    let infeasible = n_target > CERTIFY_MAX_N as f64;
    let n = if infeasible { CERTIFY_MAX_N } else { n_target as usize };

    let spec = build_hier_coupling(n, b)?;
    let window = spec.epsilon_window(gamma)?;
    if opts.epsilon.is_none() {
        epsilon = epsilon.min(window);
    } else if epsilon >= window {
        return Err(Error::InvalidTilt { epsilon, limit: window });
    }
    let holder = holder_cost(&spec, epsilon, gamma)?;
    let h_certified = zeta * powf(2.0, -(n as f64));
    let params = HierParams::new(b, beta, h_certified)?;
    let seed = StreamSeed::new(opts.seed).derive(0xCE47);
    let tm = tilted_mean(&params, n, epsilon, opts.samples, &seed, TiltedEstimators::RenewalOnly)?;
    let mean_hi = tm.renewal.upper(3.0);

    let condition_a = Condition {
        value: holder.value,
        threshold: 1.0 - zeta / 4.0,
        holds: holder.value >= 1.0 - zeta / 4.0,
    };
    let condition_b = Condition {
        value: mean_hi,
        threshold: 1.0 - zeta,
        holds: mean_hi <= 1.0 - zeta,
    };
    let gap = threshold_gap(b, gamma);
    let gap_ok = gap >= 2.0 - b - zeta / 4.0;
    let n_ok = n >= n_zeta;
    let direct_lhs = mean_hi - annealed_envelope(n, b);
    let direct_rhs = holder.value * gap;
    let direct = Condition {
        value: direct_lhs,
        threshold: direct_rhs,
        holds: fractional_threshold(b, gamma) > 0.0 && direct_lhs < direct_rhs,
    };
    let verdict = if infeasible {
        Verdict::InfeasibleAtPaperConstants
    } else if condition_a.holds && condition_b.holds && ((gap_ok && n_ok) || direct.holds) {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(Certificate {
        beta,
        b,
        k_hat,
        zeta,
        gamma,
        epsilon,
        n,
        n_zeta,
        n_paper,
        h_certified,
        condition_a,
        holder_bound: holder.bound,
        condition_b,
        tilted_mean: tm.renewal,
        gap_ok,
        n_ok,
        direct,
        verdict,
        samples: opts.samples,
        seed: opts.seed,
    })
}

/// Finite-size bracket `[h_lo, h_hi]` for the onset of a detectable positive
/// free energy at generation `n`.
pub fn hc_scan(beta: f64, n: usize, samples: usize, tol: f64, seed: &StreamSeed) -> Result<(f64, f64)> {
    if !(tol > 0.0) {
        return Err(param("tol", tol, "must be positive"));
    }
    let detect = |h: f64| -> Result<bool> {
        let p = HierParams::marginal(beta, h)?;
        // the stream depends on h only, so refinements reuse the same draws
        let est = pool_free_energy(&p, n, samples, &seed.derive(h.to_bits()))?;
        Ok(est.estimate.mean > DETECTION_SIGMAS * est.estimate.std_error)
    };
    let mut lo = -0.5;
    let mut hi = 1.0;
    let mut guard = 0;
    while detect(lo)? {
        lo *= 2.0;
        guard += 1;
        if guard > 20 {
            return Err(param("h", lo, "no undetected lower end found"));
        }
    }
    while !detect(hi)? {
        hi *= 2.0;
        guard += 1;
        if guard > 40 {
            return Err(param("h", hi, "no detected upper end found"));
        }
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if detect(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((lo, hi))
}

/// `n`-fold annealed map from `e^h`, the mean of `X_n` under IID disorder.
pub fn annealed_mean(b: f64, h: f64, n: usize) -> f64 {
    (0..n).fold(exp(h), |x, _| annealed_map_step(x, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_disorder_pool_is_exact() {
        let p = HierParams::marginal(0.0, 0.3).unwrap();
        let est = pool_free_energy(&p, 8, 100, &StreamSeed::new(1)).unwrap();
        assert_eq!(est.estimate.std_error, 0.0);
        assert_eq!(est.estimate.mean, est.annealed);
        assert!(pool_free_energy(&p, 21, 100, &StreamSeed::new(1)).is_err());
        assert!(pool_free_energy(&p, 4, 10, &StreamSeed::new(1)).is_err());
    }

    #[test]
    fn positive_part_is_stable() {
        let b = B_C;
        assert_eq!(positive_part_power((b - 1.0).ln() - 1e-9, b, 0.5), 0.0);
        let x: f64 = 3.0;
        assert!((positive_part_power(x.ln(), b, 0.7) - (x - (b - 1.0)).powf(0.7)).abs() < 1e-13);
        assert!(positive_part_power(800.0, b, 0.5).is_finite());
    }

    #[test]
    fn untilted_mean_at_unstable_point() {
        let p = HierParams::marginal(1.0, 0.0).unwrap();
        let tm = tilted_mean(&p, 5, 0.0, 4000, &StreamSeed::new(2), TiltedEstimators::Both).unwrap();
        assert_eq!(tm.renewal.mean, 1.0);
        let d = tm.disorder.unwrap();
        assert!((d.mean - 1.0).abs() < 4.0 * d.std_error);
    }

    #[test]
    fn recursion_bound_is_fixed_point_consistent() {
        // A = B^γ − 2(B−1)^γ is the nontrivial fixed point of the bound map.
        let (b, g) = (B_C, 0.8);
        let a = fractional_threshold(b, g);
        assert!((fractional_recursion_bound(a, b, g) - a).abs() < 1e-14);
    }
}
