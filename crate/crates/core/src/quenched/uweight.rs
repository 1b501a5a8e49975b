//! The weights `U(n)` of the reduced model and the two conditions on them.

use alloc::vec;
use alloc::vec::Vec;

use super::block_size;
use crate::error::{param, Error, Result};
use crate::estimate::PoolEstimate;
use crate::gaussian::DEFAULT_BLOCK_CONSTANT;
use crate::renewal::{conditioning_ratio, green_bound_constant, green_function, sample_path, RenewalLaw};
use crate::rng::StreamSeed;
use crate::special::{exp, ln, powf, sqrt, zeta};

/// `H_ij·√|i−j|` for blocks of size `k`.
fn h_coefficient(k: usize, gamma: f64) -> f64 {
    let kf = k as f64;
    (1.0 - gamma) / sqrt(DEFAULT_BLOCK_CONSTANT * kf * ln(kf))
}

fn check_window(k: usize, gamma: f64, samples: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::DegenerateBlock(k));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(param("gamma", gamma, "must lie in (0, 1)"));
    }
    if samples < 2 {
        return Err(param("samples", samples as f64, "need at least two paths"));
    }
    Ok(())
}

/// Calls `visit` once per sampled path with `exp(−β² Σ_{1≤i<j≤m} H_ij δ_iδ_j)`
/// for every `m = 0..=m_max`. All `m` share the same path.
fn for_each_profile<F: FnMut(&[f64])>(
    beta: f64,
    k: usize,
    gamma: f64,
    law: &RenewalLaw,
    m_max: usize,
    samples: usize,
    seed: &StreamSeed,
    mut visit: F,
) {
    let scale = beta * beta * h_coefficient(k, gamma);
    let mut out = vec![1.0; m_max + 1];
    for i in 0..samples {
        if scale == 0.0 || m_max < 2 {
            visit(&out);
            continue;
        }
        let mut rng = seed.rng(i as u64);
        let path = sample_path(law, m_max, &mut rng);
        let pts = path.contacts_up_to(m_max);
        let mut s = 0.0;
        let mut next = 0;
        for (m, o) in out.iter_mut().enumerate().skip(1) {
            if next < pts.len() && pts[next] == m {
                s += pts[..next].iter().map(|&p| 1.0 / sqrt((m - p) as f64)).sum::<f64>();
                next += 1;
            }
            *o = exp(-scale * s);
        }
        visit(&out);
    }
}

/// `s(m) = E[exp(−β² Σ_{1≤i<j≤m} H_ij δ_iδ_j)]` for `m = 0..=m_max`, all
/// from common paths.
pub fn exp_moment_profile(
    beta: f64,
    k: usize,
    gamma: f64,
    law: &RenewalLaw,
    m_max: usize,
    samples: usize,
    seed: &StreamSeed,
) -> Result<Vec<PoolEstimate>> {
    check_window(k, gamma, samples)?;
    let mut sum = vec![0.0; m_max + 1];
    let mut sq = vec![0.0; m_max + 1];
    for_each_profile(beta, k, gamma, law, m_max, samples, seed, |v| {
        for (m, &x) in v.iter().enumerate() {
            sum[m] += x;
            sq[m] += x * x;
        }
    });
    let cnt = samples as f64;
    Ok(sum
        .iter()
        .zip(&sq)
        .enumerate()
        .map(|(m, (&s, &q))| {
            let mean = s / cnt;
            let var = ((q - cnt * mean * mean) / (cnt - 1.0)).max(0.0);
            PoolEstimate {
                mean,
                std_error: sqrt(var / cnt),
                sample_count: samples,
                generation: m,
                estimator: "renewal-path",
            }
        })
        .collect())
}

/// `U(n)/c₈ = u(n)·s(⌊n/2⌋)` for every `n < k`.
pub fn u_weight_profile(
    beta: f64,
    k: usize,
    gamma: f64,
    law: &RenewalLaw,
    samples: usize,
    seed: &StreamSeed,
) -> Result<Vec<PoolEstimate>> {
    let green = green_function(law, k.max(2))?;
    let s = exp_moment_profile(beta, k, gamma, law, (k - 1) / 2, samples, seed)?;
    Ok((0..k)
        .map(|n| {
            let u = green.u(n);
            let e = &s[n / 2];
            PoolEstimate {
                mean: u * e.mean,
                std_error: u * e.std_error,
                generation: n,
                ..*e
            }
        })
        .collect())
}

/// `U(n)/c₈` for a single gap `0 ≤ n < k`.
pub fn u_weight(
    n: usize,
    beta: f64,
    k: usize,
    gamma: f64,
    law: &RenewalLaw,
    samples: usize,
    seed: &StreamSeed,
) -> Result<PoolEstimate> {
    if n >= k {
        return Err(Error::OutOfWindow { gap: n, window: k });
    }
    let green = green_function(law, n.max(2))?;
    let s = exp_moment_profile(beta, k, gamma, law, n / 2, samples, seed)?;
    let e = s[n / 2];
    let u = green.u(n);
    Ok(PoolEstimate {
        mean: u * e.mean,
        std_error: u * e.std_error,
        generation: n,
        ..e
    })
}

/// Empirical `C₂ = max(2^{3/2}, max_d K((d−2)k+1)·(dk)^{3/2})` over block
/// distances `3 ≤ d ≤ max_distance`: a long jump between blocks `d` apart
/// has length at least `(d−2)k + 1`.
pub fn c2_estimate(law: &RenewalLaw, k: usize, max_distance: usize) -> f64 {
    let kf = k as f64;
    (3..=max_distance.max(3))
        .map(|d| law.mass_extended((d - 2) * k + 1) * powf(d as f64 * kf, 1.5))
        .fold(powf(2.0, 1.5), f64::max)
}

/// `ĥ = log(η^γ C₂^γ e Σ_n n^{−3γ/2})`; needs `γ > 2/3`.
pub fn h_hat(eta: f64, c2: f64, gamma: f64) -> Result<f64> {
    if !(gamma > 2.0 / 3.0 && gamma < 1.0) {
        return Err(param("gamma", gamma, "must lie in (2/3, 1)"));
    }
    Ok(gamma * ln(eta) + gamma * ln(c2) + 1.0 + ln(zeta(1.5 * gamma)))
}

/// `δ` with `4c₈c₉(√δ + δ) = η`.
pub fn delta_for_eta(c8: f64, c9: f64, eta: f64) -> f64 {
    let x = 0.5 * (sqrt(1.0 + eta / (c8 * c9)) - 1.0);
    x * x
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lemma51Options {
    pub gamma: f64,
    pub samples: usize,
    pub seed: u64,
    /// Scan range for the conditioning constant; the law needs twice this.
    pub conditioning_horizon: usize,
    /// Largest block distance in the `C₂` maximum.
    pub c2_distance: usize,
}

impl Lemma51Options {
    pub fn new(gamma: f64, samples: usize, seed: u64) -> Self {
        Lemma51Options {
            gamma,
            samples,
            seed,
            conditioning_horizon: 1000,
            c2_distance: 1000,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Lemma51Report {
    pub beta: f64,
    pub h: f64,
    pub k: usize,
    pub gamma: f64,
    /// The conditioning constant `c` (sup of the last-epoch likelihood ratio).
    pub conditioning_c: f64,
    /// `c₈ = e·c`.
    pub c8: f64,
    /// `Σ_{j<k} U(j)/√k`.
    pub lhs1: PoolEstimate,
    /// `Σ_{j<k} Σ_{n≥k} U(j)K(n−j)`.
    pub lhs2: PoolEstimate,
    pub eta_min: f64,
    pub c2_hat: f64,
    pub h_hat: f64,
    pub h_hat_negative: bool,
}

/// Both left-hand sides, the smallest admissible `η`, and `ĥ` at that `η`.
/// `c₈`, `C₂` are empirical over the scanned ranges.
pub fn lemma51_conditions(beta: f64, h: f64, law: &RenewalLaw, opts: &Lemma51Options) -> Result<Lemma51Report> {
    let k = block_size(h)?;
    check_window(k, opts.gamma, opts.samples)?;
    let horizon = opts.conditioning_horizon.min(law.n_max() / 2).max(1);
    let conditioning_c = conditioning_ratio(law, horizon)?.max_ratio;
    let c8 = core::f64::consts::E * conditioning_c;
    let green = green_function(law, k.max(2))?;
    let half = (k - 1) / 2;
    let mut w1 = vec![0.0; half + 1];
    let mut w2 = vec![0.0; half + 1];
    for j in 0..k {
        w1[j / 2] += green.u(j);
        w2[j / 2] += green.u(j) * law.survival(k - 1 - j);
    }
    let root_k = sqrt(k as f64);
    let mut v1 = Vec::with_capacity(opts.samples);
    let mut v2 = Vec::with_capacity(opts.samples);
    let seed = StreamSeed::new(opts.seed);
    for_each_profile(beta, k, opts.gamma, law, half, opts.samples, &seed, |s| {
        let a: f64 = w1.iter().zip(s).map(|(w, x)| w * x).sum();
        let b: f64 = w2.iter().zip(s).map(|(w, x)| w * x).sum();
        v1.push(c8 * a / root_k);
        v2.push(c8 * b);
    });
    let lhs1 = PoolEstimate::from_samples(&v1, k, "renewal-path");
    let lhs2 = PoolEstimate::from_samples(&v2, k, "renewal-path");
    let eta_min = lhs1.mean.max(lhs2.mean);
    let c2_hat = c2_estimate(law, k, opts.c2_distance);
    let h_hat = h_hat(eta_min, c2_hat, opts.gamma)?;
    Ok(Lemma51Report {
        beta,
        h,
        k,
        gamma: opts.gamma,
        conditioning_c,
        c8,
        lhs1,
        lhs2,
        eta_min,
        c2_hat,
        h_hat,
        h_hat_negative: h_hat < 0.0,
    })
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SplitEstimate {
    pub k: usize,
    pub delta: f64,
    pub c8: f64,
    /// `max_n u(n)√n` over the Green horizon.
    pub c9: f64,
    /// `Σ_{j<k} U(j)` itself.
    pub sum_u: PoolEstimate,
    /// `c₈ + c₈c₉ Σ_{1≤j≤δk} j^{−1/2}`.
    pub small_part: f64,
    /// `c₈c₉ Σ_{δk<j<k} s(⌊j/2⌋)/√j`.
    pub large_part: PoolEstimate,
    /// `4c₈c₉(√δ + δ)√k`.
    pub closing_bound: f64,
    /// `Σ U ≤ small + large` within 3σ.
    pub split_holds: bool,
    /// `small + large ≤ closing_bound`.
    pub closing_holds: bool,
}

/// Both sides of the split of `Σ_{j<k} U(j)` at `j = δk`.
pub fn split_estimate(
    beta: f64,
    k: usize,
    delta: f64,
    law: &RenewalLaw,
    opts: &Lemma51Options,
) -> Result<SplitEstimate> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(param("delta", delta, "must lie in (0, 1)"));
    }
    check_window(k, opts.gamma, opts.samples)?;
    let horizon = opts.conditioning_horizon.min(law.n_max() / 2).max(1);
    let c8 = core::f64::consts::E * conditioning_ratio(law, horizon)?.max_ratio;
    let green = green_function(law, law.n_max().min(k.max(4096)))?;
    let c9 = green_bound_constant(&green);
    let cut = libm::floor(delta * k as f64) as usize;
    let small_part = c8 + c8 * c9 * (1..=cut).map(|j| 1.0 / sqrt(j as f64)).sum::<f64>();
    let half = (k - 1) / 2;
    let mut w_sum = vec![0.0; half + 1];
    let mut w_large = vec![0.0; half + 1];
    for j in 0..k {
        w_sum[j / 2] += c8 * green.u(j);
        if j > cut {
            w_large[j / 2] += c8 * c9 / sqrt(j as f64);
        }
    }
    let mut v_sum = Vec::with_capacity(opts.samples);
    let mut v_large = Vec::with_capacity(opts.samples);
    let seed = StreamSeed::new(opts.seed);
    for_each_profile(beta, k, opts.gamma, law, half, opts.samples, &seed, |s| {
        v_sum.push(w_sum.iter().zip(s).map(|(w, x)| w * x).sum::<f64>());
        v_large.push(w_large.iter().zip(s).map(|(w, x)| w * x).sum::<f64>());
    });
    let sum_u = PoolEstimate::from_samples(&v_sum, k, "renewal-path");
    let large_part = PoolEstimate::from_samples(&v_large, k, "renewal-path");
    let closing_bound = 4.0 * c8 * c9 * (sqrt(delta) + delta) * sqrt(k as f64);
    let rhs = small_part + large_part.mean;
    let diff_se = sqrt(sum_u.std_error * sum_u.std_error + large_part.std_error * large_part.std_error);
    Ok(SplitEstimate {
        k,
        delta,
        c8,
        c9,
        sum_u,
        small_part,
        large_part,
        closing_bound,
        split_holds: sum_u.mean <= rhs + 3.0 * diff_se,
        closing_holds: rhs <= closing_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::renewal::make_power_law;

    #[test]
    fn beta_zero_is_the_green_function() {
        let law = make_power_law(0.5, 4096).unwrap();
        let seed = StreamSeed::new(3);
        let g = green_function(&law, 100).unwrap();
        let prof = u_weight_profile(0.0, 100, 0.9, &law, 10, &seed).unwrap();
        for n in 0..100 {
            assert_eq!(prof[n].mean, g.u(n));
            assert_eq!(prof[n].std_error, 0.0);
        }
        assert_eq!(u_weight(0, 1.0, 100, 0.9, &law, 10, &seed).unwrap().mean, 1.0);
        assert!(matches!(
            u_weight(100, 1.0, 100, 0.9, &law, 10, &seed),
            Err(Error::OutOfWindow { gap: 100, window: 100 })
        ));
    }

    #[test]
    fn single_gap_agrees_with_profile() {
        let law = make_power_law(0.5, 4096).unwrap();
        let seed = StreamSeed::new(9);
        let prof = u_weight_profile(2.0, 200, 0.8, &law, 300, &seed).unwrap();
        let one = u_weight(151, 2.0, 200, 0.8, &law, 300, &seed).unwrap();
        assert!((prof[151].mean - one.mean).abs() < 1e-14);
        assert!(prof[151].mean <= green_function(&law, 151).unwrap().u(151));
    }

    #[test]
    fn h_hat_formula_and_delta() {
        let v = h_hat(0.5, 3.0, 0.9).unwrap();
        let want = 0.9 * ln(0.5) + 0.9 * ln(3.0) + 1.0 + ln(zeta(1.35));
        assert!((v - want).abs() < 1e-14);
        assert!(h_hat(1e-300, 3.0, 0.9).unwrap() < -500.0);
        assert!(h_hat(0.5, 3.0, 0.6).is_err());
        let d = delta_for_eta(3.0, 0.5, 0.7);
        assert!((4.0 * 3.0 * 0.5 * (d.sqrt() + d) - 0.7).abs() < 1e-12);
    }

    #[test]
    fn c2_has_its_floor() {
        let law = make_power_law(0.5, 4096).unwrap();
        let c2 = c2_estimate(&law, 10, 50);
        assert!(c2 >= powf(2.0, 1.5));
        // the maximum sits at the shortest long jump
        let d3 = law.mass(11) * powf(30.0, 1.5);
        assert!((c2 - d3.max(powf(2.0, 1.5))).abs() < 1e-12);
    }
}
