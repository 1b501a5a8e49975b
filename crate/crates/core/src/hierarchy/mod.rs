//! The hierarchical pinning model on the diamond lattice.
//!
//! `R_{n+1} = (R R' + B − 1)/B` applied pairwise to `2ⁿ` leaf values.
//! The Galton–Watson side of the model (leaf sets, overlaps, `Y_n`) lives in
//! [`tree`].

pub mod enumeration;
pub mod tree;

pub use tree::{
    gw_product_expectation, join_level, pair_overlap_sum, sample_leafset, subtree_node_count, y_second_moment,
    y_second_moment_at, y_second_moment_enumerated, y_statistic, LeafSet, TreeIndexSet,
};

use crate::error::{param, Error, Result};
use crate::special::{ln, log_add_exp, powf};

/// The marginal lattice parameter `B_c = √2`.
pub const B_C: f64 = core::f64::consts::SQRT_2;

/// Largest generation for which full disorder arrays are materialized.
pub const MAX_GENERATION: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HierParams {
    pub b: f64,
    pub beta: f64,
    pub h: f64,
}

impl HierParams {
    pub fn new(b: f64, beta: f64, h: f64) -> Result<Self> {
        check_b(b)?;
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(param("beta", beta, "must be finite and nonnegative"));
        }
        if !h.is_finite() {
            return Err(param("h", h, "must be finite"));
        }
        Ok(HierParams { b, beta, h })
    }

    /// Marginal lattice `B = √2`.
    pub fn marginal(beta: f64, h: f64) -> Result<Self> {
        HierParams::new(B_C, beta, h)
    }

    pub fn alpha(&self) -> f64 {
        ln(2.0 / self.b) / core::f64::consts::LN_2
    }
}

pub(crate) fn check_b(b: f64) -> Result<()> {
    if b > 1.0 && b < 2.0 {
        Ok(())
    } else {
        Err(param("B", b, "must lie in (1, 2)"))
    }
}

/// `(x² + B − 1)/B`.
#[inline]
pub fn annealed_map_step(x: f64, b: f64) -> f64 {
    (x * x + b - 1.0) / b
}

/// `α = log(2/B)/log 2`.
pub fn alpha_of_b(b: f64) -> Result<f64> {
    check_b(b)?;
    Ok(ln(2.0 / b) / core::f64::consts::LN_2)
}

/// `n`-fold annealed map applied to 0.
pub fn annealed_envelope(n: usize, b: f64) -> f64 {
    (0..n).fold(0.0, |x, _| annealed_map_step(x, b))
}

/// First `n` with `(B − 1) − x_n^{(0)} < tol`.
pub fn envelope_generation(b: f64, tol: f64) -> Result<usize> {
    check_b(b)?;
    if !(tol > 0.0) {
        return Err(param("tol", tol, "must be positive"));
    }
    let mut x = 0.0;
    for n in 0..100_000 {
        if (b - 1.0) - x < tol {
            return Ok(n);
        }
        x = annealed_map_step(x, b);
    }
    Err(param("tol", tol, "envelope did not reach the tolerance"))
}

/// One recursion step in log domain: `log((e^{a+b} + B − 1)/B)`.
#[inline]
pub fn log_parent(a: f64, b_val: f64, ln_bm1: f64, ln_b: f64) -> f64 {
    log_add_exp(a + b_val, ln_bm1) - ln_b
}

/// Annealed free energy `F(0,h) = lim 2^{-n} log x_n` with `x_0 = e^h`.
pub fn annealed_free_energy(b: f64, h: f64) -> Result<f64> {
    check_b(b)?;
    if h <= 0.0 {
        return Ok(0.0);
    }
    let ln_b = ln(b);
    let ln_bm1 = ln(b - 1.0);
    let mut l = h;
    let mut scale = 1.0;
    for _ in 0..100_000 {
        if l > 50.0 {
            // x_{n+1} = x_n²/B up to e^{-100}, so 2^{-n}(log x_n − log B) is frozen.
            return Ok(scale * (l - ln_b));
        }
        l = log_parent(l, l, ln_bm1, ln_b);
        scale *= 0.5;
    }
    Err(param("h", h, "annealed iteration did not escape the unstable point"))
}

/// Log-domain recursion over `log R_0^{(i)}` in place; returns `log X_n`.
/// The buffer length must be a power of two.
pub fn reduce_log_leaves(b: f64, buf: &mut [f64]) -> f64 {
    let ln_b = ln(b);
    let ln_bm1 = ln(b - 1.0);
    let mut len = buf.len();
    while len > 1 {
        let half = len / 2;
        for i in 0..half {
            buf[i] = log_parent(buf[2 * i], buf[2 * i + 1], ln_bm1, ln_b);
        }
        len = half;
    }
    buf[0]
}

/// `log X_n` for disorder `ω` of length `2ⁿ`.
pub fn hier_log_partition(params: &HierParams, n: usize, omega: &[f64]) -> Result<f64> {
    if n > 62 {
        return Err(Error::DimensionExceeded(n));
    }
    let dim = 1usize << n;
    if omega.len() != dim {
        return Err(Error::LengthMismatch {
            expected: dim,
            got: omega.len(),
        });
    }
    let shift = params.h - 0.5 * params.beta * params.beta;
    let mut buf: alloc::vec::Vec<f64> = omega.iter().map(|w| params.beta * w + shift).collect();
    Ok(reduce_log_leaves(params.b, &mut buf))
}

/// `B^γ − 2(B−1)^γ`.
pub fn fractional_threshold(b: f64, gamma: f64) -> f64 {
    powf(b, gamma) - 2.0 * powf(b - 1.0, gamma)
}

/// `γ` above which [`fractional_threshold`] is positive: `log 2/log(B/(B−1))`.
pub fn threshold_positivity_gamma(b: f64) -> f64 {
    core::f64::consts::LN_2 / ln(b / (b - 1.0))
}

/// `(B^γ − 2(B−1)^γ)^{1/γ}`, increasing in `γ` where positive.
pub fn threshold_gap(b: f64, gamma: f64) -> f64 {
    let t = fractional_threshold(b, gamma);
    if t <= 0.0 {
        0.0
    } else {
        powf(t, 1.0 / gamma)
    }
}

/// Smallest `γ < 1` with `(B^γ − 2(B−1)^γ)^{1/γ} ≥ 2 − B − ζ/4`, by bisection.
pub fn gamma_for_gap(b: f64, zeta: f64) -> Result<f64> {
    check_b(b)?;
    if !(zeta > 0.0) {
        return Err(param("zeta", zeta, "must be positive"));
    }
    let target = 2.0 - b - zeta / 4.0;
    let mut lo = threshold_positivity_gamma(b);
    let mut hi = 1.0;
    if threshold_gap(b, lo) >= target {
        return Ok(lo);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if threshold_gap(b, mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn annealed_fixed_points() {
        for b in [1.2, B_C, 1.8] {
            assert!((annealed_map_step(1.0, b) - 1.0).abs() < 1e-15);
            assert!((annealed_map_step(b - 1.0, b) - (b - 1.0)).abs() < 1e-15);
        }
        assert!((annealed_map_step(0.0, B_C) - 0.292_893_218_813_452_5).abs() < 1e-15);
    }

    #[test]
    fn alpha_values() {
        assert!((alpha_of_b(B_C).unwrap() - 0.5).abs() < 1e-15);
        assert!(alpha_of_b(2.0 - 1e-12).unwrap() < 1e-10);
        assert!(alpha_of_b(1.0 + 1e-12).unwrap() > 1.0 - 1e-10);
        assert!(alpha_of_b(2.5).is_err());
    }

    #[test]
    fn envelope_is_monotone_and_converges() {
        let mut prev = annealed_envelope(0, B_C);
        assert_eq!(prev, 0.0);
        for n in 1..60 {
            let x = annealed_envelope(n, B_C);
            assert!(x >= prev && x < B_C - 1.0);
            prev = x;
        }
        let n = envelope_generation(B_C, 1e-6).unwrap();
        assert!((B_C - 1.0) - annealed_envelope(n, B_C) < 1e-6);
        assert!((B_C - 1.0) - annealed_envelope(n - 1, B_C) >= 1e-6);
    }

    #[test]
    fn log_recursion_reduces_to_annealed_without_disorder() {
        let p = HierParams::new(1.3, 0.0, 0.2).unwrap();
        let omega = alloc::vec![0.7; 1 << 10];
        let got = hier_log_partition(&p, 10, &omega).unwrap();
        let want = (0..10).fold(0.2f64.exp(), |x, _| annealed_map_step(x, 1.3));
        assert!((got.exp() - want).abs() < 1e-12 * want);
        assert!(hier_log_partition(&p, 3, &omega).is_err());
    }

    #[test]
    fn log_recursion_survives_huge_values() {
        let p = HierParams::new(B_C, 1.0, 0.0).unwrap();
        let mut buf = [4.0e5, 6.0e5, -1.0e6, -1.0e6];
        let got = reduce_log_leaves(p.b, &mut buf);
        assert!(got.is_finite());
        assert!((got - (1.0e6 + (B_C - 1.0).ln() - 3.0 * B_C.ln())).abs() < 1e-6);
    }

    #[test]
    fn annealed_free_energy_limits() {
        assert_eq!(annealed_free_energy(B_C, -0.1).unwrap(), 0.0);
        let f = annealed_free_energy(B_C, 0.01).unwrap();
        assert!(f > 0.0 && f < 0.01);
    }

    #[test]
    fn threshold_values() {
        let t = fractional_threshold(B_C, 0.8);
        assert!((t - (2f64.powf(0.4) - 2.0 * (B_C - 1.0).powf(0.8))).abs() < 1e-15);
        assert!((t - 0.3313).abs() < 1e-4);
        assert!((threshold_gap(B_C, 1.0 - 1e-9) - (2.0 - B_C)).abs() < 1e-7);
        let g0 = threshold_positivity_gamma(B_C);
        assert!(fractional_threshold(B_C, g0 + 1e-9) > 0.0);
        assert!(fractional_threshold(B_C, g0 - 1e-9) < 0.0);
        let g = gamma_for_gap(B_C, 0.03).unwrap();
        assert!(threshold_gap(B_C, g) >= 2.0 - B_C - 0.03 / 4.0 - 1e-12);
        assert!(threshold_gap(B_C, g - 1e-6) < 2.0 - B_C - 0.03 / 4.0);
    }
}
