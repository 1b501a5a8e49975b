//! Orthonormal Haar transforms on `2ⁿ` points.
//!
//! Coefficient layout: index 0 holds the coefficient of the normalized
//! constant vector; the details of the nodes at height `m` (there are
//! `2^{n−m}` of them) occupy `2^{n−m}..2^{n−m+1}`, left to right.

use alloc::vec::Vec;

const INV_SQRT2: f64 = core::f64::consts::FRAC_1_SQRT_2;

/// Height of the node owning detail coefficient `idx ≥ 1` in a depth-`n` tree.
#[inline]
pub fn detail_height(n: usize, idx: usize) -> usize {
    n - (usize::BITS - 1 - idx.leading_zeros()) as usize
}

/// Analysis: values at the leaves to Haar coefficients.
pub fn forward(x: &[f64]) -> Vec<f64> {
    let len = x.len();
    let mut coeffs = alloc::vec![0.0; len];
    let mut s: Vec<f64> = x.to_vec();
    let mut width = len;
    while width > 1 {
        let half = width / 2;
        for p in 0..half {
            let (a, b) = (s[2 * p], s[2 * p + 1]);
            coeffs[half + p] = (a - b) * INV_SQRT2;
            s[p] = (a + b) * INV_SQRT2;
        }
        width = half;
    }
    coeffs[0] = s[0];
    coeffs
}

/// Synthesis: inverse of [`forward`], written into `out`.
pub fn inverse_into(coeffs: &[f64], out: &mut [f64]) {
    let len = coeffs.len();
    out[0] = coeffs[0];
    let mut width = 1;
    while width < len {
        // expand in place from the back so parents are read before overwritten
        for p in (0..width).rev() {
            let s = out[p];
            let d = coeffs[width + p];
            out[2 * p] = (s + d) * INV_SQRT2;
            out[2 * p + 1] = (s - d) * INV_SQRT2;
        }
        width *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_isometry() {
        let x: Vec<f64> = (0..16).map(|i| ((i * 7 + 3) % 11) as f64 - 4.5).collect();
        let c = forward(&x);
        let mut back = alloc::vec![0.0; 16];
        inverse_into(&c, &mut back);
        for (a, b) in x.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
        let e1: f64 = x.iter().map(|v| v * v).sum();
        let e2: f64 = c.iter().map(|v| v * v).sum();
        assert!((e1 - e2).abs() < 1e-10);
        assert_eq!(detail_height(4, 1), 4);
        assert_eq!(detail_height(4, 8), 1);
        assert_eq!(detail_height(4, 15), 1);
    }
}
