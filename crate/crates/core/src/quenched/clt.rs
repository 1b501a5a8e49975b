//! The statistics `Y_L = Σ_{j≤L} δ_j/√j` and
//! `W_L = (√L log L)^{-1} Σ_{1≤i<j≤L} δ_iδ_j/√(j−i)`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::renewal::{green_function, sample_path, RenewalLaw, RenewalPath};
use crate::rng::{map_samples, StreamSeed};
use crate::special::{ln, sqrt};

/// Largest `L` for the exact `O(L²)` variance.
pub const CHUNG_ERDOS_MAX_L: usize = 20_000;

/// `W_L` for one path. Returns 0 when `L < 3` or fewer than two contacts
/// fall in `[1, L]`.
pub fn w_statistic(path: &RenewalPath, l: usize) -> f64 {
    let pts = path.contacts_up_to(l);
    if l < 3 || pts.len() < 2 {
        return 0.0;
    }
    let mut acc = 0.0;
    for (a, &j) in pts.iter().enumerate().skip(1) {
        for &i in &pts[..a] {
            acc += 1.0 / sqrt((j - i) as f64);
        }
    }
    let lf = l as f64;
    acc / (sqrt(lf) * ln(lf))
}

/// `samples` independent draws of `W_L`.
pub fn sample_w(law: &RenewalLaw, l: usize, samples: usize, seed: &StreamSeed) -> Vec<f64> {
    map_samples(seed, samples, |rng| w_statistic(&sample_path(law, l, rng), l))
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ChungErdos {
    pub l: usize,
    pub mean: f64,
    pub variance: f64,
    /// `E Y_L / log L`.
    pub mean_ratio: f64,
    /// `var Y_L / log L`.
    pub variance_ratio: f64,
    /// `1/(2πC_K)`.
    pub limit: f64,
}

/// Exact mean and variance of `Y_L` from the Green function, using
/// `E[δ_iδ_j] = u(i)u(j−i)`.
pub fn chung_erdos_check(law: &RenewalLaw, l: usize) -> Result<ChungErdos> {
    if l > CHUNG_ERDOS_MAX_L {
        return Err(Error::ResourceGuard {
            what: "Chung-Erdos horizon",
            value: l,
            limit: CHUNG_ERDOS_MAX_L,
        });
    }
    if l < 2 {
        return Err(Error::InvalidHorizon(l));
    }
    let green = green_function(law, l)?;
    let u = green.as_slice();
    let inv: Vec<f64> = (0..=l)
        .map(|j| if j == 0 { 0.0 } else { 1.0 / sqrt(j as f64) })
        .collect();
    let mean: f64 = (1..=l).map(|j| u[j] * inv[j]).sum();
    let mut variance = 0.0;
    for i in 1..=l {
        variance += u[i] * (1.0 - u[i]) * inv[i] * inv[i];
        let mut cross = 0.0;
        for j in i + 1..=l {
            cross += (u[j - i] - u[j]) * inv[j];
        }
        variance += 2.0 * u[i] * inv[i] * cross;
    }
    let log_l = ln(l as f64);
    Ok(ChungErdos {
        l,
        mean,
        variance,
        mean_ratio: mean / log_l,
        variance_ratio: variance / log_l,
        limit: 1.0 / (2.0 * core::f64::consts::PI * law.c_k()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(points: &[usize], horizon: usize) -> RenewalPath {
        RenewalPath {
            points: points.to_vec(),
            horizon,
        }
    }

    #[test]
    fn w_on_fixed_paths() {
        assert_eq!(w_statistic(&path(&[0, 4], 10), 10), 0.0);
        let w = w_statistic(&path(&[0, 1, 5, 9], 10), 10);
        let want = (0.5 + 1.0 / 8f64.sqrt() + 0.5) / (10f64.sqrt() * 10f64.ln());
        assert!((w - want).abs() < 1e-15);
        // contacts beyond L are ignored
        assert_eq!(w_statistic(&path(&[0, 1, 5, 9], 10), 4), 0.0);
    }

    // Two-point law K(1) = p, K(2) = 1−p: enumerate all gap sequences.
    #[test]
    fn exact_moments_match_enumeration() {
        let p = 0.3;
        let law = RenewalLaw::from_masses(&[p, 1.0 - p], 0.5, 1.0).unwrap();
        let l = 12;
        let mut stack = alloc::vec![(0usize, 1.0f64, 0.0f64)];
        let (mut m1, mut m2) = (0.0, 0.0);
        while let Some((pos, prob, y)) = stack.pop() {
            if pos >= l {
                m1 += prob * y;
                m2 += prob * y * y;
                continue;
            }
            for (gap, q) in [(1, p), (2, 1.0 - p)] {
                let np = pos + gap;
                let add = if np <= l { 1.0 / (np as f64).sqrt() } else { 0.0 };
                stack.push((np, prob * q, y + add));
            }
        }
        let ce = chung_erdos_check(&law, l).unwrap();
        assert!((ce.mean - m1).abs() < 1e-12);
        assert!((ce.variance - (m2 - m1 * m1)).abs() < 1e-12);
    }
}
