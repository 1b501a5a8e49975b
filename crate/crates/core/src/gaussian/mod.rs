//! Tilted Gaussian disorder laws `I − ε·V`.
//!
//! Two coupling families are supported. The hierarchical one has entries
//! `V_ij = B^{-(n+a(i,j)−1)}/√S` with `S` the pair overlap sum, so that
//! `Σ V_ij² = 1`; it is constant on join-level classes and therefore
//! diagonal in the Haar basis of the leaf tree. The block one acts on
//! selected blocks of size `k` with `H_ij = (1−γ)/√(c·k·log k·|i−j|)`.

pub mod haar;

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{param, Error, Result};
use crate::hierarchy::{check_b, pair_overlap_sum, tree::join_level};
use crate::special::{exp, ln, ln_1p, powf, sqrt};

/// Largest generation accepted for hierarchical couplings.
pub const MAX_HIER_DEPTH: usize = 24;
/// Largest generation for which the dense matrix may be materialized.
pub const MAX_DENSE_DEPTH: usize = 12;
/// Default constant `9` in the block entries.
pub const DEFAULT_BLOCK_CONSTANT: f64 = 9.0;

#[derive(Clone, Debug, PartialEq)]
pub enum CouplingKind {
    Hierarchical {
        n: usize,
        b: f64,
    },
    Block {
        k: usize,
        gamma: f64,
        /// Tilted blocks (1-based, sorted).
        blocks: Vec<usize>,
        num_blocks: usize,
        constant: f64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Factor {
    /// Eigenvalue of `V` on the constant vector, then on the Haar vectors of
    /// height `m = 1..=n` (entry `m`).
    Haar { eigenvalues: Vec<f64> },
    /// Lower Cholesky factor of `I − Ĥ` and the eigenvalues of `Ĥ`.
    Block {
        cholesky: DMatrix<f64>,
        eigenvalues: Vec<f64>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceSpec {
    kind: CouplingKind,
    dim: usize,
    factor: Option<Factor>,
}

/// A sampled disorder vector and the tilt of the law it came from.
#[derive(Clone, Debug, PartialEq)]
pub struct DisorderField {
    pub values: Vec<f64>,
    pub epsilon: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct HolderCost {
    pub value: f64,
    pub log_value: f64,
    /// Hierarchical: `exp(−ε²‖V‖²/(2γ(1−γ)))`, a lower bound, present when
    /// `ε/(1−γ) ≤ 1/2`. Block: `exp(|M|/2)`, an upper bound.
    pub bound: Option<f64>,
}

/// Hierarchical coupling normalized to unit Hilbert–Schmidt norm.
pub fn build_hier_coupling(n: usize, b: f64) -> Result<CovarianceSpec> {
    check_b(b)?;
    if n == 0 || n > MAX_HIER_DEPTH {
        return Err(Error::DimensionExceeded(n));
    }
    Ok(CovarianceSpec {
        kind: CouplingKind::Hierarchical { n, b },
        dim: 1 << n,
        factor: None,
    })
}

/// Block coupling on the blocks in `blocks` out of `num_blocks`, with the
/// default constant 9.
pub fn build_block_coupling(k: usize, gamma: f64, blocks: &[usize], num_blocks: usize) -> Result<CovarianceSpec> {
    build_block_coupling_with(k, gamma, blocks, num_blocks, DEFAULT_BLOCK_CONSTANT)
}

pub fn build_block_coupling_with(
    k: usize,
    gamma: f64,
    blocks: &[usize],
    num_blocks: usize,
    constant: f64,
) -> Result<CovarianceSpec> {
    if k < 2 {
        return Err(Error::DegenerateBlock(k));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(param("gamma", gamma, "must lie in (0, 1)"));
    }
    if !(constant > 0.0) {
        return Err(param("constant", constant, "must be positive"));
    }
    let mut blocks = blocks.to_vec();
    blocks.sort_unstable();
    blocks.dedup();
    if blocks.is_empty() || blocks[0] == 0 || *blocks.last().unwrap() > num_blocks {
        return Err(Error::InvalidTargets(
            "tilted blocks must be a nonempty subset of 1..=num_blocks",
        ));
    }
    Ok(CovarianceSpec {
        kind: CouplingKind::Block {
            k,
            gamma,
            blocks,
            num_blocks,
            constant,
        },
        dim: k * num_blocks,
        factor: None,
    })
}

/// `‖Ĥ‖/(1−γ)` for block size `k`; independent of `γ`.
pub fn block_norm_ratio(k: usize, constant: f64) -> f64 {
    let kf = k as f64;
    let harmonic: f64 = (1..k).map(|d| (kf - d as f64) / d as f64).sum();
    sqrt(2.0 * harmonic / (constant * kf * ln(kf)))
}

/// Smallest `k ≥ 2` with `‖Ĥ‖ ≤ (1−γ)/2`.
pub fn block_threshold_k(constant: f64) -> usize {
    (2..).find(|&k| block_norm_ratio(k, constant) <= 0.5).unwrap()
}

fn block_entry(k: usize, gamma: f64, constant: f64, d: usize) -> f64 {
    if d == 0 {
        0.0
    } else {
        let kf = k as f64;
        (1.0 - gamma) / sqrt(constant * kf * ln(kf) * d as f64)
    }
}

impl CovarianceSpec {
    pub fn kind(&self) -> &CouplingKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn factor(&self) -> Option<&Factor> {
        self.factor.as_ref()
    }

    pub fn is_factorized(&self) -> bool {
        self.factor.is_some()
    }

    /// Coupling entry for 0-based sites `i`, `j`.
    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        match &self.kind {
            CouplingKind::Hierarchical { n, b } => hier_entry(*n, *b, join_level(i + 1, j + 1) as usize),
            CouplingKind::Block {
                k,
                gamma,
                blocks,
                constant,
                ..
            } => {
                let (bi, bj) = (i / k + 1, j / k + 1);
                if bi == bj && blocks.binary_search(&bi).is_ok() {
                    block_entry(*k, *gamma, *constant, i.abs_diff(j))
                } else {
                    0.0
                }
            }
        }
    }

    /// Hierarchical: `‖V‖`. Block: `‖Ĥ‖` of a single tilted block.
    pub fn hs_norm(&self) -> f64 {
        match &self.kind {
            CouplingKind::Hierarchical { n, b } => {
                let total: f64 = (1..=*n)
                    .map(|a| {
                        let v = hier_entry(*n, *b, a);
                        ((self.dim as f64) * powf(2.0, (a - 1) as f64)) * v * v
                    })
                    .sum();
                sqrt(total)
            }
            CouplingKind::Block { k, gamma, constant, .. } => (1.0 - gamma) * block_norm_ratio(*k, *constant),
        }
    }

    /// Dense coupling matrix (hierarchical: `n ≤ 12`; block: one `k×k` block).
    pub fn dense_coupling(&self) -> Result<DMatrix<f64>> {
        match &self.kind {
            CouplingKind::Hierarchical { n, .. } => {
                if *n > MAX_DENSE_DEPTH {
                    return Err(Error::ResourceGuard {
                        what: "dense hierarchical depth",
                        value: *n,
                        limit: MAX_DENSE_DEPTH,
                    });
                }
                Ok(DMatrix::from_fn(self.dim, self.dim, |i, j| self.coupling(i, j)))
            }
            CouplingKind::Block { k, gamma, constant, .. } => Ok(DMatrix::from_fn(*k, *k, |i, j| {
                block_entry(*k, *gamma, *constant, i.abs_diff(j))
            })),
        }
    }

    /// Spectrum as `(eigenvalue, multiplicity)` pairs. Closed form in the
    /// Haar basis for hierarchical couplings, dense for one block.
    pub fn spectrum(&self) -> Result<Vec<(f64, usize)>> {
        match &self.kind {
            CouplingKind::Hierarchical { n, b } => Ok(haar_eigenvalues(*n, *b)
                .into_iter()
                .enumerate()
                .map(|(m, l)| (l, if m == 0 { 1 } else { 1 << (n - m) }))
                .collect()),
            CouplingKind::Block { .. } => {
                let eig = match &self.factor {
                    Some(Factor::Block { eigenvalues, .. }) => eigenvalues.clone(),
                    _ => symmetric_eigenvalues(self.dense_coupling()?),
                };
                Ok(eig.into_iter().map(|l| (l, 1)).collect())
            }
        }
    }

    /// Eigenvalues of the dense matrix with multiplicity, ascending.
    pub fn dense_spectrum(&self) -> Result<Vec<f64>> {
        Ok(symmetric_eigenvalues(self.dense_coupling()?))
    }

    /// Largest eigenvalue of the coupling; `I − εV` is positive definite
    /// exactly for `ε < 1/λ_max`.
    pub fn max_eigenvalue(&self) -> Result<f64> {
        Ok(self
            .spectrum()?
            .into_iter()
            .map(|(l, _)| l)
            .fold(f64::NEG_INFINITY, f64::max))
    }

    pub fn spectral_radius(&self) -> Result<f64> {
        Ok(self.spectrum()?.into_iter().map(|(l, _)| l.abs()).fold(0.0, f64::max))
    }

    /// Tilts with `ε < min(1 − γ, 0.999/ρ)` are admitted by the certification
    /// code; this returns that bound.
    pub fn epsilon_window(&self, gamma: f64) -> Result<f64> {
        Ok((1.0 - gamma).min(0.999 / self.spectral_radius()?))
    }

    /// Computes the sampling factor.
    pub fn factorize(mut self) -> Result<Self> {
        let factor = match &self.kind {
            CouplingKind::Hierarchical { n, b } => Factor::Haar {
                eigenvalues: haar_eigenvalues(*n, *b),
            },
            CouplingKind::Block { k, .. } => {
                let h = self.dense_coupling()?;
                let cov = DMatrix::identity(*k, *k) - &h;
                let chol = nalgebra::Cholesky::new(cov).ok_or(Error::NotPositiveDefinite)?;
                Factor::Block {
                    cholesky: chol.l(),
                    eigenvalues: symmetric_eigenvalues(h),
                }
            }
        };
        self.factor = Some(factor);
        Ok(self)
    }

    fn check_epsilon(&self, epsilon: f64) -> Result<()> {
        if !(epsilon >= 0.0) || !epsilon.is_finite() {
            return Err(param("epsilon", epsilon, "must be finite and nonnegative"));
        }
        match &self.kind {
            CouplingKind::Hierarchical { .. } => {
                let lmax = self.max_eigenvalue()?;
                if epsilon * lmax >= 1.0 {
                    return Err(Error::NotPositiveDefinite);
                }
                Ok(())
            }
            CouplingKind::Block { .. } => {
                if epsilon != 1.0 {
                    return Err(param("epsilon", epsilon, "block laws are defined at unit tilt"));
                }
                Ok(())
            }
        }
    }

    /// Draws a field with covariance `I − εV` into `out`.
    pub fn sample_into<R: Rng + ?Sized>(&self, epsilon: f64, rng: &mut R, out: &mut [f64]) -> Result<()> {
        let factor = self.factor.as_ref().ok_or(Error::MustFactorizeFirst)?;
        self.check_epsilon(epsilon)?;
        if out.len() != self.dim {
            return Err(Error::LengthMismatch {
                expected: self.dim,
                got: out.len(),
            });
        }
        match (factor, &self.kind) {
            (Factor::Haar { eigenvalues }, CouplingKind::Hierarchical { n, .. }) => {
                let scales: Vec<f64> = eigenvalues.iter().map(|l| sqrt(1.0 - epsilon * l)).collect();
                let mut coeffs = vec![0.0; self.dim];
                for (idx, c) in coeffs.iter_mut().enumerate() {
                    let z: f64 = rng.sample(StandardNormal);
                    let m = if idx == 0 { 0 } else { haar::detail_height(*n, idx) };
                    *c = scales[m] * z;
                }
                haar::inverse_into(&coeffs, out);
            }
            (Factor::Block { cholesky, .. }, CouplingKind::Block { k, blocks, .. }) => {
                for v in out.iter_mut() {
                    *v = rng.sample(StandardNormal);
                }
                let mut z = vec![0.0; *k];
                for &blk in blocks {
                    let base = (blk - 1) * k;
                    z.copy_from_slice(&out[base..base + k]);
                    for i in 0..*k {
                        let mut acc = 0.0;
                        for j in 0..=i {
                            acc += cholesky[(i, j)] * z[j];
                        }
                        out[base + i] = acc;
                    }
                }
            }
            _ => unreachable!("factor kind always matches the coupling kind"),
        }
        Ok(())
    }
}

fn hier_entry(n: usize, b: f64, a: usize) -> f64 {
    powf(b, -((n + a - 1) as f64)) / sqrt(pair_overlap_sum(n, b))
}

/// `λ_0 = Σ_a 2^{a−1} f(a)` on the constant vector and
/// `λ_m = Σ_{a<m} 2^{a−1} f(a) − 2^{m−1} f(m)` on Haar vectors of height `m`.
pub fn haar_eigenvalues(n: usize, b: f64) -> Vec<f64> {
    let f: Vec<f64> = (1..=n).map(|a| hier_entry(n, b, a)).collect();
    let mut eig = vec![0.0; n + 1];
    let mut below = 0.0;
    for m in 1..=n {
        let w = powf(2.0, (m - 1) as f64) * f[m - 1];
        eig[m] = below - w;
        below += w;
    }
    eig[0] = below;
    eig
}

fn symmetric_eigenvalues(m: DMatrix<f64>) -> Vec<f64> {
    let mut e: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

/// Draws one field from `I − εV`.
pub fn sample_tilted<R: Rng + ?Sized>(spec: &CovarianceSpec, epsilon: f64, rng: &mut R) -> Result<DisorderField> {
    let mut values = vec![0.0; spec.dim];
    spec.sample_into(epsilon, rng, &mut values)?;
    Ok(DisorderField { values, epsilon })
}

/// Exact Hölder cost and its analytic bound.
///
/// Hierarchical: `det(I − εV/(1−γ))^{(1−γ)/(2γ)} / det(I − εV)^{1/(2γ)}`.
/// Block: `(det(I − Ĥ)/det(I − Ĥ/(1−γ))^{1−γ})^{|M|/2}`; `epsilon` is
/// ignored there since the tilt is built into `Ĥ`.
pub fn holder_cost(spec: &CovarianceSpec, epsilon: f64, gamma: f64) -> Result<HolderCost> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(param("gamma", gamma, "must lie in (0, 1)"));
    }
    let spectrum = spec.spectrum()?;
    let log_det = |t: f64| -> Result<f64> {
        let mut acc = 0.0;
        for &(l, mult) in &spectrum {
            let x = -t * l;
            if x <= -1.0 {
                return Err(Error::NotPositiveDefinite);
            }
            acc += mult as f64 * ln_1p(x);
        }
        Ok(acc)
    };
    match spec.kind() {
        CouplingKind::Hierarchical { .. } => {
            if !(epsilon >= 0.0) || epsilon >= 1.0 - gamma {
                return Err(Error::InvalidTilt {
                    epsilon,
                    limit: 1.0 - gamma,
                });
            }
            let ld_num = log_det(epsilon / (1.0 - gamma))?;
            let ld_den = log_det(epsilon)?;
            let log_value = (1.0 - gamma) / (2.0 * gamma) * ld_num - ld_den / (2.0 * gamma);
            let norm = spec.hs_norm();
            let bound = (epsilon / (1.0 - gamma) <= 0.5)
                .then(|| exp(-epsilon * epsilon * norm * norm / (2.0 * gamma * (1.0 - gamma))));
            Ok(HolderCost {
                value: exp(log_value),
                log_value,
                bound,
            })
        }
        CouplingKind::Block {
            gamma: g_spec, blocks, ..
        } => {
            if (gamma - g_spec).abs() > 1e-15 {
                return Err(param("gamma", gamma, "must match the gamma of the block coupling"));
            }
            let ld_one = log_det(1.0)?;
            let ld_scaled = log_det(1.0 / (1.0 - gamma))?;
            let half_m = blocks.len() as f64 / 2.0;
            let log_value = half_m * (ld_one - (1.0 - gamma) * ld_scaled);
            Ok(HolderCost {
                value: exp(log_value),
                log_value,
                bound: Some(exp(half_m)),
            })
        }
    }
}

/// `log dP̃/dP(ω) = −½((C^{-1} − I)ω, ω) − ½ log det C` with `C = I − εV`.
pub fn density_ratio(omega: &[f64], spec: &CovarianceSpec, epsilon: f64) -> Result<f64> {
    if omega.len() != spec.dim {
        return Err(Error::LengthMismatch {
            expected: spec.dim,
            got: omega.len(),
        });
    }
    if epsilon == 0.0 {
        return Ok(0.0);
    }
    match spec.kind() {
        CouplingKind::Hierarchical { n, b } => {
            spec.check_epsilon(epsilon)?;
            let eig = haar_eigenvalues(*n, *b);
            let coeffs = haar::forward(omega);
            let mut quad = 0.0;
            let mut log_det = 0.0;
            for (idx, c) in coeffs.iter().enumerate() {
                let m = if idx == 0 { 0 } else { haar::detail_height(*n, idx) };
                let l = eig[m];
                quad += c * c * epsilon * l / (1.0 - epsilon * l);
                log_det += ln_1p(-epsilon * l);
            }
            Ok(-0.5 * quad - 0.5 * log_det)
        }
        CouplingKind::Block { k, blocks, .. } => {
            spec.check_epsilon(epsilon)?;
            let Some(Factor::Block { cholesky, .. }) = spec.factor() else {
                return Err(Error::MustFactorizeFirst);
            };
            let mut total = 0.0;
            for &blk in blocks {
                let base = (blk - 1) * k;
                let w = DVector::from_column_slice(&omega[base..base + k]);
                let y = cholesky.solve_lower_triangular(&w).ok_or(Error::NotPositiveDefinite)?;
                let log_det: f64 = (0..*k).map(|i| 2.0 * ln(cholesky[(i, i)])).sum();
                total += -0.5 * (y.norm_squared() - w.norm_squared()) - 0.5 * log_det;
            }
            Ok(total)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hierarchy::B_C;
    use crate::rng::StreamSeed;

    #[test]
    fn hierarchical_entries_and_norm() {
        let spec = build_hier_coupling(2, B_C).unwrap();
        let s2 = 2f64.sqrt();
        assert!((spec.coupling(0, 1) - B_C.powi(-2) / s2).abs() < 1e-15);
        assert!((spec.coupling(0, 2) - B_C.powi(-3) / s2).abs() < 1e-15);
        assert_eq!(spec.coupling(3, 3), 0.0);
        for n in 2..=12 {
            let s = build_hier_coupling(n, B_C).unwrap();
            assert!((s.hs_norm() - 1.0).abs() < 1e-10);
            let dense = s.dense_coupling().unwrap();
            assert!((dense.norm() - 1.0).abs() < 1e-10);
        }
        assert!(build_hier_coupling(30, B_C).is_err());
    }

    #[test]
    fn haar_spectrum_matches_dense() {
        for n in 1..=6 {
            for b in [1.2, B_C, 1.7] {
                let spec = build_hier_coupling(n, b).unwrap();
                let mut closed: Vec<f64> = Vec::new();
                for (l, m) in spec.spectrum().unwrap() {
                    closed.extend(core::iter::repeat_n(l, m));
                }
                closed.sort_by(f64::total_cmp);
                let dense = spec.dense_spectrum().unwrap();
                for (a, d) in closed.iter().zip(&dense) {
                    assert!((a - d).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn tilt_window_is_enforced() {
        let spec = build_hier_coupling(5, B_C).unwrap().factorize().unwrap();
        let lmax = spec.max_eigenvalue().unwrap();
        let mut rng = StreamSeed::new(1).rng(0);
        assert!(sample_tilted(&spec, 0.99 / lmax, &mut rng).is_ok());
        assert_eq!(
            sample_tilted(&spec, 1.0 / lmax, &mut rng),
            Err(Error::NotPositiveDefinite)
        );
        let raw = build_hier_coupling(5, B_C).unwrap();
        assert_eq!(sample_tilted(&raw, 0.1, &mut rng), Err(Error::MustFactorizeFirst));
    }

    #[test]
    fn zero_tilt_is_identity() {
        let spec = build_hier_coupling(4, B_C).unwrap();
        let h = holder_cost(&spec, 0.0, 0.5).unwrap();
        assert_eq!(h.value, 1.0);
        assert_eq!(h.bound, Some(1.0));
        assert_eq!(density_ratio(&[0.3; 16], &spec, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn two_by_two_holder_cost() {
        // depth 1: a single off-diagonal entry v = 1/√2
        let spec = build_hier_coupling(1, B_C).unwrap();
        let v = spec.coupling(0, 1);
        let (eps, gamma) = (0.2, 0.6);
        let t = eps / (1.0 - gamma);
        let want = (1.0 - t * t * v * v).powf((1.0 - gamma) / (2.0 * gamma))
            / (1.0 - eps * eps * v * v).powf(1.0 / (2.0 * gamma));
        let got = holder_cost(&spec, eps, gamma).unwrap();
        assert!((got.value - want).abs() < 1e-14);
        assert!(holder_cost(&spec, 0.4, 0.6).is_err());
    }

    #[test]
    fn block_norm_and_threshold() {
        let r = block_norm_ratio(10_000, 9.0);
        assert!((r * r / (2.0 / 9.0) - 1.0).abs() < 0.05, "{r}");
        let k0 = block_threshold_k(9.0);
        assert!(block_norm_ratio(k0, 9.0) <= 0.5);
        assert!(block_norm_ratio(k0 - 1, 9.0) > 0.5 || k0 == 2);
        assert!(matches!(
            build_block_coupling(1, 0.5, &[1], 1),
            Err(Error::DegenerateBlock(1))
        ));
    }

    #[test]
    fn block_sampling_and_ratio() {
        let spec = build_block_coupling(6, 0.7, &[2], 3).unwrap().factorize().unwrap();
        let mut rng = StreamSeed::new(5).rng(0);
        let f = sample_tilted(&spec, 1.0, &mut rng).unwrap();
        assert_eq!(f.values.len(), 18);
        assert!(density_ratio(&f.values, &spec, 1.0).unwrap().is_finite());
        let h = holder_cost(&spec, 0.0, 0.7).unwrap();
        assert!(h.value <= h.bound.unwrap());
        assert!(sample_tilted(&spec, 0.5, &mut rng).is_err());
    }
}
