//! Coarse graining over blocks `B_i = {(i−1)k+1, …, ik}`.
//!
//! A path pinned at `N` is cut as follows: `n_1` is its first contact,
//! `j_1` its last contact before `n_1 + k`, `n_2` the first contact after
//! `j_1`, and so on until some `n_ℓ` falls in the last block. The blocks
//! `i_r ∋ n_r` are the targets, and summing the paths with a given target
//! list gives `Ẑ^{(i_1,…,i_ℓ)}`. Every path has exactly one target list.

use alloc::vec;
use alloc::vec::Vec;

use super::{log_partition_dp, QuenchedConfig};
use crate::error::{param, Error, Result};
use crate::renewal::RenewalLaw;
use crate::special::exp;

/// Largest block count for which all target lists are enumerated.
pub const MAX_ENUMERATED_BLOCKS: usize = 20;

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CoarseGrainPlan {
    /// System size `N`.
    pub n_total: usize,
    pub k: usize,
    /// `i_1 < … < i_ℓ = N/k`, 1-based.
    pub targets: Vec<usize>,
    /// `{i_r} ∪ {i_r + 1 : r < ℓ}`, sorted.
    pub m_set: Vec<usize>,
    pub gamma: f64,
}

impl CoarseGrainPlan {
    pub fn new(n_total: usize, k: usize, targets: Vec<usize>, gamma: f64) -> Result<Self> {
        if k == 0 || n_total == 0 || !n_total.is_multiple_of(k) {
            return Err(Error::InvalidTargets("N must be a positive multiple of k"));
        }
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(param("gamma", gamma, "must lie in (0, 1)"));
        }
        let blocks = n_total / k;
        if targets.last() != Some(&blocks) {
            return Err(Error::InvalidTargets("the last target must be the last block"));
        }
        if targets[0] == 0 || targets.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidTargets("targets must be strictly increasing and 1-based"));
        }
        let mut m_set = targets.clone();
        m_set.extend(targets[..targets.len() - 1].iter().map(|i| i + 1));
        m_set.sort_unstable();
        m_set.dedup();
        Ok(CoarseGrainPlan {
            n_total,
            k,
            targets,
            m_set,
            gamma,
        })
    }

    pub fn num_blocks(&self) -> usize {
        self.n_total / self.k
    }

    /// `ℓ`.
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }
}

/// Every target list `i_1 < … < i_ℓ = blocks`, in binary order of the
/// optional blocks `1..blocks`.
pub fn all_target_sets(blocks: usize) -> Result<Vec<Vec<usize>>> {
    if blocks == 0 {
        return Err(Error::InvalidTargets("need at least one block"));
    }
    if blocks > MAX_ENUMERATED_BLOCKS {
        return Err(Error::ResourceGuard {
            what: "enumerated blocks",
            value: blocks,
            limit: MAX_ENUMERATED_BLOCKS,
        });
    }
    let free = blocks - 1;
    Ok((0u32..1 << free)
        .map(|mask| {
            let mut t: Vec<usize> = (0..free).filter(|b| mask >> b & 1 == 1).map(|b| b + 1).collect();
            t.push(blocks);
            t
        })
        .collect())
}

/// `z_n = exp(βω_n + h − β²/2)` for `n = 1..=N`; index 0 holds 1.
pub fn site_weights(cfg: &QuenchedConfig, omega: &[f64]) -> Result<Vec<f64>> {
    cfg.check_omega(omega)?;
    let mut z = vec![1.0; cfg.n + 1];
    for (zn, &w) in z[1..].iter_mut().zip(omega) {
        *zn = exp(cfg.log_weight(w));
    }
    Ok(z)
}

/// `Z_{a,a+t}` for `t < len`: paths from a contact at `a` to a contact at
/// `a + t`, weighted by `z` at every contact after `a`.
pub fn pinned_profile(law: &RenewalLaw, z: &[f64], a: usize, len: usize) -> Vec<f64> {
    let mut p = vec![0.0; len];
    if len == 0 {
        return p;
    }
    p[0] = 1.0;
    for t in 1..len {
        let mut acc = 0.0;
        for s in 0..t {
            acc += p[s] * law.mass_extended(t - s);
        }
        p[t] = acc * z[a + t];
    }
    p
}

/// Site weights and the within-window profiles `Z_{n, n+t}`, `t < k`.
pub(crate) struct Tables<'a> {
    law: &'a RenewalLaw,
    n: usize,
    k: usize,
    z: Vec<f64>,
    inner: Vec<Vec<f64>>,
}

impl<'a> Tables<'a> {
    pub(crate) fn new(law: &'a RenewalLaw, z: Vec<f64>, k: usize) -> Self {
        let n = z.len() - 1;
        let inner = (0..=n)
            .map(|a| {
                if a == 0 {
                    Vec::new()
                } else {
                    pinned_profile(law, &z, a, k.min(n - a + 1))
                }
            })
            .collect();
        Tables { law, n, k, z, inner }
    }

    pub(crate) fn term(&self, targets: &[usize]) -> f64 {
        let k = self.k;
        let base = |i: usize| (i - 1) * k + 1;
        let mut a: Vec<f64> = (0..k)
            .map(|p| {
                let n = base(targets[0]) + p;
                self.z[n] * self.law.mass_extended(n)
            })
            .collect();
        for w in targets.windows(2) {
            let (from, to) = (base(w[0]), base(w[1]));
            let mut next = vec![0.0; k];
            for (p, &ap) in a.iter().enumerate() {
                if ap == 0.0 {
                    continue;
                }
                let n = from + p;
                let prof = &self.inner[n];
                for (q, nq) in next.iter_mut().enumerate() {
                    let np = to + q;
                    if np < n + k {
                        continue;
                    }
                    let mut acc = 0.0;
                    for (t, &zt) in prof.iter().enumerate() {
                        acc += zt * self.law.mass_extended(np - n - t);
                    }
                    *nq += ap * acc;
                }
            }
            for (q, nq) in next.iter_mut().enumerate() {
                *nq *= self.z[to + q];
            }
            a = next;
        }
        let last = base(*targets.last().unwrap());
        a.iter()
            .enumerate()
            .map(|(p, &ap)| ap * self.inner[last + p][self.n - last - p])
            .sum()
    }
}

/// `Ẑ_ω^{(i_1,…,i_ℓ)}` by a DP over the contact pairs `(n_r, j_r)`.
pub fn coarse_grain_term(cfg: &QuenchedConfig, omega: &[f64], plan: &CoarseGrainPlan) -> Result<f64> {
    if plan.n_total != cfg.n {
        return Err(Error::InvalidTargets("plan and configuration disagree on N"));
    }
    let z = site_weights(cfg, &omega[..cfg.n.min(omega.len())])?;
    Ok(Tables::new(cfg.law, z, plan.k).term(&plan.targets))
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct DecompositionCheck {
    /// `Z_{N,ω}` from the full DP.
    pub partition: f64,
    /// `Σ Ẑ` over all target lists.
    pub sum_of_terms: f64,
    pub terms: Vec<f64>,
    pub relative_residual: f64,
}

/// Evaluates every `Ẑ` for block size `k` and compares their sum with `Z`.
pub fn decomposition_check(cfg: &QuenchedConfig, omega: &[f64], k: usize) -> Result<DecompositionCheck> {
    if k == 0 || !cfg.n.is_multiple_of(k) {
        return Err(Error::InvalidTargets("N must be a positive multiple of k"));
    }
    let sets = all_target_sets(cfg.n / k)?;
    let z = site_weights(cfg, &omega[..cfg.n.min(omega.len())])?;
    let tables = Tables::new(cfg.law, z, k);
    let terms: Vec<f64> = sets.iter().map(|t| tables.term(t)).collect();
    let sum_of_terms: f64 = terms.iter().sum();
    let partition = exp(log_partition_dp(cfg, omega)?);
    Ok(DecompositionCheck {
        partition,
        sum_of_terms,
        terms,
        relative_residual: (sum_of_terms - partition).abs() / partition,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::renewal::make_power_law;

    // Brute force over all subsets of {1..N−1} as contact sets.
    fn brute(law: &RenewalLaw, z: &[f64], k: usize) -> Vec<(Vec<usize>, f64)> {
        let n = z.len() - 1;
        let blocks = n / k;
        let mut out: Vec<(Vec<usize>, f64)> = Vec::new();
        for mask in 0u32..1 << (n - 1) {
            let mut pts: Vec<usize> = (1..n).filter(|p| mask >> (p - 1) & 1 == 1).collect();
            pts.push(n);
            let mut w = 1.0;
            let mut prev = 0;
            for &p in &pts {
                w *= law.mass(p - prev) * z[p];
                prev = p;
            }
            let mut targets = Vec::new();
            let mut idx = 0;
            loop {
                let nr = pts[idx];
                let blk = (nr - 1) / k + 1;
                targets.push(blk);
                if blk == blocks {
                    break;
                }
                idx = pts.iter().position(|&p| p >= nr + k).unwrap();
            }
            match out.iter_mut().find(|(t, _)| *t == targets) {
                Some(e) => e.1 += w,
                None => out.push((targets, w)),
            }
        }
        out
    }

    #[test]
    fn restricted_dp_matches_path_enumeration() {
        let law = make_power_law(0.5, 64).unwrap();
        let omega: Vec<f64> = (0..12).map(|i| ((i * 5 % 7) as f64 - 3.0) / 2.0).collect();
        let cfg = QuenchedConfig::new(&law, 0.8, 0.2, 12).unwrap();
        let z = site_weights(&cfg, &omega).unwrap();
        for k in [1, 2, 3, 4] {
            for (targets, w) in brute(&law, &z, k) {
                let plan = CoarseGrainPlan::new(12, k, targets.clone(), 0.9).unwrap();
                let got = coarse_grain_term(&cfg, &omega, &plan).unwrap();
                assert!((got - w).abs() <= 1e-12 * w, "k = {k}, targets = {targets:?}");
            }
        }
    }

    #[test]
    fn decomposition_sums_to_partition() {
        let law = make_power_law(0.5, 64).unwrap();
        let omega: Vec<f64> = (0..30).map(|i| ((i * 11 % 13) as f64 - 6.0) / 3.0).collect();
        let cfg = QuenchedConfig::new(&law, 1.2, -0.1, 30).unwrap();
        let check = decomposition_check(&cfg, &omega, 5).unwrap();
        assert_eq!(check.terms.len(), 32);
        assert!(check.relative_residual < 1e-12);
        assert!(check.terms.iter().all(|&t| t >= 0.0));
    }

    #[test]
    fn plan_validation_and_m_set() {
        let plan = CoarseGrainPlan::new(20, 4, vec![1, 3, 5], 0.9).unwrap();
        assert_eq!(plan.m_set, vec![1, 2, 3, 4, 5]);
        let plan = CoarseGrainPlan::new(20, 4, vec![5], 0.9).unwrap();
        assert_eq!(plan.m_set, vec![5]);
        assert!(CoarseGrainPlan::new(20, 3, vec![5], 0.9).is_err());
        assert!(CoarseGrainPlan::new(20, 4, vec![2, 2, 5], 0.9).is_err());
        assert!(CoarseGrainPlan::new(20, 4, vec![1, 4], 0.9).is_err());
        assert_eq!(
            all_target_sets(3).unwrap(),
            vec![vec![3], vec![1, 3], vec![2, 3], vec![1, 2, 3]]
        );
    }
}
