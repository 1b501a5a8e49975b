//! Galton–Watson representation of the hierarchical model.
//!
//! Each node of the depth-`n` binary tree independently has two children
//! with probability `1/B` and none otherwise; the surviving leaves form
//! `R_n`. Leaves are numbered `1..=2ⁿ` from the left. Two leaves `i ≠ j`
//! meet at join level `a(i,j)`, the 1-based position of the highest bit in
//! which `i−1` and `j−1` differ, and `E[δ_i δ_j] = B^{-(n+a−1)}`.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::special::{ln, powf};

use super::B_C;

/// A nonempty set of leaves of the depth-`n` tree, kept sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeIndexSet {
    n: usize,
    leaves: Vec<usize>,
}

impl TreeIndexSet {
    pub fn new(n: usize, mut leaves: Vec<usize>) -> Result<Self> {
        if n > 62 {
            return Err(Error::DimensionExceeded(n));
        }
        if leaves.is_empty() {
            return Err(Error::InvalidIndexSet("index set must be nonempty"));
        }
        leaves.sort_unstable();
        if leaves[0] == 0 || *leaves.last().unwrap() > (1usize << n) {
            return Err(Error::InvalidIndexSet("leaf index out of range"));
        }
        if leaves.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidIndexSet("duplicate leaf index"));
        }
        Ok(TreeIndexSet { n, leaves })
    }

    pub fn depth(&self) -> usize {
        self.n
    }

    pub fn leaves(&self) -> &[usize] {
        &self.leaves
    }
}

/// Surviving leaves of one Galton–Watson realization (possibly empty).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeafSet {
    pub n: usize,
    /// Sorted 1-based leaf indices.
    pub alive: Vec<usize>,
}

/// Number of internal nodes (levels `1..=n`, root included) on the union of
/// the root-to-leaf paths of `idx`.
pub fn subtree_node_count(idx: &TreeIndexSet) -> usize {
    count_ancestors(idx.n, &idx.leaves)
}

// `leaves` sorted, 1-based.
fn count_ancestors(n: usize, leaves: &[usize]) -> usize {
    let mut total = 0;
    for level in 1..=n {
        let mut prev = usize::MAX;
        for &leaf in leaves {
            let node = (leaf - 1) >> level;
            if node != prev {
                total += 1;
                prev = node;
            }
        }
    }
    total
}

/// `E_n[Π_{i∈I} δ_i] = B^{-v(n,I)}`.
pub fn gw_product_expectation(idx: &TreeIndexSet, b: f64) -> f64 {
    powf(b, -(subtree_node_count(idx) as f64))
}

/// Join level of two leaves (1-based indices); 0 when `i = j`.
#[inline]
pub fn join_level(i: usize, j: usize) -> u32 {
    usize::BITS - ((i - 1) ^ (j - 1)).leading_zeros()
}

/// `Σ_{i≠j} (E_n[δ_i δ_j])² = 2ⁿ Σ_{a=1}^{n} 2^{a−1} B^{-2(n+a−1)}`.
pub fn pair_overlap_sum(n: usize, b: f64) -> f64 {
    let ln_b = ln(b);
    let ln2 = core::f64::consts::LN_2;
    (1..=n)
        .map(|a| {
            let e = (n + a - 1) as f64 * ln2 - 2.0 * (n + a - 1) as f64 * ln_b;
            libm::exp(e)
        })
        .sum()
}

/// Top-down simulation of the branching process.
pub fn sample_leafset<R: Rng + ?Sized>(n: usize, b: f64, rng: &mut R) -> LeafSet {
    let p = 1.0 / b;
    let mut nodes: Vec<usize> = vec![0];
    let mut next = Vec::new();
    for _ in 0..n {
        next.clear();
        for &x in &nodes {
            if rng.random::<f64>() < p {
                next.push(2 * x);
                next.push(2 * x + 1);
            }
        }
        core::mem::swap(&mut nodes, &mut next);
        if nodes.is_empty() {
            break;
        }
    }
    LeafSet {
        n,
        alive: nodes.into_iter().map(|x| x + 1).collect(),
    }
}

/// Number of ordered alive pairs meeting at each join level `a = 1..=n`
/// (entry `a−1`).
pub fn join_level_pair_counts(ls: &LeafSet) -> Vec<u64> {
    let mut counts = vec![0u64; ls.n];
    let zero_based: Vec<usize> = ls.alive.iter().map(|&i| i - 1).collect();
    for a in 1..=ls.n {
        let mut start = 0;
        while start < zero_based.len() {
            let parent = zero_based[start] >> a;
            let mut end = start;
            let mut left = 0u64;
            while end < zero_based.len() && zero_based[end] >> a == parent {
                if (zero_based[end] >> (a - 1)) & 1 == 0 {
                    left += 1;
                }
                end += 1;
            }
            let right = (end - start) as u64 - left;
            counts[a - 1] += 2 * left * right;
            start = end;
        }
    }
    counts
}

/// `Σ_{i≠j alive} E_n[δ_i δ_j]`.
pub fn overlap_form(ls: &LeafSet, b: f64) -> f64 {
    let n = ls.n;
    join_level_pair_counts(ls)
        .iter()
        .enumerate()
        .map(|(a0, &c)| c as f64 * powf(b, -((n + a0) as f64)))
        .sum()
}

/// `Y_n = Σ_{i≠j} δ_i δ_j E_n[δ_i δ_j]/n`.
pub fn y_statistic(ls: &LeafSet, b: f64) -> f64 {
    if ls.n == 0 {
        return 0.0;
    }
    overlap_form(ls, b) / ls.n as f64
}

/// Tree recursion over label subsets. `weight(S)` is the power of `1/B`
/// charged to a node whose subtree holds exactly the labels in `S`; leaves
/// may not hold two labels in `forbidden`. Returns the root value for the
/// full label set.
fn label_tree_sum(n: usize, b: f64, labels: usize, forbidden: &[usize], weight: impl Fn(usize) -> u32) -> f64 {
    let full = (1usize << labels) - 1;
    let mut f: Vec<f64> = (0..=full)
        .map(|s| {
            if forbidden.iter().any(|&p| p & !s == 0) {
                0.0
            } else {
                1.0
            }
        })
        .collect();
    let inv_b = 1.0 / b;
    for _ in 0..n {
        let mut g = vec![0.0; full + 1];
        for (s, gs) in g.iter_mut().enumerate() {
            let mut acc = 0.0;
            let mut sub = s;
            loop {
                acc += f[sub] * f[s & !sub];
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & s;
            }
            *gs = acc * powf(inv_b, weight(s) as f64);
        }
        f = g;
    }
    f[full]
}

/// Exact `E_n[Y_n]` by the label recursion (1 at `B = √2`).
pub fn y_mean_exact(n: usize, b: f64) -> f64 {
    let w = |s: usize| if s != 0 { 2 } else { 0 };
    label_tree_sum(n, b, 2, &[0b11], w) / n as f64
}

/// Exact `E_n[Y_n²]` at general `B` by a recursion over the positions of
/// four labelled leaves `i, j, k, l` (bits 0..3) in the tree. A node costs
/// one factor `1/B` for each of the pair weights `E[δ_iδ_j]`, `E[δ_kδ_l]`
/// whose paths use it, and one for the product `δ_iδ_jδ_kδ_l`.
pub fn y_second_moment_at(n: usize, b: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidHorizon(n));
    }
    let w = |s: usize| u32::from(s & 0b0011 != 0) + u32::from(s & 0b1100 != 0) + u32::from(s != 0);
    Ok(label_tree_sum(n, b, 4, &[0b0011, 0b1100], w) / (n * n) as f64)
}

/// `E_n[Y_n²]` at `B = √2`: exhaustive enumeration for `n ≤ 6`, the label
/// recursion beyond.
pub fn y_second_moment(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidHorizon(n));
    }
    if n <= 6 {
        y_second_moment_enumerated(n, B_C)
    } else {
        y_second_moment_at(n, B_C)
    }
}

/// Ordered-quadruple enumeration `n^{-2} Σ B^{-v(n,{i,j,k,l})} E[δ_iδ_j] E[δ_kδ_l]`.
pub fn y_second_moment_enumerated(n: usize, b: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidHorizon(n));
    }
    if n > 6 {
        return Err(Error::ResourceGuard {
            what: "quadruple enumeration depth",
            value: n,
            limit: 6,
        });
    }
    let dim = 1usize << n;
    let pair = |i: usize, j: usize| powf(b, -((n as u32 + join_level(i, j) - 1) as f64));
    let mut total = 0.0;
    for i in 1..=dim {
        for j in (1..=dim).filter(|&j| j != i) {
            let wij = pair(i, j);
            for k in 1..=dim {
                for l in (1..=dim).filter(|&l| l != k) {
                    let mut set = [i, j, k, l];
                    set.sort_unstable();
                    let v = count_ancestors(n, &set);
                    total += powf(b, -(v as f64)) * wij * pair(k, l);
                }
            }
        }
    }
    Ok(total / (n * n) as f64)
}

/// `E_n[Y_n²]` at `B = √2` for `n = 2..=n_max` together with the running
/// maximum `K̂`.
pub fn second_moment_scan(n_max: usize) -> Result<(Vec<f64>, f64)> {
    let mut values = Vec::new();
    let mut k_hat: f64 = 0.0;
    for n in 2..=n_max {
        let v = y_second_moment_at(n, B_C)?;
        k_hat = k_hat.max(v);
        values.push(v);
    }
    Ok((values, k_hat))
}
