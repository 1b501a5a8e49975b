//! Exhaustive enumeration of Galton–Watson realizations on small trees.
//!
//! A depth-`m` tree has `r(m) = 1 + r(m−1)²` realizations (26 at depth 3,
//! 677 at depth 4), so this is only an oracle for tiny `n`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

pub const MAX_ENUMERATION_DEPTH: usize = 4;

/// One realization: its probability and its sorted 1-based surviving leaves.
#[derive(Clone, Debug, PartialEq)]
pub struct Realization {
    pub probability: f64,
    pub alive: Vec<usize>,
}

/// All realizations of the depth-`n` branching process.
pub fn realizations(n: usize, b: f64) -> Result<Vec<Realization>> {
    if n > MAX_ENUMERATION_DEPTH {
        return Err(Error::ResourceGuard {
            what: "enumeration depth",
            value: n,
            limit: MAX_ENUMERATION_DEPTH,
        });
    }
    Ok(build(n, b)
        .into_iter()
        .map(|(probability, leaves)| Realization {
            probability,
            alive: leaves.into_iter().map(|x| x + 1).collect(),
        })
        .collect())
}

fn build(m: usize, b: f64) -> Vec<(f64, Vec<usize>)> {
    if m == 0 {
        return vec![(1.0, vec![0])];
    }
    let below = build(m - 1, b);
    let offset = 1usize << (m - 1);
    let mut out = vec![((b - 1.0) / b, Vec::new())];
    for (pl, left) in &below {
        for (pr, right) in &below {
            let mut leaves = left.clone();
            leaves.extend(right.iter().map(|x| x + offset));
            out.push((pl * pr / b, leaves));
        }
    }
    out
}

/// `E_n[Π_{i∈I} δ_i]` summed over all realizations.
pub fn enumerated_product_expectation(n: usize, b: f64, index: &[usize]) -> Result<f64> {
    Ok(realizations(n, b)?
        .iter()
        .filter(|r| index.iter().all(|i| r.alive.binary_search(i).is_ok()))
        .map(|r| r.probability)
        .sum())
}
