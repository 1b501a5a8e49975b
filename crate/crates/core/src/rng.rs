//! Deterministic random streams.
//!
//! A [`StreamSeed`] is a ChaCha key. Monte Carlo estimators never share a
//! generator between samples: sample `i` always reads stream `i` of the
//! key, so estimates do not depend on evaluation order or worker count.

use alloc::vec::Vec;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SampleRng = ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct StreamSeed {
    key: [u8; 32],
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl StreamSeed {
    pub fn new(master: u64) -> Self {
        let mut state = master;
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        StreamSeed { key }
    }

    /// Child key for an independent purpose (a grid point, an estimator).
    pub fn derive(&self, label: u64) -> Self {
        let mut state = label ^ 0xA076_1D64_78BD_642F;
        let mut key = self.key;
        for chunk in key.chunks_exact_mut(8) {
            let mut word = [0u8; 8];
            word.copy_from_slice(chunk);
            let mixed = u64::from_le_bytes(word) ^ splitmix64(&mut state);
            chunk.copy_from_slice(&mixed.to_le_bytes());
        }
        StreamSeed { key }
    }

    /// Generator for sample `index`.
    pub fn rng(&self, index: u64) -> SampleRng {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(index);
        rng
    }
}

/// Evaluates `f` once per sample on its own stream, in index order.
pub fn map_samples<T, F>(seed: &StreamSeed, count: usize, mut f: F) -> Vec<T>
where
    F: FnMut(&mut SampleRng) -> T,
{
    (0..count)
        .map(|i| {
            let mut rng = seed.rng(i as u64);
            f(&mut rng)
        })
        .collect()
}
