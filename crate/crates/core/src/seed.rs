//! Shared randomness.
//!
//! A [`MasterSeed`] keys ChaCha20; every consumer draws from its own stream
//! id, so both parties derive bit-identical hash functions from the seed
//! alone. Integers below a bound are drawn by rejection on 64-bit words,
//! which keeps the expansion independent of any RNG crate's range sampler.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// Stream ids, one per derived object.
pub mod stream {
    pub const AFFINE: u64 = 1;
    pub const LEVEL_H1: u64 = 2;
    pub const H2: u64 = 3;
    pub const SMALL_H1: u64 = 4;
    pub const ROUGH: u64 = 5;
    /// Standalone k-set sketches built outside an L1 sketch.
    pub const KSET_H1: u64 = 6;
    pub const REPETITION: u64 = 0x100;
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Default)]
pub struct MasterSeed(pub [u8; 32]);

impl MasterSeed {
    pub fn from_u64(v: u64) -> Self {
        let mut b = [0u8; 32];
        b[..8].copy_from_slice(&v.to_le_bytes());
        MasterSeed(b)
    }

    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }

    pub fn stream(&self, id: u64) -> SeedStream {
        let mut rng = ChaCha20Rng::from_seed(self.0);
        rng.set_stream(id);
        SeedStream { rng }
    }

    /// Seed for repetition `rep`, used for median amplification.
    pub fn repetition(&self, rep: u64) -> MasterSeed {
        let mut s = self.stream(stream::REPETITION + rep);
        let mut out = [0u8; 32];
        s.rng.fill_bytes(&mut out);
        MasterSeed(out)
    }
}

pub struct SeedStream {
    rng: ChaCha20Rng,
}

impl SeedStream {
    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform integer in `0..bound`.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0);
        let zone = u64::MAX - (u64::MAX - bound + 1) % bound;
        loop {
            let w = self.rng.next_u64();
            if w <= zone {
                return w % bound;
            }
        }
    }
}
