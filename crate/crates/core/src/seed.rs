//! Keyed, scheduling-independent RNG streams.
//!
//! Each random stream is identified by `(master seed, cell, trial, purpose)`
//! and seeded from those four words alone, so a trial draws the same
//! numbers no matter which worker runs it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a stream is used for; distinct purposes never share numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Purpose {
    Truth,
    Statistics,
    Other(u64),
}

impl Purpose {
    fn tag(self) -> u64 {
        match self {
            Purpose::Truth => 0x54_5255_5448,
            Purpose::Statistics => 0x53_5441_5453,
            Purpose::Other(x) => 0x4f_5448_4552 ^ x.rotate_left(17),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedKey {
    pub master: u64,
    pub cell: u64,
    pub trial: u64,
    pub purpose: Purpose,
}

impl SeedKey {
    pub fn new(master: u64, cell: u64, trial: u64, purpose: Purpose) -> Self {
        Self { master, cell, trial, purpose }
    }

    pub fn with_purpose(self, purpose: Purpose) -> Self {
        Self { purpose, ..self }
    }

    pub fn seed_bytes(&self) -> [u8; 32] {
        let mut state = splitmix64(self.master ^ 0x6a09_e667_f3bc_c908);
        for word in [self.cell, self.trial, self.purpose.tag()] {
            state = splitmix64(state ^ word);
        }
        let mut out = [0u8; 32];
        for chunk in out.chunks_exact_mut(8) {
            state = splitmix64(state);
            chunk.copy_from_slice(&state.to_le_bytes());
        }
        out
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::from_seed(self.seed_bytes())
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
