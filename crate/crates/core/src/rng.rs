//! Counter-based deterministic randomness.
//!
//! A [`SeededRng`] is a `(seed, stream)` pair naming one ChaCha keystream.
//! Child streams are derived from a parent and a task index, so every unit of
//! work owns its own generator and results do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeededRng {
    pub seed: u64,
    pub stream: u64,
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

// SplitMix64 finalizer; a bijection on u64.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        SeededRng { seed, stream: 0 }
    }

    /// Child stream for `task_index`. Injective in `task_index` for a fixed parent.
    pub fn derive(&self, task_index: u64) -> SeededRng {
        SeededRng {
            seed: self.seed,
            stream: mix(self.stream.rotate_left(17) ^ mix(task_index.wrapping_add(GOLDEN))),
        }
    }

    /// A fresh generator positioned at the first draw of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// Free-function form of [`SeededRng::derive`].
pub fn derive_stream(rng: &SeededRng, task_index: u64) -> SeededRng {
    rng.derive(task_index)
}

/// Named sub-streams used by the pipeline stages.
pub mod streams {
    pub const DISCOVERY: u64 = 1;
    pub const AUGMENT: u64 = 2;
    pub const SPLIT: u64 = 3;
    pub const TRAIN: u64 = 4;
    pub const SYNTH: u64 = 5;
    pub const FOLDS: u64 = 6;
}
