//! Counter-style RNG streams.
//!
//! Every random quantity is drawn from its own ChaCha8 stream keyed by the
//! user seed, a domain tag and integer labels such as (object, variable,
//! replicate). Results therefore do not depend on thread count or
//! evaluation order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub type StreamRng = ChaCha8Rng;

/// Domain tags that keep unrelated streams apart.
pub mod domain {
    pub const MACRO: u64 = 1;
    pub const MICRO: u64 = 2;
    pub const NULL_SAMPLE: u64 = 3;
    pub const WEIGHT: u64 = 4;
}

/// Label used in place of a variable index when a stream is shared across
/// variables.
pub const SHARED: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RngSeed(pub u64);

impl RngSeed {
    pub fn new(seed: u64) -> Self {
        Self(seed)
    }

    pub fn stream(self, domain: u64, labels: &[u64]) -> StreamRng {
        let mut h = splitmix64(self.0 ^ splitmix64(domain));
        for &label in labels {
            h = splitmix64(h ^ splitmix64(label.wrapping_add(0x632b_e59b_d9b4_e019)));
        }
        ChaCha8Rng::seed_from_u64(h)
    }

    /// A new seed derived from this one, for handing to a sub-computation.
    pub fn derive(self, label: u64) -> RngSeed {
        RngSeed(splitmix64(self.0 ^ splitmix64(label ^ 0xa076_1d64_78bd_642f)))
    }
}

impl From<u64> for RngSeed {
    fn from(seed: u64) -> Self {
        Self(seed)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
