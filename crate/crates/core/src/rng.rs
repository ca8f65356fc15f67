//! Seeded random streams.
//!
//! Every stream is a ChaCha8 generator keyed by `seed` (expanded through
//! `SeedableRng::seed_from_u64`) with its 64-bit ChaCha stream word set to
//! `stream_id`. ChaCha is counter-based and platform independent, so equal
//! `(seed, stream_id)` pairs produce equal sequences everywhere.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        RngStream { seed, stream_id }
    }

    /// Child stream for replication `index`: `stream_id + index`.
    pub fn child(&self, index: u64) -> Self {
        RngStream { seed: self.seed, stream_id: self.stream_id.wrapping_add(index) }
    }

    /// Stream for a named sub-task, far away from the replication children.
    pub fn fork(&self, tag: u64) -> Self {
        RngStream { seed: self.seed, stream_id: splitmix64(self.stream_id ^ splitmix64(tag)) }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn same_stream_same_sequence() {
        let a: Vec<u64> = (0..8).map({
            let mut r = RngStream::new(7, 3).rng();
            move |_| r.random()
        }).collect();
        let mut r = RngStream::new(7, 3).rng();
        let b: Vec<u64> = (0..8).map(|_| r.random()).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn streams_differ() {
        let x: u64 = RngStream::new(7, 3).rng().random();
        let y: u64 = RngStream::new(7, 4).rng().random();
        let z: u64 = RngStream::new(7, 3).fork(1).rng().random();
        assert_ne!(x, y);
        assert_ne!(x, z);
    }
}
