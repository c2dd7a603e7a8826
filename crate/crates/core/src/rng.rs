//! Counter-based stream derivation. Every replication gets its own
//! generator seeded from `(master_seed, cell, rep)`, so results never
//! depend on how work is scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// splitmix64 finalizer.
pub fn mix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

pub fn stream_seed(master: u64, cell: u64, rep: u64) -> u64 {
    mix64(mix64(mix64(master) ^ cell) ^ rep)
}

pub fn stream(master: u64, cell: u64, rep: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(master, cell, rep))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_differ_by_every_coordinate() {
        let base = stream_seed(1, 2, 3);
        assert_ne!(base, stream_seed(2, 2, 3));
        assert_ne!(base, stream_seed(1, 3, 3));
        assert_ne!(base, stream_seed(1, 2, 4));
        assert_ne!(stream_seed(0, 1, 0), stream_seed(0, 0, 1));
        assert_eq!(base, stream_seed(1, 2, 3));
    }
}
