//! Counter-style random streams.
//!
//! Every Monte-Carlo iteration owns one [`RngHandle`]; everything random that
//! happens inside the iteration is drawn from sub-streams derived from it.
//! Because a handle is just two integers, iterations can run in any order or
//! on any thread and still reproduce the same samples.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Seed plus stream id. Equal handles always yield equal sequences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngHandle {
    pub seed: u64,
    pub stream: u64,
}

impl RngHandle {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    /// Handle for Monte-Carlo iteration `index` under a master seed.
    pub fn for_iteration(master_seed: u64, index: u64) -> Self {
        Self::new(master_seed, index)
    }

    /// Fresh generator positioned at the start of this handle's stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }

    /// Derive an independent child stream keyed by `tag`.
    pub fn substream(&self, tag: u64) -> Self {
        let mixed = splitmix64(self.stream ^ splitmix64(tag.wrapping_add(0x5851_f42d_4c95_7f2d)));
        Self::new(self.seed, mixed)
    }

    /// Shorthand for `substream(a).substream(b)`.
    pub fn substream2(&self, a: u64, b: u64) -> Self {
        self.substream(a).substream(b)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
