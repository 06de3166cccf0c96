//! Counter-based Gaussian noise.
//!
//! Every sample is a pure function of `(key, index)`, so a noise field can be
//! generated in any order or in parallel and still be bit-identical. Keys are
//! derived from `(seed, step, branch)`.

use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function.
#[inline]
pub fn mix64(mut x: u64) -> u64 {
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Derives an independent stream key from a parent seed and a path of
/// integers.
pub fn derive_key(seed: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(mix64(seed ^ GOLDEN), |k, &p| mix64(k.wrapping_add(GOLDEN) ^ mix64(p.wrapping_add(1))))
}

/// A SplitMix64 stream positioned by `(key, index)`; each sample of a
/// noise field draws from its own short stream.
struct CounterRng {
    state: u64,
}

impl CounterRng {
    #[inline]
    fn new(key: u64, index: u64) -> Self {
        Self {
            state: mix64(key ^ mix64(index.wrapping_add(GOLDEN))),
        }
    }
}

impl RngCore for CounterRng {
    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix64(self.state)
    }

    #[inline]
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        for chunk in dest.chunks_mut(8) {
            let bytes = self.next_u64().to_le_bytes();
            chunk.copy_from_slice(&bytes[..chunk.len()]);
        }
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.fill_bytes(dest);
        Ok(())
    }
}

/// Standard normal sample `index` of stream `key`.
#[inline]
pub fn gaussian(key: u64, index: u64) -> f64 {
    StandardNormal.sample(&mut CounterRng::new(key, index))
}

/// Stream branches used by the sampler.
pub mod branch {
    pub const INIT: u64 = 0;
    pub const REVERSE: u64 = 1;
    pub const CLAMP: u64 = 2;
}

/// Key of the noise stream for a sampler step and branch.
pub fn step_key(seed: u64, step: usize, branch: u64) -> u64 {
    derive_key(seed, &[step as u64, branch])
}
