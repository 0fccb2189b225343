//! Portable seeded randomness.
//!
//! All randomness in the crate comes from SplitMix64 (Steele, Lea, Flood
//! 2014), which is a counter-based generator: the `i`-th output depends only
//! on `seed + (i+1)·0x9E3779B97F4A7C15` passed through a fixed mixing
//! function. Draws are derived from 64-bit outputs as follows, so any
//! implementation that follows these rules replays identical instances:
//!
//! * `next_f64`: `(next_u64() >> 11) · 2⁻⁵³`, a uniform value in `[0, 1)`.
//! * `bernoulli(p)`: `next_f64() < p`. Exactly one output is consumed, even
//!   for `p = 0` or `p = 1`.
//! * `below(k)`: `next_u64() % k`.
//! * `bit()`: lowest bit of `next_u64()`.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    /// Independent stream for the `index`-th item derived from one seed:
    /// the generator seeded with the `index`-th output of `SplitMix64(seed)`.
    pub fn stream(seed: u64, index: u64) -> Self {
        let state = seed.wrapping_add(GOLDEN_GAMMA.wrapping_mul(index.wrapping_add(1)));
        Self::new(mix(state))
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix(self.state)
    }

    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    #[inline]
    pub fn below(&mut self, k: u64) -> u64 {
        assert!(k > 0);
        self.next_u64() % k
    }

    #[inline]
    pub fn bit(&mut self) -> bool {
        self.next_u64() & 1 == 1
    }
}

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
