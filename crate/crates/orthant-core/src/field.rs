//! Counter-based uniform random field over Z^2.
//!
//! Every site carries an i.i.d. standard uniform value that is a pure
//! function of `(seed, x, y)`. No sequential generation is involved, so any
//! window, band, or single site can be evaluated lazily and two consumers of
//! the same seed always see the same field. This is what makes the shared
//! coupling across occupation parameters exact: realizations at different
//! `p` compare the same `U` against different thresholds.

/// splitmix64 finalizer; a bijective 64-bit mix.
#[inline]
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive an independent stream seed from a base seed and a counter.
#[inline]
pub fn derive_seed(base: u64, counter: u64) -> u64 {
    splitmix64(splitmix64(base) ^ counter.wrapping_mul(0xC2B2_AE3D_27D4_EB4F))
}

/// A deterministic i.i.d. uniform field on Z^2, keyed by a 64-bit seed.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct UniformField {
    seed: u64,
}

impl UniformField {
    pub fn new(seed: u64) -> Self {
        UniformField { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Raw 64 mixed bits at a site.
    #[inline]
    pub fn bits_at(&self, x: i64, y: i64) -> u64 {
        let h = splitmix64(self.seed ^ splitmix64(x as u64));
        splitmix64(h ^ splitmix64((y as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)))
    }

    /// The uniform value `U_(x,y)` in `[0, 1)`.
    #[inline]
    pub fn value_at(&self, x: i64, y: i64) -> f64 {
        // 53 high bits -> exactly representable dyadic rational in [0,1).
        (self.bits_at(x, y) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Threshold test `U_(x,y) < p`, the elementary coupling step.
    #[inline]
    pub fn below(&self, x: i64, y: i64, p: f64) -> bool {
        self.value_at(x, y) < p
    }
}

/// A small sequential PRNG for test utilities and bootstrap resampling.
///
/// Simulation code proper never uses sequential state; it addresses the
/// counter-based field directly.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform index in `0..n`. `n` must be positive.
    #[inline]
    pub fn next_index(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}
