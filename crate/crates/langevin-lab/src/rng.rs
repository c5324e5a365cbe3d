//! Counter-based random number generation.
//!
//! Every random quantity in the crate is a pure function of
//! `(seed, domain tag, chain id, outer iteration, inner step, slot)`.
//! There is no mutable generator state, which makes chains embarrassingly
//! parallel and runs reproducible regardless of execution order or thread
//! count. Gaussian draws come from the Box–Muller transform applied to
//! 53-bit uniforms.

/// 2^64 / golden ratio, the usual Weyl increment.
const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
/// Offset separating the two Box–Muller uniforms derived from one key.
const LANE_SPLIT: u64 = 0x6A09_E667_F3BC_C909;
const PAIR_SALT: u64 = 0xD134_2543_DE82_EF95;

const TAG_NOISE: u64 = 1;
const TAG_SNAPSHOT: u64 = 2;
const TAG_REFERENCE: u64 = 3;
const TAG_DIRECTION: u64 = 4;
const TAG_GENERIC: u64 = 5;

/// SplitMix64 finalizer. Full avalanche on 64 bits.
#[inline(always)]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline(always)]
fn absorb(h: u64, w: u64) -> u64 {
    mix64(h ^ w.wrapping_mul(GOLDEN))
}

/// Maps 64 bits to a double in (0, 1]. Never returns 0, so it is safe
/// under a logarithm.
#[inline(always)]
fn u01(h: u64) -> f64 {
    (((h >> 11) + 1) as f64) * (1.0 / 9_007_199_254_740_992.0)
}

/// The root of all randomness for one experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CounterRng {
    seed: u64,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        CounterRng { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    #[inline]
    fn keyed(&self, tag: u64, a: u64, b: u64) -> u64 {
        absorb(absorb(absorb(self.seed, tag), a), b)
    }

    /// Noise lane for one `(chain, outer)` pair. The per-step keys are
    /// derived from the lane base, so the inner loop pays two to three
    /// mixing rounds per Gaussian pair.
    #[inline]
    pub fn noise_lane(&self, chain: u64, outer: u64) -> NoiseLane {
        NoiseLane {
            base: self.keyed(TAG_NOISE, chain, outer),
        }
    }

    /// Uniform snapshot index in `1..=n` for outer iteration `outer`.
    pub fn snapshot_index(&self, chain: u64, outer: u64, n: u64) -> u64 {
        debug_assert!(n >= 1);
        let h = self.keyed(TAG_SNAPSHOT, chain, outer);
        ((h as u128 * n as u128) >> 64) as u64 + 1
    }

    /// Lane for i.i.d. reference draws (exact samplers), one per stream.
    pub fn reference_lane(&self, stream: u64) -> NoiseLane {
        NoiseLane {
            base: absorb(self.seed, TAG_REFERENCE) ^ absorb(stream, TAG_REFERENCE),
        }
    }

    /// Lane for random projection directions (sliced distances).
    pub fn direction_lane(&self) -> NoiseLane {
        NoiseLane {
            base: self.keyed(TAG_DIRECTION, 0, 0),
        }
    }

    /// A generic keyed uniform in (0, 1].
    pub fn uniform(&self, a: u64, b: u64) -> f64 {
        u01(self.keyed(TAG_GENERIC, a, b))
    }
}

/// A stateless stream of Gaussian pairs and uniforms indexed by counters.
#[derive(Clone, Copy, Debug)]
pub struct NoiseLane {
    base: u64,
}

impl NoiseLane {
    /// Standard Gaussian pair for `(counter, pair)`.
    #[inline(always)]
    pub fn gaussian_pair(&self, counter: u64, pair: u64) -> (f64, f64) {
        let h = mix64(self.base ^ counter.wrapping_mul(GOLDEN) ^ pair.wrapping_mul(PAIR_SALT));
        let h2 = mix64(h ^ LANE_SPLIT);
        let radius = (-2.0 * u01(h).ln()).sqrt();
        let (sin, cos) = (std::f64::consts::TAU * u01(h2)).sin_cos();
        (radius * cos, radius * sin)
    }

    /// Fills `out` with standard Gaussians for step `counter`.
    #[inline(always)]
    pub fn fill_gaussians(&self, counter: u64, out: &mut [f64]) {
        let mut pair = 0u64;
        let mut chunks = out.chunks_exact_mut(2);
        for chunk in &mut chunks {
            let (g0, g1) = self.gaussian_pair(counter, pair);
            chunk[0] = g0;
            chunk[1] = g1;
            pair += 1;
        }
        if let [last] = chunks.into_remainder() {
            *last = self.gaussian_pair(counter, pair).0;
        }
    }

    /// Uniform in (0, 1] for `(counter, slot)`.
    #[inline(always)]
    pub fn uniform(&self, counter: u64, slot: u64) -> f64 {
        u01(mix64(
            self.base ^ counter.wrapping_mul(GOLDEN) ^ (slot | 1 << 63).wrapping_mul(PAIR_SALT),
        ))
    }
}
