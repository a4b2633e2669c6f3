//! Seeded random number generation.
//!
//! The generator is splitmix64 (Steele, Lea & Flood; the same generator
//! behind Java's `SplittableRandom`): a 64-bit counter advanced by a fixed
//! odd increment, pushed through an avalanching finalizer. The state
//! transition is pure integer arithmetic, so streams are identical on every
//! platform. Independent streams are derived by hashing the current state
//! together with a caller-chosen tag; every subsystem that needs randomness
//! owns its own derived stream, which keeps training runs reproducible even
//! when unrelated components change how much randomness they consume.

use crate::error::{Error, Result};

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const TAG_SALT: u64 = 0xA076_1D64_78BD_642F;

/// splitmix64 finalizer; also used as the stream-derivation hash.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic splitmix64 stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rng {
    state: u64,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng { state: seed }
    }

    /// Next raw 64-bit output.
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GAMMA);
        mix64(self.state)
    }

    /// Seed for an independent child stream. The rule is
    /// `mix64(state + mix64(tag ^ SALT))`: distinct tags give unrelated
    /// streams, and the parent is not advanced.
    pub fn derive_seed(&self, tag: u64) -> u64 {
        mix64(self.state.wrapping_add(mix64(tag ^ TAG_SALT)))
    }

    /// Independent child stream for `tag`. Deriving the same tag twice from
    /// an unadvanced parent yields the same stream.
    pub fn derive(&self, tag: u64) -> Rng {
        Rng::new(self.derive_seed(tag))
    }

    /// Uniform integer in `[lo, hi]`, both bounds inclusive. Unbiased via
    /// rejection of the partial top interval.
    pub fn uniform_int(&mut self, lo: u64, hi: u64) -> Result<u64> {
        if lo > hi {
            return Err(Error::InvalidArg(format!(
                "uniform_int bounds inverted: lo={lo} > hi={hi}"
            )));
        }
        let span = (hi - lo) as u128 + 1;
        let accept_below = ((1u128 << 64) / span) * span;
        loop {
            let v = self.next_u64() as u128;
            if v < accept_below {
                return Ok(lo + (v % span) as u64);
            }
        }
    }

    /// Uniform index in `0..n`. Panics if `n == 0`.
    pub fn index(&mut self, n: usize) -> usize {
        assert!(n > 0, "index: empty range");
        self.uniform_int(0, (n - 1) as u64).expect("lo <= hi") as usize
    }

    /// Uniform float in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        let u = (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        lo + (hi - lo) * u
    }

    /// Standard normal via Box-Muller. Consumes two draws per call.
    pub fn gauss(&mut self) -> f64 {
        // u1 in (0, 1] so the log is finite.
        let u1 = ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
        let u2 = (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    /// In-place Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, xs: &mut [T]) {
        for i in (1..xs.len()).rev() {
            let j = self.index(i + 1);
            xs.swap(i, j);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let mut a = Rng::new(7);
        let mut b = Rng::new(7);
        for _ in 0..1000 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn degenerate_bounds() {
        let mut r = Rng::new(1);
        for _ in 0..10 {
            assert_eq!(r.uniform_int(5, 5).unwrap(), 5);
        }
        assert!(r.uniform_int(3, 2).is_err());
    }

    #[test]
    fn uniform_int_stays_in_bounds() {
        let mut r = Rng::new(99);
        for _ in 0..10_000 {
            let v = r.uniform_int(2, 11).unwrap();
            assert!((2..=11).contains(&v));
        }
    }

    #[test]
    fn derived_streams_differ_from_parent_and_each_other() {
        let parent = Rng::new(42);
        let mut a = parent.derive(1);
        let mut b = parent.derive(2);
        let mut c = parent.derive(1);
        let xs: Vec<u64> = (0..64).map(|_| a.next_u64()).collect();
        let ys: Vec<u64> = (0..64).map(|_| b.next_u64()).collect();
        let zs: Vec<u64> = (0..64).map(|_| c.next_u64()).collect();
        assert_ne!(xs, ys);
        assert_eq!(xs, zs);
    }

    #[test]
    fn gauss_moments_roughly_standard() {
        let mut r = Rng::new(3);
        let n = 20_000;
        let samples: Vec<f64> = (0..n).map(|_| r.gauss()).collect();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.05, "mean {mean}");
        assert!((var - 1.0).abs() < 0.05, "var {var}");
    }

    // Golden values freeze the stream; a change here is a breaking change
    // for every seeded experiment.
    #[test]
    fn golden_stream_seed_42() {
        let mut r = Rng::new(42);
        let draws: Vec<u64> = (0..3).map(|_| r.uniform_int(1, 6).unwrap()).collect();
        assert_eq!(draws, golden_uniform_int_1_6_seed_42());
    }

    fn golden_uniform_int_1_6_seed_42() -> Vec<u64> {
        // Recorded once from this implementation.
        vec![2, 2, 1]
    }
}
