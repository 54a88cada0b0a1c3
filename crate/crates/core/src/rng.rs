//! Portable seeded pseudo-randomness.
//!
//! Every random draw in this crate comes from the generator below, so that a
//! (seed, config) pair produces bit-identical outputs on any platform and in
//! any implementation language. The exact algorithms, for re-implementers:
//!
//! - **State update** (SplitMix64): `state += 0x9E3779B97F4A7C15`, then
//!   `z = state; z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9;
//!   z = (z ^ (z >> 27)) * 0x94D049BB133111EB; output z ^ (z >> 31)`,
//!   all in wrapping 64-bit arithmetic.
//! - **Uniform `[0, 1)`**: `(next_u64() >> 11) * 2^-53`.
//! - **Standard normal**: Box-Muller, cosine branch only, one draw per call:
//!   `u1 = ((next_u64() >> 11) + 1) * 2^-53` (in `(0, 1]`),
//!   `u2 = (next_u64() >> 11) * 2^-53`, result
//!   `sqrt(-2 ln u1) * cos(2π u2)`.
//! - **Bounded integer** `below(n)`: `(next_u64() * n) >> 64` in 128-bit
//!   arithmetic (multiply-shift; negligible bias for the n used here).
//! - **Shuffle**: Fisher-Yates from the top: for `i = len-1 .. 1`, swap
//!   `i` with `below(i + 1)`.
//! - **Stream derivation**: `derive(seed, stream)` seeds a temporary
//!   generator with `seed ^ (stream * 0xA24BAED4963EE407)` (wrapping) and
//!   returns its first output.

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const STREAM_SALT: u64 = 0xA24B_AED4_963E_E407;

/// SplitMix64 generator. Small state, passes standard statistical batteries,
/// and trivially portable.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GAMMA);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    pub fn next_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Standard normal draw (Box-Muller, cosine branch).
    pub fn next_gaussian(&mut self) -> f64 {
        let u1 = ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
        let u2 = (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Uniform integer in `[0, n)`.
    pub fn next_below(&mut self, n: u64) -> u64 {
        ((u128::from(self.next_u64()) * u128::from(n)) >> 64) as u64
    }

    pub fn shuffle<T>(&mut self, xs: &mut [T]) {
        for i in (1..xs.len()).rev() {
            let j = self.next_below(i as u64 + 1) as usize;
            xs.swap(i, j);
        }
    }
}

/// Deterministic sub-stream seed for independent generators (one per data
/// channel, per retraining round, per parameter tensor, ...).
pub fn derive(seed: u64, stream: u64) -> u64 {
    SplitMix64::new(seed ^ stream.wrapping_mul(STREAM_SALT)).next_u64()
}
