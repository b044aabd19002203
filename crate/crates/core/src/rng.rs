//! Counter-addressed randomness.
//!
//! Every random quantity in the crate is a pure function of a seed and an
//! index, so results never depend on evaluation order, block size, or the
//! number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Stream of standard normal values addressed by `(seed, stream)`.
///
/// Each stream is an independent ChaCha8 keystream; the first `n` draws of
/// stream `i` form sensing row `i`.
pub(crate) fn normal_stream(seed: u64, stream: u64) -> impl Iterator<Item = f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    std::iter::repeat_with(move || rng.sample::<f64, _>(StandardNormal))
}

/// Fills `out` with the first `out.len()` values of stream `(seed, stream)`.
pub(crate) fn fill_normal(seed: u64, stream: u64, out: &mut [f64]) {
    for (slot, v) in out.iter_mut().zip(normal_stream(seed, stream)) {
        *slot = v;
    }
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// 64 well-mixed bits from a three-part counter.
#[inline]
pub(crate) fn hash3(seed: u64, a: u64, b: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ a) ^ b)
}

/// Uniform value in `[0, 1)` with 53 bits of resolution.
#[inline]
pub(crate) fn unit_f64(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Seeded generator for non-addressed draws (splits, test signals).
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
