//! Seeded random-number streams.
//!
//! Every random decision in a run derives from one root seed through named
//! sub-streams, so stages (init, dropout, perturbation, walks, pair pools)
//! can consume randomness independently without perturbing each other.
//!
//! Determinism contract: `stream(seed, tag, index)` is a pure function of
//! its arguments; ChaCha8 guarantees the same byte sequence on every
//! platform and build.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Returns the RNG for sub-stream `tag` at `index` under `seed`.
pub fn stream(seed: u64, tag: &str, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ fnv1a(tag));
    rng.set_stream(index);
    rng
}

/// Derives a child seed, for stages that take a plain `u64` seed.
pub fn derive(seed: u64, tag: &str, index: u64) -> u64 {
    use rand::RngCore;
    stream(seed, tag, index).next_u64()
}

fn fnv1a(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Draws one index from an unnormalized non-negative weight vector by
/// cumulative scan in index order. Returns `None` when the total mass is
/// zero (or negative through rounding).
pub(crate) fn categorical<R: rand::Rng>(rng: &mut R, weights: &[f64]) -> Option<usize> {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return None;
    }
    let target = rng.gen::<f64>() * total;
    let mut cum = 0.0;
    let mut last_positive = None;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            cum += w;
            last_positive = Some(i);
            if target < cum {
                return Some(i);
            }
        }
    }
    // Rounding can leave target a hair past the final cumulative sum.
    last_positive
}
