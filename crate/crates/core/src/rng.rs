//! Seeded random streams.
//!
//! Every random draw in the crate goes through [`SeededStream`]: a ChaCha20
//! keystream (`rand_chacha::ChaCha20Rng::seed_from_u64`, stream 0, block
//! counter from 0) read as consecutive `u64` words. Uniforms on `[0, 1)` are
//! `(word >> 11) * 2^-53`. Standard normals use the Box–Muller transform on a
//! pair of uniforms `(u1, u2)` with `u1` mapped to `(0, 1]` as `1 - u`:
//!
//! ```text
//! r = sqrt(-2 ln u1),  z0 = r cos(2π u2),  z1 = r sin(2π u2)
//! ```
//!
//! `z0` is returned first and `z1` is cached for the next call. The recipe is
//! simple enough to reproduce bit-for-bit in any language with a ChaCha20
//! implementation.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// Mixes a base seed with a list of tags into an independent sub-seed.
///
/// Each tag is folded in with a SplitMix64 finalizer, so `(seed, [a, b])` and
/// `(seed, [b, a])` give unrelated streams.
pub fn derive_seed(base: u64, tags: &[u64]) -> u64 {
    let mut h = splitmix(base ^ 0x6a09_e667_f3bc_c908);
    for &t in tags {
        h = splitmix(h ^ splitmix(t.wrapping_add(0x9e37_79b9_7f4a_7c15)));
    }
    h
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Clone, Debug)]
pub struct SeededStream {
    rng: ChaCha20Rng,
    spare: Option<f64>,
}

impl SeededStream {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha20Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    /// Stream for `derive_seed(seed, tags)`.
    pub fn derived(seed: u64, tags: &[u64]) -> Self {
        Self::new(derive_seed(seed, tags))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 bits of precision.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }

    pub fn normal_vec(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.standard_normal()).collect()
    }

    /// Uniformly distributed point on the unit sphere `S^{n-1}`.
    pub fn unit_vector(&mut self, n: usize) -> Vec<f64> {
        loop {
            let mut v = self.normal_vec(n);
            let norm = crate::linalg::norm(&v);
            if norm > 1e-300 {
                v.iter_mut().for_each(|x| *x /= norm);
                return v;
            }
        }
    }

    /// Uniformly distributed point in the closed ball of the given radius.
    pub fn in_ball(&mut self, n: usize, radius: f64) -> Vec<f64> {
        let mut v = self.unit_vector(n);
        let r = radius * self.uniform().powf(1.0 / n as f64);
        v.iter_mut().for_each(|x| *x *= r);
        v
    }
}
