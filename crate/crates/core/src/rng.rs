//! Deterministic pseudo-random numbers for noise synthesis and tests.
//!
//! Reproducibility across runs and platforms matters more here than
//! statistical sophistication, so the generator is pinned to a fixed,
//! fully documented algorithm instead of an external crate whose stream
//! may change between versions.
//!
//! `SplitMix64` is the counter-based 64-bit generator of Steele, Lea and
//! Flood: the state advances by the constant `0x9E3779B97F4A7C15` and the
//! output is a bijective bit mix of the counter. Gaussian variates come
//! from the Marsaglia polar transform, which uses only `sqrt` (exactly
//! rounded under IEEE 754) and a single `ln` per accepted pair.

/// SplitMix64 counter-based generator.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform double in `[0, 1)` built from the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform double in `[lo, hi)`.
    pub fn next_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}

/// Standard-normal sampler over a [`SplitMix64`] stream.
///
/// Marsaglia polar method: draw `u, v` uniform in `(-1, 1)` until
/// `s = u² + v²` lands in `(0, 1)`, then return `u·sqrt(-2 ln s / s)`
/// and cache the `v` twin for the next call.
#[derive(Debug, Clone)]
pub struct GaussianSampler {
    rng: SplitMix64,
    spare: Option<f64>,
}

impl GaussianSampler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: SplitMix64::new(seed),
            spare: None,
        }
    }

    pub fn next(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        loop {
            let u = 2.0 * self.rng.next_f64() - 1.0;
            let v = 2.0 * self.rng.next_f64() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let factor = (-2.0 * s.ln() / s).sqrt();
                self.spare = Some(v * factor);
                return u * factor;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splitmix_reference_stream() {
        // First outputs for seed 1234567, from the published reference
        // implementation (Vigna's splitmix64.c).
        let mut rng = SplitMix64::new(1234567);
        assert_eq!(rng.next_u64(), 6457827717110365317);
        assert_eq!(rng.next_u64(), 3203168211198807973);
    }

    #[test]
    fn uniform_range() {
        let mut rng = SplitMix64::new(9);
        for _ in 0..1000 {
            let x = rng.next_f64();
            assert!((0.0..1.0).contains(&x));
        }
    }

    #[test]
    fn gaussian_moments() {
        let mut g = GaussianSampler::new(7);
        let n = 200_000;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..n {
            let z = g.next();
            sum += z;
            sum_sq += z * z;
        }
        let mean = sum / n as f64;
        let var = sum_sq / n as f64 - mean * mean;
        assert!(mean.abs() < 0.01, "mean {mean}");
        assert!((var - 1.0).abs() < 0.02, "var {var}");
    }

    #[test]
    fn gaussian_stream_deterministic() {
        let a: Vec<f64> = {
            let mut g = GaussianSampler::new(42);
            (0..64).map(|_| g.next()).collect()
        };
        let b: Vec<f64> = {
            let mut g = GaussianSampler::new(42);
            (0..64).map(|_| g.next()).collect()
        };
        assert_eq!(a, b);
    }
}
