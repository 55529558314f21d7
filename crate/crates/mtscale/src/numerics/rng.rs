//! Seeded pseudo-random number generator.
//!
//! Every stochastic choice in the crate (weight init, dataset synthesis,
//! coordinate sampling in the gradient checker) flows through this one
//! generator so that a run is reproducible bit-for-bit from its seed on any
//! platform. The algorithm is xorshift64* (Marsaglia's 64-bit xorshift
//! shift-register generator followed by an odd-constant multiply):
//!
//! ```text
//! s ^= s >> 12;  s ^= s << 25;  s ^= s >> 27;
//! output = s.wrapping_mul(0x2545F4914F6CDD1D)
//! ```
//!
//! The state update is a linear feedback shift register over GF(2) with
//! period 2^64 - 1; the multiply scrambles the output so low bits are usable.
//! A zero seed (the one state the xorshift cycle cannot visit) is replaced by
//! a fixed odd constant. The recurrence is frozen: tests pin the first
//! outputs for known seeds, so any change to these constants is a breaking
//! change to stored-experiment reproducibility.

/// xorshift64* stream.
#[derive(Debug, Clone)]
pub struct Rng {
    state: u64,
}

/// Substitute state for seed 0 (2^64 / golden ratio, an arbitrary odd value).
const ZERO_SEED_SUBSTITUTE: u64 = 0x9E37_79B9_7F4A_7C15;

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng {
            state: if seed == 0 { ZERO_SEED_SUBSTITUTE } else { seed },
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut s = self.state;
        s ^= s >> 12;
        s ^= s << 25;
        s ^= s >> 27;
        self.state = s;
        s.wrapping_mul(0x2545_F491_4F6C_DD1D)
    }

    /// Uniform in `[0, 1)` with 53 bits of mantissa.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[-half_range, +half_range)`.
    pub fn uniform(&mut self, half_range: f64) -> f64 {
        (2.0 * self.next_f64() - 1.0) * half_range
    }

    /// Uniform integer in `[0, n)`. `n` must be nonzero.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "Rng::below needs n > 0");
        // Multiply-shift bounding; bias is < 2^-53 for the n used here.
        (self.next_f64() * n as f64) as usize % n
    }

    /// Standard normal via Box-Muller. Uses a `(0, 1]` uniform for the log.
    pub fn gauss(&mut self) -> f64 {
        let u1 = ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// First outputs of the documented recurrence, computed independently
    /// from the integer definition above. Frozen: these must never change.
    #[test]
    fn stream_is_frozen_for_known_seeds() {
        let mut r = Rng::new(42);
        assert_eq!(r.next_u64(), 0x56ce_4ab7_719b_a3a0);
        assert_eq!(r.next_u64(), 0xc841_eb53_ebbb_2dda);
        assert_eq!(r.next_u64(), 0xca46_6be0_c998_0276);
        assert_eq!(r.next_u64(), 0xf1ac_c733_4a7b_70df);

        let mut r = Rng::new(123456789);
        assert_eq!(r.next_u64(), 0xedc0_c35a_83f5_e3d7);
        assert_eq!(r.next_u64(), 0x7e92_f4fa_2d8d_1c4b);
    }

    #[test]
    fn zero_seed_uses_substitute_state() {
        let mut r = Rng::new(0);
        assert_eq!(r.next_u64(), 0x0d83_b3e2_9a21_487a);
    }

    #[test]
    fn f64_stream_matches_frozen_values() {
        let mut r = Rng::new(42);
        assert_eq!(r.next_f64(), 0.33908526400192196);
        assert_eq!(r.next_f64(), 0.7822558479199243);
        assert_eq!(r.next_f64(), 0.7901370452687786);
    }

    #[test]
    fn same_seed_same_stream_different_seed_different_stream() {
        let a: Vec<u64> = {
            let mut r = Rng::new(7);
            (0..100).map(|_| r.next_u64()).collect()
        };
        let b: Vec<u64> = {
            let mut r = Rng::new(7);
            (0..100).map(|_| r.next_u64()).collect()
        };
        let c: Vec<u64> = {
            let mut r = Rng::new(8);
            (0..100).map(|_| r.next_u64()).collect()
        };
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn uniform_stays_in_range_and_gauss_is_sane() {
        let mut r = Rng::new(3);
        for _ in 0..10_000 {
            let v = r.uniform(0.25);
            assert!((-0.25..0.25).contains(&v));
        }
        let mut r = Rng::new(4);
        let n = 50_000;
        let samples: Vec<f64> = (0..n).map(|_| r.gauss()).collect();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = samples.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.02, "gauss mean {mean}");
        assert!((var - 1.0).abs() < 0.05, "gauss variance {var}");
    }

    #[test]
    fn below_covers_range() {
        let mut r = Rng::new(11);
        let mut seen = [false; 7];
        for _ in 0..500 {
            seen[r.below(7)] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }
}
