//! Deterministic random number generation.
//!
//! Every sampler in this crate is required to reproduce its output bit for
//! bit from a 64-bit seed, so the generator algorithm is part of the
//! contract rather than a platform default: the stream is xoshiro256**
//! (Blackman & Vigna), with the 256-bit state expanded from the seed by
//! splitmix64. Both algorithms are implemented here verbatim so the exact
//! bit stream is pinned by this crate alone.

use rand::rand_core::impls::fill_bytes_via_next;
use rand::rand_core::RngCore;

/// The simulation generator: xoshiro256** seeded via splitmix64.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimRng {
    s: [u64; 4],
}

impl SimRng {
    /// Expands `seed` into the 256-bit xoshiro state with four successive
    /// splitmix64 outputs.
    pub fn from_seed(seed: u64) -> Self {
        let mut x = seed;
        let mut s = [0u64; 4];
        for word in &mut s {
            *word = splitmix64(&mut x);
        }
        SimRng { s }
    }

    #[inline]
    fn next(&mut self) -> u64 {
        let result = self.s[1].wrapping_mul(5).rotate_left(7).wrapping_mul(9);
        let t = self.s[1] << 17;
        self.s[2] ^= self.s[0];
        self.s[3] ^= self.s[1];
        self.s[1] ^= self.s[2];
        self.s[0] ^= self.s[3];
        self.s[2] ^= t;
        self.s[3] = self.s[3].rotate_left(45);
        result
    }
}

impl RngCore for SimRng {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        (self.next() >> 32) as u32
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.next()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        fill_bytes_via_next(self, dest);
    }
}

/// splitmix64: advances `x` by the golden-ratio increment and returns the
/// finalized output word.
#[inline]
fn splitmix64(x: &mut u64) -> u64 {
    *x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a word through the splitmix64 finalizer (no stream increment).
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the seed of one run inside a campaign grid.
///
/// Pure function of `(base, cell, run)`: two finalizer rounds keyed with
/// distinct odd constants keep the per-cell and per-run streams
/// decorrelated. Recorded in run manifests so a run can be reproduced from
/// the campaign description alone.
pub fn derive_seed(base: u64, cell: u64, run: u64) -> u64 {
    let x = mix64(base ^ cell.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    mix64(x ^ run.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

/// A strictly positive unit-mean exponential variate by inversion.
///
/// Uses one uniform per draw (re-drawing on the measure-zero `u == 0`), so
/// the stream consumption per event is fixed and documented.
#[inline]
pub fn exp1<R: rand::Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return -u.ln();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let mut a = SimRng::from_seed(42);
        let mut b = SimRng::from_seed(42);
        for _ in 0..1000 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn different_seeds_diverge() {
        let mut a = SimRng::from_seed(1);
        let mut b = SimRng::from_seed(2);
        let same = (0..64).filter(|_| a.next_u64() == b.next_u64()).count();
        assert_eq!(same, 0);
    }

    #[test]
    fn splitmix64_reference_value() {
        // Canonical first output of splitmix64 for seed 0.
        let mut x = 0u64;
        assert_eq!(splitmix64(&mut x), 0xE220_A839_7B1D_CDAF);
    }

    #[test]
    fn xoshiro_reference_stream() {
        // First outputs for seed 0, frozen from an independent transcription
        // of the reference algorithm. Any change to the generator breaks the
        // reproducibility contract and must fail here.
        let mut rng = SimRng::from_seed(0);
        assert_eq!(
            rng.s,
            [
                0xE220_A839_7B1D_CDAF,
                0x6E78_9E6A_A1B9_65F4,
                0x06C4_5D18_8009_454F,
                0xF88B_B8A8_724C_81EC
            ]
        );
        let expected: [u64; 5] = [
            11091344671253066420,
            13793997310169335082,
            1900383378846508768,
            7684712102626143532,
            13521403990117723737,
        ];
        for e in expected {
            assert_eq!(rng.next_u64(), e);
        }
    }

    #[test]
    fn derive_seed_is_pure_and_spread() {
        assert_eq!(derive_seed(7, 3, 5), derive_seed(7, 3, 5));
        let mut seen = std::collections::HashSet::new();
        for cell in 0..16 {
            for run in 0..16 {
                seen.insert(derive_seed(99, cell, run));
            }
        }
        assert_eq!(seen.len(), 256);
    }

    #[test]
    fn exp1_is_positive_with_unit_mean() {
        let mut rng = SimRng::from_seed(7);
        let n = 200_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let x = exp1(&mut rng);
            assert!(x > 0.0);
            sum += x;
        }
        let mean = sum / n as f64;
        assert!((mean - 1.0).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn uniform_f64_in_unit_interval() {
        use rand::Rng;
        let mut rng = SimRng::from_seed(3);
        for _ in 0..10_000 {
            let u: f64 = rng.random();
            assert!((0.0..1.0).contains(&u));
        }
    }
}
