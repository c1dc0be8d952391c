//! SplitMix64 in counter form.
//!
//! Output `k` (0-based) for seed `s` is `mix64(s + (k + 1) * GAMMA)` with
//! wrapping arithmetic, i.e. the usual SplitMix64 sequence. Stream `i` of a
//! seed starts from `mix64(s ^ i)`.

/// Golden-ratio increment.
pub const GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// Reference outputs for seed 0.
pub const SEED0_REFERENCE: [u64; 4] = [
    0xe220_a839_7b1d_cdaf,
    0x6e78_9e6a_a1b9_65f4,
    0x06c4_5d18_8009_454f,
    0xf88b_b8a8_724c_81ec,
];

#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of the `index`-th independent stream derived from `seed`.
#[inline]
pub fn stream_seed(seed: u64, index: u64) -> u64 {
    mix64(seed ^ index)
}

#[derive(Clone, Debug)]
pub struct SplitMix64 {
    seed: u64,
    counter: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { seed, counter: 0 }
    }

    pub fn stream(seed: u64, index: u64) -> Self {
        SplitMix64::new(stream_seed(seed, index))
    }

    /// Output at absolute position `k`, independent of the current state.
    pub fn at(&self, k: u64) -> u64 {
        mix64(self.seed.wrapping_add(k.wrapping_add(1).wrapping_mul(GAMMA)))
    }

    pub fn next_u64(&mut self) -> u64 {
        let x = self.at(self.counter);
        self.counter += 1;
        x
    }

    /// Uniform on the open interval (0, 1): `((x >> 11) + 0.5) * 2^-53`.
    pub fn next_open01(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Plain stateful SplitMix64, written independently of the counter form.
    fn reference(seed: u64, n: usize) -> Vec<u64> {
        let mut state = seed;
        (0..n)
            .map(|_| {
                state = state.wrapping_add(0x9E3779B97F4A7C15);
                let mut z = state;
                z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
                z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
                z ^ (z >> 31)
            })
            .collect()
    }

    #[test]
    fn seed_zero_reference() {
        let mut r = SplitMix64::new(0);
        let got: Vec<u64> = (0..4).map(|_| r.next_u64()).collect();
        assert_eq!(got, SEED0_REFERENCE);
        assert_eq!(got, reference(0, 4));
    }

    #[test]
    fn matches_stateful_form() {
        for seed in [1u64, 7, u64::MAX, 0xdead_beef] {
            let mut r = SplitMix64::new(seed);
            let got: Vec<u64> = (0..100).map(|_| r.next_u64()).collect();
            assert_eq!(got, reference(seed, 100));
            assert_eq!(r.at(42), got[42]);
        }
    }

    #[test]
    fn open_unit_interval() {
        let mut r = SplitMix64::new(3);
        for _ in 0..10_000 {
            let u = r.next_open01();
            assert!(u > 0.0 && u < 1.0);
        }
        assert_ne!(SplitMix64::stream(5, 0).next_u64(), SplitMix64::stream(5, 1).next_u64());
    }
}
