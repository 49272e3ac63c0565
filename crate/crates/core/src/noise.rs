//! Keyed counter-based Gaussian stream.
//!
//! A draw is a pure function of `(seed, draw_index, z)`. The key is absorbed
//! one 64-bit word at a time through the SplitMix64 finalizer, in the order
//!
//! ```text
//! seed, n, zigzag(z_1), ..., zigzag(z_n), draw_index
//! ```
//!
//! The top 53 bits of the final state give a uniform `u = (k + 1/2) 2^-53`,
//! which is mapped to a standard normal by Wichura's AS241 (PPND16)
//! rational approximation of the inverse normal CDF (relative accuracy about 1e-16).

use crate::torus::FreqVector;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
fn absorb(state: u64, word: u64) -> u64 {
    mix64(state.wrapping_add(GOLDEN) ^ word)
}

#[inline]
fn zigzag(c: i64) -> u64 {
    ((c << 1) ^ (c >> 63)) as u64
}

/// Seed plus the index of an independent draw family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NoiseKey {
    pub seed: u64,
    pub draw_index: u32,
}

impl NoiseKey {
    pub fn new(seed: u64, draw_index: u32) -> Self {
        Self { seed, draw_index }
    }

    /// Raw 64-bit output for the integer vector `z`.
    pub fn bits(&self, z: &[i64]) -> u64 {
        let mut h = mix64(self.seed ^ GOLDEN);
        h = absorb(h, z.len() as u64);
        for &c in z {
            h = absorb(h, zigzag(c));
        }
        absorb(h, self.draw_index as u64)
    }

    pub fn uniform(&self, z: &[i64]) -> f64 {
        ((self.bits(z) >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    pub fn normal(&self, z: &[i64]) -> f64 {
        inverse_normal_cdf(self.uniform(z))
    }
}

/// The standard normal `ξ_z` shared by every field built from `seed`.
pub fn gaussian_coefficient(seed: u64, z: &FreqVector) -> f64 {
    NoiseKey::new(seed, 0).normal(z.coords())
}

fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &k| acc * x + k)
}

/// Quantile function of the standard normal distribution, for `p ∈ (0, 1)`.
pub fn inverse_normal_cdf(p: f64) -> f64 {
    const A: [f64; 8] = [
        3.387_132_872_796_366_608,
        133.141_667_891_784_377_45,
        1_971.590_950_306_551_442_7,
        13_731.693_765_509_461_125,
        45_921.953_931_549_871_457,
        67_265.770_927_008_700_853,
        33_430.575_583_588_128_105,
        2_509.080_928_730_122_672_7,
    ];
    const B: [f64; 8] = [
        1.0,
        42.313_330_701_600_911_252,
        687.187_007_492_057_908_3,
        5_394.196_021_424_751_107_7,
        21_213.794_301_586_595_867,
        39_307.895_800_092_710_61,
        28_729.085_735_721_942_674,
        5_226.495_278_852_854_561,
    ];
    const C: [f64; 8] = [
        1.423_437_110_749_683_577_34,
        4.630_337_846_156_545_295_9,
        5.769_497_221_460_691_405_5,
        3.647_848_324_763_204_605_04,
        1.270_458_252_452_368_382_58,
        0.241_780_725_177_450_611_77,
        0.022_723_844_989_269_184_583_3,
        7.745_450_142_783_414_076_4e-4,
    ];
    const D: [f64; 8] = [
        1.0,
        2.053_191_626_637_758_821_87,
        1.676_384_830_183_803_849_4,
        0.689_767_334_985_100_004_55,
        0.148_103_976_427_480_074_59,
        0.015_198_666_563_616_457_196_6,
        5.475_938_084_995_344_946e-4,
        1.050_750_071_644_416_843_24e-9,
    ];
    const E: [f64; 8] = [
        6.657_904_643_501_103_777_2,
        5.463_784_911_164_114_369_9,
        1.784_826_539_917_291_335_8,
        0.296_560_571_828_504_891_23,
        0.026_532_189_526_576_123_093,
        0.001_242_660_947_388_078_438_6,
        2.711_555_568_743_487_578_15e-5,
        2.010_334_399_292_288_132_65e-7,
    ];
    const F: [f64; 8] = [
        1.0,
        0.599_832_206_555_887_937_69,
        0.136_929_880_922_735_805_31,
        0.014_875_361_290_850_614_852_5,
        7.868_691_311_456_132_591e-4,
        1.846_318_317_510_054_681_8e-5,
        1.421_511_758_316_445_888_7e-7,
        2.044_263_103_389_939_785_64e-15,
    ];
    assert!(p > 0.0 && p < 1.0, "quantile argument {p} outside (0, 1)");
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q * poly(&A, r) / poly(&B, r);
    }
    let r = if q < 0.0 { p } else { 1.0 - p };
    let r = (-r.ln()).sqrt();
    let x = if r <= 5.0 {
        let r = r - 1.6;
        poly(&C, r) / poly(&D, r)
    } else {
        let r = r - 5.0;
        poly(&E, r) / poly(&F, r)
    };
    if q < 0.0 {
        -x
    } else {
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles_match_reference() {
        // reference values from scipy.special.ndtri
        let cases = [
            (1e-300, -37.0470962993612),
            (1e-12, -7.034483825301131),
            (1e-10, -6.361340902404056),
            (2.866515718791939e-7, -5.0),
            (0.001, -3.090232306167813),
            (0.02, -2.053748910631823),
            (0.075, -1.4395314709384563),
            (0.3, -0.5244005127080409),
            (0.5, 0.0),
            (0.6, 0.2533471031357997),
            (0.925, 1.4395314709384563),
            (0.975, 1.959963984540054),
            (0.999, 3.090232306167813),
        ];
        for (p, want) in cases {
            let got = inverse_normal_cdf(p);
            assert!((got - want).abs() < 1e-12 * want.abs().max(1.0), "p={p}: {got} vs {want}");
        }
        assert!((inverse_normal_cdf(1.0 - 1e-12) - 7.0344869100478356).abs() < 1e-9);
    }

    #[test]
    fn deterministic_and_seed_dependent() {
        let z = FreqVector::new(vec![3, -1]);
        assert_eq!(gaussian_coefficient(7, &z), gaussian_coefficient(7, &z));
        let a: Vec<f64> = (0..100).map(|k| gaussian_coefficient(1, &FreqVector::new(vec![k]))).collect();
        let b: Vec<f64> = (0..100).map(|k| gaussian_coefficient(2, &FreqVector::new(vec![k]))).collect();
        assert_ne!(a, b);
        // dimension prefix separates z = (1) from z = (1, 0)
        assert_ne!(NoiseKey::new(0, 0).bits(&[1]), NoiseKey::new(0, 0).bits(&[1, 0]));
        assert_ne!(NoiseKey::new(0, 0).bits(&[1]), NoiseKey::new(0, 1).bits(&[1]));
    }

    #[test]
    fn moments_over_many_frequencies() {
        let count = 100_000;
        let xs: Vec<f64> = (0..count)
            .map(|k| gaussian_coefficient(42, &FreqVector::new(vec![k as i64 - 50_000, (k % 7) as i64])))
            .collect();
        let nf = count as f64;
        let mean = xs.iter().sum::<f64>() / nf;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0);
        assert!(mean.abs() < 4.0 / nf.sqrt(), "mean {mean}");
        // Var of the sample variance is 2/N for normals
        assert!((var - 1.0).abs() < 4.0 * (2.0 / nf).sqrt(), "var {var}");
        let kurt = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / nf;
        assert!((kurt - 3.0).abs() < 4.0 * (96.0 / nf).sqrt(), "fourth moment {kurt}");
    }

    #[test]
    fn neighbouring_frequencies_uncorrelated() {
        let pairs = 10_000;
        let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
        for k in 0..pairs {
            let x = gaussian_coefficient(5, &FreqVector::new(vec![k, 0]));
            let y = gaussian_coefficient(5, &FreqVector::new(vec![k + 1, 0]));
            sxy += x * y;
            sxx += x * x;
            syy += y * y;
        }
        let corr = sxy / (sxx * syy).sqrt();
        assert!(corr.abs() < 4.0 / (pairs as f64).sqrt(), "corr {corr}");
    }
}
