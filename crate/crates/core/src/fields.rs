//! Sampling of discrete polyharmonic Gaussian fields and exact convergence
//! error variances.
//!
//! All fields built from one seed share the standard normals `ξ_z`, so the
//! coefficient at a fixed `z` is coupled across lattice sizes and truncations.

use num_complex::Complex64;
use rustfft::FftDirection;

use crate::error::{Error, Result};
use crate::kernels::{kernel_profile, KernelKind, KernelProfile};
use crate::mc::seed_sum;
use crate::noise::{gaussian_coefficient, NoiseKey};
use crate::spectrum::{ground_constant, lambda_cont, lambda_disc_unchecked, theta_extended};
use crate::torus::{box_frequencies, frequency_set, GridShape, TorusSpec};
use crate::transform::{
    alias_fold, analyze_on, fft_nd, pwc_extend, synthesize, upsample_eval, GridFunction, SpectralFunction,
};


#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldKind {
    /// Weights `λ_{L,z}^{-n/4}`.
    Standard,
    /// Weights `ϑ_{L,z} λ_z^{-n/4}`.
    Reduced,
    /// Weights `λ_z^{-n/4}`.
    SpectrallyReduced,
}

impl FieldKind {
    pub fn tag(&self) -> &'static str {
        match self {
            FieldKind::Standard => "standard",
            FieldKind::Reduced => "reduced",
            FieldKind::SpectrallyReduced => "spectrally-reduced",
        }
    }

    /// Kernel whose lattice profile is the covariance of this field.
    pub fn kernel(&self) -> KernelKind {
        match self {
            FieldKind::Standard => KernelKind::Disc,
            FieldKind::Reduced => KernelKind::Reduced,
            FieldKind::SpectrallyReduced => KernelKind::SpectRed,
        }
    }
}

impl std::str::FromStr for FieldKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(FieldKind::Standard),
            "reduced" => Ok(FieldKind::Reduced),
            "spectrally-reduced" | "spectrally_reduced" => Ok(FieldKind::SpectrallyReduced),
            other => Err(Error::InvalidArgument(format!("unknown field kind {other:?}"))),
        }
    }
}

/// Coefficients `a_n^{-1/2} λ_z^{-n/4} ξ_z` of the Fourier projection `h_{♯,K}`
/// of the continuum field, over `Z^n_K \ {0}`.
pub fn truncated_continuum_coefficients(n: usize, cutoff: usize, seed: u64) -> SpectralFunction {
    let scale = ground_constant(n).sqrt().recip();
    let quarter = 0.25 * n as f64;
    let pairs = box_frequencies(n, (cutoff as i64 - 1) / 2).into_iter().filter(|z| !z.is_zero()).map(|z| {
        let c = scale * lambda_cont(&z).powf(-quarter) * gaussian_coefficient(seed, &z);
        (z, c)
    });
    SpectralFunction::from_pairs(n, pairs).expect("dimensions agree")
}

/// Spectral coefficients of a field of the given kind on `T^n_L`.
pub fn field_coefficients(spec: &TorusSpec, seed: u64, kind: FieldKind) -> SpectralFunction {
    let n = spec.dim();
    let l = spec.side();
    match kind {
        FieldKind::SpectrallyReduced => truncated_continuum_coefficients(n, l, seed),
        FieldKind::Reduced => truncated_continuum_coefficients(n, l, seed).map_coeffs(|z, c| theta_extended(l, z) * c),
        FieldKind::Standard => {
            let scale = ground_constant(n).sqrt().recip();
            let quarter = 0.25 * n as f64;
            let pairs = frequency_set(spec).into_iter().filter(|z| !z.is_zero()).map(|z| {
                let c = scale * lambda_disc_unchecked(l, &z).powf(-quarter) * gaussian_coefficient(seed, &z);
                (z, c)
            });
            SpectralFunction::from_pairs(n, pairs).expect("dimensions agree")
        }
    }
}

/// One realization of a discrete field together with its coefficients.
#[derive(Debug, Clone)]
pub struct FieldSample {
    pub spec: TorusSpec,
    pub coeffs: SpectralFunction,
    pub grid: GridFunction,
    pub kind: FieldKind,
    pub seed: u64,
}

pub fn sample_field(spec: &TorusSpec, seed: u64, kind: FieldKind) -> Result<FieldSample> {
    let coeffs = field_coefficients(spec, seed, kind);
    let grid = synthesize(&coeffs, spec)?;
    Ok(FieldSample { spec: *spec, coeffs, grid, kind, seed })
}

/// White noise on `(T^n_L, m_L)`: iid centered normals of variance `L^n`.
#[derive(Debug, Clone)]
pub struct WhiteNoise {
    pub spec: TorusSpec,
    pub values: Vec<f64>,
    pub grounded: bool,
}

impl WhiteNoise {
    /// Draw family 1 of `seed`, keyed by the lattice numerators of each site.
    pub fn draw(spec: &TorusSpec, seed: u64) -> Self {
        let key = NoiseKey::new(seed, 1);
        let shape = GridShape::from(*spec);
        let sd = (spec.size() as f64).sqrt();
        let values = (0..shape.len())
            .map(|idx| {
                let site: Vec<i64> = shape.multi_index(idx).into_iter().map(|k| k as i64).collect();
                sd * key.normal(&site)
            })
            .collect();
        Self { spec: *spec, values, grounded: false }
    }

    /// `∫ Ξ dm_L = L^{-n} Σ_v Ξ_v`, standard normal before grounding.
    pub fn mean_functional(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Projects onto the hyperplane `Σ_v Ξ_v = 0` (up to rounding).
    pub fn ground(&mut self) {
        let mean = self.mean_functional();
        self.values.iter_mut().for_each(|v| *v -= mean);
        self.grounded = true;
    }
}

/// `h_L = a_n^{-1/2} G̊_L^{n/4} Ξ̊`, with the Green power applied spectrally.
pub fn sample_field_white_noise(spec: &TorusSpec, seed: u64) -> Result<FieldSample> {
    let mut xi = WhiteNoise::draw(spec, seed);
    xi.ground();
    let grid = GridFunction::new(GridShape::from(*spec), xi.values)?;
    let beta = analyze_on(&grid, spec)?;
    let l = spec.side();
    let scale = ground_constant(spec.dim()).sqrt().recip();
    let quarter = 0.25 * spec.dim() as f64;
    let pairs = beta
        .iter()
        .filter(|(z, _)| !z.is_zero())
        .map(|(z, b)| (z.clone(), scale * lambda_disc_unchecked(l, z).powf(-quarter) * b))
        .collect::<Vec<_>>();
    let coeffs = SpectralFunction::from_pairs(spec.dim(), pairs)?;
    let grid = synthesize(&coeffs, spec)?;
    Ok(FieldSample { spec: *spec, coeffs, grid, kind: FieldKind::Standard, seed })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extension {
    /// Trigonometric interpolation `h_{L,♯}` on an `M^n` grid, `M >= L`.
    Fourier(usize),
    /// Piecewise-constant extension `h_{L,♭}` on an `M^n` grid, `L | M`.
    Pwc(usize),
}

pub fn extend_field(sample: &FieldSample, mode: Extension) -> Result<GridFunction> {
    match mode {
        Extension::Fourier(m) => upsample_eval(&sample.coeffs, sample.spec.side(), m),
        Extension::Pwc(m) => pwc_extend(&sample.grid, m),
    }
}

/// Exact `E|⟨h, f⟩_{T^n} - ⟨h_L, f⟩_{T^n_L}|²` under the common-noise coupling.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ErrorVariance {
    /// `inband + tail`.
    pub total: f64,
    /// `(1/a_n) Σ_{z ∈ Z^n_L \ 0} (λ_z^{-n/4} α_z - λ_{L,z}^{-n/4} α̃_z)²` with `α̃` the lattice-folded coefficients.
    pub inband: f64,
    /// `(1/a_n) Σ_{z ∈ Z^n_L \ 0} λ_{L,z}^{-n/2} (α̃_z - α_z)²`, the variance carried by the alias image alone.
    pub alias: f64,
    /// `(1/a_n) Σ_{‖z‖_∞ >= L/2} λ_z^{-n/2} α_z²`.
    pub tail: f64,
}

pub fn pairing_error_variance(f: &SpectralFunction, spec: &TorusSpec, k_tail: usize) -> Result<ErrorVariance> {
    if f.dim() != spec.dim() {
        return Err(Error::DimensionMismatch { expected: spec.dim(), got: f.dim() });
    }
    if k_tail % 2 == 0 {
        return Err(Error::InvalidArgument(format!("tail cutoff must be odd, got {k_tail}")));
    }
    f.check_in_band(k_tail)?;
    if !f.is_grounded() {
        return Err(Error::InvalidArgument("test function must be grounded (no z = 0 coefficient)".into()));
    }
    let n = spec.dim();
    let l = spec.side();
    let inv_a = 1.0 / ground_constant(n);
    let quarter = 0.25 * n as f64;
    let folded = alias_fold(f, l);
    let (mut inband, mut alias) = (0.0, 0.0);
    for z in frequency_set(spec).into_iter().filter(|z| !z.is_zero()) {
        let a = f.get(&z);
        let fa = folded.get(&z);
        let ld = lambda_disc_unchecked(l, &z).powf(-quarter);
        let d = lambda_cont(&z).powf(-quarter) * a - ld * fa;
        inband += d * d;
        alias += ld * ld * (fa - a) * (fa - a);
    }
    let half = spec.half() as i64;
    let tail: f64 = f
        .iter()
        .filter(|(z, _)| z.sup_norm() > half)
        .map(|(z, a)| lambda_cont(z).powf(-2.0 * quarter) * a * a)
        .fold(0.0, |acc, v| acc + v);
    let (inband, alias, tail) = (inv_a * inband, inv_a * alias, inv_a * tail);
    Ok(ErrorVariance { total: inband + tail, inband, alias, tail })
}

/// Truncated `H^{-s}` distance `Σ_{0 < ‖z‖_∞ < K/2} λ_z^{-s} (α_z - β_z)²` between two spectral functions.
pub fn negative_sobolev_distance_sq(a: &SpectralFunction, b: &SpectralFunction, s: f64, cutoff: usize) -> f64 {
    box_frequencies(a.dim(), (cutoff as i64 - 1) / 2)
        .into_iter()
        .filter(|z| !z.is_zero())
        .map(|z| {
            let d = a.get(&z) - b.get(&z);
            lambda_cont(&z).powf(-s) * d * d
        })
        .sum()
}

/// `(1/N) Σ_v g(v) g(v+u)` for every lattice offset `u`.
pub fn circular_autocorrelation(g: &GridFunction) -> GridFunction {
    let shape = g.shape();
    let nn = shape.len() as f64;
    let mut buf: Vec<Complex64> = g.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_nd(&mut buf, shape, FftDirection::Forward);
    buf.iter_mut().for_each(|c| *c = Complex64::new(c.norm_sqr(), 0.0));
    fft_nd(&mut buf, shape, FftDirection::Inverse);
    GridFunction::from_raw(shape, buf.into_iter().map(|c| c.re / (nn * nn)).collect())
}

/// Translation-averaged covariance estimate with CLT z-scores against a closed-form profile.
#[derive(Debug, Clone)]
pub struct CovarianceEstimate {
    pub profile_estimate: GridFunction,
    pub zscores: GridFunction,
    /// Standard error of each entry, from the Gaussian fourth moments of the reference profile.
    pub std_errors: GridFunction,
    pub max_abs_z: f64,
    pub num_seeds: usize,
}

/// Empirical covariance of `sample_field(kind)` against its closed-form kernel.
pub fn empirical_covariance(spec: &TorusSpec, kind: FieldKind, num_seeds: usize, seed0: u64) -> Result<CovarianceEstimate> {
    let reference = kernel_profile(kind.kernel(), spec, spec.side())?;
    empirical_covariance_with(&reference, num_seeds, seed0, |seed| Ok(sample_field(spec, seed, kind)?.grid))
}

/// Same estimator for an arbitrary lattice sampler (e.g. the white-noise route).
pub fn empirical_covariance_with<F>(
    reference: &KernelProfile,
    num_seeds: usize,
    seed0: u64,
    sampler: F,
) -> Result<CovarianceEstimate>
where
    F: Fn(u64) -> Result<GridFunction> + Sync,
{
    if num_seeds < 100 {
        return Err(Error::InvalidArgument(format!("need at least 100 seeds, got {num_seeds}")));
    }
    let shape = reference.profile.shape();
    let width = shape.len();
    let sum = seed_sum(seed0, num_seeds, width, |seed| {
        let g = sampler(seed)?;
        if g.shape() != shape {
            return Err(Error::SizeMismatch { expected: width, got: g.values().len() });
        }
        Ok(circular_autocorrelation(&g).into_values())
    })?;
    let s = num_seeds as f64;
    let est: Vec<f64> = sum.iter().map(|v| v / s).collect();

    // Var[(1/N) Σ_v h(v) h(v+u)] = (1/N) Σ_d [κ(d)² + κ(d+u) κ(d-u)]
    let kappa = reference.profile.values();
    let auto = circular_autocorrelation(&reference.profile);
    let sq_mean = auto.values()[0];
    let mut se = Vec::with_capacity(width);
    let mut z = Vec::with_capacity(width);
    for idx in 0..width {
        let u = shape.multi_index(idx);
        let two_u = u.iter().fold(0, |acc, &k| acc * shape.m + (2 * k) % shape.m);
        let var = sq_mean + auto.values()[two_u];
        let sd = (var / s).sqrt();
        se.push(sd);
        z.push((est[idx] - kappa[idx]) / sd);
    }
    let max_abs_z = z.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(CovarianceEstimate {
        profile_estimate: GridFunction::from_raw(shape, est),
        zscores: GridFunction::from_raw(shape, z),
        std_errors: GridFunction::from_raw(shape, se),
        max_abs_z,
        num_seeds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::FreqVector;
    use std::f64::consts::PI;

    fn spec(n: usize, l: usize) -> TorusSpec {
        TorusSpec::new(n, l).unwrap()
    }

    fn fv(c: &[i64]) -> FreqVector {
        FreqVector::new(c.to_vec())
    }

    #[test]
    fn samples_are_grounded_and_consistent() {
        for kind in [FieldKind::Standard, FieldKind::Reduced, FieldKind::SpectrallyReduced] {
            let s = sample_field(&spec(2, 9), 11, kind).unwrap();
            assert!(s.grid.mean().abs() < 1e-12);
            assert!(s.coeffs.is_grounded());
            let direct = crate::transform::synthesize_direct(&s.coeffs, &s.spec).unwrap();
            assert!(s.grid.max_abs_diff(&direct).unwrap() < 1e-9 * direct.max_abs());
        }
    }

    #[test]
    fn weight_ratios_at_fixed_noise() {
        let sp = spec(2, 9);
        let st = sample_field(&sp, 3, FieldKind::Standard).unwrap();
        let sr = sample_field(&sp, 3, FieldKind::SpectrallyReduced).unwrap();
        let re = sample_field(&sp, 3, FieldKind::Reduced).unwrap();
        for z in frequency_set(&sp).into_iter().filter(|z| !z.is_zero()) {
            let ratio = st.coeffs.get(&z) / sr.coeffs.get(&z);
            let want = (lambda_cont(&z) / lambda_disc_unchecked(9, &z)).powf(0.5);
            assert!((ratio - want).abs() < 1e-12 * want);
            assert_eq!(re.coeffs.get(&z), theta_extended(9, &z) * sr.coeffs.get(&z));
        }
    }

    #[test]
    fn common_noise_coefficients_converge() {
        let z = fv(&[1, 1]);
        let target = ground_constant(2).sqrt().recip() * lambda_cont(&z).powf(-0.5) * gaussian_coefficient(17, &z);
        let ratios: Vec<f64> = [3, 9, 27, 81]
            .iter()
            .map(|&l| field_coefficients(&spec(2, l), 17, FieldKind::Standard).get(&z) / target)
            .collect();
        assert!(ratios.windows(2).all(|w| (w[1] - 1.0).abs() < (w[0] - 1.0).abs()), "{ratios:?}");
        assert!((ratios[3] - 1.0).abs() < 1e-3);
    }

    #[test]
    fn white_noise_grounding() {
        let mut w = WhiteNoise::draw(&spec(2, 9), 4);
        w.ground();
        assert!(w.values.iter().sum::<f64>().abs() < 1e-12 * 81.0);
        let s = sample_field_white_noise(&spec(2, 9), 4).unwrap();
        assert!(s.grid.mean().abs() < 1e-12);
    }

    #[test]
    fn white_noise_mean_functional_is_standard_normal() {
        let sp = spec(1, 9);
        let k = 10_000;
        let xs: Vec<f64> = (0..k).map(|s| WhiteNoise::draw(&sp, s).mean_functional()).collect();
        let var = xs.iter().map(|x| x * x).sum::<f64>() / k as f64;
        assert!((var - 1.0).abs() < 4.0 * (2.0 / k as f64).sqrt(), "var {var}");
    }

    #[test]
    fn extensions() {
        let sp = spec(1, 3);
        let s = sample_field(&sp, 2, FieldKind::Standard).unwrap();
        assert_eq!(extend_field(&s, Extension::Fourier(3)).unwrap(), s.grid);
        let f = extend_field(&s, Extension::Fourier(9)).unwrap();
        assert!(f.restrict(3).unwrap().max_abs_diff(&s.grid).unwrap() < 1e-12);
        let p = extend_field(&s, Extension::Pwc(9)).unwrap();
        let shape = p.shape();
        for idx in 0..shape.len() {
            let v = crate::torus::cube_index(&shape.point(idx), &sp);
            assert_eq!(p.values()[idx], s.grid.values()[v.linear_index()]);
        }
        assert!(extend_field(&s, Extension::Pwc(7)).is_err());
    }

    #[test]
    fn error_variance_examples() {
        let f = SpectralFunction::mode(fv(&[1]));
        let v3 = pairing_error_variance(&f, &spec(1, 3), 3).unwrap();
        let oracle = PI * ((4.0 * PI * PI).powf(-0.25) - 27f64.powf(-0.25)).powi(2);
        assert!((v3.total - oracle).abs() < 1e-15);
        assert!((v3.total - 4.964e-3).abs() < 1e-6);
        assert_eq!(v3.tail, 0.0);
        let v9 = pairing_error_variance(&f, &spec(1, 9), 3).unwrap();
        assert!((v9.total - 5.25e-5).abs() < 1e-6);
        let g = SpectralFunction::mode(fv(&[3]));
        let v = pairing_error_variance(&g, &spec(1, 3), 7).unwrap();
        assert!((v.total - 1.0 / 6.0).abs() < 1e-15);
        assert!(pairing_error_variance(&SpectralFunction::mode(fv(&[0])), &spec(1, 3), 3).is_err());
        assert!(pairing_error_variance(&g, &spec(1, 3), 5).is_err());
    }

    #[test]
    fn error_variance_decreases_in_l() {
        for n in 1..=3 {
            let f = SpectralFunction::mode(FreqVector::new(vec![1; n]));
            let vs: Vec<f64> = [3, 9, 27, 81]
                .iter()
                .map(|&l| pairing_error_variance(&f, &spec(n, l), 3).unwrap().total)
                .collect();
            assert!(vs.iter().all(|&v| v >= 0.0));
            assert!(vs.windows(2).all(|w| w[1] < w[0]), "n={n}: {vs:?}");
        }
    }

    #[test]
    fn error_variance_matches_common_noise_monte_carlo() {
        // an out-of-band test function exercises folding and the tail together
        let sp = spec(1, 3);
        let f = SpectralFunction::from_pairs(1, [(fv(&[1]), 1.0), (fv(&[-2]), 0.5), (fv(&[4]), -0.3)]).unwrap();
        let exact = pairing_error_variance(&f, &sp, 9).unwrap().total;
        let lattice_f = synthesize(&alias_fold(&f, 3), &sp).unwrap();
        let seeds = 40_000u64;
        let mut acc = 0.0;
        let mut acc2 = 0.0;
        for s in 0..seeds {
            let cont = truncated_continuum_coefficients(1, 9, s);
            let cont_pair: f64 = f.iter().map(|(z, a)| a * cont.get(z)).sum();
            let h = sample_field(&sp, s, FieldKind::Standard).unwrap();
            let disc_pair = crate::transform::pairing_discrete(&h.grid, &lattice_f).unwrap();
            let d2 = (cont_pair - disc_pair).powi(2);
            acc += d2;
            acc2 += d2 * d2;
        }
        let mean = acc / seeds as f64;
        let sd = ((acc2 / seeds as f64 - mean * mean) / seeds as f64).sqrt();
        assert!((mean - exact).abs() < 4.0 * sd, "{mean} vs {exact} (sd {sd})");
    }

    #[test]
    fn sobolev_distance_shrinks_with_l() {
        let k = 81;
        let cont = truncated_continuum_coefficients(2, k, 9);
        let d: Vec<f64> = [3, 9, 27]
            .iter()
            .map(|&l| negative_sobolev_distance_sq(&field_coefficients(&spec(2, l), 9, FieldKind::Standard), &cont, 1.5, k))
            .collect();
        assert!(d[0] > d[1] && d[1] > d[2], "{d:?}");
    }

    #[test]
    fn covariance_small_case_and_band_scaling() {
        let sp = spec(1, 3);
        let a = empirical_covariance(&sp, FieldKind::Standard, 4000, 0).unwrap();
        assert!(a.max_abs_z < 4.0, "{}", a.max_abs_z);
        let b = empirical_covariance(&sp, FieldKind::Standard, 8000, 0).unwrap();
        let ratio = a.std_errors.values()[0] / b.std_errors.values()[0];
        assert!((ratio - 2f64.sqrt()).abs() < 1e-12);
        assert!(empirical_covariance(&sp, FieldKind::Standard, 50, 0).is_err());
    }
}
