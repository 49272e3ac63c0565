//! Translation-invariant covariance profiles `κ(u) = k(x, x + u)` for the
//! discrete, semi-discrete, reduced and projected polyharmonic kernels.
//!
//! Every kernel is a cosine series `κ(u) = Σ_z c_z cos(2π z·u)` with
//! `c_z = c_{-z}` and `c_0 = 0`; the variants differ only in the coefficient
//! law and in the grid the series is evaluated on.

use std::f64::consts::{E, PI, SQRT_2};
use std::fmt;

use crate::error::{Error, Result};
use crate::spectrum::{ground_constant, lambda_cont, lambda_disc_unchecked, theta_extended};
use crate::torus::{box_frequencies, frequency_set, torus_distance, FreqVector, GridShape, TorusSpec};
use crate::transform::{pwc_extend, pwc_project, synthesize, upsample_eval, GridFunction, SpectralFunction};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum KernelKind {
    /// `k_L`: discrete eigenvalues on the lattice.
    Disc,
    /// `k_{L,♯}`: the discrete law evaluated on a finer grid.
    SemiDisc,
    /// `k_L^{-∘}`: continuum eigenvalues on the lattice band.
    SpectRed,
    /// `k_L^-`: continuum eigenvalues weighted by `ϑ²`.
    Reduced,
    /// `k_L^+`: discrete eigenvalues weighted by `ϑ^{-2}`.
    Plus,
    /// `k_{+,L}`: cube averages of `k_L^+` in both arguments.
    Enhanced,
    /// `k_{∘,L}`: cube averages of `k_L^{-∘}` in both arguments.
    Natural,
    /// `k_{♭,L}`: cube averages of the continuum kernel, truncated at `‖z‖_∞ < K/2`.
    Flat { cutoff: usize },
    /// Continuum kernel truncated to `Z^n_K`.
    ContTrunc { cutoff: usize },
    /// `λ_{L,z}^{-s}` without the `1/a_n` factor.
    GreenPower { exponent: f64 },
}

impl KernelKind {
    pub fn tag(&self) -> &'static str {
        match self {
            KernelKind::Disc => "disc",
            KernelKind::SemiDisc => "semidisc",
            KernelKind::SpectRed => "spectred",
            KernelKind::Reduced => "reduced",
            KernelKind::Plus => "plus",
            KernelKind::Enhanced => "enhanced",
            KernelKind::Natural => "natural",
            KernelKind::Flat { .. } => "flat",
            KernelKind::ContTrunc { .. } => "cont-trunc",
            KernelKind::GreenPower { .. } => "green-power",
        }
    }

    /// Human-readable coefficient law.
    pub fn law(&self) -> String {
        match self {
            KernelKind::Disc | KernelKind::SemiDisc => "c_z = lambda_{L,z}^{-n/2} / a_n, z in Z^n_L\\{0}".into(),
            KernelKind::SpectRed => "c_z = lambda_z^{-n/2} / a_n, z in Z^n_L\\{0}".into(),
            KernelKind::Reduced => "c_z = theta_{L,z}^2 lambda_z^{-n/2} / a_n, z in Z^n_L\\{0}".into(),
            KernelKind::Plus => "c_z = theta_{L,z}^{-2} lambda_{L,z}^{-n/2} / a_n, z in Z^n_L\\{0}".into(),
            KernelKind::Enhanced => "cube average (both arguments) of the plus kernel".into(),
            KernelKind::Natural => "cube average (both arguments) of the spectred kernel".into(),
            KernelKind::Flat { cutoff } => format!(
                "c_w = sum over z = w mod L, 0 < |z|_inf < {cutoff}/2 of theta_{{L,z}}^2 lambda_z^{{-n/2}} / a_n"
            ),
            KernelKind::ContTrunc { cutoff } => format!("c_z = lambda_z^{{-n/2}} / a_n, z in Z^n_{cutoff}\\{{0}}"),
            KernelKind::GreenPower { exponent } => format!("c_z = lambda_{{L,z}}^{{-{exponent}}}, z in Z^n_L\\{{0}}"),
        }
    }

    fn validate(&self, spec: &TorusSpec, m: usize) -> Result<()> {
        let l = spec.side();
        let bad = |msg: String| Err(Error::InvalidKernel(msg));
        if m % 2 == 0 {
            return bad(format!("evaluation grid must be odd, got M = {m}"));
        }
        match self {
            KernelKind::Disc | KernelKind::SpectRed | KernelKind::Reduced => {
                if m != l {
                    return bad(format!("{} requires M = L (got M = {m}, L = {l})", self.tag()));
                }
            }
            KernelKind::SemiDisc | KernelKind::Plus | KernelKind::GreenPower { .. } => {
                if m < l {
                    return bad(format!("{} requires M >= L (got M = {m}, L = {l})", self.tag()));
                }
                if let KernelKind::GreenPower { exponent } = self {
                    if !(*exponent > 0.0) {
                        return bad(format!("green-power exponent must be positive, got {exponent}"));
                    }
                }
            }
            KernelKind::ContTrunc { cutoff } => {
                if cutoff % 2 == 0 || *cutoff < 3 {
                    return bad(format!("cutoff K must be odd and >= 3, got {cutoff}"));
                }
                if m < *cutoff {
                    return bad(format!("cont-trunc requires M >= K (got M = {m}, K = {cutoff})"));
                }
            }
            KernelKind::Enhanced | KernelKind::Natural | KernelKind::Flat { .. } => {
                if m % l != 0 {
                    return bad(format!("{} requires L | M (got M = {m}, L = {l})", self.tag()));
                }
                if let KernelKind::Flat { cutoff } = self {
                    if cutoff % 2 == 0 || *cutoff < l {
                        return bad(format!("flat cutoff K must be odd and >= L, got {cutoff}"));
                    }
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelKind::Flat { cutoff } | KernelKind::ContTrunc { cutoff } => write!(f, "{}(K={cutoff})", self.tag()),
            KernelKind::GreenPower { exponent } => write!(f, "{}(s={exponent})", self.tag()),
            _ => f.write_str(self.tag()),
        }
    }
}

/// Cosine coefficients `c_z` of a kernel, keyed by frequency.
///
/// For the cube-averaged kinds this is the coefficient law of their restriction
/// to the lattice.
pub fn kernel_cosine_coefficients(kind: &KernelKind, spec: &TorusSpec) -> Result<Vec<(FreqVector, f64)>> {
    let n = spec.dim();
    let l = spec.side();
    let inv_a = 1.0 / ground_constant(n);
    let half_n = 0.5 * n as f64;
    let nonzero = |side: usize| -> Vec<FreqVector> {
        box_frequencies(n, (side as i64 - 1) / 2).into_iter().filter(|z| !z.is_zero()).collect()
    };
    let out = match kind {
        KernelKind::Disc | KernelKind::SemiDisc => nonzero(l)
            .into_iter()
            .map(|z| {
                let c = inv_a * lambda_disc_unchecked(l, &z).powf(-half_n);
                (z, c)
            })
            .collect(),
        KernelKind::SpectRed => nonzero(l).into_iter().map(|z| (z.clone(), inv_a * lambda_cont(&z).powf(-half_n))).collect(),
        KernelKind::ContTrunc { cutoff } => {
            nonzero(*cutoff).into_iter().map(|z| (z.clone(), inv_a * lambda_cont(&z).powf(-half_n))).collect()
        }
        KernelKind::Reduced => nonzero(l)
            .into_iter()
            .map(|z| {
                let t = theta_extended(l, &z);
                (z.clone(), inv_a * t * t * lambda_cont(&z).powf(-half_n))
            })
            .collect(),
        KernelKind::Plus => nonzero(l)
            .into_iter()
            .map(|z| {
                let t = theta_extended(l, &z);
                (z.clone(), inv_a * lambda_disc_unchecked(l, &z).powf(-half_n) / (t * t))
            })
            .collect(),
        KernelKind::Enhanced | KernelKind::Natural => {
            let base = if *kind == KernelKind::Enhanced { KernelKind::Plus } else { KernelKind::SpectRed };
            let inner = cosine_series(n, &kernel_cosine_coefficients(&base, spec)?);
            // q_L acts on each argument; on the lattice each action multiplies by ϑ_{L,z}
            let averaged = pwc_project(&pwc_project(&inner, l)?, l)?;
            series_to_cosine(&averaged)
        }
        KernelKind::Flat { cutoff } => {
            let mut acc = vec![0.0; spec.size()];
            let shape = GridShape::from(*spec);
            for z in nonzero(*cutoff) {
                let t = theta_extended(l, &z);
                if t == 0.0 {
                    continue;
                }
                acc[shape.freq_slot(&z.fold(l).0)] += inv_a * t * t * lambda_cont(&z).powf(-half_n);
            }
            frequency_set(spec)
                .into_iter()
                .filter(|w| !w.is_zero())
                .map(|w| {
                    let c = acc[shape.freq_slot(&w.0)];
                    (w, c)
                })
                .collect()
        }
        KernelKind::GreenPower { exponent } => nonzero(l)
            .into_iter()
            .map(|z| {
                let c = lambda_disc_unchecked(l, &z).powf(-exponent);
                (z, c)
            })
            .collect(),
    };
    Ok(out)
}

/// `Σ c_z cos(2π z·u)` as a real-basis spectral function.
fn cosine_series(n: usize, coeffs: &[(FreqVector, f64)]) -> SpectralFunction {
    let mut f = SpectralFunction::new(n);
    for (z, c) in coeffs {
        if crate::torus::canonical_sign(z) == crate::torus::Sign::Plus {
            // c_z cos + c_{-z} cos = √2 c_z φ_z
            f.add(z.clone(), SQRT_2 * c).expect("dimension checked");
        }
    }
    f
}

fn series_to_cosine(f: &SpectralFunction) -> Vec<(FreqVector, f64)> {
    let mut out = Vec::new();
    for (z, a) in f.iter() {
        if crate::torus::canonical_sign(z) == crate::torus::Sign::Plus {
            let c = a / SQRT_2;
            out.push((z.neg(), c));
            out.push((z.clone(), c));
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

/// A sampled covariance profile with its constant diagonal.
#[derive(Debug, Clone)]
pub struct KernelProfile {
    pub kind: KernelKind,
    pub spec: TorusSpec,
    pub eval_grid: usize,
    pub profile: GridFunction,
    pub diag: f64,
}

impl KernelProfile {
    /// `κ(u)` at the grid offset with linear index `idx`.
    pub fn at(&self, idx: usize) -> f64 {
        self.profile.values()[idx]
    }
}

pub fn kernel_profile(kind: KernelKind, spec: &TorusSpec, m: usize) -> Result<KernelProfile> {
    kind.validate(spec, m)?;
    let n = spec.dim();
    let l = spec.side();
    let coeffs = kernel_cosine_coefficients(&kind, spec)?;
    let diag = coeffs.iter().map(|(_, c)| c).sum::<f64>();
    let series = cosine_series(n, &coeffs);
    let profile = match kind {
        KernelKind::Disc | KernelKind::SpectRed | KernelKind::Reduced => synthesize(&series, spec)?,
        KernelKind::SemiDisc | KernelKind::Plus | KernelKind::GreenPower { .. } => upsample_eval(&series, l, m)?,
        KernelKind::ContTrunc { cutoff } => upsample_eval(&series, cutoff, m)?,
        KernelKind::Enhanced | KernelKind::Natural | KernelKind::Flat { .. } => {
            let lattice = synthesize(&series, spec)?;
            if m == l {
                lattice
            } else {
                pwc_extend(&lattice, m)?
            }
        }
    };
    Ok(KernelProfile { kind, spec: *spec, eval_grid: m, profile, diag })
}

/// The constant diagonal value `k(x, x)`.
pub fn kernel_diag(kind: KernelKind, spec: &TorusSpec) -> Result<f64> {
    let m = match kind {
        KernelKind::ContTrunc { cutoff } => cutoff,
        _ => spec.side(),
    };
    kind.validate(spec, m)?;
    Ok(kernel_cosine_coefficients(&kind, spec)?.iter().map(|(_, c)| c).sum())
}

/// Rigorous upper bound on the flat-kernel coefficient mass dropped by the cutoff,
/// `(1/a_n) Σ_{‖z‖_∞ ≥ K/2} ϑ²_{L,z} λ_z^{-n/2}`, via `ϑ² ≤ (L / (π ‖z‖_∞))²`.
pub fn flat_tail_bound(n: usize, l: usize, cutoff: usize) -> f64 {
    let r0 = (cutoff as u64 + 1) / 2;
    let r_max = 200 * r0;
    let nf = n as f64;
    let shell = |r: f64| (2.0 * r + 1.0).powf(nf) - (2.0 * r - 1.0).powf(nf);
    let mut sum: f64 = (r0..=r_max).map(|r| shell(r as f64) * (r as f64).powf(-nf - 2.0)).sum();
    // shell(r) r^{-n-2} <= 2n 3^{n-1} r^{-3}
    sum += nf * 3f64.powf(nf - 1.0) / (r_max as f64).powi(2);
    (1.0 / ground_constant(n)) * (2.0 * PI).powf(-nf) * (l as f64 / PI).powi(2) * sum
}

/// One radius bin of the log-divergence table.
#[derive(Debug, Clone, serde::Serialize)]
pub struct RadiusBin {
    pub r_lo: f64,
    pub r_hi: f64,
    pub count: usize,
    pub max_deviation: f64,
    pub mean_kernel: f64,
    pub mean_log: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct LogDivergence {
    pub n: usize,
    pub cutoff: usize,
    pub grid: usize,
    pub r_min: f64,
    /// Empirical estimate of `sup |k(0,u) - log(1/d(0,u))|` over `d >= r_min`.
    pub sup_estimate: f64,
    pub table: Vec<RadiusBin>,
}

pub fn log_divergence_estimate(n: usize, cutoff: usize, m: usize, r_min: f64) -> Result<LogDivergence> {
    if !(r_min > 0.0) {
        return Err(Error::InvalidArgument(format!("r_min must be positive, got {r_min}")));
    }
    if cutoff > m {
        return Err(Error::InvalidKernel(format!("cutoff K = {cutoff} exceeds grid M = {m}")));
    }
    let spec = TorusSpec::new(n, cutoff)?;
    let prof = kernel_profile(KernelKind::ContTrunc { cutoff }, &spec, m)?;
    let shape = prof.profile.shape();
    let origin = vec![0.0; n];
    let r_max = (n as f64).sqrt() / 2.0;
    let nbins = 10usize;
    let width = (r_max - r_min) / nbins as f64;
    let mut table: Vec<RadiusBin> = (0..nbins)
        .map(|b| RadiusBin {
            r_lo: r_min + b as f64 * width,
            r_hi: r_min + (b + 1) as f64 * width,
            count: 0,
            max_deviation: 0.0,
            mean_kernel: 0.0,
            mean_log: 0.0,
        })
        .collect();
    let mut sup: f64 = 0.0;
    for idx in 0..shape.len() {
        let d = torus_distance(&origin, &shape.point(idx));
        if d < r_min {
            continue;
        }
        let log_term = -d.ln();
        let dev = (prof.at(idx) - log_term).abs();
        sup = sup.max(dev);
        let b = (((d - r_min) / width) as usize).min(nbins - 1);
        let bin = &mut table[b];
        bin.count += 1;
        bin.max_deviation = bin.max_deviation.max(dev);
        bin.mean_kernel += prof.at(idx);
        bin.mean_log += log_term;
    }
    for bin in &mut table {
        if bin.count > 0 {
            bin.mean_kernel /= bin.count as f64;
            bin.mean_log /= bin.count as f64;
        }
    }
    Ok(LogDivergence { n, cutoff, grid: m, r_min, sup_estimate: sup, table })
}

/// `∬ exp(γ² k(x,y)) dx dy`, as the grid mean of `exp(γ² κ(u))`.
pub fn second_moment(kind: KernelKind, spec: &TorusSpec, gamma: f64, m: usize) -> Result<f64> {
    Ok(profile_exp_mean(&kernel_profile(kind, spec, m)?, gamma))
}

pub fn profile_exp_mean(profile: &KernelProfile, gamma: f64) -> f64 {
    let g2 = gamma * gamma;
    let v = profile.profile.values();
    v.iter().map(|k| (g2 * k).exp()).sum::<f64>() / v.len() as f64
}

/// The three coupling-constant thresholds of the theory for dimension `n`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct GammaThresholds {
    /// `γ_* = √(n/e)`
    pub gamma_lower: f64,
    /// `√n`
    pub gamma_reduced: f64,
    /// `γ* = √(2n)`
    pub gamma_star: f64,
}

impl GammaThresholds {
    pub fn new(n: usize) -> Self {
        let n = n as f64;
        Self { gamma_lower: (n / E).sqrt(), gamma_reduced: n.sqrt(), gamma_star: (2.0 * n).sqrt() }
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct BoundRow {
    pub kind: String,
    pub side: usize,
    pub grid_coarse: usize,
    pub value_coarse: f64,
    pub grid_fine: usize,
    pub value_fine: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct BoundTable {
    pub n: usize,
    pub gamma: f64,
    pub thresholds: GammaThresholds,
    /// `|γ| < √(n/e)`, where the integrals are expected to stay bounded in `L`.
    pub expected_bounded: bool,
    pub rows: Vec<BoundRow>,
}

impl BoundTable {
    /// Fine-refinement column for one kernel tag, in row order.
    pub fn column(&self, kind: &str) -> Vec<f64> {
        self.rows.iter().filter(|r| r.kind == kind).map(|r| r.value_fine).collect()
    }
}

/// Which kernel families the uniform-integrability table covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    SemiDisc,
    Flat,
    Enhanced,
}

impl BoundKind {
    fn kernel(&self, l: usize) -> KernelKind {
        match self {
            BoundKind::SemiDisc => KernelKind::SemiDisc,
            BoundKind::Flat => KernelKind::Flat { cutoff: 9 * l },
            BoundKind::Enhanced => KernelKind::Enhanced,
        }
    }
}

/// `∫ exp(γ² k(0,y)) dy` per kernel family and lattice side, at refinements `3L` and `9L`.
pub fn ui_bound_table(n: usize, gamma: f64, kinds: &[BoundKind], sides: &[usize]) -> Result<BoundTable> {
    let mut rows = Vec::new();
    for kind in kinds {
        for &l in sides {
            let spec = TorusSpec::new(n, l)?;
            let kernel = kind.kernel(l);
            let (mc, mf) = (3 * l, 9 * l);
            let coarse = kernel_profile(kernel, &spec, mc)?;
            let fine = kernel_profile(kernel, &spec, mf)?;
            rows.push(BoundRow {
                kind: kernel.tag().to_string(),
                side: l,
                grid_coarse: mc,
                value_coarse: profile_exp_mean(&coarse, gamma),
                grid_fine: mf,
                value_fine: profile_exp_mean(&fine, gamma),
            });
        }
    }
    let thresholds = GammaThresholds::new(n);
    Ok(BoundTable { n, gamma, thresholds, expected_bounded: gamma.abs() < thresholds.gamma_lower, rows })
}
