//! Gaussian multiplicative chaos on the discrete torus and its semi-discrete
//! and reduced variants.

use crate::error::{Error, Result};
use crate::fields::{field_coefficients, sample_field, truncated_continuum_coefficients, FieldKind, FieldSample};
use crate::kernels::{kernel_diag, second_moment, GammaThresholds, KernelKind};
use crate::mc::seed_sum;
use crate::torus::{GridShape, TorusSpec};
use crate::transform::{alias_fold, synthesize, upsample_eval, GridFunction, SpectralFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GmcKind {
    Discrete,
    Semidiscrete,
    ReducedDiscrete,
    SpectrallyReducedSemidiscrete,
}

impl GmcKind {
    pub const ALL: [GmcKind; 4] =
        [GmcKind::Discrete, GmcKind::Semidiscrete, GmcKind::ReducedDiscrete, GmcKind::SpectrallyReducedSemidiscrete];

    pub fn tag(&self) -> &'static str {
        match self {
            GmcKind::Discrete => "discrete",
            GmcKind::Semidiscrete => "semidiscrete",
            GmcKind::ReducedDiscrete => "reduced-discrete",
            GmcKind::SpectrallyReducedSemidiscrete => "spectrally-reduced-semidiscrete",
        }
    }

    pub fn field_kind(&self) -> FieldKind {
        match self {
            GmcKind::Discrete | GmcKind::Semidiscrete => FieldKind::Standard,
            GmcKind::ReducedDiscrete => FieldKind::Reduced,
            GmcKind::SpectrallyReducedSemidiscrete => FieldKind::SpectrallyReduced,
        }
    }

    pub fn is_semidiscrete(&self) -> bool {
        matches!(self, GmcKind::Semidiscrete | GmcKind::SpectrallyReducedSemidiscrete)
    }

    /// Covariance kernel of the field the measure is built from, on its evaluation grid.
    pub fn kernel(&self, spec: &TorusSpec) -> KernelKind {
        match self {
            GmcKind::Discrete => KernelKind::Disc,
            GmcKind::Semidiscrete => KernelKind::SemiDisc,
            GmcKind::ReducedDiscrete => KernelKind::Reduced,
            GmcKind::SpectrallyReducedSemidiscrete => KernelKind::ContTrunc { cutoff: spec.side() },
        }
    }

    /// Upper end of the coupling range on which convergence of this kind is proved.
    pub fn proved_limit(&self, n: usize) -> f64 {
        let t = GammaThresholds::new(n);
        match self {
            GmcKind::Discrete | GmcKind::Semidiscrete => t.gamma_lower,
            GmcKind::ReducedDiscrete => t.gamma_reduced,
            GmcKind::SpectrallyReducedSemidiscrete => t.gamma_star,
        }
    }
}

impl std::fmt::Display for GmcKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

impl std::str::FromStr for GmcKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.replace('_', "-");
        GmcKind::ALL
            .into_iter()
            .find(|k| k.tag() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown measure kind {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GmcSpec {
    pub gamma: f64,
    pub kind: GmcKind,
    /// Evaluation grid side for the semi-discrete kinds (defaults to `L`).
    pub m: Option<usize>,
}

impl GmcSpec {
    pub fn new(gamma: f64, kind: GmcKind) -> Self {
        Self { gamma, kind, m: None }
    }

    pub fn with_grid(mut self, m: usize) -> Self {
        self.m = Some(m);
        self
    }

    pub fn check_gamma(&self, n: usize) -> Result<()> {
        let limit = GammaThresholds::new(n).gamma_star;
        if !self.gamma.is_finite() || self.gamma.abs() >= limit {
            return Err(Error::Supercritical { gamma: self.gamma, limit });
        }
        Ok(())
    }

    /// True when `|γ|` lies inside the regime where convergence of this kind is proved.
    pub fn within_proved_regime(&self, n: usize) -> bool {
        self.gamma.abs() < self.kind.proved_limit(n)
    }

    pub fn eval_side(&self, spec: &TorusSpec) -> Result<usize> {
        if !self.kind.is_semidiscrete() {
            return Ok(spec.side());
        }
        let m = self.m.unwrap_or(spec.side());
        if m % 2 == 0 || m < spec.side() {
            return Err(Error::InvalidGrid(format!("semidiscrete grid must be odd and >= L, got M = {m}")));
        }
        Ok(m)
    }
}

/// Atoms `exp(γ h(v) - γ²/2 · diag) · M^{-n}` of a GMC measure on an `M^n` lattice.
#[derive(Debug, Clone)]
pub struct MeasureWeights {
    pub shape: GridShape,
    /// `exp(γ h(v) - γ²/2 · diag)`; the atom is this times `weight`.
    pub density: Vec<f64>,
    pub weight: f64,
    pub gamma: f64,
    pub kind: GmcKind,
    pub diag_used: f64,
    pub seed: u64,
}

impl MeasureWeights {
    pub fn atoms(&self) -> Vec<f64> {
        self.density.iter().map(|d| d * self.weight).collect()
    }

    pub fn total_mass(&self) -> f64 {
        self.density.iter().sum::<f64>() / self.density.len() as f64
    }

    pub fn as_grid(&self) -> GridFunction {
        GridFunction::from_raw(self.shape, self.atoms())
    }
}

fn exp_density(h: &[f64], gamma: f64, diag: f64) -> Vec<f64> {
    let shift = 0.5 * gamma * gamma * diag;
    h.iter().map(|v| (gamma * v - shift).exp()).collect()
}

pub fn gmc_weights(sample: &FieldSample, g: &GmcSpec) -> Result<MeasureWeights> {
    let spec = &sample.spec;
    g.check_gamma(spec.dim())?;
    if sample.kind != g.kind.field_kind() {
        return Err(Error::KindMismatch { field: sample.kind.tag(), measure: g.kind.tag() });
    }
    let m = g.eval_side(spec)?;
    let diag = kernel_diag(g.kind.kernel(spec), spec)?;
    let field = if g.kind.is_semidiscrete() { upsample_eval(&sample.coeffs, spec.side(), m)? } else { sample.grid.clone() };
    let shape = field.shape();
    Ok(MeasureWeights {
        shape,
        density: exp_density(field.values(), g.gamma, diag),
        weight: 1.0 / shape.len() as f64,
        gamma: g.gamma,
        kind: g.kind,
        diag_used: diag,
        seed: sample.seed,
    })
}

/// `Σ_v f(v) μ({v})`.
pub fn integrate(m: &MeasureWeights, f: &GridFunction) -> Result<f64> {
    if f.shape() != m.shape {
        return Err(Error::InvalidGrid(format!(
            "integrand lives on a {}^{} grid, measure on {}^{}",
            f.side(),
            f.dim(),
            m.shape.m,
            m.shape.n
        )));
    }
    Ok(m.density.iter().zip(f.values()).map(|(d, v)| d * v).sum::<f64>() / m.density.len() as f64)
}

/// Monte Carlo moments of the total mass next to their exact values.
#[derive(Debug, Clone, serde::Serialize)]
pub struct MassMomentReport {
    pub n: usize,
    pub l: usize,
    pub m: usize,
    pub kind: GmcKind,
    pub gamma: f64,
    pub num_seeds: usize,
    pub seed0: u64,
    pub mean: f64,
    pub mean_std_error: f64,
    pub mean_z: f64,
    pub second_moment: f64,
    pub second_std_error: f64,
    pub exact_second_moment: f64,
    pub second_z: f64,
    pub within_proved_regime: bool,
    pub pass: bool,
}

fn zscore(est: f64, exact: f64, se: f64) -> f64 {
    let d = est - exact;
    if se > 0.0 {
        d / se
    } else if d.abs() <= 1e-12 * exact.abs().max(1.0) {
        0.0
    } else {
        f64::INFINITY.copysign(d)
    }
}

pub fn mass_moment_report(spec: &TorusSpec, g: &GmcSpec, num_seeds: usize, seed0: u64) -> Result<MassMomentReport> {
    if num_seeds < 1000 {
        return Err(Error::InvalidArgument(format!("need at least 1000 seeds, got {num_seeds}")));
    }
    g.check_gamma(spec.dim())?;
    let m = g.eval_side(spec)?;
    let exact = second_moment(g.kind.kernel(spec), spec, g.gamma, m)?;
    let sums = seed_sum(seed0, num_seeds, 3, |seed| {
        let sample = sample_field(spec, seed, g.kind.field_kind())?;
        let mass = gmc_weights(&sample, g)?.total_mass();
        let sq = mass * mass;
        Ok(vec![mass, sq, sq * sq])
    })?;
    let s = num_seeds as f64;
    let (m1, m2, m4) = (sums[0] / s, sums[1] / s, sums[2] / s);
    let mean_se = ((m2 - m1 * m1).max(0.0) / s).sqrt();
    let second_se = ((m4 - m2 * m2).max(0.0) / s).sqrt();
    let mean_z = zscore(m1, 1.0, mean_se);
    let second_z = zscore(m2, exact, second_se);
    Ok(MassMomentReport {
        n: spec.dim(),
        l: spec.side(),
        m,
        kind: g.kind,
        gamma: g.gamma,
        num_seeds,
        seed0,
        mean: m1,
        mean_std_error: mean_se,
        mean_z,
        second_moment: m2,
        second_std_error: second_se,
        exact_second_moment: exact,
        second_z,
        within_proved_regime: g.within_proved_regime(spec.dim()),
        pass: mean_z.abs() < 4.0 && second_z.abs() < 4.0,
    })
}

/// Default memory budget for the hierarchical experiment, in bytes.
pub const DEFAULT_BUDGET_BYTES: u64 = 1 << 31;

#[derive(Debug, Clone)]
pub struct HierarchyConfig {
    pub n: usize,
    pub a: usize,
    pub l_max: u32,
    pub gmc: GmcSpec,
    pub f: SpectralFunction,
    /// Truncation of the continuum reference field (defaults to `3 a^{l_max}`).
    pub k_ref: Option<usize>,
    pub num_seeds: usize,
    pub seed0: u64,
    pub budget_bytes: u64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct LevelRow {
    pub level: u32,
    pub side: usize,
    /// Mean over seeds of `|∫ f dμ_L - ∫ f dμ_ref|`.
    pub d: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ConvergenceTable {
    pub n: usize,
    pub a: usize,
    pub kind: GmcKind,
    pub gamma: f64,
    pub k_ref: usize,
    /// Side of the common grid carrying the reference (and the semi-discrete levels).
    pub fine_grid: usize,
    pub num_seeds: usize,
    pub seed0: u64,
    pub rows: Vec<LevelRow>,
    pub thresholds: GammaThresholds,
    pub within_proved_regime: bool,
    /// `D_{l_max} < D_1`.
    pub decreasing: bool,
    pub strictly_decreasing: bool,
}

fn checked_pow(base: usize, exp: u32) -> Result<usize> {
    base.checked_pow(exp).ok_or(Error::SizeOverflow { side: base, dim: exp as usize })
}

/// Common-noise comparison of level-`a^ℓ` measures against a Fourier-projected continuum reference.
pub fn hierarchical_convergence(cfg: &HierarchyConfig) -> Result<ConvergenceTable> {
    let n = cfg.n;
    let g = &cfg.gmc;
    if cfg.a < 3 || cfg.a % 2 == 0 {
        return Err(Error::InvalidArgument(format!("refinement factor must be odd and >= 3, got {}", cfg.a)));
    }
    if cfg.l_max == 0 {
        return Err(Error::InvalidArgument("need at least one level".into()));
    }
    if cfg.num_seeds == 0 {
        return Err(Error::InvalidArgument("need at least one seed".into()));
    }
    if cfg.f.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: cfg.f.dim() });
    }
    g.check_gamma(n)?;
    let top = checked_pow(cfg.a, cfg.l_max)?;
    let k_ref = match cfg.k_ref {
        Some(k) => k,
        None => top.checked_mul(3).ok_or(Error::SizeOverflow { side: top, dim: n })?,
    };
    if k_ref % 2 == 0 || k_ref < 3 {
        return Err(Error::InvalidArgument(format!("reference cutoff must be odd and >= 3, got {k_ref}")));
    }
    cfg.f.check_in_band(k_ref)?;
    let fine = g.m.unwrap_or(k_ref);
    if fine % 2 == 0 || fine < k_ref || fine < top {
        return Err(Error::InvalidGrid(format!("fine grid must be odd and >= max(K_ref, a^l_max), got {fine}")));
    }
    let n32 = n as u32;
    let needed = (checked_pow(top, n32)? as u64)
        .checked_mul(checked_pow(fine, n32)? as u64)
        .and_then(|v| v.checked_mul(8))
        .unwrap_or(u64::MAX);
    if needed > cfg.budget_bytes {
        return Err(Error::Budget { needed, budget: cfg.budget_bytes });
    }

    let fine_spec = TorusSpec::new(n, fine)?;
    let f_fine = synthesize(&cfg.f, &fine_spec)?;
    let ref_spec = TorusSpec::new(n, k_ref)?;
    let ref_diag = kernel_diag(KernelKind::ContTrunc { cutoff: k_ref }, &ref_spec)?;
    let levels: Vec<(TorusSpec, GridFunction, f64)> = (1..=cfg.l_max)
        .map(|lv| {
            let spec = TorusSpec::new(n, checked_pow(cfg.a, lv)?)?;
            let f_grid = if g.kind.is_semidiscrete() { f_fine.clone() } else { synthesize(&alias_fold(&cfg.f, spec.side()), &spec)? };
            let diag = kernel_diag(g.kind.kernel(&spec), &spec)?;
            Ok((spec, f_grid, diag))
        })
        .collect::<Result<_>>()?;

    let integral = |h: &GridFunction, f: &GridFunction, diag: f64| -> f64 {
        let d = exp_density(h.values(), g.gamma, diag);
        d.iter().zip(f.values()).map(|(d, v)| d * v).sum::<f64>() / d.len() as f64
    };

    let width = levels.len();
    let sums = seed_sum(cfg.seed0, cfg.num_seeds, 2 * width, |seed| {
        let h_ref = upsample_eval(&truncated_continuum_coefficients(n, k_ref, seed), k_ref, fine)?;
        let reference = integral(&h_ref, &f_fine, ref_diag);
        let mut out = vec![0.0; 2 * width];
        for (i, (spec, f_grid, diag)) in levels.iter().enumerate() {
            let coeffs = field_coefficients(spec, seed, g.kind.field_kind());
            let h = if g.kind.is_semidiscrete() { upsample_eval(&coeffs, spec.side(), fine)? } else { synthesize(&coeffs, spec)? };
            let d = (integral(&h, f_grid, *diag) - reference).abs();
            out[i] = d;
            out[width + i] = d * d;
        }
        Ok(out)
    })?;
    let s = cfg.num_seeds as f64;
    let rows: Vec<LevelRow> = levels
        .iter()
        .enumerate()
        .map(|(i, (spec, _, _))| {
            let d = sums[i] / s;
            let var = (sums[width + i] / s - d * d).max(0.0);
            LevelRow { level: i as u32 + 1, side: spec.side(), d, std_error: (var / s).sqrt() }
        })
        .collect();
    let decreasing = rows.last().map(|r| r.d).unwrap_or(0.0) < rows[0].d;
    let strictly_decreasing = rows.windows(2).all(|w| w[1].d < w[0].d);
    Ok(ConvergenceTable {
        n,
        a: cfg.a,
        kind: g.kind,
        gamma: g.gamma,
        k_ref,
        fine_grid: fine,
        num_seeds: cfg.num_seeds,
        seed0: cfg.seed0,
        rows,
        thresholds: GammaThresholds::new(n),
        within_proved_regime: g.within_proved_regime(n),
        decreasing,
        strictly_decreasing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::FreqVector;

    fn spec(n: usize, l: usize) -> TorusSpec {
        TorusSpec::new(n, l).unwrap()
    }

    fn phi1() -> SpectralFunction {
        SpectralFunction::mode(FreqVector::new(vec![1]))
    }

    #[test]
    fn gamma_zero_is_counting_measure() {
        let sp = spec(2, 9);
        for kind in GmcKind::ALL {
            let s = sample_field(&sp, 1, kind.field_kind()).unwrap();
            let w = gmc_weights(&s, &GmcSpec::new(0.0, kind).with_grid(27)).unwrap();
            let expect = 1.0 / w.shape.len() as f64;
            assert!(w.atoms().iter().all(|&a| a == expect));
            assert_eq!(w.total_mass(), 1.0);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let sp = spec(1, 3);
        let s = sample_field(&sp, 1, FieldKind::Standard).unwrap();
        assert!(matches!(gmc_weights(&s, &GmcSpec::new(2f64.sqrt(), GmcKind::Discrete)), Err(Error::Supercritical { .. })));
        assert!(matches!(gmc_weights(&s, &GmcSpec::new(0.5, GmcKind::ReducedDiscrete)), Err(Error::KindMismatch { .. })));
        assert!(gmc_weights(&s, &GmcSpec::new(0.5, GmcKind::Semidiscrete).with_grid(4)).is_err());
        assert!("spectrally_reduced_semidiscrete".parse::<GmcKind>().is_ok());
    }

    #[test]
    fn semidiscrete_diag_equals_discrete() {
        let sp = spec(2, 9);
        let a = kernel_diag(GmcKind::Semidiscrete.kernel(&sp), &sp).unwrap();
        let b = kernel_diag(GmcKind::Discrete.kernel(&sp), &sp).unwrap();
        assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn integrate_properties() {
        let sp = spec(1, 9);
        let s = sample_field(&sp, 5, FieldKind::Standard).unwrap();
        let w = gmc_weights(&s, &GmcSpec::new(0.7, GmcKind::Discrete)).unwrap();
        let one = GridFunction::constant(w.shape, 1.0);
        assert_eq!(integrate(&w, &one).unwrap(), w.total_mass());
        let f = synthesize(&phi1(), &sp).unwrap();
        let g = synthesize(&SpectralFunction::mode(FreqVector::new(vec![-2])), &sp).unwrap();
        let combo = GridFunction::new(w.shape, f.values().iter().zip(g.values()).map(|(a, b)| 2.0 * a - 3.0 * b).collect()).unwrap();
        let lhs = integrate(&w, &combo).unwrap();
        let rhs = 2.0 * integrate(&w, &f).unwrap() - 3.0 * integrate(&w, &g).unwrap();
        assert!((lhs - rhs).abs() < 1e-12);
        let flat = gmc_weights(&s, &GmcSpec::new(0.0, GmcKind::Discrete)).unwrap();
        assert!(integrate(&flat, &f).unwrap().abs() < 1e-12);
        assert!(integrate(&flat, &GridFunction::constant(GridShape::new(1, 3).unwrap(), 1.0)).is_err());
    }

    #[test]
    fn moment_report_gamma_zero() {
        let r = mass_moment_report(&spec(1, 3), &GmcSpec::new(0.0, GmcKind::Discrete), 1000, 0).unwrap();
        assert_eq!(r.mean, 1.0);
        assert_eq!(r.second_moment, 1.0);
        assert!(r.pass);
        assert!(mass_moment_report(&spec(1, 3), &GmcSpec::new(0.0, GmcKind::Discrete), 999, 0).is_err());
    }

    #[test]
    fn moment_report_moderate() {
        for (n, l, gamma, kind, m) in [
            (1, 3, 1.0, GmcKind::Discrete, None),
            (1, 9, 0.5, GmcKind::ReducedDiscrete, None),
            (2, 3, 0.25, GmcKind::SpectrallyReducedSemidiscrete, Some(9)),
            (2, 9, 0.5, GmcKind::Semidiscrete, Some(27)),
        ] {
            let mut g = GmcSpec::new(gamma, kind);
            g.m = m;
            let r = mass_moment_report(&spec(n, l), &g, 4000, 100).unwrap();
            assert!(r.pass, "{r:?}");
        }
    }

    fn hierarchy(kind: GmcKind, gamma: f64, k_ref: Option<usize>, seeds: usize) -> HierarchyConfig {
        HierarchyConfig {
            n: 1,
            a: 3,
            l_max: 3,
            gmc: GmcSpec::new(gamma, kind),
            f: phi1(),
            k_ref,
            num_seeds: seeds,
            seed0: 0,
            budget_bytes: DEFAULT_BUDGET_BYTES,
        }
    }

    #[test]
    fn hierarchy_gamma_zero() {
        for kind in GmcKind::ALL {
            let t = hierarchical_convergence(&hierarchy(kind, 0.0, Some(81), 4)).unwrap();
            assert!(t.rows.iter().all(|r| r.d < 1e-10), "{kind}: {:?}", t.rows);
        }
    }

    #[test]
    fn hierarchy_top_level_matches_reference() {
        let t = hierarchical_convergence(&hierarchy(GmcKind::SpectrallyReducedSemidiscrete, 0.4, Some(27), 16)).unwrap();
        assert_eq!(t.rows[2].d, 0.0);
        assert!(t.rows[0].d > 0.0);
    }

    #[test]
    fn hierarchy_guards() {
        let mut c = hierarchy(GmcKind::Discrete, 0.4, None, 4);
        c.budget_bytes = 1000;
        assert!(matches!(hierarchical_convergence(&c), Err(Error::Budget { .. })));
        let mut c = hierarchy(GmcKind::Discrete, 0.4, None, 4);
        c.a = 4;
        assert!(hierarchical_convergence(&c).is_err());
        let c = hierarchy(GmcKind::Discrete, 0.4, Some(9), 4);
        assert!(hierarchical_convergence(&c).is_err());
    }
}
