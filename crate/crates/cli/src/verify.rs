//! Invariant suites behind `phg verify`.

use serde::Serialize;

use phg_core::fields::{
    empirical_covariance, empirical_covariance_with, field_coefficients, pairing_error_variance, sample_field_white_noise,
    WhiteNoise,
};
use phg_core::gmc::{gmc_weights, hierarchical_convergence, mass_moment_report, HierarchyConfig, DEFAULT_BUDGET_BYTES};
use phg_core::kernels::{
    flat_tail_bound, kernel_cosine_coefficients, kernel_diag, kernel_profile, log_divergence_estimate, ui_bound_table,
    BoundKind,
};
use phg_core::spectrum::{ground_constant, lambda_cont, normalization_identity_residual};
use phg_core::transform::{synthesize, synthesize_direct};
use phg_core::{
    FieldKind, FreqVector, GammaThresholds, GmcKind, GmcSpec, KernelKind, NoiseKey, SpectralFunction,
    TorusSpec,
};

use crate::args::Suite;
use crate::error::CliResult;

pub const SCHEMA: &str = "phg-verify";
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub verdict: &'static str,
    #[serde(skip)]
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub schema: &'static str,
    pub version: u32,
    pub suite: &'static str,
    pub pass: bool,
    pub checks: Vec<Check>,
}

#[derive(Default)]
struct Checks(Vec<Check>);

impl Checks {
    /// Records `value < tolerance`.
    fn below(&mut self, name: impl Into<String>, value: f64, tolerance: f64) {
        let pass = value < tolerance;
        self.0.push(Check { name: name.into(), value, tolerance, verdict: if pass { "pass" } else { "fail" }, pass });
    }
}

fn spec(n: usize, l: usize) -> TorusSpec {
    TorusSpec::new(n, l).expect("valid suite spec")
}

fn fv(c: &[i64]) -> FreqVector {
    FreqVector::new(c.to_vec())
}

pub fn run_suite(suite: Suite) -> CliResult<VerifyReport> {
    let mut c = Checks::default();
    let name = match suite {
        Suite::Identities => "identities",
        Suite::Sampling => "sampling",
        Suite::Gmc => "gmc",
        Suite::All => "all",
    };
    if matches!(suite, Suite::Identities | Suite::All) {
        identities(&mut c)?;
    }
    if matches!(suite, Suite::Sampling | Suite::All) {
        sampling(&mut c)?;
    }
    if matches!(suite, Suite::Gmc | Suite::All) {
        gmc(&mut c)?;
    }
    let pass = c.0.iter().all(|k| k.pass);
    Ok(VerifyReport { schema: SCHEMA, version: SCHEMA_VERSION, suite: name, pass, checks: c.0 })
}

fn identities(c: &mut Checks) -> CliResult<()> {
    for n in 1..=3 {
        for l in [3, 5, 9] {
            c.below(format!("normalization_residual n={n} L={l}"), normalization_identity_residual(&spec(n, l)), 1e-10);
        }
    }

    let disc = kernel_profile(KernelKind::Disc, &spec(1, 3), 3)?;
    c.below("disc_profile n=1 L=3 at 0", (disc.at(0) - 1.209200).abs(), 1e-6);
    c.below("disc_profile n=1 L=3 at 1/3", (disc.at(1) + 0.604600).abs(), 1e-6);
    c.below("spectred_diag n=1 L=3", (kernel_diag(KernelKind::SpectRed, &spec(1, 3))? - 1.0).abs(), 1e-12);

    for (n, l) in [(1, 3), (1, 27), (2, 9), (3, 3)] {
        let s = spec(n, l);
        let get = |k| kernel_profile(k, &s, l);
        let d = get(KernelKind::Disc)?.profile;
        let r = get(KernelKind::Reduced)?.profile;
        let e = get(KernelKind::Enhanced)?.profile;
        let nat = get(KernelKind::Natural)?.profile;
        let sr = get(KernelKind::SpectRed)?.profile;
        let ct = kernel_profile(KernelKind::ContTrunc { cutoff: l }, &s, l)?.profile;
        c.below(format!("enhanced_equals_disc n={n} L={l}"), e.max_abs_diff(&d)?, 1e-10);
        c.below(format!("natural_equals_reduced n={n} L={l}"), nat.max_abs_diff(&r)?, 1e-10);
        c.below(format!("spectred_equals_cont_trunc n={n} L={l}"), sr.max_abs_diff(&ct)?, f64::MIN_POSITIVE);
        let worst_mean = [&d, &r, &e, &nat, &sr].iter().map(|p| p.mean().abs()).fold(0.0, f64::max);
        c.below(format!("profiles_grounded n={n} L={l}"), worst_mean, 1e-10);
        let shape = d.shape();
        let asym = (0..shape.len()).map(|i| (d.values()[i] - d.values()[shape.negate(i)]).abs()).fold(0.0, f64::max);
        c.below(format!("disc_even_symmetry n={n} L={l}"), asym, 1e-12);
    }

    for (n, l) in [(1, 27), (2, 9), (3, 9)] {
        let s = spec(n, l);
        let worst = (0..5u64)
            .map(|set| {
                let key = NoiseKey::new(set, 7);
                let f = SpectralFunction::from_pairs(
                    n,
                    phg_core::torus::frequency_set(&s).into_iter().map(|z| {
                        let a = key.normal(z.coords());
                        (z, a)
                    }),
                )?;
                let fast = synthesize(&f, &s)?;
                let direct = synthesize_direct(&f, &s)?;
                Ok(fast.max_abs_diff(&direct)? / direct.max_abs())
            })
            .collect::<phg_core::Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        c.below(format!("fft_vs_direct n={n} L={l}"), worst, 1e-9);
    }

    let phi1 = SpectralFunction::mode(fv(&[1]));
    let v3 = pairing_error_variance(&phi1, &spec(1, 3), 3)?.total;
    let v9 = pairing_error_variance(&phi1, &spec(1, 9), 3)?.total;
    c.below("error_variance n=1 L=3", (v3 - 4.964e-3).abs(), 1e-6);
    c.below("error_variance n=1 L=9", (v9 - 5.25e-5).abs(), 1e-6);
    let seq = [3, 9, 27, 81]
        .iter()
        .map(|&l| Ok(pairing_error_variance(&phi1, &spec(1, l), 3)?.total))
        .collect::<phg_core::Result<Vec<f64>>>()?;
    let worst_ratio = seq.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
    c.below("error_variance_decreasing n=1 L=3..81 (max ratio)", worst_ratio, 1.0);
    let out = pairing_error_variance(&SpectralFunction::mode(fv(&[3])), &spec(1, 3), 7)?.total;
    c.below("error_variance aliased mode 3 at L=3", (out - 1.0 / 6.0).abs(), 1e-12);

    let s = spec(2, 3);
    let coeffs = |k| kernel_cosine_coefficients(&KernelKind::Flat { cutoff: k }, &s);
    let change = coeffs(81)?.iter().zip(&coeffs(243)?).map(|((_, a), (_, b))| (a - b).abs()).fold(0.0, f64::max);
    c.below("flat_cutoff_change n=2 L=3 K=81->243", change, 1e-6);
    c.below("flat_tail_bound_covers_change", change - flat_tail_bound(2, 3, 81), 0.0 + f64::MIN_POSITIVE);

    let a = log_divergence_estimate(2, 33, 33, 0.05)?.sup_estimate;
    let b = log_divergence_estimate(2, 99, 99, 0.05)?.sup_estimate;
    c.below("log_divergence_stability n=2 K=33->99", (a - b).abs(), 0.1);

    let t = GammaThresholds::new(2);
    c.below("threshold gamma_lower n=2", (t.gamma_lower - 0.857763).abs(), 1e-6);
    c.below("threshold gamma_star n=2", (t.gamma_star - 2.0).abs(), 1e-15);
    Ok(())
}

fn sampling(c: &mut Checks) -> CliResult<()> {
    for (n, l, seeds) in [(1, 3, 4000), (2, 9, 1000)] {
        let est = empirical_covariance(&spec(n, l), FieldKind::Standard, seeds, 1)?;
        c.below(format!("covariance_zscore standard n={n} L={l} seeds={seeds}"), est.max_abs_z, 4.0);
    }
    let sp = spec(1, 3);
    let reference = kernel_profile(KernelKind::Disc, &sp, 3)?;
    let wn = empirical_covariance_with(&reference, 4000, 1, |seed| Ok(sample_field_white_noise(&sp, seed)?.grid))?;
    c.below("covariance_zscore white_noise n=1 L=3 seeds=4000", wn.max_abs_z, 4.0);

    let mut w = WhiteNoise::draw(&spec(2, 27), 3);
    w.ground();
    let sum: f64 = w.values.iter().sum();
    c.below("white_noise_grounded n=2 L=27", sum.abs(), 1e-9);

    let z = fv(&[1, 1]);
    let target =
        ground_constant(2).sqrt().recip() * lambda_cont(&z).powf(-0.5) * phg_core::noise::gaussian_coefficient(5, &z);
    let dev: Vec<f64> = [3, 9, 27, 81]
        .iter()
        .map(|&l| (field_coefficients(&spec(2, l), 5, FieldKind::Standard).get(&z) / target - 1.0).abs())
        .collect();
    let worst = dev.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
    c.below("common_noise_coefficient_convergence n=2 z=(1,1) (max ratio)", worst, 1.0);
    Ok(())
}

fn gmc(c: &mut Checks) -> CliResult<()> {
    let sp = spec(2, 9);
    for kind in GmcKind::ALL {
        let sample = phg_core::fields::sample_field(&sp, 2, kind.field_kind())?;
        let w = gmc_weights(&sample, &GmcSpec::new(0.0, kind).with_grid(27))?;
        c.below(format!("gamma_zero_total_mass {kind}"), (w.total_mass() - 1.0).abs(), 1e-15);
    }
    for (n, l, gamma, kind, m, seeds) in [
        (1, 3, 1.0, GmcKind::Discrete, None, 20_000),
        (1, 9, 0.5, GmcKind::ReducedDiscrete, None, 5000),
        (2, 9, 0.5, GmcKind::Semidiscrete, Some(27), 2000),
        (2, 3, 0.25, GmcKind::SpectrallyReducedSemidiscrete, Some(9), 5000),
    ] {
        let mut g = GmcSpec::new(gamma, kind);
        g.m = m;
        let r = mass_moment_report(&spec(n, l), &g, seeds, 0)?;
        let tag = format!("{kind} n={n} L={l} gamma={gamma}");
        c.below(format!("mass_mean_zscore {tag}"), r.mean_z.abs(), 4.0);
        c.below(format!("mass_second_moment_zscore {tag}"), r.second_z.abs(), 4.0);
    }
    let cfg = HierarchyConfig {
        n: 1,
        a: 3,
        l_max: 3,
        gmc: GmcSpec::new(0.4, GmcKind::SpectrallyReducedSemidiscrete),
        f: SpectralFunction::mode(fv(&[1])),
        k_ref: Some(27),
        num_seeds: 64,
        seed0: 0,
        budget_bytes: DEFAULT_BUDGET_BYTES,
    };
    let t = hierarchical_convergence(&cfg)?;
    c.below("hierarchy_top_level_identity spectrally-reduced-semidiscrete", t.rows[2].d, f64::MIN_POSITIVE);

    let table = ui_bound_table(2, 0.0, &[BoundKind::SemiDisc, BoundKind::Flat, BoundKind::Enhanced], &[3, 9])?;
    let worst = table.rows.iter().map(|r| (r.value_fine - 1.0).abs().max((r.value_coarse - 1.0).abs())).fold(0.0, f64::max);
    c.below("bound_table_gamma_zero", worst, f64::MIN_POSITIVE);
    let table = ui_bound_table(2, 0.5, &[BoundKind::SemiDisc], &[3, 9, 27])?;
    let col = table.column("semidisc");
    let (d1, d2) = ((col[1] - col[0]).abs(), (col[2] - col[1]).abs());
    c.below("bound_increments_shrink n=2 gamma=0.5 (ratio)", d2 / d1, 0.5);
    Ok(())
}
