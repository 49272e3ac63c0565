use std::path::Path;

use serde::Serialize;
use serde_json::json;

use phg_core::fields::{extend_field, pairing_error_variance, sample_field, sample_field_white_noise, Extension};
use phg_core::gmc::{gmc_weights, hierarchical_convergence, integrate, mass_moment_report, HierarchyConfig};
use phg_core::kernels::{kernel_profile, log_divergence_estimate, ui_bound_table, BoundKind, KernelKind};
use phg_core::{GmcSpec, GridFunction, TorusSpec};

use crate::args::*;
use crate::error::{CliError, CliResult};
use crate::gridfile::{write_grid, GridHeader};
use crate::output::{write_json, write_pgm, Sink};
use crate::testfn::parse_test_function;
use crate::verify;

pub const BUDGET_ENV: &str = "PHG_BUDGET_BYTES";

/// Memory budget in bytes, from `PHG_BUDGET_BYTES` or the library default.
pub fn budget_bytes() -> CliResult<u64> {
    match std::env::var(BUDGET_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| CliError::Usage(format!("{BUDGET_ENV} must be a byte count, got {v:?}"))),
        Err(_) => Ok(phg_core::gmc::DEFAULT_BUDGET_BYTES),
    }
}

/// Fails with a resource error before a `side^n` grid of `per_point` bytes is allocated.
fn guard(n: usize, side: usize, per_point: u64) -> CliResult<()> {
    let budget = budget_bytes()?;
    let needed = (side as u64)
        .checked_pow(n as u32)
        .and_then(|v| v.checked_mul(per_point))
        .unwrap_or(u64::MAX);
    if needed > budget {
        return Err(phg_core::Error::Budget { needed, budget }.into());
    }
    Ok(())
}

fn torus(n: usize, l: usize) -> CliResult<TorusSpec> {
    Ok(TorusSpec::new(n, l)?)
}

pub fn run(cmd: Command) -> CliResult<()> {
    match cmd {
        Command::Sample(a) => cmd_sample(a),
        Command::Kernel(a) => cmd_kernel(a),
        Command::Gmc(a) => cmd_gmc(a),
        Command::ConvergeField(a) => cmd_converge_field(a),
        Command::ConvergeMeasure(a) => cmd_converge_measure(a),
        Command::Bound(a) => cmd_bound(a),
        Command::LogDiv(a) => cmd_log_div(a),
        Command::Verify(a) => cmd_verify(a),
    }
}

fn parse_extension(s: &str) -> CliResult<Extension> {
    let (mode, m) = s.split_once(':').ok_or_else(|| CliError::Usage(format!("--extend expects fourier:M or pwc:M, got {s:?}")))?;
    let m: usize = m.parse().map_err(|_| CliError::Usage(format!("bad grid side in {s:?}")))?;
    match mode {
        "fourier" => Ok(Extension::Fourier(m)),
        "pwc" => Ok(Extension::Pwc(m)),
        _ => Err(CliError::Usage(format!("unknown extension {mode:?}"))),
    }
}

fn maybe_pgm(path: Option<&Path>, g: &GridFunction) -> CliResult<()> {
    match path {
        Some(p) => write_pgm(p, g.dim(), g.side(), g.values()),
        None => Ok(()),
    }
}

fn cmd_sample(a: SampleArgs) -> CliResult<()> {
    let spec = torus(a.n, a.l)?;
    let ext = a.extend.as_deref().map(parse_extension).transpose()?;
    let side = match ext {
        Some(Extension::Fourier(m) | Extension::Pwc(m)) => m.max(a.l),
        None => a.l,
    };
    guard(a.n, side, 32)?;
    let kind: phg_core::FieldKind = a.kind.into();
    let sample = match a.route {
        Route::Eigen => sample_field(&spec, a.seed, kind)?,
        Route::WhiteNoise => {
            if kind != phg_core::FieldKind::Standard {
                return Err(CliError::Usage("the white-noise route produces standard fields only".into()));
            }
            sample_field_white_noise(&spec, a.seed)?
        }
    };
    let residual = sample.grid.mean();
    let grid = match ext {
        Some(e) => extend_field(&sample, e)?,
        None => sample.grid.clone(),
    };
    let mut header = GridHeader::new(a.n, grid.side(), kind.tag());
    header.l = Some(a.l);
    header.seed = Some(a.seed);
    header.meta = json!({
        "route": match a.route { Route::Eigen => "eigen", Route::WhiteNoise => "white-noise" },
        "extension": a.extend,
        "lattice_mean": residual,
    });
    write_grid(&a.out, &header, grid.values())?;
    maybe_pgm(a.pgm.as_deref(), &grid)?;
    println!("seed={} lattice_mean_residual={:e}", a.seed, residual);
    Ok(())
}

fn kernel_kind(a: &KernelArgs, l: usize) -> CliResult<KernelKind> {
    let need_k = || a.k.ok_or_else(|| CliError::Usage("--K is required for this kernel".into()));
    Ok(match a.kind {
        KernelKindArg::Disc => KernelKind::Disc,
        KernelKindArg::Semidisc => KernelKind::SemiDisc,
        KernelKindArg::Spectred => KernelKind::SpectRed,
        KernelKindArg::Reduced => KernelKind::Reduced,
        KernelKindArg::Plus => KernelKind::Plus,
        KernelKindArg::Enhanced => KernelKind::Enhanced,
        KernelKindArg::Natural => KernelKind::Natural,
        KernelKindArg::Flat => KernelKind::Flat { cutoff: a.k.unwrap_or(9 * l) },
        KernelKindArg::ContTrunc => KernelKind::ContTrunc { cutoff: need_k()? },
        KernelKindArg::GreenPower => KernelKind::GreenPower {
            exponent: a.s.ok_or_else(|| CliError::Usage("--s is required for green-power".into()))?,
        },
    })
}

#[derive(Serialize)]
struct KernelSidecar {
    kind: String,
    law: String,
    n: usize,
    #[serde(rename = "L")]
    l: usize,
    #[serde(rename = "M")]
    m: usize,
    diag: f64,
}

fn cmd_kernel(a: KernelArgs) -> CliResult<()> {
    let l = match (a.l, a.kind) {
        (Some(l), _) => l,
        (None, KernelKindArg::ContTrunc) => a.k.ok_or_else(|| CliError::Usage("--K is required for cont-trunc".into()))?,
        (None, _) => return Err(CliError::Usage("--L is required for this kernel".into())),
    };
    let spec = torus(a.n, l)?;
    let kind = kernel_kind(&a, l)?;
    let m = a.m.unwrap_or(match kind {
        KernelKind::ContTrunc { cutoff } => cutoff,
        _ => l,
    });
    guard(a.n, m, 32)?;
    let prof = kernel_profile(kind, &spec, m)?;
    let mut header = GridHeader::new(a.n, m, kind.to_string());
    header.l = Some(l);
    header.meta = json!({ "diag": prof.diag, "law": kind.law() });
    write_grid(&a.out, &header, prof.profile.values())?;
    let mut sidecar = a.out.clone().into_os_string();
    sidecar.push(".json");
    write_json(
        Path::new(&sidecar),
        &KernelSidecar { kind: kind.to_string(), law: kind.law(), n: a.n, l, m, diag: prof.diag },
    )?;
    maybe_pgm(a.pgm.as_deref(), &prof.profile)
}

#[derive(Serialize)]
struct GmcRow {
    n: usize,
    #[serde(rename = "L")]
    l: usize,
    #[serde(rename = "M")]
    m: usize,
    kind: String,
    gamma: f64,
    seed: u64,
    diag_used: f64,
    total_mass: f64,
    integral: Option<f64>,
    within_proved_regime: bool,
}

fn cmd_gmc(a: GmcArgs) -> CliResult<()> {
    let spec = torus(a.n, a.l)?;
    let mut g = GmcSpec::new(a.gamma, a.kind.into());
    g.m = a.m;
    let m = g.eval_side(&spec)?;
    guard(a.n, m, 32)?;
    let f = a.f.as_deref().map(|s| parse_test_function(s, a.n)).transpose()?;
    let sample = sample_field(&spec, a.seed, g.kind.field_kind())?;
    let w = gmc_weights(&sample, &g)?;
    let integral = match &f {
        Some(f) => {
            let grid = if g.kind.is_semidiscrete() {
                phg_core::transform::upsample_eval(&phg_core::transform::alias_fold(f, m), m, m)?
            } else {
                phg_core::transform::synthesize(&phg_core::transform::alias_fold(f, a.l), &spec)?
            };
            Some(integrate(&w, &grid)?)
        }
        None => None,
    };
    let row = GmcRow {
        n: a.n,
        l: a.l,
        m,
        kind: g.kind.tag().into(),
        gamma: a.gamma,
        seed: a.seed,
        diag_used: w.diag_used,
        total_mass: w.total_mass(),
        integral,
        within_proved_regime: g.within_proved_regime(a.n),
    };
    if let Some(out) = &a.out {
        let mut header = GridHeader::new(a.n, m, g.kind.tag());
        header.l = Some(a.l);
        header.seed = Some(a.seed);
        header.meta = json!({ "gamma": a.gamma, "diag_used": w.diag_used, "total_mass": row.total_mass });
        write_grid(out, &header, &w.atoms())?;
    }
    let moments = a.seeds.map(|s| mass_moment_report(&spec, &g, s, a.seed0)).transpose()?;
    let report = json!({ "measure": &row, "moments": &moments });
    let sink = Sink { out_dir: a.output.out_dir };
    sink.emit("gmc", &[row], &report)?;
    if let Some(m) = moments {
        if let Some(dir) = &sink.out_dir {
            crate::output::write_csv(&dir.join("gmc_moments.csv"), &[&m])?;
        } else {
            println!("{}", serde_json::to_string(&m)?);
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct FieldRow {
    #[serde(rename = "L")]
    l: usize,
    total: f64,
    inband: f64,
    alias: f64,
    tail: f64,
}

fn cmd_converge_field(a: ConvergeFieldArgs) -> CliResult<()> {
    let f = parse_test_function(&a.f, a.n)?;
    let k = a.k.unwrap_or(2 * f.support_radius() as usize + 1);
    let mut rows = Vec::new();
    for &l in &a.ls {
        let spec = torus(a.n, l)?;
        guard(a.n, l, 16)?;
        let v = pairing_error_variance(&f, &spec, k)?;
        rows.push(FieldRow { l, total: v.total, inband: v.inband, alias: v.alias, tail: v.tail });
    }
    let strictly_decreasing = rows.windows(2).all(|w| w[1].total < w[0].total);
    let report = json!({ "n": a.n, "f": f, "K": k, "rows": &rows, "strictly_decreasing": strictly_decreasing });
    Sink { out_dir: a.output.out_dir }.emit("converge_field", &rows, &report)
}

fn cmd_converge_measure(a: ConvergeMeasureArgs) -> CliResult<()> {
    let f = parse_test_function(&a.f, a.n)?;
    let mut gmc = GmcSpec::new(a.gamma, a.kind.into());
    gmc.m = a.m;
    let cfg = HierarchyConfig {
        n: a.n,
        a: a.a,
        l_max: a.l_max,
        gmc,
        f,
        k_ref: a.k_ref,
        num_seeds: a.seeds,
        seed0: a.seed0,
        budget_bytes: budget_bytes()?,
    };
    let table = hierarchical_convergence(&cfg)?;
    Sink { out_dir: a.output.out_dir }.emit("converge_measure", &table.rows, &table)
}

fn cmd_bound(a: BoundArgs) -> CliResult<()> {
    for &l in &a.ls {
        guard(a.n, 9 * l, 32)?;
    }
    let kinds: Vec<BoundKind> = a
        .kinds
        .iter()
        .map(|k| match k {
            BoundKindArg::Semidisc => BoundKind::SemiDisc,
            BoundKindArg::Flat => BoundKind::Flat,
            BoundKindArg::Enhanced => BoundKind::Enhanced,
        })
        .collect();
    let table = ui_bound_table(a.n, a.gamma, &kinds, &a.ls)?;
    if !table.expected_bounded {
        eprintln!(
            "warning: |gamma| = {} is not below gamma_* = {:.6}; boundedness is not expected",
            a.gamma.abs(),
            table.thresholds.gamma_lower
        );
    }
    Sink { out_dir: a.output.out_dir }.emit("bound", &table.rows, &table)
}

fn cmd_log_div(a: LogDivArgs) -> CliResult<()> {
    let m = a.m.unwrap_or(a.k);
    guard(a.n, m, 32)?;
    let est = log_divergence_estimate(a.n, a.k, m, a.r_min)?;
    Sink { out_dir: a.output.out_dir }.emit("log_div", &est.table, &est)
}

fn cmd_verify(a: VerifyArgs) -> CliResult<()> {
    let report = verify::run_suite(a.suite)?;
    match &a.json {
        Some(p) => write_json(p, &report)?,
        None => println!("{}", serde_json::to_string_pretty(&report)?),
    }
    let failed: Vec<&str> = report.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::CheckFailed(format!("{} check(s) failed: {}", failed.len(), failed.join(", "))))
    }
}
