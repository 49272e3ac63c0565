use std::path::Path;
use std::process::{Command, Output};

use phg_cli::gridfile::{read_grid, write_grid, GridHeader};
use phg_core::{FreqVector, SpectralFunction};
use proptest::prelude::*;

fn phg(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phg")).args(args).current_dir(dir).output().expect("spawn phg")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn sample_writes_header_and_values() {
    let dir = tempfile::tempdir().unwrap();
    let o = phg(&["sample", "--n", "2", "--L", "27", "--seed", "7", "--out", "f.grid"], dir.path());
    assert!(o.status.success(), "{o:?}");
    assert!(stdout(&o).starts_with("seed=7 lattice_mean_residual="));
    let (h, v) = read_grid(&dir.path().join("f.grid")).unwrap();
    assert_eq!((h.n, h.m, h.l, h.seed), (2, 27, Some(27), Some(7)));
    assert_eq!(h.kind, "standard");
    assert_eq!(v.len(), 729);
    let mean = v.iter().sum::<f64>() / 729.0;
    assert!(mean.abs() < 1e-12);
}

#[test]
fn even_side_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = phg(&["sample", "--n", "1", "--L", "8", "--seed", "1", "--out", "f.grid"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("odd"));
    let o = phg(&["sample", "--n", "1"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn budget_guard_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_phg"))
        .args(["sample", "--n", "3", "--L", "27", "--seed", "1", "--out", "f.grid"])
        .env("PHG_BUDGET_BYTES", "1024")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
    assert!(!dir.path().join("f.grid").exists());
}

#[test]
fn kernel_disc_values_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let o = phg(&["kernel", "--kind", "disc", "--n", "1", "--L", "3", "--out", "k.grid"], dir.path());
    assert!(o.status.success(), "{o:?}");
    let (_, v) = read_grid(&dir.path().join("k.grid")).unwrap();
    // (2π/√27) and its product with cos(2π/3)
    let d0 = 2.0 * std::f64::consts::PI / 27f64.sqrt();
    assert!((v[0] - d0).abs() < 1e-12 && (v[0] - 1.209200).abs() < 1e-6);
    assert!((v[1] + d0 / 2.0).abs() < 1e-12 && (v[2] - v[1]).abs() < 1e-15);
    let side: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("k.grid.json")).unwrap()).unwrap();
    assert!((side["diag"].as_f64().unwrap() - d0).abs() < 1e-12);
    assert_eq!(side["kind"], "disc");

    let o = phg(&["kernel", "--kind", "disc", "--n", "1", "--L", "3", "--M", "9", "--out", "k.grid"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn kernel_cont_trunc_is_even() {
    let dir = tempfile::tempdir().unwrap();
    let o = phg(&["kernel", "--kind", "cont-trunc", "--n", "2", "--K", "65", "--M", "129", "--out", "c.grid"], dir.path());
    assert!(o.status.success(), "{o:?}");
    let (h, v) = read_grid(&dir.path().join("c.grid")).unwrap();
    assert_eq!(h.m, 129);
    let m = 129;
    for i in 0..m {
        for j in 0..m {
            let a = v[i * m + j];
            let b = v[((m - i) % m) * m + (m - j) % m];
            assert!((a - b).abs() < 1e-12 * a.abs().max(1.0));
        }
    }
}

#[test]
fn converge_field_column() {
    let dir = tempfile::tempdir().unwrap();
    let o = phg(&["converge-field", "--n", "1", "--f", "phi:1", "--Ls", "3,9,27", "--out-dir", "out"], dir.path());
    assert!(o.status.success(), "{o:?}");
    let mut rdr = csv::Reader::from_path(dir.path().join("out/converge_field.csv")).unwrap();
    let totals: Vec<f64> = rdr.records().map(|r| r.unwrap()[1].parse().unwrap()).collect();
    assert!((totals[0] - 4.964e-3).abs() < 1e-6);
    assert!((totals[1] - 5.25e-5).abs() < 1e-6);
    assert!(totals[2] < totals[1]);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/converge_field.json")).unwrap()).unwrap();
    assert_eq!(json["strictly_decreasing"], true);
}

#[test]
fn test_function_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let f = SpectralFunction::from_pairs(1, [(FreqVector::new(vec![1]), 1.0)]).unwrap();
    let text = serde_json::to_string(&f).unwrap();
    assert_eq!(text, r#"{"n":1,"terms":[{"z":[1],"alpha":1.0}]}"#);
    std::fs::write(dir.path().join("f.json"), &text).unwrap();
    let a = phg(&["converge-field", "--n", "1", "--f", "file:f.json", "--Ls", "3,9"], dir.path());
    let b = phg(&["converge-field", "--n", "1", "--f", "phi:1", "--Ls", "3,9"], dir.path());
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let o = phg(&["converge-field", "--n", "1", "--f", "phi:1,2", "--Ls", "3"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bound_annotates_thresholds() {
    let dir = tempfile::tempdir().unwrap();
    let o = phg(&["bound", "--n", "2", "--gamma", "0.55", "--Ls", "3,9,27", "--out-dir", "."], dir.path());
    assert!(o.status.success(), "{o:?}");
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("bound.json")).unwrap()).unwrap();
    assert!((json["thresholds"]["gamma_lower"].as_f64().unwrap() - 0.857763).abs() < 1e-6);
    assert_eq!(json["thresholds"]["gamma_star"].as_f64().unwrap(), 2.0);
    assert_eq!(json["expected_bounded"], true);
    let col: Vec<f64> = json["rows"].as_array().unwrap().iter().map(|r| r["value_fine"].as_f64().unwrap()).collect();
    assert!(col.iter().all(|v| v.is_finite() && *v < 2.0));
}

#[test]
fn gmc_writes_atoms() {
    let dir = tempfile::tempdir().unwrap();
    let o = phg(
        &["gmc", "--n", "2", "--L", "9", "--gamma", "0", "--kind", "semidiscrete", "--M", "27", "--out", "mu.grid"],
        dir.path(),
    );
    assert!(o.status.success(), "{o:?}");
    let (h, v) = read_grid(&dir.path().join("mu.grid")).unwrap();
    assert_eq!(h.m, 27);
    assert!(v.iter().all(|&a| a == 1.0 / 729.0));
    let o = phg(&["gmc", "--n", "1", "--L", "3", "--gamma", "1.5"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_identities_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = phg(&["verify", "--suite", "identities", "--json", "v.json"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("v.json")).unwrap()).unwrap();
    assert_eq!(json["schema"], "phg-verify");
    assert_eq!(json["version"], 1);
    for c in json["checks"].as_array().unwrap() {
        assert_eq!(c["verdict"], "pass", "{c}");
        assert!(c["name"].is_string() && c["value"].is_number() && c["tolerance"].is_number());
    }
}

#[test]
fn pgm_header_records_range() {
    let dir = tempfile::tempdir().unwrap();
    let o = phg(&["sample", "--n", "2", "--L", "9", "--seed", "3", "--out", "f.grid", "--pgm", "f.pgm"], dir.path());
    assert!(o.status.success());
    let bytes = std::fs::read(dir.path().join("f.pgm")).unwrap();
    let text = String::from_utf8_lossy(&bytes[..80]);
    assert!(text.starts_with("P5\n# min="));
    assert!(text.contains("\n9 9\n65535\n"));
    let header_len = text.find("65535\n").unwrap() + 6;
    assert_eq!(bytes.len() - header_len, 81 * 2);
}

#[test]
fn malformed_grid_files_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.grid");
    std::fs::write(&p, b"{\"format\":\"phg-grid\",\"version\":1,\"n\":1,\"M\":3,\"kind\":\"x\",\"seed\":null}\n1234").unwrap();
    assert!(read_grid(&p).is_err());
    std::fs::write(&p, b"no header").unwrap();
    assert!(read_grid(&p).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn grid_roundtrip_is_bit_exact(n in 1usize..3, half in 1usize..5, seed in any::<u64>(),
                                   vals in proptest::collection::vec(any::<f64>(), 81)) {
        let m = 2 * half + 1;
        let len = m.pow(n as u32);
        let values: Vec<f64> = (0..len).map(|i| vals[i % vals.len()]).collect();
        let mut h = GridHeader::new(n, m, "standard");
        h.seed = Some(seed);
        h.meta = serde_json::json!({"note": "roundtrip"});
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("g.grid");
        write_grid(&p, &h, &values).unwrap();
        let (h2, v2) = read_grid(&p).unwrap();
        prop_assert_eq!(h2, h);
        prop_assert_eq!(v2.len(), values.len());
        for (a, b) in values.iter().zip(&v2) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}
