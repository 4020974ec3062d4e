use std::path::Path;
use std::process::{Command, Output};

use wavetomo::io::{read_field, read_sinogram};
use wavetomo::run::{Manifest, OutputKind};
use wavetomo_core::cache::sha256_hex;

const SMALL: [&str; 10] = [
    "--set", "grid.n1=30",
    "--set", "grid.n2=30",
    "--set", "grid.nt=300",
    "--set", "radon.n_eps=6",
    "--set", "radon.noise_sigma=0.02",
];

fn wavetomo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wavetomo")).args(args).output().expect("binary runs")
}

fn small_radon(out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["radon", "--out", out.to_str().unwrap()];
    args.extend(SMALL);
    args.extend([
        "--set", "radon.angles.step=30",
        "--set", "radon.angles.count=6",
        "--set", "radon.offsets.count=11",
        "--set", "radon.recon.n=12",
    ]);
    args.extend(extra);
    let o = wavetomo(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    o
}

fn bytes(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap()
}

#[test]
fn radon_writes_outputs_with_schema() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    small_radon(&out, &[]);
    let m = Manifest::read(&out).unwrap();
    for name in ["sinogram.csv", "sinogram.png", "q_rec.csv", "q_rec.png", "sinogram_fd.csv", "sinogram_oracle.csv", "q_true.csv"] {
        let entry = m.outputs.get(name).unwrap_or_else(|| panic!("{name} missing from manifest"));
        assert_eq!(entry.sha256, sha256_hex(&bytes(&out.join(name))), "{name}");
    }
    let s = read_sinogram(&out.join("sinogram.csv")).unwrap();
    assert_eq!((s.n_offsets(), s.n_angles()), (11, 6));
    assert_eq!(s.angles_deg(), [0.0, 30.0, 60.0, 90.0, 120.0, 150.0]);
    let header = std::fs::read_to_string(out.join("sinogram.csv")).unwrap();
    assert!(header.starts_with("eta,0,30,60,90,120,150\n"));
    let q = read_field(&out.join("q_rec.csv")).unwrap();
    assert_eq!((q.grid().n1, q.grid().n2), (12, 12));
    assert_eq!(m.outputs["q_rec.csv"].kind, OutputKind::Field);
    assert_eq!(m.config.grid.n1, 30);
    assert_eq!(m.config.radon.noise_sigma, 0.02);
    for key in ["sinogram_rel_l2", "sinogram_fd_rel_l2", "image_rel_l2", "image_peak_offset_cells"] {
        assert!(m.metrics[key].is_finite(), "{key}");
    }
    let png = image::open(out.join("q_rec.png")).unwrap();
    assert_eq!((png.width(), png.height()), (48, 48));
}

#[test]
fn cfl_violation_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = wavetomo(&["radon", "--set", "grid.nt=300", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("CFL number 1.585284") && err.contains("0.707107"), "{err}");
    assert!(err.contains("stage: validate"), "{err}");
    assert!(!dir.path().join("manifest.toml").exists());
}

#[test]
fn malformed_config_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "mode = \"radon\"\n[radon]\nalpah = 0.1\n").unwrap();
    let o = wavetomo(&["radon", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("alpah"));
}

#[test]
fn identical_runs_compare_to_zero() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    small_radon(&a, &[]);
    small_radon(&b, &[]);
    let report = wavetomo::compare(&a, &b, 45.0).unwrap();
    assert!(report.outputs.len() >= 6);
    for (name, c) in &report.outputs {
        assert_eq!(c.relative_l2, 0.0, "{name}");
        assert_eq!(c.max_abs_diff, 0.0, "{name}");
        if let Some(p) = c.peak_offset_cells {
            assert_eq!(p, 0.0, "{name}");
            assert_eq!(c.gradient_ratio_factor, Some(1.0), "{name}");
        }
    }
    let path = dir.path().join("report.toml");
    let o = wavetomo(&["compare", a.to_str().unwrap(), b.to_str().unwrap(), "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    let parsed: wavetomo::CompareReport = toml::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(parsed, report);
}

#[test]
fn incompatible_runs_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    small_radon(&a, &[]);
    small_radon(&b, &["--set", "radon.angles.count=5"]);
    assert!(matches!(wavetomo::compare(&a, &b, 45.0), Err(wavetomo::CliError::IncompatibleRuns(_))));
    let o = wavetomo(&["compare", a.to_str().unwrap(), b.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("incompatible runs"));
}

#[test]
fn rerun_from_trace_cache_reproduces_sinogram() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    small_radon(&out, &["--set", "radon.cache=true"]);
    let first = bytes(&out.join("sinogram.csv"));
    let cached: Vec<_> = std::fs::read_dir(out.join("cache")).unwrap().collect();
    assert_eq!(cached.len(), 1, "one fingerprint directory");
    let traces = std::fs::read_dir(cached[0].as_ref().unwrap().path()).unwrap().count();
    assert_eq!(traces, 6 * 6);
    std::fs::remove_file(out.join("sinogram.csv")).unwrap();
    std::fs::remove_file(out.join("manifest.toml")).unwrap();
    small_radon(&out, &["--set", "radon.cache=true"]);
    assert_eq!(bytes(&out.join("sinogram.csv")), first);
}

#[test]
fn worker_count_does_not_change_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("w1"), dir.path().join("w3"));
    small_radon(&a, &["--workers", "1"]);
    small_radon(&b, &["--workers", "3"]);
    for name in ["sinogram.csv", "sinogram_fd.csv", "q_rec.csv"] {
        assert_eq!(bytes(&a.join(name)), bytes(&b.join(name)), "{name}");
    }
}

#[test]
fn seed_changes_noisy_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("s0"), dir.path().join("s1"));
    small_radon(&a, &[]);
    small_radon(&b, &["--seed", "1"]);
    assert_ne!(bytes(&a.join("sinogram.csv")), bytes(&b.join("sinogram.csv")));
}

#[test]
fn fbp_of_a_saved_sinogram() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    small_radon(&run, &[]);
    let out = dir.path().join("fbp");
    let sino = run.join("sinogram_oracle.csv");
    let o = wavetomo(&[
        "fbp",
        "--set", &format!("fbp.sinogram={}", toml::Value::String(sino.display().to_string())),
        "--set", "fbp.recon.n=12",
        "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = Manifest::read(&out).unwrap();
    assert!(!m.outputs.contains_key("sinogram.csv"));
    assert!(out.join("q_rec.csv").exists());
}

#[test]
fn specdiff_demo_writes_curves_and_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sd");
    let o = wavetomo(&["specdiff-demo", "--set", "specdiff.seeds=3", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("second_gauss"), "{stdout}");
    let curves = std::fs::read_to_string(out.join("curves.csv")).unwrap();
    let mut lines = curves.lines();
    assert_eq!(lines.next(), Some("x,noisy,exact_d1,gauss_d1,trunc_d1,exact_d2,gauss_d2,trunc_d2"));
    assert_eq!(lines.count(), 4097);
    let rms = std::fs::read_to_string(out.join("rms.csv")).unwrap();
    assert_eq!(rms.lines().count(), 4);
    let m = Manifest::read(&out).unwrap();
    assert!(m.metrics["median_rms_second_gauss"] > 0.0);
}

#[test]
fn forward_writes_dn_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fw");
    let mut args = vec!["forward", "--out", out.to_str().unwrap()];
    args.extend(&SMALL[..6]);
    let o = wavetomo(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let dn = std::fs::read_to_string(out.join("dn.csv")).unwrap();
    assert!(dn.starts_with("k,t,node,x1,x2,value\n"));
    // 4 * 30 - 4 boundary nodes per level
    assert_eq!(dn.lines().count(), 1 + 300 * 116);
}

#[test]
fn print_config_round_trips() {
    let o = wavetomo(&["pointwise", "--set", "pointwise.theta_deg=30", "--print-config"]);
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout);
    let cfg: wavetomo::ExperimentConfig = toml::from_str(&text).unwrap();
    assert_eq!(cfg.pointwise.theta_deg, 30.0);
    assert_eq!(cfg.mode, wavetomo::Mode::Pointwise);
}

#[test]
fn shipped_configs_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut count = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("toml") {
            continue;
        }
        let table: toml::Table = std::fs::read_to_string(&path).unwrap().parse().unwrap();
        let mode: wavetomo::Mode = table["mode"].clone().try_into().unwrap();
        let cfg = wavetomo::config::load(Some(&path), mode, &[]).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        cfg.validate().unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        count += 1;
    }
    assert!(count >= 10, "{count} configs");
}
