use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use sqglab_cli::{sha256_hex, RunManifest};

fn sqglab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sqglab"))
        .args(args)
        .env("SQGLAB_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_manifest(path: &Path) -> RunManifest {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn version_flag() {
    let out = sqglab(&["--version"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains(env!("CARGO_PKG_VERSION")));
}

#[test]
fn dispersion_table() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("disp.csv");
    let out = sqglab(&["dispersion", "--n-max", "50", "--out", arg(&csv)]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,lambda,sigma,lambda_f64,sigma_f64");
    assert_eq!(lines.len(), 49);
    assert!(lines[1].starts_with("3,8/5,8/15,"));
    assert!(lines[2].starts_with("4,5/4,5/16,"));

    let manifest = read_manifest(&dir.path().join("disp.csv.manifest.json"));
    assert_eq!(manifest.subcommand, "dispersion");
    assert_eq!(manifest.version, env!("CARGO_PKG_VERSION"));
    assert_eq!(manifest.outputs.len(), 1);
    assert_eq!(manifest.outputs[0].sha256, sha256_hex(text.as_bytes()));
}

#[test]
fn resonance_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("p3.json");
    let out = sqglab(&[
        "resonance",
        "--p",
        "3",
        "--bound",
        "30",
        "--out",
        arg(&cert),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = sqglab::resonance::read_certificate(&cert).unwrap();
    assert_eq!(report.satisfies_explicit_bound(), Some(true));
}

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("cfg.json");
    fs::write(&path, body).unwrap();
    path
}

#[test]
fn evolve_is_deterministic_and_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"t_end": 0.5, "dt": 0.05, "diagnostics_stride": 2}"#,
    );
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let c = dir.path().join("c.csv");
    for (out, seed) in [(&a, "3"), (&b, "3"), (&c, "4")] {
        let res = sqglab(&[
            "evolve",
            "--config",
            arg(&cfg),
            "--out",
            arg(out),
            "--seed",
            seed,
        ]);
        assert!(
            res.status.success(),
            "{}",
            String::from_utf8_lossy(&res.stderr)
        );
    }
    let text = fs::read(&a).unwrap();
    assert_eq!(text, fs::read(&b).unwrap());
    assert_ne!(text, fs::read(&c).unwrap());
    let header = String::from_utf8(text).unwrap();
    assert!(header.starts_with("t,Es,Es_c3,Es_c34,Es_c345,hs_norm,mean_res,sym_res\n"));

    let ma = read_manifest(&dir.path().join("a.csv.manifest.json"));
    let mc = read_manifest(&dir.path().join("c.csv.manifest.json"));
    assert_eq!(ma.config_sha256, sha256_hex(&fs::read(&cfg).unwrap()));
    assert_eq!(ma.config_sha256, mc.config_sha256);
    assert_eq!((ma.seed, mc.seed), (Some(3), Some(4)));
    assert_eq!(ma.subcommand, mc.subcommand);
    assert_ne!(ma.outputs[0].sha256, mc.outputs[0].sha256);

    // Editing the config changes its hash.
    fs::write(
        &cfg,
        r#"{"t_end": 0.5, "dt": 0.05, "diagnostics_stride": 3}"#,
    )
    .unwrap();
    assert_ne!(ma.config_sha256, sha256_hex(&fs::read(&cfg).unwrap()));
}

#[test]
fn evolve_restart_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"t_end": 0.2, "dt": 0.05}"#);
    let state = dir.path().join("state.json");
    let first = dir.path().join("first.csv");
    let res = sqglab(&[
        "evolve",
        "--config",
        arg(&cfg),
        "--out",
        arg(&first),
        "--state-out",
        arg(&state),
    ]);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let second = dir.path().join("second.csv");
    let res = sqglab(&[
        "evolve",
        "--config",
        arg(&cfg),
        "--out",
        arg(&second),
        "--restart",
        arg(&state),
    ]);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let last_first = fs::read_to_string(&first)
        .unwrap()
        .lines()
        .last()
        .unwrap()
        .to_owned();
    let first_second = fs::read_to_string(&second)
        .unwrap()
        .lines()
        .nth(1)
        .unwrap()
        .to_owned();
    // Same energies and norm; the time and the accumulated mean restart.
    let fields = |line: &str| -> Vec<String> {
        line.split(',').skip(1).take(5).map(str::to_owned).collect()
    };
    assert_eq!(fields(&last_first), fields(&first_second));
}

#[test]
fn invalid_configs_are_rejected_with_field_names() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"m": 2, "n_max": 24}"#);
    let out = sqglab(&["check-config", "--config", arg(&cfg)]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("m: must be at least 3"));

    let cfg = write_config(dir.path(), r#"{"m": 3, "n_max": 25}"#);
    let out = sqglab(&["check-config", "--config", arg(&cfg)]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("n_max:"));

    let cfg = write_config(dir.path(), r#"{"epsilon": 0.05}"#);
    let out = sqglab(&["check-config", "--config", arg(&cfg)]);
    assert!(out.status.success());
    let echoed: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(echoed["dt"], 0.01);
    assert_eq!(echoed["epsilon"], 0.05);
}

#[test]
fn normalform_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"t_end": 2.0, "dt": 0.02}"#);
    let out_dir = dir.path().join("nf");
    let res = sqglab(&[
        "normalform",
        "--config",
        arg(&cfg),
        "--out-dir",
        arg(&out_dir),
    ]);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let slopes: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("slopes.json")).unwrap()).unwrap();
    let s0 = slopes["slopes"][0].as_f64().unwrap();
    let s3 = slopes["slopes"][3].as_f64().unwrap();
    assert!((s0 - 3.0).abs() < 0.5 && (s3 - 6.0).abs() < 0.7);
    assert!(out_dir.join("energies_eps0.025.csv").exists());
    let manifest = read_manifest(&out_dir.join("manifest.json"));
    assert_eq!(manifest.outputs.len(), 4);
}

#[test]
fn waves_branch_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("branch.csv");
    let json = dir.path().join("branch.json");
    let res = sqglab(&[
        "waves",
        "--m",
        "3",
        "--xi-max",
        "0.2",
        "--steps",
        "8",
        "--out",
        arg(&csv),
        "--json",
        arg(&json),
    ]);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("xi,v,residual,decay_c,a_1,"));
    assert_eq!(text.lines().count(), 9);
    let branch: sqglab::waves::WaveBranch =
        serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(branch.points.len(), 8);
    assert_eq!(branch.points[7].cosine_coeffs.len(), 21);
}
