use std::path::Path;
use std::process::{Command, Output};

fn crip(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crip"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn complexity_prints_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = crip(&["complexity", "--out-dir", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("O-CRIP"));
    let csv = String::from_utf8(read(dir.path(), "complexity.csv")).unwrap();
    assert!(csv.contains("64,O-CRIP,98,420"));
    assert!(csv.contains("512,Hermitian,3076,12292"));
}

#[test]
fn ber_rerun_is_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let out = crip(&[
            "ber",
            "--ebn0",
            "0:2:4",
            "--trials",
            "300",
            "--seed",
            "17",
            "--channel",
            "exp:3:1.5",
            "--out-dir",
            d.path().to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for name in ["ber.csv", "ber.meta.toml", "ber.gp"] {
        assert_eq!(read(a.path(), name), read(b.path(), name), "{name}");
    }
    let csv = String::from_utf8(read(a.path(), "ber.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3 * 3);
    let meta = String::from_utf8(read(a.path(), "ber.meta.toml")).unwrap();
    assert!(meta.contains("seed = 17") && meta.contains("config_hash"));
}

#[test]
fn clipnoise_writes_documented_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = crip(&[
        "clipnoise",
        "--sigma2",
        "0.05,0.5",
        "--samples",
        "100000",
        "--no-plot",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let csv = String::from_utf8(read(dir.path(), "clipnoise.csv")).unwrap();
    assert!(csv.starts_with("sigma_x2,analytic_single,analytic_ocrip,mc_single,mc_ocrip,mc_stderr\n"));
    assert!(!dir.path().join("clipnoise.gp").exists());
}

#[test]
fn degrade_commands_run() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = crip(&[
        "degrade-dc", "--m", "8", "--schemes", "ecrip,ocrip", "--trials", "300",
        "--gain-grid", "0.06,0.08", "--shifts", "0,0.1", "--out-dir", d,
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = crip(&[
        "degrade-gain", "--m", "8", "--schemes", "hermitian", "--trials", "300",
        "--gain-grid", "0.07", "--multipliers", "1,1.5", "--out-dir", d,
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = String::from_utf8(read(dir.path(), "degrade_gain.csv")).unwrap();
    assert!(csv.contains("hermitian,1.5,"));
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "n_subcarriers = 48\n").unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["ber", "--config", bad.to_str().unwrap()],
        vec!["ber", "--schemes", "dco-ofdm"],
        vec!["ber", "--m", "3"],
        vec!["ber", "--ebn0", "4:-1:0"],
        vec!["ber", "--channel", "rayleigh"],
        vec!["complexity", "--sizes", "8,12"],
        vec!["frobnicate"],
    ];
    for args in cases {
        let out = crip(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn singular_channel_exits_3() {
    let out = crip(&["ber", "--channel", "taps:0.5,-0.5", "--out-dir", "/tmp/crip-singular"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("singular"));
}

#[test]
fn selftest_passes() {
    let out = crip(&["selftest"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("[PASS]")).count(), 5);
}
