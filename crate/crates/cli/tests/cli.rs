use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use sha2::{Digest, Sha256};
use tempfile::TempDir;

fn r3sgm(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_r3sgm"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], dir: &Path) -> String {
    let out = r3sgm(args, dir);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn digest(path: &Path) -> Vec<u8> {
    Sha256::digest(fs::read(path).unwrap()).to_vec()
}

fn field<'a>(stdout: &'a str, key: &str) -> &'a str {
    stdout
        .split_whitespace()
        .find_map(|kv| kv.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .unwrap_or_else(|| panic!("{key} missing from {stdout:?}"))
}

/// Writes a small random-dot pair into `dir`.
fn synth(dir: &Path, sub: &str, w: usize, h: usize) {
    ok(
        &[
            "synth", "--out-dir", sub, "--width", &w.to_string(), "--height", &h.to_string(),
            "--background", "2", "--foreground", "8", "--levels", "6", "--noise", "4", "--seed", "3",
        ],
        dir,
    );
}

#[test]
fn compute_writes_pfm() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    synth(d, "s", 64, 40);
    let stdout = ok(
        &[
            "compute", "--algo", "r3sgm", "--left", "s/left.pgm", "--right", "s/right.pgm", "--dmax", "32",
            "--window", "13", "--out", "d.pfm", "--dump-right",
        ],
        d,
    );
    assert!(d.join("d.pfm").exists());
    assert!(d.join("d_right.pfm").exists());
    assert!(fs::read(d.join("d.pfm")).unwrap().starts_with(b"Pf\n64 40\n-1.0\n"));
    let density: f64 = field(&stdout, "density").parse().unwrap();
    assert!(density > 0.0 && density <= 1.0);
    field(&stdout, "peak_buffer");
}

#[test]
fn even_window_is_rejected() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    synth(d, "s", 32, 16);
    let out = r3sgm(
        &["compute", "--left", "s/left.pgm", "--right", "s/right.pgm", "--dmax", "8", "--window", "4", "--out", "x.pfm"],
        d,
    );
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("odd"), "{err}");
    assert_eq!(err.trim().lines().count(), 1, "{err}");
    assert!(!d.join("x.pfm").exists());
}

#[test]
fn missing_input_fails() {
    let tmp = TempDir::new().unwrap();
    let out = r3sgm(&["compute", "--left", "no.pgm", "--right", "no.pgm", "--out", "x.pfm"], tmp.path());
    assert!(!out.status.success());
}

#[test]
fn runs_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    synth(d, "a", 48, 32);
    synth(d, "b", 48, 32);
    for f in ["left.pgm", "right.pgm", "gt.pfm", "nonocc.pgm"] {
        assert_eq!(digest(&d.join("a").join(f)), digest(&d.join("b").join(f)), "{f}");
    }
    for algo in ["r3sgm", "sgm8", "sgm4", "mgm"] {
        let run = |out: &str| {
            ok(
                &["compute", "--algo", algo, "--left", "a/left.pgm", "--right", "a/right.pgm", "--dmax", "12",
                  "--window", "7", "--out", out, "--dump-right"],
                d,
            );
        };
        run("one.pfm");
        run("two.pfm");
        assert_eq!(digest(&d.join("one.pfm")), digest(&d.join("two.pfm")), "{algo}");
        assert_eq!(digest(&d.join("one_right.pfm")), digest(&d.join("two_right.pfm")), "{algo}");
    }
    let sweep = |csv: &str| {
        ok(
            &["sweep", "--left", "a/left.pgm", "--right", "a/right.pgm", "--gt", "a/gt.pfm", "--dmax", "12",
              "--widths", "3,5", "--no-timing", "--csv", csv],
            d,
        );
    };
    sweep("s1.csv");
    sweep("s2.csv");
    assert_eq!(digest(&d.join("s1.csv")), digest(&d.join("s2.csv")));
    let eval = |csv: &str| {
        ok(&["eval", "--est", "one.pfm", "--gt", "a/gt.pfm", "--csv", csv], d);
    };
    eval("e1.csv");
    eval("e2.csv");
    assert_eq!(digest(&d.join("e1.csv")), digest(&d.join("e2.csv")));
}

#[test]
fn eval_reports() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    synth(d, "s", 40, 20);
    let stdout = ok(&["eval", "--est", "s/gt.pfm", "--gt", "s/gt.pfm"], d);
    assert!(stdout.lines().any(|l| l == "bad_valid=0.0000"), "{stdout}");
    assert!(stdout.lines().any(|l| l == "density=1.0000"), "{stdout}");

    let out = r3sgm(&["eval", "--est", "s/gt.pfm", "--gt", "s/missing.pfm"], d);
    assert!(!out.status.success());

    // 10x10 KITTI-style 16-bit ground truth (scale 256) with one outlier
    let mut gt = b"P5\n10 10\n65535\n".to_vec();
    for _ in 0..100 {
        gt.extend_from_slice(&(20u16 * 256).to_be_bytes());
    }
    fs::write(d.join("gt.pgm"), gt).unwrap();
    let mut est = b"Pf\n10 10\n-1.0\n".to_vec();
    for i in 0..100 {
        let v: f32 = if i == 37 { 40.0 } else { 20.0 };
        est.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(d.join("est.pfm"), est).unwrap();
    let stdout = ok(
        &["eval", "--est", "est.pfm", "--gt", "gt.pgm", "--gt-scale", "256", "--protocol", "kitti", "--csv", "m.csv"],
        d,
    );
    assert!(stdout.lines().any(|l| l == "bad_valid=0.0100"), "{stdout}");
    assert!(stdout.lines().any(|l| l == "n_compared=100"), "{stdout}");
    ok(&["eval", "--est", "est.pfm", "--gt", "gt.pgm", "--gt-scale", "256", "--csv", "m.csv"], d);
    let csv = fs::read_to_string(d.join("m.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.lines().nth(1).unwrap().ends_with(",kitti,0.0100,1.0000,0.0100,100"), "{csv}");
}

#[test]
fn sweep_emits_one_row_per_width() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    synth(d, "s", 48, 24);
    let stdout = ok(
        &["sweep", "--left", "s/left.pgm", "--right", "s/right.pgm", "--gt", "s/gt.pfm", "--mask", "s/nonocc.pgm",
          "--dmax", "12", "--widths", "3,5,7,9,11,13"],
        d,
    );
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines[0], "window,bad_valid,density,bad_interp,px_per_s");
    assert_eq!(lines.len(), 7);
    for (line, w) in lines[1..].iter().zip([3, 5, 7, 9, 11, 13]) {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols.len(), 5);
        assert_eq!(cols[0], w.to_string());
        assert_eq!(cols[1].split('.').nth(1).map(str::len), Some(4));
    }

    let out = r3sgm(&["sweep", "--left", "s/left.pgm", "--right", "s/right.pgm", "--gt", "s/gt.pfm", "--widths", "4"], d);
    assert!(!out.status.success());
}

#[test]
fn bench_peak_buffer_ignores_height() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    let a = ok(&["bench", "--synthetic", "96x32", "--dmax", "16", "--repeats", "1"], d);
    let b = ok(&["bench", "--synthetic", "96x64", "--dmax", "16", "--repeats", "1"], d);
    assert_eq!(a.lines().count(), 1);
    assert_eq!(field(&a, "peak_buffer"), field(&b, "peak_buffer"));
    let px: f64 = field(&a, "px_per_s").parse().unwrap();
    assert!(px.is_finite() && px > 0.0);

    synth(d, "s", 64, 32);
    let f = ok(&["bench", "--left", "s/left.pgm", "--right", "s/right.pgm", "--dmax", "16", "--repeats", "2"], d);
    assert_eq!(f.lines().count(), 1);
}
