//! End-to-end tests of the `hpdwave` binary: exit codes, file formats,
//! determinism.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hpdwave"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin()
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!(
        "hpdwave-cli-{tag}-{}-{}",
        std::process::id(),
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .unwrap()
            .as_nanos()
    ));
    fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn no_args_is_usage_error() {
    let out = bin().output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_writes_files_with_expected_sizes() {
    let dir = temp_dir("simulate");
    let out = run_in(
        &dir,
        &[
            "simulate",
            "--spectrum",
            "bumps",
            "--n",
            "32",
            "--d",
            "3",
            "--T",
            "64",
            "--seed",
            "11",
            "--out-spectrum",
            "truth.hpdc",
            "--out-ts",
            "series.tsv",
        ],
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    // Header 18 bytes (no metric tag) + 16 n d^2 payload.
    let spectrum_len = fs::metadata(dir.join("truth.hpdc")).unwrap().len();
    assert_eq!(spectrum_len, 18 + 16 * 32 * 9);
    let tsv = fs::read_to_string(dir.join("series.tsv")).unwrap();
    assert!(tsv.starts_with("t\tch0\tch1\tch2\n"));
    assert_eq!(tsv.lines().count(), 65);
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn simulate_same_seed_is_byte_identical() {
    let dir = temp_dir("seed");
    for name in ["a", "b"] {
        let out = run_in(
            &dir,
            &[
                "simulate",
                "--spectrum",
                "smooth",
                "--n",
                "16",
                "--d",
                "2",
                "--T",
                "32",
                "--seed",
                "99",
                "--out-spectrum",
                &format!("{name}.hpdc"),
                "--out-ts",
                &format!("{name}.tsv"),
            ],
        );
        assert_eq!(out.status.code(), Some(0));
    }
    assert_eq!(
        fs::read(dir.join("a.hpdc")).unwrap(),
        fs::read(dir.join("b.hpdc")).unwrap()
    );
    assert_eq!(
        fs::read(dir.join("a.tsv")).unwrap(),
        fs::read(dir.join("b.tsv")).unwrap()
    );
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn simulate_rejects_non_dyadic_length() {
    let dir = temp_dir("nondyadic");
    let out = run_in(
        &dir,
        &[
            "simulate",
            "--spectrum",
            "bumps",
            "--n",
            "100",
            "--d",
            "2",
            "--T",
            "200",
            "--seed",
            "1",
            "--out-spectrum",
            "x.hpdc",
            "--out-ts",
            "y.tsv",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    let message = String::from_utf8_lossy(&out.stderr);
    assert!(
        message.contains("power of two") || message.contains("dyadic"),
        "message should name the dyadic requirement: {message}"
    );
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn estimate_pipeline_produces_valid_hpd_curve() {
    let dir = temp_dir("estimate");
    let status = run_in(
        &dir,
        &[
            "simulate",
            "--spectrum",
            "smooth",
            "--n",
            "64",
            "--d",
            "2",
            "--T",
            "128",
            "--seed",
            "5",
            "--out-spectrum",
            "truth.hpdc",
            "--out-ts",
            "series.tsv",
        ],
    );
    assert_eq!(status.status.code(), Some(0));
    let out = run_in(
        &dir,
        &[
            "estimate",
            "--in",
            "series.tsv",
            "--B",
            "2",
            "--order",
            "3",
            "--metric",
            "riemannian",
            "--policy",
            "universal",
            "--emit-traces",
            "traces.csv",
            "--out",
            "est.hpdc",
        ],
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    // Reading validates positive-definiteness of every matrix.
    let bytes = fs::read(dir.join("est.hpdc")).unwrap();
    let (curve, metric) = hpdwave::io::read_curve(&mut bytes.as_slice()).unwrap();
    assert_eq!(curve.len(), 64);
    assert_eq!(metric, Some(hpdwave::MetricKind::Riemannian));
    let traces = fs::read_to_string(dir.join("traces.csv")).unwrap();
    assert!(traces.starts_with("scale,location,trace,kept\n"));
    assert_eq!(traces.lines().count(), 64); // header + 63 coefficients
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn estimate_zero_penalty_round_trips_periodogram() {
    let dir = temp_dir("identity");
    run_in(
        &dir,
        &[
            "simulate",
            "--spectrum",
            "smooth",
            "--n",
            "32",
            "--d",
            "2",
            "--T",
            "64",
            "--seed",
            "21",
            "--out-spectrum",
            "truth.hpdc",
            "--out-ts",
            "series.tsv",
        ],
    );
    let out = run_in(
        &dir,
        &[
            "estimate",
            "--in",
            "series.tsv",
            "--B",
            "2",
            "--order",
            "3",
            "--metric",
            "riemannian",
            "--policy",
            "cpress:0",
            "--out",
            "est.hpdc",
        ],
    );
    assert_eq!(out.status.code(), Some(0));

    // Rebuild the bias-corrected periodogram with the library and compare:
    // a zero penalty keeps every coefficient, so the estimate is the
    // transform round trip of the periodogram.
    let tsv = fs::read(dir.join("series.tsv")).unwrap();
    let ts = hpdwave::io::read_timeseries(&mut tsv.as_slice()).unwrap();
    let opts = hpdwave::spectral::EstimateOptions {
        tapers: 2,
        order: 3,
        ..Default::default()
    };
    let tapers = hpdwave::spectral::build_tapers(ts.len(), 2, &opts).unwrap();
    let raw = hpdwave::spectral::multitaper_periodogram(&ts, &tapers).unwrap();
    let corrected =
        hpdwave::spectral::bias_correct(&raw.curve, 2, 2, hpdwave::MetricKind::Riemannian).unwrap();

    let bytes = fs::read(dir.join("est.hpdc")).unwrap();
    let (est, _) = hpdwave::io::read_curve(&mut bytes.as_slice()).unwrap();
    let err = est.max_distance(&corrected).unwrap();
    assert!(err <= 1e-8, "zero-penalty estimate deviates: {err}");
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn estimate_rejects_bias_correction_for_cholesky() {
    let dir = temp_dir("cholesky");
    run_in(
        &dir,
        &[
            "simulate",
            "--spectrum",
            "smooth",
            "--n",
            "32",
            "--d",
            "2",
            "--T",
            "64",
            "--seed",
            "3",
            "--out-spectrum",
            "truth.hpdc",
            "--out-ts",
            "series.tsv",
        ],
    );
    let out = run_in(
        &dir,
        &[
            "estimate",
            "--in",
            "series.tsv",
            "--B",
            "2",
            "--order",
            "3",
            "--metric",
            "cholesky",
            "--policy",
            "universal",
            "--out",
            "est.hpdc",
        ],
    );
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bias correction"));
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn transform_round_trip_and_format_errors() {
    let dir = temp_dir("transform");
    run_in(
        &dir,
        &[
            "simulate",
            "--spectrum",
            "bumps",
            "--n",
            "32",
            "--d",
            "2",
            "--T",
            "64",
            "--seed",
            "17",
            "--out-spectrum",
            "truth.hpdc",
            "--out-ts",
            "series.tsv",
        ],
    );
    let fwd = run_in(
        &dir,
        &[
            "transform",
            "--in",
            "truth.hpdc",
            "--forward",
            "--order",
            "5",
            "--metric",
            "riemannian",
            "--out",
            "dec.hpdc",
        ],
    );
    assert_eq!(
        fwd.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&fwd.stderr)
    );
    let inv = run_in(
        &dir,
        &[
            "transform",
            "--in",
            "dec.hpdc",
            "--inverse",
            "--out",
            "back.hpdc",
        ],
    );
    assert_eq!(inv.status.code(), Some(0));

    let truth_bytes = fs::read(dir.join("truth.hpdc")).unwrap();
    let back_bytes = fs::read(dir.join("back.hpdc")).unwrap();
    let (truth, _) = hpdwave::io::read_curve(&mut truth_bytes.as_slice()).unwrap();
    let (back, _) = hpdwave::io::read_curve(&mut back_bytes.as_slice()).unwrap();
    let err = truth.max_distance(&back).unwrap();
    assert!(err <= 1e-8, "transform round trip error {err}");

    // Constant curve: every coefficient block is zero.
    let constant = hpdwave::HpdCurve::new(vec![hpdwave::HpdMatrix::identity(2); 16]).unwrap();
    let mut buf = Vec::new();
    hpdwave::io::write_curve(&mut buf, &constant, None).unwrap();
    fs::write(dir.join("const.hpdc"), &buf).unwrap();
    let fwd2 = run_in(
        &dir,
        &[
            "transform",
            "--in",
            "const.hpdc",
            "--forward",
            "--order",
            "3",
            "--metric",
            "log-euclidean",
            "--out",
            "cdec.hpdc",
        ],
    );
    assert_eq!(fwd2.status.code(), Some(0));
    let dec_bytes = fs::read(dir.join("cdec.hpdc")).unwrap();
    let dec = hpdwave::io::read_decomposition(&mut dec_bytes.as_slice()).unwrap();
    for j in 1..=dec.num_scales() {
        for c in dec.level(j) {
            assert!(c.delta.frobenius_norm() < 1e-12);
        }
    }

    // Corrupt magic bytes: format error, exit 3.
    let mut corrupt = fs::read(dir.join("dec.hpdc")).unwrap();
    corrupt[0] = b'Z';
    fs::write(dir.join("corrupt.hpdc"), &corrupt).unwrap();
    let bad = run_in(
        &dir,
        &[
            "transform",
            "--in",
            "corrupt.hpdc",
            "--inverse",
            "--out",
            "x.hpdc",
        ],
    );
    assert_eq!(bad.status.code(), Some(3));
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn benchmark_smoke_determinism_and_missing_key() {
    let dir = temp_dir("benchmark");
    let config = "\
spectrum = smooth
n = 16
d = 2
replicates = 1
seed = 42
B = 2
order = 3
metric = riemannian
policy = universal
estimators = raw, wavelet, nn:3
";
    fs::write(dir.join("config.txt"), config).unwrap();
    let out = run_in(
        &dir,
        &["benchmark", "--config", "config.txt", "--out", "a.csv"],
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(dir.join("a.csv")).unwrap();
    assert!(csv.starts_with("replicate,estimator,params,isre\n"));
    assert_eq!(csv.lines().count(), 4); // header + one row per estimator

    let again = run_in(
        &dir,
        &["benchmark", "--config", "config.txt", "--out", "b.csv"],
    );
    assert_eq!(again.status.code(), Some(0));
    assert_eq!(
        fs::read(dir.join("a.csv")).unwrap(),
        fs::read(dir.join("b.csv")).unwrap(),
        "same config and seed must give identical bytes"
    );

    // Missing key is a usage error naming the key.
    fs::write(dir.join("bad.txt"), "spectrum = smooth\nn = 16\n").unwrap();
    let bad = run_in(
        &dir,
        &["benchmark", "--config", "bad.txt", "--out", "c.csv"],
    );
    assert_eq!(bad.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&bad.stderr);
    assert!(
        msg.contains('"'),
        "error should name the missing key: {msg}"
    );
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn estimate_requires_dyadic_or_flag() {
    let dir = temp_dir("truncate");
    // 100 samples -> 50 frequencies: not dyadic.
    let mut tsv = String::from("t\tch0\tch1\n");
    let mut rng = hpdwave::rng::Rng64::new(8);
    for t in 0..100 {
        tsv.push_str(&format!(
            "{t}\t{}\t{}\n",
            rng.next_gaussian(),
            rng.next_gaussian()
        ));
    }
    fs::write(dir.join("series.tsv"), &tsv).unwrap();
    let out = run_in(
        &dir,
        &[
            "estimate",
            "--in",
            "series.tsv",
            "--B",
            "2",
            "--order",
            "1",
            "--policy",
            "cpress:0.5",
            "--out",
            "est.hpdc",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("truncate-dyadic"));

    let ok = run_in(
        &dir,
        &[
            "estimate",
            "--in",
            "series.tsv",
            "--B",
            "2",
            "--order",
            "1",
            "--policy",
            "cpress:0.5",
            "--truncate-dyadic",
            "--out",
            "est.hpdc",
        ],
    );
    assert_eq!(
        ok.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&ok.stderr)
    );
    let bytes = fs::read(dir.join("est.hpdc")).unwrap();
    let (curve, _) = hpdwave::io::read_curve(&mut bytes.as_slice()).unwrap();
    assert_eq!(curve.len(), 32);
    fs::remove_dir_all(&dir).ok();
}
