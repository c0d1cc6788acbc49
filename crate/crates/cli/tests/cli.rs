use std::f64::consts::LN_2;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cq_radius::channel::channel_to_json;
use cq_radius::exponent::{ExponentCurve, ExponentKind};
use cq_radius::{GcqChannel, InputDistribution};
use cq_radius_cli::{emit_curve, parse_number, Format, Units};
use tempfile::TempDir;

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cq-radius"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn noiseless_file(dir: &TempDir) -> PathBuf {
    let w = GcqChannel::noiseless(2);
    let p = InputDistribution::uniform(["0", "1"]).unwrap();
    let path = dir.path().join("noiseless.json");
    std::fs::write(&path, channel_to_json(&w, Some(&p))).unwrap();
    path
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    (
        header,
        lines
            .map(|l| l.split(',').map(String::from).collect())
            .collect(),
    )
}

fn column(header: &[String], name: &str) -> usize {
    header
        .iter()
        .position(|h| h == name)
        .unwrap_or_else(|| panic!("no column {name}"))
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn noiseless_center() {
    let dir = TempDir::new().unwrap();
    let input = noiseless_file(&dir);
    let out = cli(&[
        "center",
        "--alpha",
        "2",
        "--z",
        "2",
        "--input",
        path_str(&input),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let (header, rows) = csv_rows(&String::from_utf8(out.stdout).unwrap());
    let row = &rows[0];
    let get = |name: &str| parse_number(&row[column(&header, name)]).unwrap();
    assert!((get("value") - LN_2).abs() < 1e-10);
    assert!(get("residual") <= 1e-10);
    assert!(
        (get("center_0_0_re") - 0.5).abs() < 1e-10 && (get("center_1_1_re") - 0.5).abs() < 1e-10
    );
    assert!(get("center_0_1_re").abs() < 1e-10 && get("center_0_1_im").abs() < 1e-10);
}

#[test]
fn noiseless_strong_converse_curve() {
    let dir = TempDir::new().unwrap();
    let input = noiseless_file(&dir);
    let output = dir.path().join("sc.csv");
    let out = cli(&[
        "exponent-curve",
        "--rmin",
        "0.1",
        "--rmax",
        "2.0",
        "--steps",
        "50",
        "--input",
        path_str(&input),
        "--output",
        path_str(&output),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(&output).unwrap();
    assert!(!text.contains('\r'));
    let (header, rows) = csv_rows(&text);
    assert_eq!(header, ["R", "value", "argmax_alpha"]);
    assert_eq!(rows.len(), 50);
    for row in rows {
        let r = parse_number(&row[0]).unwrap();
        let v = parse_number(&row[1]).unwrap();
        assert!((v - (r - LN_2).max(0.0)).abs() < 1e-9, "R = {r}: {v}");
    }
}

#[test]
fn verify_random_preset_passes() {
    let out = cli(&["verify", "--seed", "42", "--input", "random"]);
    let report = String::from_utf8(out.stdout).unwrap();
    assert_eq!(out.status.code(), Some(0), "{report}");
    assert!(report.contains("cli::determinism"));
    assert!(!report.contains("[FAIL]"));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    for (name, args) in [
        (
            "div",
            vec![
                "divergence",
                "--alpha",
                "1.5",
                "--z",
                "inf",
                "--preset",
                "random:3:3:9",
            ],
        ),
        (
            "chi",
            vec![
                "chi",
                "--alpha",
                "2",
                "--beta",
                "2",
                "--preset",
                "random:2:3:4",
                "--format",
                "json",
            ],
        ),
        (
            "cut",
            vec!["cutoff", "--kappa", "0.5", "--preset", "random"],
        ),
    ] {
        let mut outputs = Vec::new();
        for i in 0..2 {
            let path = dir.path().join(format!("{name}{i}"));
            let mut a = args.clone();
            a.extend(["--output", path_str(&path)]);
            assert_eq!(cli(&a).status.code(), Some(0));
            outputs.push(std::fs::read(&path).unwrap());
        }
        assert_eq!(outputs[0], outputs[1], "{name}");
    }
}

#[test]
fn bits_divide_nats_columns() {
    let args = [
        "exponent-curve",
        "--kind",
        "rc",
        "--rmin",
        "0.05",
        "--rmax",
        "0.4",
        "--steps",
        "4",
        "--preset",
        "random:2:2:3",
    ];
    let nats = String::from_utf8(cli(&args).stdout).unwrap();
    let mut bits_args = args.to_vec();
    bits_args.extend(["--units", "bits"]);
    let bits = String::from_utf8(cli(&bits_args).stdout).unwrap();
    let (_, n) = csv_rows(&nats);
    let (_, b) = csv_rows(&bits);
    assert_eq!(n.len(), 4);
    for (rn, rb) in n.iter().zip(&b) {
        for c in 0..2 {
            let (x, y) = (parse_number(&rn[c]).unwrap(), parse_number(&rb[c]).unwrap());
            assert!(
                (x / LN_2 - y).abs() <= 1e-11 * x.abs().max(1e-300),
                "{x} {y}"
            );
        }
        assert_eq!(rn[2], rb[2]);
    }
}

fn sample_curve() -> ExponentCurve {
    ExponentCurve {
        kind: ExponentKind::StrongConverse,
        rates: vec![0.1, 0.7, std::f64::consts::PI, 12.345678901234567],
        values: vec![0.0, 1.0 / 3.0, 2.718281828459045e-7, 123456.789012345],
        maximizing_alpha: vec![1.0, 2.5, 64.0, f64::INFINITY],
        floor_hits: vec![],
        params: "test".into(),
    }
}

#[test]
fn curve_round_trip() {
    let curve = sample_curve();
    let csv = emit_curve(&curve, Format::Csv, Units::Nats).unwrap();
    let (_, rows) = csv_rows(&csv);
    let json: serde_json::Value =
        serde_json::from_str(&emit_curve(&curve, Format::Json, Units::Nats).unwrap()).unwrap();
    assert_eq!(
        json["columns"],
        serde_json::json!(["R", "value", "argmax_alpha"])
    );
    let originals = [&curve.rates, &curve.values, &curve.maximizing_alpha];
    for (i, row) in rows.iter().enumerate() {
        for (c, orig) in originals.iter().enumerate() {
            let parsed = parse_number(&row[c]).unwrap();
            let from_json = match &json["rows"][i][c] {
                serde_json::Value::String(s) => parse_number(s).unwrap(),
                v => v.as_f64().unwrap(),
            };
            assert_eq!(parsed.to_bits(), from_json.to_bits());
            let o = orig[i];
            if o.is_finite() {
                // 12 significant digits
                assert!((parsed - o).abs() <= 5e-12 * o.abs(), "{o} -> {parsed}");
            } else {
                assert_eq!(parsed, o);
            }
        }
    }
}

#[test]
fn empty_grid_is_rejected() {
    let mut curve = sample_curve();
    curve.rates.clear();
    curve.values.clear();
    curve.maximizing_alpha.clear();
    assert!(emit_curve(&curve, Format::Csv, Units::Nats).is_err());

    let dir = TempDir::new().unwrap();
    let output = dir.path().join("none.csv");
    let out = cli(&[
        "exponent-curve",
        "--rmin",
        "0.1",
        "--rmax",
        "1",
        "--steps",
        "1",
        "--output",
        path_str(&output),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!output.exists());
}

#[test]
fn schema_errors_exit_2_with_location() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("broken.json");
    std::fs::write(&path, "{\n  \"dim\": 2,\n  \"symbols\": [\"a\"],\n  \"outputs\": {\"a\": [[[1, 0], [0, 0]], [[0, 0]]]}\n}\n").unwrap();
    let out = cli(&["center", "--alpha", "2", "--input", path_str(&path)]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("outputs.a[1]"), "{err}");

    std::fs::write(
        &path,
        "{\"dim\": 2, \"symbols\": [\"a\"],\n \"outputs\": {\"a\": [[1, 0]]}}",
    )
    .unwrap();
    let err =
        String::from_utf8(cli(&["center", "--alpha", "2", "--input", path_str(&path)]).stderr)
            .unwrap();
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn resource_cap_exits_4() {
    let out = cli(&["center", "--alpha", "2", "--preset", "noiseless:65"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn non_convergence_exits_3_with_parameters() {
    let dir = TempDir::new().unwrap();
    let output = dir.path().join("center.csv");
    let out = cli(&[
        "center",
        "--alpha",
        "0.3",
        "--z",
        "0.1",
        "--preset",
        "random:3:4:5",
        "--output",
        path_str(&output),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("alpha = 0.3, z = 0.1"), "{err}");
    assert!(std::fs::read_to_string(&output)
        .unwrap()
        .contains(",false,"));
}
