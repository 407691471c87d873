use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qthresh(args: &[&str]) -> Output {
    qthresh_env(args, &[])
}

fn qthresh_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qthresh"));
    cmd.args(args).env_remove("QTHRESH_OUT_DIR");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn json_out(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn capacity_prints_plain_number() {
    let o = qthresh(&["capacity", "--channel", "erasure", "--p", "0.25"]);
    assert_eq!(code(&o), 0);
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "0.75");
}

#[test]
fn closed_form_boundary_branch() {
    let o = qthresh(&[
        "closed-form",
        "--law",
        "linear",
        "--alpha",
        "10",
        "--eps",
        "0.1",
        "--log2rf",
        "128",
        "--n",
        "128",
    ]);
    assert_eq!(code(&o), 0);
    let v = json_out(&o);
    assert_eq!(v["result"]["branch"], "boundary");
    assert!((v["result"]["p_th"].as_f64().unwrap() - 0.103664).abs() < 1e-6);
    assert_eq!(v["provenance"]["config"]["alpha"], 10.0);
}

#[test]
fn noiseless_simulation() {
    let o = qthresh(&[
        "simulate", "--noise", "erasure", "--p", "0", "--n", "4", "--t", "1", "--trials", "1000", "--seed", "7",
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(json_out(&o)["result"]["sim"]["empirical_pe"], 0.0);
}

#[test]
fn exit_codes() {
    assert_eq!(code(&qthresh(&["capacity", "--bogus"])), 1);
    assert_eq!(code(&qthresh(&["capacity", "--channel", "erasure"])), 1);
    assert_eq!(code(&qthresh(&["capacity", "--channel", "erasure", "--p", "1.5"])), 1);
    assert_eq!(code(&qthresh(&["--help"])), 0);
    assert_eq!(code(&qthresh(&["--version"])), 0);
    // alpha = 0 leaves the law constant: no finite k_max, flagged result
    let o = qthresh(&["threshold", "--channel", "erasure", "--alpha", "0", "--gamma", "1"]);
    assert_eq!(code(&o), 2);
    assert_eq!(json_out(&o)["result"]["threshold"]["flags"][0], "unbounded_redundancy");
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"threshold": {"channel": "erasure", "alpha": 0.05, "gamma": 1.0}}"#,
    )
    .unwrap();
    let base = json_out(&qthresh(&["threshold", "--config", path_str(&cfg)]));
    assert!((base["result"]["threshold"]["p_th"].as_f64().unwrap() - 0.684025).abs() < 1e-4);
    let over = json_out(&qthresh(&["threshold", "--config", path_str(&cfg), "--alpha", "10"]));
    assert!((over["result"]["threshold"]["p_th"].as_f64().unwrap() - 0.103664).abs() < 1e-4);
    assert_eq!(over["provenance"]["config"]["alpha"], 10.0);
    assert_eq!(over["provenance"]["config"]["delta_p0"], 0.0001);

    std::fs::write(&cfg, r#"{"channel": "erasure", "alpah": 1}"#).unwrap();
    assert_eq!(code(&qthresh(&["threshold", "--config", path_str(&cfg)])), 1);
    std::fs::write(&cfg, "not json").unwrap();
    assert_eq!(code(&qthresh(&["threshold", "--config", path_str(&cfg)])), 1);
}

fn sweep_csv(dir: &Path, name: &str, threads: &str) -> String {
    let out = dir.join(name);
    let o = qthresh_env(
        &[
            "sweep",
            "--alphas",
            "0.3,1.2",
            "--gammas",
            "0.7,1.5",
            "--channels",
            "depolarizing,erasure",
            "--out",
            path_str(&out),
        ],
        &[("RAYON_NUM_THREADS", threads)],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    std::fs::read_to_string(out).unwrap()
}

#[test]
fn sweep_csv_is_deterministic_and_ordered() {
    let dir = tempfile::tempdir().unwrap();
    let a = sweep_csv(dir.path(), "a.csv", "1");
    let b = sweep_csv(dir.path(), "b.csv", "4");
    assert_eq!(a, b);
    let mut lines = a.lines();
    assert!(lines.next().unwrap().starts_with("# qthresh"));
    assert_eq!(lines.next().unwrap(), "channel,alpha,gamma,p_th,k_star,flags");
    let keys: Vec<String> = lines
        .map(|l| l.split(',').take(3).collect::<Vec<_>>().join(","))
        .collect();
    assert_eq!(
        keys,
        [
            "erasure,0.3,0.7",
            "erasure,0.3,1.5",
            "erasure,1.2,0.7",
            "erasure,1.2,1.5",
            "depolarizing,0.3,0.7",
            "depolarizing,0.3,1.5",
            "depolarizing,1.2,0.7",
            "depolarizing,1.2,1.5",
        ]
    );
}

#[test]
fn sweep_svg_per_channel_under_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let o = qthresh_env(
        &[
            "sweep",
            "--alphas",
            "0.5,1",
            "--gammas",
            "1",
            "--channels",
            "erasure,symmetric_gad",
            "--out",
            "maps/surface.svg",
        ],
        &[("QTHRESH_OUT_DIR", path_str(dir.path()))],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for ch in ["erasure", "symmetric_gad"] {
        let text = std::fs::read_to_string(dir.path().join(format!("maps/surface_{ch}.svg"))).unwrap();
        assert!(text.starts_with("<svg") && text.contains("<desc>qthresh"));
    }
    assert_eq!(json_out(&o)["result"]["violations"].as_array().unwrap().len(), 0);
}

#[test]
fn error_curve_rows_sorted_by_k() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("curve.csv");
    let args = [
        "error-curve",
        "--law",
        "polynomial",
        "--p0",
        "0.5,0.1,0.3",
        "--alpha",
        "0.1",
        "--gamma",
        "1",
        "--points",
        "50",
    ];
    let o = qthresh(&[&args[..], &["--out", path_str(&csv)]].concat());
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(&csv).unwrap();
    let ks: Vec<f64> = text
        .lines()
        .skip(2)
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(ks.len(), 150);
    assert!(ks.windows(2).all(|w| w[0] <= w[1]));

    let svg = dir.path().join("curve.svg");
    assert_eq!(code(&qthresh(&[&args[..], &["--out", path_str(&svg)]].concat())), 0);
    assert_eq!(std::fs::read_to_string(svg).unwrap().matches("<polyline").count(), 3);
}

#[test]
fn simulate_is_reproducible() {
    let args = [
        "simulate",
        "--noise",
        "depolarizing",
        "--p",
        "0.6",
        "--n",
        "16",
        "--t",
        "9",
        "--trials",
        "20000",
        "--seed",
        "3",
    ];
    let one = qthresh_env(&args, &[("RAYON_NUM_THREADS", "1")]);
    let four = qthresh_env(&args, &[("RAYON_NUM_THREADS", "4")]);
    assert_eq!(code(&one), 0);
    assert_eq!(one.stdout, four.stdout);
    let r = &json_out(&one)["result"]["sim"];
    assert!(r["ci_low"].as_f64() <= r["empirical_pe"].as_f64() && r["empirical_pe"].as_f64() <= r["ci_high"].as_f64());
}

#[test]
fn simulate_defaults_to_required_runs() {
    let o = qthresh(&["simulate", "--noise", "depolarizing", "--p", "0.5", "--trials", "100"]);
    let v = json_out(&o);
    assert_eq!(v["result"]["spec"]["T"], 76);
    assert!(v["result"]["sim"]["exact_pe"].as_f64().unwrap() <= 0.01);
}

#[test]
fn csv_to_stdout_and_missing_format() {
    let o = qthresh(&["bound", "--channel", "depolarizing", "--p", "0.1", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.lines().nth(1).unwrap().starts_with("channel,p,c,holevo,status"));
    assert_eq!(
        code(&qthresh(&[
            "threshold",
            "--channel",
            "erasure",
            "--alpha",
            "1",
            "--gamma",
            "1",
            "--format",
            "svg"
        ])),
        1
    );
}

#[test]
fn selfcheck_passes() {
    let o = qthresh(&["selfcheck"]);
    let text = String::from_utf8_lossy(&o.stdout);
    assert_eq!(code(&o), 0, "{text}");
    assert!(text.contains("0 failed"));
    assert!(!text.contains("FAIL"));
}
