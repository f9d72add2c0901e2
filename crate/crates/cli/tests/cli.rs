use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_critcircle"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut r = csv::Reader::from_reader(csv.as_bytes());
    let idx = r.headers().unwrap().iter().position(|h| h == name).unwrap();
    r.records().map(|rec| rec.unwrap()[idx].to_string()).collect()
}

fn floats(csv: &str, name: &str) -> Vec<f64> {
    column(csv, name).iter().map(|s| s.parse().unwrap()).collect()
}

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().into_string().unwrap(), fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

#[test]
fn cf_golden_is_all_ones() {
    let o = run(&["cf", "0.6180339887", "--depth", "8"]);
    assert!(o.status.success());
    let r = column(&stdout(&o), "r");
    assert_eq!(r, vec!["1"; 8]);
}

#[test]
fn cf_of_pi_fraction() {
    let o = run(&["cf", "0.1415926535", "--depth", "4"]);
    assert!(o.status.success());
    assert_eq!(column(&stdout(&o), "r"), ["7", "15", "1", "292"]);
    assert_eq!(column(&stdout(&o), "q"), ["7", "106", "113", "33102"]);
}

#[test]
fn usage_errors_exit_two() {
    let o = run(&["cf", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("domain error"));
    assert_eq!(run(&["returns", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(run(&["returns", "--levels", "5..2"]).status.code(), Some(2));
}

#[test]
fn returns_fibonacci_column() {
    let o = run(&["returns", "--levels", "1..10"]);
    assert!(o.status.success());
    let q: Vec<u64> = column(&stdout(&o), "q").iter().map(|s| s.parse().unwrap()).collect();
    let mut fib = vec![1u64, 2];
    while fib.len() < 10 {
        fib.push(fib[fib.len() - 1] + fib[fib.len() - 2]);
    }
    assert_eq!(q, fib);
    let ratio = floats(&stdout(&o), "ratio");
    assert!(ratio[4..].iter().all(|r| (r - 1.29).abs() < 0.02), "{ratio:?}");
}

#[test]
fn rational_parameter_locks() {
    let o = run(&["returns", "--family", "standard", "--param", "0.5"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("rational lock"));
}

#[test]
fn campaign_is_byte_deterministic() {
    let t = tempfile::tempdir().unwrap();
    let (a, b, c) = (t.path().join("a"), t.path().join("b"), t.path().join("c"));
    let args = ["bounds", "campaign", "--levels", "5..6", "--samples", "30", "--seed", "7"];
    for (d, seq) in [(&a, false), (&b, false), (&c, true)] {
        let mut v = args.to_vec();
        v.extend(["--out", d.to_str().unwrap()]);
        if seq {
            v.push("--sequential");
        }
        assert!(run(&v).status.success());
    }
    let da = dir_bytes(&a);
    assert_eq!(da.len(), 3);
    assert_eq!(da, dir_bytes(&b));
    assert_eq!(da, dir_bytes(&c));
    let side: serde_json::Value = serde_json::from_slice(&fs::read(a.join("campaign.json")).unwrap()).unwrap();
    assert_eq!(side["config_sha256"].as_str().unwrap().len(), 64);
    assert_eq!(side["files"].as_array().unwrap().len(), 2);
    let traces = fs::read_to_string(a.join("campaign_traces.csv")).unwrap();
    assert_eq!(column(&traces, "outcome").len(), 60);
    assert!(!column(&traces, "outcome").iter().any(|o| o == "unclassified"));
}

#[test]
fn config_file_round_trip_and_override() {
    let t = tempfile::tempdir().unwrap();
    let a = t.path().join("a");
    let o = run(&["bounds", "cubic", "--levels", "4..5", "--grid", "4x8", "--out", a.to_str().unwrap()]);
    assert!(o.status.success());
    let side: serde_json::Value = serde_json::from_slice(&fs::read(a.join("cubic.json")).unwrap()).unwrap();
    let cfg = t.path().join("cfg.json");
    fs::write(&cfg, side["config"].to_string()).unwrap();
    // flags on the command line lose against the file
    let b = t.path().join("b");
    let o = run(&[
        "bounds",
        "cubic",
        "--levels",
        "6..8",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        b.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert_eq!(dir_bytes(&a), dir_bytes(&b));
}

#[test]
fn cubic_constants_positive() {
    let o = run(&["bounds", "cubic", "--levels", "4..8", "--grid", "8x16"]);
    assert!(o.status.success());
    let c = floats(&stdout(&o), "c");
    assert_eq!(c.len(), 5);
    assert!(c.iter().all(|c| *c > 0.0));
}

#[test]
fn empty_retained_set_reported() {
    let o = run(&["bounds", "cubic", "--levels", "4..4", "--cutoff-B", "1e9"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no admissible samples"));
}

#[test]
fn siegel_tau_rotates_by_golden_mean() {
    let o = run(&["siegel", "tau", "--theta", "golden"]);
    assert!(o.status.success());
    let tau = floats(&stdout(&o), "tau")[0];
    // independent lift of the circle restriction
    let tp = std::f64::consts::TAU;
    let lift = |t: f64| tau + t + (-(tp * t).sin()).atan2(3.0 - (tp * t).cos()) / std::f64::consts::PI;
    let n = 200_000;
    let mut x = 0.0;
    for _ in 0..n {
        x = lift(x);
    }
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    assert!((x / n as f64 - golden).abs() < 1e-4);
}

#[test]
fn julia_writes_raster_and_sidecar() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path().join("j");
    let o = run(&["siegel", "julia", "--res", "128", "--budget", "300", "--out", d.to_str().unwrap()]);
    assert!(o.status.success());
    let ppm = fs::read(d.join("julia.ppm")).unwrap();
    assert!(ppm.starts_with(b"P6\n128 128\n255\n"));
    let counts = fs::read_to_string(d.join("julia_counts.csv")).unwrap();
    let total: usize = column(&counts, "pixels").iter().map(|s| s.parse::<usize>().unwrap()).sum();
    assert_eq!(total, 128 * 128);
    let side = fs::read_to_string(d.join("julia.json")).unwrap();
    assert!(side.contains("config_sha256"));
}

#[test]
fn puzzle_diameters_decrease() {
    let o = run(&["siegel", "puzzle", "--max-n", "6"]);
    assert!(o.status.success());
    let d = floats(&stdout(&o), "diameter");
    assert_eq!(d.len(), 7);
    assert!(d.windows(2).all(|w| w[1] < w[0]), "{d:?}");
}
