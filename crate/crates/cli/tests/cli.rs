use harmonic_cli::{run, EXIT_OK, EXIT_USAGE, EXIT_VIOLATION};
use harmonic_core::{CubeDecomposition64, GridFunction64, GridSpec64};
use serde_json::Value;

struct Run {
    code: u8,
    out: String,
    err: String,
}

fn harmonic(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("harmonic").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    Run {
        code,
        out: String::from_utf8(out).unwrap(),
        err: String::from_utf8(err).unwrap(),
    }
}

fn only_report(r: &Run) -> Value {
    let lines: Vec<&str> = r.out.lines().collect();
    assert_eq!(lines.len(), 1, "{}", r.out);
    serde_json::from_str(lines[0]).unwrap()
}

#[test]
fn gn1_echoes_theta_one_half() {
    let r = harmonic(&["verify", "--ineq", "gn1", "--n", "2", "--p", "4", "--q", "2", "--s", "1", "--family", "gaussian"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    let rep = only_report(&r);
    assert_eq!(rep["name"], "gn1");
    assert_eq!(rep["params"]["theta"], 0.5);
    assert!(rep["ratio"].as_f64().unwrap().is_finite());
    assert!(rep["scaling_drift"].as_f64().unwrap() <= 0.02);
}

#[test]
fn equal_exponents_are_a_usage_error() {
    let r = harmonic(&["verify", "--ineq", "gn1", "--n", "2", "--p", "4", "--q", "4", "--s", "1"]);
    assert_eq!(r.code, EXIT_USAGE);
    assert!(r.out.is_empty());
    assert_eq!(r.err.lines().count(), 1, "{}", r.err);
}

#[test]
fn perturbed_theta_is_a_violation() {
    let r = harmonic(&[
        "verify", "--ineq", "gn1", "--n", "2", "--p", "4", "--q", "2", "--s", "1", "--family", "gaussian", "--perturb-theta", "0.1",
    ]);
    assert_eq!(r.code, EXIT_VIOLATION);
    assert!(r.err.contains("drifts"), "{}", r.err);
    let rep = only_report(&r);
    assert!((rep["params"]["theta"].as_f64().unwrap() - 0.6).abs() < 1e-12);
    assert!(!rep["violations"].as_array().unwrap().is_empty());
}

#[test]
fn perturbation_only_applies_to_gn1() {
    let r = harmonic(&["verify", "--ineq", "gn2", "--n", "2", "--perturb-theta", "0.1"]);
    assert_eq!(r.code, EXIT_USAGE);
}

#[test]
fn selftest_passes() {
    let r = harmonic(&["selftest"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.out);
    assert!(r.out.lines().all(|l| l.starts_with("PASS")), "{}", r.out);
}

#[test]
fn reports_are_byte_identical() {
    let args = ["sweep", "--ineq", "young-sharp", "--p", "1.5", "--q", "1.2", "--r", "2", "--N", "256", "--L", "8", "--seed", "11"];
    let a = harmonic(&args);
    let b = harmonic(&args);
    assert_eq!(a.code, b.code);
    assert_eq!(a.out, b.out);
    let gen = ["gen", "--n", "2", "--N", "32", "--family", "trig-poly", "--seed", "5"];
    assert_eq!(harmonic(&gen).out, harmonic(&gen).out);
}

#[test]
fn sweep_jsonl_ends_with_summary() {
    let r = harmonic(&["sweep", "--ineq", "young", "--N", "256", "--L", "4"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    let lines: Vec<Value> = r.out.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    let summary = &lines.last().unwrap()["summary"];
    assert_eq!(summary["corpus_size"].as_u64().unwrap() as usize, lines.len() - 1);
    assert_eq!(summary["violations"], 0);
    assert!(summary["max_ratio"].as_f64().unwrap() <= 1.0 + 1e-6);
}

#[test]
fn csv_report_has_one_row_per_function() {
    let r = harmonic(&["sweep", "--ineq", "hy", "--p", "1.5", "--N", "256", "--L", "4", "--family", "gaussian", "--family", "tent", "--report", "csv"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    let lines: Vec<&str> = r.out.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("name,function"));
    assert!(lines[1].starts_with("hausdorff-young,gaussian"));
}

#[test]
fn generated_file_round_trips_through_norm() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.json");
    let path = path.to_str().unwrap();
    let r = harmonic(&["gen", "--n", "1", "--N", "128", "--L", "4", "--family", "tent", "--out", path]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    assert!(r.out.is_empty());
    let f = GridFunction64::from_json(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(f.spec, GridSpec64::new(1, 4.0, 128).unwrap());

    let r = harmonic(&["norm", "--in", path, "--p", "2", "--s", "1"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    let norms: Value = serde_json::from_str(r.out.trim()).unwrap();
    // tent: ||f||_2^2 = 2/3 and ||f'||_2^2 = 2
    assert!((norms["lp"].as_f64().unwrap() - (2.0f64 / 3.0).sqrt()).abs() < 1e-3);
    let grad = 2.0 * std::f64::consts::PI * norms["sobolev"].as_f64().unwrap();
    assert!((grad - 2f64.sqrt()).abs() < 2e-2 * 2f64.sqrt());
    assert!(norms["weak"].as_f64().unwrap() <= norms["lp"].as_f64().unwrap());
}

#[test]
fn cz_on_the_hand_traced_example() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("step.json");
    let spec = GridSpec64::new(1, 1.0, 16).unwrap();
    let f = GridFunction64::from_fn(spec, |x| if (0.0..0.25).contains(&x[0]) { 4.0 } else { 0.0 });
    std::fs::write(&path, f.to_json()).unwrap();
    let r = harmonic(&["cz", "--in", path.to_str().unwrap(), "--M", "1"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    let dec: CubeDecomposition64 = serde_json::from_str(r.out.trim()).unwrap();
    assert_eq!(dec.selected.len(), 1);
    assert_eq!(dec.selected[0].average, 2.0);
}

#[test]
fn bad_inputs_exit_with_usage() {
    let dir = tempfile::tempdir().unwrap();
    let junk = dir.path().join("junk.json");
    std::fs::write(&junk, "{ not json").unwrap();
    let junk = junk.to_str().unwrap();
    for args in [
        vec!["norm", "--in", junk],
        vec!["norm", "--in", "/definitely/missing.json"],
        vec!["verify", "--ineq", "hy", "--p", "3"],
        vec!["verify", "--ineq", "gn1", "--family", "no-such-family"],
        vec!["gen", "--N", "100"],
        vec!["verify", "--ineq", "nope"],
        vec!["cz", "--family", "gaussian", "--M", "0"],
    ] {
        let r = harmonic(&args);
        assert_eq!(r.code, EXIT_USAGE, "{args:?}: {}", r.out);
        assert!(!r.err.is_empty(), "{args:?}");
    }
}
