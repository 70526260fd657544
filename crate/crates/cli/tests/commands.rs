use qsec_cli::{run_command, EXIT_OK, EXIT_PROBABILISTIC, EXIT_RESOURCE, EXIT_USAGE};
use serde_json::Value;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("qsec").chain(args.iter().copied());
    let code = run_command(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(args: &[&str]) -> Value {
    let (code, out, err) = run(args);
    assert_eq!(code, EXIT_OK, "{err}");
    serde_json::from_str(&out).unwrap()
}

#[test]
fn b92_report() {
    let v = json(&["b92", "--pulses", "100000", "--theta", "0.0", "--eve", "none", "--seed", "42"]);
    let rate = v["sifting_rate"].as_f64().unwrap();
    assert!((rate - 0.25).abs() < 0.01);
    assert_eq!(v["alice_key"], v["bob_key"]);
    assert_eq!(v["meta"]["seed"], 42);
    assert_eq!(v["meta"]["command"], "b92");
    assert!(v["meta"]["artifact_version"].is_string());
    for field in ["pulses_sent", "conclusive_count", "qber_estimate", "disclosed_count", "eve_detected"] {
        assert!(v.get(field).is_some(), "{field}");
    }
}

#[test]
fn default_seed_is_printed() {
    let (_, out, err) = run(&["b92", "--pulses", "1000"]);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["meta"]["seed"], 42);
    assert!(err.contains("seed=42"));
}

#[test]
fn reports_are_byte_identical() {
    let args = ["ppm", "--frames", "5000", "--theta", "0.1", "--eve", "measured_resend", "--seed", "9"];
    let (_, a, _) = run(&args);
    let (_, b, _) = run(&args);
    assert_eq!(a, b);
    let (_, c, _) = run(&["shor", "--n", "21", "--backend", "quantum", "--seed", "3"]);
    let (_, d, _) = run(&["shor", "--n", "21", "--backend", "quantum", "--seed", "3"]);
    assert_eq!(c, d);
}

#[test]
fn shor_classical() {
    let v = json(&["shor", "--n", "21", "--backend", "classical", "--seed", "7"]);
    assert_eq!(v["factors"], serde_json::json!([3, 7]));
    assert_eq!(v["backend"], "CLASSICAL");
}

#[test]
fn shor_failures() {
    let (code, out, _) = run(&["shor", "--n", "13"]);
    assert_eq!(code, EXIT_USAGE);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["failure"], "PRIME");
    let (code, _, _) = run(&["shor", "--n", "91", "--backend", "quantum", "--max-attempts", "0"]);
    assert_eq!(code, EXIT_PROBABILISTIC);
    let (code, _, err) = run(&["shor", "--n", "1003", "--backend", "quantum"]);
    assert_eq!(code, EXIT_RESOURCE, "{err}");
    let (code, _, _) = run(&["shor", "--n", "15", "--backend", "lattice"]);
    assert_eq!(code, EXIT_USAGE);
}

#[test]
fn grover_worked_example() {
    let v = json(&["grover", "--bits", "2", "--target", "3"]);
    assert_eq!(v["iterations"], 1);
    assert!((v["success_probability"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert_eq!(v["measured"], "11");
    let (code, out, _) = run(&["grover", "--bits", "3", "--target", "5", "--backend", "subspace", "--format", "csv"]);
    assert_eq!(code, EXIT_OK);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "iteration,marked_mass");
    assert_eq!(lines.len(), 1 + 3);
}

#[test]
fn saes_crack() {
    let v = json(&["saes", "crack", "--plaintext", "0x6F6B", "--ciphertext", "0x0738", "--method", "exhaustive"]);
    assert!(v["matching_keys"].as_array().unwrap().contains(&Value::from("0xa73b")));
    assert_eq!(v["oracle_queries"], 65536);
    let v = json(&["saes", "crack", "--plaintext", "0x1234", "--key", "0xABCD"]);
    assert_eq!(v["method"], "GROVER_SIM");
    assert_eq!(v["ciphertext"], "0xab86");
}

#[test]
fn noise_sweep_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig.csv");
    let p = path.to_str().unwrap();
    let (code, out, _) = run(&["noise", "sweep", "--eps-min", "0", "--eps-max", "0.7", "--steps", "71", "--output", p]);
    assert_eq!(code, EXIT_OK);
    assert!(out.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 72);
    assert_eq!(lines[0], "epsilon,ber0,ber1,ber2");
    assert_eq!(lines[1], "0.000000,0.000000,0.437500,0.250000");
    assert!(lines.contains(&"0.500000,0.500000,0.562500,0.500000"));

    qsec_cli::emit_noise_sweep(0.0, 0.7, 71, &path).unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap(), text);
    assert!(qsec_cli::emit_noise_sweep(0.0, 0.7, 71, &dir.path().join("no/such/dir.csv")).is_err());
}

#[test]
fn noise_simulate_detects_eve() {
    let v = json(&["noise", "simulate", "--epsilon", "0.3", "--eve", "measured_resend"]);
    assert_eq!(v["eve_detected"], true);
    let v = json(&["noise", "simulate", "--epsilon", "0.3", "--eve", "none"]);
    assert_eq!(v["eve_detected"], false);
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# defaults\nseed = 5\nformat = csv\n").unwrap();
    let c = cfg.to_str().unwrap();
    let (code, out, _) = run(&["b92", "--pulses", "1000", "--config", c]);
    assert_eq!(code, EXIT_OK);
    let mut lines = out.lines();
    let head: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[head.iter().position(|&h| h == "seed").unwrap()], "5");

    let v = json(&["b92", "--pulses", "1000", "--config", c, "--seed", "6", "--format", "json"]);
    assert_eq!(v["meta"]["seed"], 6);

    std::fs::write(&cfg, "colour = blue\n").unwrap();
    assert_eq!(run(&["b92", "--config", c]).0, EXIT_USAGE);
    assert_eq!(run(&["b92", "--config", dir.path().join("missing").to_str().unwrap()]).0, EXIT_RESOURCE);
}

#[test]
fn argument_errors() {
    assert_eq!(run(&["teleport"]).0, EXIT_USAGE);
    assert_eq!(run(&["b92", "--theta", "7"]).0, EXIT_USAGE);
    assert_eq!(run(&["b92", "--eve", "photon_splitter"]).0, EXIT_USAGE);
    assert_eq!(run(&["ppm", "--bits-per-pulse", "0"]).0, EXIT_USAGE);
    assert_eq!(run(&["noise", "sweep", "--steps", "1"]).0, EXIT_USAGE);
    assert_eq!(run(&["grover", "--bits", "2", "--target", "4"]).0, EXIT_USAGE);
    assert_eq!(run(&["b92", "-s", "4"]).0, EXIT_USAGE);
    assert_eq!(run(&["--help"]).0, EXIT_OK);
}

#[test]
fn statevector_cap_is_enforced() {
    let (code, _, err) = run(&["grover", "--bits", "12", "--target", "1", "--statevector-cap", "10"]);
    assert_eq!(code, EXIT_RESOURCE, "{err}");
    let (code, _, _) = run(&["grover", "--bits", "12", "--target", "1", "--statevector-cap", "10", "--backend", "subspace"]);
    assert_eq!(code, EXIT_OK);
}

#[test]
fn unwritable_output() {
    assert_eq!(run(&["b92", "--pulses", "100", "--output", "/nonexistent/dir/r.json"]).0, EXIT_RESOURCE);
}
