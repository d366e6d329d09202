use std::path::Path;
use std::process::Command;

use gluekit::builders::dipole_spt;
use gluekit::classify::dipole_push_rules;
use gluekit::{cli, io, Config};
use serde_json::Value;
use tempfile::TempDir;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("gluekit").chain(args.iter().copied());
    let code = cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn emit_example(dir: &Path, file: &str, args: &[&str]) -> String {
    let p = dir.join(file).to_str().unwrap().to_string();
    let mut full = vec!["example"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--emit", &p]);
    let (code, _, err) = run(&full);
    assert_eq!(code, 0, "{err}");
    p
}

fn json(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn example_round_trip_is_byte_identical() {
    let dir = TempDir::new().unwrap();
    for (name, extra) in [
        ("deformed_ghz", vec!["--beta", "0.5"]),
        ("deformed_cluster", vec!["--beta", "-0.3"]),
        ("aklt", vec![]),
        ("dipole_spt", vec!["--N", "3", "--eta", "2", "--beta", "0.3"]),
    ] {
        let mut args = vec![name];
        args.extend(extra);
        let p = emit_example(dir.path(), &format!("{name}.json"), &args);
        let first = std::fs::read_to_string(&p).unwrap();
        let t = io::load_mps(Path::new(&p)).unwrap();
        let again = io::to_string(&io::mps_to_json(&t));
        assert_eq!(first, again, "{name}");
        let mut direct = vec!["example"];
        direct.extend(&args);
        let (_, stdout, _) = run(&direct);
        assert_eq!(stdout, first);
    }
}

#[test]
fn analyze_reports_verdicts() {
    let dir = TempDir::new().unwrap();
    let ghz = emit_example(dir.path(), "ghz.json", &["deformed_ghz", "--beta", "0.5"]);
    let (code, out, _) = run(&["analyze", "--input", &ghz]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["verdict"], "right_gluable");
    assert_eq!(v["errors"].as_array().unwrap().len(), 4);
    assert_eq!(v["nogo"]["nogo"], false);

    let nogo = emit_example(dir.path(), "nogo.json", &["nogo_combined", "--beta", "0.4", "--beta-prime", "0.4"]);
    let (code, out, _) = run(&["analyze", "--input", &nogo]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["verdict"], "not_gluable");
    assert_eq!(v["diagnostics"]["nogo_triggered"], true);

    let dip = emit_example(dir.path(), "dip.json", &["dipole_spt", "--N", "3", "--eta", "1", "--beta", "0.3"]);
    let (code, out, _) = run(&["analyze", "--input", &dip, "--basis", "clock:3", "--table"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("verdict: right_gluable"));
}

#[test]
fn reports_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let p = emit_example(dir.path(), "cl.json", &["deformed_cluster", "--beta", "0.7"]);
    let a = run(&["analyze", "--input", &p]);
    let b = run(&["analyze", "--input", &p]);
    assert_eq!(a, b);
    let s1 = run(&["simulate", "--input", &p, "--sites", "4", "--trials", "30", "--seed", "9"]);
    let s2 = run(&["simulate", "--input", &p, "--sites", "4", "--trials", "30", "--seed", "9"]);
    assert_eq!(s1.0, 0, "{}", s1.2);
    assert_eq!(s1, s2);
    let v = json(&s1.1);
    assert_eq!(v["trials"], 30);
    assert!(v["min_fidelity"].as_f64().unwrap() >= 1.0 - 1e-9);
    let counts: u64 = v["outcome_histogram"].as_object().unwrap().values().map(|x| x.as_u64().unwrap()).sum();
    assert_eq!(counts, 30 * 3);

    let svg1 = dir.path().join("a.svg");
    let svg2 = dir.path().join("b.svg");
    assert_eq!(run(&["spectrum", "--input", &p, "--plot", svg1.to_str().unwrap()]).0, 0);
    assert_eq!(run(&["spectrum", "--input", &p, "--plot", svg2.to_str().unwrap()]).0, 0);
    assert_eq!(std::fs::read(&svg1).unwrap(), std::fs::read(&svg2).unwrap());
}

#[test]
fn spectrum_json_and_tables() {
    let dir = TempDir::new().unwrap();
    let p = emit_example(dir.path(), "tr.json", &["deformed_trivial", "--beta", "0.5"]);
    let (code, out, _) = run(&["spectrum", "--input", &p, "--what", "entanglement", "--json"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert!(v.get("correlation").is_none());
    let ent: Vec<f64> = v["entanglement"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    let delta = 1.0 / 1f64.cosh();
    assert!((ent[0] - (1.0 + delta) / 2.0).abs() < 1e-9);
    let (_, table, _) = run(&["spectrum", "--input", &p]);
    assert_eq!(table.lines().filter(|l| l.starts_with("corr")).count(), 4);
    assert_eq!(table.lines().filter(|l| l.starts_with("ent")).count(), 2);
}

#[test]
fn bond_dimension_one_gives_one_line() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("prod.json");
    std::fs::write(&p, r#"{"chi": 1, "d": 2, "data": [[[[0.6, 0.0]], [[0.8, 0.0]]]]}"#).unwrap();
    let (code, out, err) = run(&["spectrum", "--input", p.to_str().unwrap(), "--what", "correlation"]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(out.lines().count(), 1);
}

#[test]
fn classify_t_and_mu_agree() {
    let (code, out, _) = run(&["classify", "--t", "0.5,0.5i,-0.5,0.5"]);
    assert_eq!(code, 0);
    let v = json(&out);
    let mu = io::complex_list_from(&v["mu"]).unwrap();
    let csv: Vec<String> = mu.iter().map(|z| format!("{:.17}{:+.17}i", z.re, z.im)).collect();
    let (code, out2, err) = run(&["classify", "--mu", &csv.join(",")]);
    assert_eq!(code, 0, "{err}");
    let v2 = json(&out2);
    let t1 = io::complex_list_from(&v["t"]).unwrap();
    let t2 = io::complex_list_from(&v2["t"]).unwrap();
    for (a, b) in t1.iter().zip(&t2) {
        assert!((a - b).norm() < 1e-10, "{a} vs {b}");
    }
}

#[test]
fn classify_uniform_family() {
    let dir = TempDir::new().unwrap();
    let emit = dir.path().join("s.json");
    let (code, out, _) = run(&["classify", "--uniform", "--samples", "3", "--seed", "4", "--emit", emit.to_str().unwrap()]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["commutant_dim"], 4);
    assert_eq!(v["samples"].as_array().unwrap().len(), 3);
    let s0 = dir.path().join("s_0.json");
    let (_, rep, _) = run(&["analyze", "--input", s0.to_str().unwrap()]);
    assert_eq!(json(&rep)["verdict"], "right_gluable");
}

#[test]
fn dipole_example_obeys_push_rules() {
    let dir = TempDir::new().unwrap();
    for (n, eta) in [(3usize, 1usize), (3, 2), (4, 1), (5, 2)] {
        let (ns, es) = (n.to_string(), eta.to_string());
        let p = emit_example(dir.path(), "d.json", &["dipole_spt", "--N", &ns, "--eta", &es, "--beta", "0.3"]);
        let t = io::load_mps(Path::new(&p)).unwrap();
        let rules = dipole_push_rules(&t, n, eta, &Config::default()).unwrap();
        assert!(rules.relations.iter().all(|(_, r)| *r < 1e-9), "{:?}", rules.relations);
        assert!(rules.spans_basis);
        let direct = dipole_spt(n, eta, 0.3).unwrap();
        assert!(dipole_push_rules(&direct, n, eta, &Config::default()).is_ok());
    }
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    // clap usage errors
    assert_eq!(run(&["frobnicate"]).0, 1);
    assert_eq!(run(&["--help"]).0, 0);
    // malformed input
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    let (code, _, err) = run(&["analyze", "--input", bad.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.starts_with("error:"));
    // invalid parameters
    let (code, _, err) = run(&["example", "dipole_spt", "--N", "4", "--eta", "2"]);
    assert_eq!(code, 2);
    assert!(err.lines().any(|l| l.contains("\"exit_code\":2")));
    assert_eq!(run(&["example", "nonexistent"]).0, 1);
    // not gluable: no deterministic correction
    let nogo = emit_example(dir.path(), "nogo.json", &["nogo_combined", "--beta", "0.4", "--beta-prime", "0.4"]);
    assert_eq!(run(&["simulate", "--input", &nogo, "--sites", "3", "--trials", "5"]).0, 3);
    // memory guard
    let aklt = emit_example(dir.path(), "aklt.json", &["aklt"]);
    assert_eq!(run(&["simulate", "--input", &aklt, "--sites", "30"]).0, 4);
}

#[test]
fn config_file_is_honoured() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"memory_guard": 100}"#).unwrap();
    let p = emit_example(dir.path(), "g.json", &["deformed_ghz", "--beta", "0.5"]);
    let (code, _, _) = run(&["--config", cfg.to_str().unwrap(), "simulate", "--input", &p, "--sites", "4"]);
    assert_eq!(code, 4);
    // out-of-range tolerance is an input error
    std::fs::write(&cfg, r#"{"tol": {"push_tol": 0.5}}"#).unwrap();
    assert_eq!(run(&["--config", cfg.to_str().unwrap(), "analyze", "--input", &p]).0, 1);
}

#[test]
fn binary_matches_library() {
    let out = Command::new(env!("CARGO_BIN_EXE_gluekit"))
        .args(["example", "deformed_trivial", "--beta", "0.25"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let (_, lib, _) = run(&["example", "deformed_trivial", "--beta", "0.25"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), lib);
    let status = Command::new(env!("CARGO_BIN_EXE_gluekit"))
        .args(["example", "dipole_spt", "--N", "6", "--eta", "3"])
        .output()
        .unwrap()
        .status;
    assert_eq!(status.code(), Some(2));
}
