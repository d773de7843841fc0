use meanfield_spectra::ising_chain::full_gap;
use meanfield_spectra_cli::config::{CommandKind, Format, Method, RunConfig, Sweep};
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_meanfield-spectra"));
    c.env_remove("MEANFIELD_SPECTRA_TOL");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

/// Data rows of a CSV run, metadata comments and header dropped.
fn rows(out: &Output) -> Vec<Vec<String>> {
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    text.lines().filter(|l| !l.starts_with('#')).skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn note(out: &Output, key: &str) -> serde_json::Value {
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    let prefix = format!("# {key}: ");
    let line = text.lines().find(|l| l.starts_with(&prefix)).unwrap_or_else(|| panic!("no {key} note"));
    serde_json::from_str(&line[prefix.len()..]).unwrap()
}

fn f(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn config_round_trips_canonically() {
    let mut c = RunConfig::new(CommandKind::Gap);
    c.sweep = Some(Sweep::Geometric { start: 200, factor: 2.0, count: 5 });
    c.method = Some(Method::Chain);
    c.format = Format::Json;
    c.gamma = Some(3.5);
    c.model.h = -0.25;
    c.tolerances.exponent_abs = 0.03;
    let text = c.canonical();
    let back = RunConfig::parse(&text).unwrap();
    assert_eq!(back, c);
    assert_eq!(back.canonical(), text);

    let minimal = RunConfig::parse("command = \"verify\"").unwrap();
    assert_eq!(minimal, RunConfig::new(CommandKind::Verify));
    assert_eq!(RunConfig::parse(&minimal.canonical()).unwrap(), minimal);
}

#[test]
fn config_errors_name_the_field() {
    let e = RunConfig::parse("command = \"gap\"\nsweep = \"10:2\"").unwrap_err();
    assert!(e.0.contains("sweep"), "{e}");
    let e = RunConfig::parse("command = \"gap\"\n[model]\nbeta = \"hot\"").unwrap_err();
    assert!(e.0.contains("line 3") || e.0.contains("beta"), "{e}");
    assert!(RunConfig::parse("command = \"gap\"\nsurprise = 1").is_err());
}

#[test]
fn potential_tables() {
    let out = run(&["potential", "--n", "1", "--beta", "3", "--h", "0.5"]);
    assert!(out.status.success());
    assert_eq!(note(&out, "critical_points").as_array().unwrap().len(), 3);
    assert_eq!(rows(&out).len(), 301);

    let out = run(&["potential", "--n", "3", "--beta", "5", "--h", "0"]);
    let cps = note(&out, "critical_points");
    let minima = cps.as_array().unwrap().iter().filter(|c| c["kind"] == "minimum").count();
    assert_eq!(minima, 1);
    assert!(rows(&out).iter().all(|r| f(&r[0]) >= 0.0));

    // critical temperature, no field: convex and even
    let t = rows(&run(&["potential", "--n", "1", "--beta", "1", "--h", "0"]));
    let m = t.len();
    for (i, r) in t.iter().enumerate() {
        assert!(f(&r[3]) >= -1e-12);
        assert!((f(&r[1]) - f(&t[m - 1 - i][1])).abs() < 1e-12);
    }
}

#[test]
fn gap_sweeps() {
    let out = run(&["gap", "--method", "chain", "--beta", "2", "--h", "0", "--sweep", "200:2:5"]);
    assert!(out.status.success());
    let t = rows(&out);
    assert_eq!(t.iter().map(|r| r[0].as_str()).collect::<Vec<_>>(), ["200", "400", "800", "1600", "3200"]);
    assert_eq!(note(&out, "fit")["pass"], true);

    let t = rows(&run(&["gap", "--method", "full", "--beta", "2", "--h", "0", "--N", "8"]));
    assert_eq!(t.len(), 1);
    assert!((f(&t[0][1]) - full_gap(8, 2.0, 0.0).unwrap().gap).abs() < 1e-12);

    let out = run(&["gap", "--method", "schrodinger", "--n", "2", "--beta", "10", "--h", "0", "--l", "0", "--sweep", "50:2:5"]);
    let slope = note(&out, "fit")["value"].as_f64().unwrap();
    assert!((slope - 1.0).abs() < 0.07, "{slope}");
}

#[test]
fn incompatible_methods_are_config_errors() {
    assert_eq!(run(&["gap", "--method", "full", "--N", "20"]).status.code(), Some(2));
    assert_eq!(run(&["gap", "--method", "chain", "--n", "2", "--N", "20"]).status.code(), Some(2));
    assert_eq!(run(&["gap", "--method", "trial", "--beta", "0.5", "--N", "20"]).status.code(), Some(2));
    assert_eq!(run(&["gap", "--method", "chain"]).status.code(), Some(2));
}

#[test]
fn figure_data() {
    let t = rows(&run(&["figures", "--figure", "sop", "--grid", "1.1:5:40"]));
    assert_eq!(t.len(), 40);
    assert!(t.iter().all(|r| f(&r[1]) > 0.0 && r[6].is_empty()));

    let t = rows(&run(&["figures", "--figure", "s1", "--grid", "1:100:12"]));
    assert!(t.iter().all(|r| f(&r[1]).abs() < 1e-5 && f(&r[2]) > 1.0));

    let out = run(&["figures", "--grid", "1.1:5:0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("empty grid"));
}

#[test]
fn output_is_deterministic_across_job_counts() {
    let dir = tempfile::tempdir().unwrap();
    let path = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    for (jobs, name) in [("1", "a.csv"), ("4", "b.csv")] {
        let st = bin().args(["gap", "--beta", "1", "--sweep", "100:3:5", "--jobs", jobs, "--out", &path(name)]).status().unwrap();
        assert!(st.success());
    }
    // the echoed config names the output file, everything else must match byte for byte
    let read = |n: &str| {
        let text = std::fs::read_to_string(Path::new(&path(n))).unwrap();
        text.lines().filter(|l| !l.starts_with("# out = ")).map(|l| format!("{l}\n")).collect::<String>()
    };
    let a = read("a.csv");
    assert!(a.lines().filter(|l| !l.starts_with('#')).count() == 6);
    assert_eq!(a, read("b.csv"));
}

#[test]
fn config_file_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "command = \"gap\"\nsweep = \"10,20\"\nmethod = \"chain\"\nformat = \"json\"\n[model]\nbeta = 0.5\n").unwrap();
    let out = bin().arg("--config").arg(&cfg).output().unwrap();
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["rows"].as_array().unwrap().len(), 2);
    assert_eq!(doc["config"]["model"]["beta"], 0.5);

    // a flag overrides the file
    let out = bin().arg("--config").arg(&cfg).args(["--beta", "0.7"]).output().unwrap();
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["config"]["model"]["beta"], 0.7);

    std::fs::write(&cfg, "command = \"gap\"\nsweep = [1, 2\n").unwrap();
    let out = bin().arg("--config").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_quick_and_exit_codes() {
    let out = run(&["verify", "--quick", "--format", "json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["rows"].as_array().unwrap().len(), 11);

    // an impossible tolerance fails the run with status 1, not 2
    let out = bin().args(["verify", "--quick"]).env("MEANFIELD_SPECTRA_TOL", "exponent_abs = 1e-9").output().unwrap();
    assert_eq!(out.status.code(), Some(1));

    let out = bin().args(["verify"]).env("MEANFIELD_SPECTRA_TOL", "exponent_abs = [").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
