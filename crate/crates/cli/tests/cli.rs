use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "fixtures", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_floer-qkernel")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn bundled_backends_validate() {
    for name in ["classical", "clifford"] {
        let o = run(&["validate", name]);
        assert_eq!(code(&o), 0, "{}", stdout(&o));
    }
}

#[test]
fn odd_maslov_disk_table_fails_admissibility() {
    let o = run(&["validate", &fixture("mu_one.json")]);
    assert_eq!(code(&o), 1);
    let out = stdout(&o);
    assert!(out.contains("FAIL        admissibility:"), "{out}");
    assert!(out.contains("admissibility: disk (0,0) at [1] is nonzero but mu = 1 < 2"), "{out}");
}

#[test]
fn malformed_inputs_exit_with_two() {
    let o = run(&["validate", &fixture("malformed_arity.json")]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("entry arity (1, 0) does not match (2, 0)"));
    assert_eq!(code(&run(&["validate", "/nonexistent/backend.json"])), 2);
    assert_eq!(code(&run(&["verify", "classical", "--suite", "nosuch"])), 2);
    assert_eq!(code(&run(&["verify", "classical", "--energy", "-1"])), 2);
    assert_eq!(code(&run(&["cohomology", "classical", "--which", "XY"])), 2);
    assert_eq!(code(&run(&["example", "--name", "torus"])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
}

#[test]
fn json_errors_carry_the_exit_code() {
    let o = run(&["--format", "json", "validate", &fixture("malformed_arity.json")]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["exit_code"], 2);
}

#[test]
fn signs_suite_needs_no_backend() {
    let o = run(&["verify", "--suite", "signs"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("PASS        sign lemma grid"));
}

#[test]
fn single_equation_suite_on_classical() {
    let o = run(&["verify", "classical", "--suite", "gzstruc", "--max-k", "2", "--energy", "4"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS        gzstruc"));
}

#[test]
fn mutated_backend_fails_verification_and_the_example() {
    let o = run(&["verify", &fixture("mutated_clifford.json"), "--suite", "lstruc", "--energy", "4"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("FAIL        lstruc: 4 of"));
    let o = run(&["example", "--backend", &fixture("mutated_clifford.json")]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn deformed_verification_uses_the_pair_flags() {
    let o = run(&["verify", "clifford", "--suite", "theorems", "--energy", "4", "--b", "t0*e1"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let o = run(&["verify", "classical", "--suite", "theorems", "--energy", "3", "--gamma", "f1"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("FAIL        bounding pair"));
}

#[test]
fn clifford_example_default_and_below_cutoff() {
    let o = run(&["example"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let out = stdout(&o);
    assert!(out.contains("CO(y) = [T^[1]]"));
    assert!(out.trim_end().ends_with("checks, 0 failed, 0 undecidable"));
    let o = run(&["example", "--energy", "2"]);
    assert_eq!(code(&o), 3);
    assert!(stdout(&o).contains("not decidable below cutoff"));
}

#[test]
fn cohomology_tables() {
    let o = run(&["cohomology", "classical", "--which", "HF", "--energy", "4"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("ranks by degree: 0:1 1:2 2:1"));
    let o = run(&["cohomology", "clifford", "--which", "QH", "--energy", "6"]);
    let out = stdout(&o);
    assert!(out.contains("y * y2 = T^[3]"), "{out}");
    let o = run(&["cohomology", "clifford", "--which", "hf", "--energy", "6"]);
    assert!(stdout(&o).contains("y (*) e1 = T^[1]*e1"));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    for args in [
        vec!["verify", "clifford", "--energy", "6"],
        vec!["--format", "json", "verify", "clifford", "--energy", "6"],
        vec!["crossratio", "--samples", "5"],
    ] {
        let a = run(&args);
        let b = run(&args);
        assert_eq!(code(&a), 0);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn thread_count_does_not_change_the_report() {
    let args = ["verify", "classical", "--suite", "lstruc", "--max-k", "2", "--energy", "4"];
    let one = Command::new(env!("CARGO_BIN_EXE_floer-qkernel"))
        .args(args)
        .env("FLOER_QKERNEL_THREADS", "1")
        .output()
        .unwrap();
    let many = Command::new(env!("CARGO_BIN_EXE_floer-qkernel"))
        .args(args)
        .env("FLOER_QKERNEL_THREADS", "4")
        .output()
        .unwrap();
    assert_eq!(code(&one), 0);
    assert_eq!(one.stdout, many.stdout);
    let bad = Command::new(env!("CARGO_BIN_EXE_floer-qkernel"))
        .args(args)
        .env("FLOER_QKERNEL_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&bad), 2);
}

#[test]
fn json_reports_parse() {
    let o = run(&["--format", "json", "example", "--energy", "2"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["sections"].as_array().unwrap().len() >= 7);
    assert_eq!(code(&o), 3);
}

#[test]
fn crossratio_tables() {
    let o = run(&["crossratio", "--config", &fixture("bubbled.json")]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!(out.contains("chi_0 = 1.000000000000+0.000000000000i"), "{out}");
    assert!(out.contains("geodesic_1 = true"));
    let o = run(&["crossratio", "--samples", "20", "--k", "3", "--seed", "5"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("PASS        pi(theta_hat_m) = chi_m"));
    assert_eq!(code(&run(&["crossratio", "--config", &fixture("mu_one.json")])), 2);
}
