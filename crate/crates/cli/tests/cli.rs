use std::process::{Command, Output};

use ptk_cli::RunManifest;

fn ptk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ptk")).args(args).env_remove("PTK_FIXTURES").output().expect("run ptk")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn serre_threshold_command() {
    let o = ptk(&["serre", "threshold"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("p_star = 3094027"));
}

#[test]
fn verify_serre_json_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let o = ptk(&["verify", "--suite", "serre", "--no-timing", "--json", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let ja = std::fs::read_to_string(&a).unwrap();
    assert_eq!(ja, std::fs::read_to_string(&b).unwrap());
    let m = RunManifest::from_json(&ja).unwrap();
    assert_eq!(m.find("serre_f_at_p_star").unwrap().inputs["p_star"], 3_094_027.0);
    assert_eq!(m.to_canonical_json().unwrap(), ja);
    assert!(m.wall_time_seconds.is_none());
}

#[test]
fn verify_interpolation_and_isogeny() {
    for suite in ["interpolation", "isogeny", "modular", "lattice"] {
        let o = ptk(&["verify", "--suite", suite, "--no-timing"]);
        assert_eq!(o.status.code(), Some(0), "{suite}: {}", stdout(&o));
        assert!(stdout(&o).contains(" 0 violated"));
    }
}

#[test]
fn verify_all_on_bundled_fixtures() {
    let o = ptk(&["verify", "--suite", "all", "--format", "json", "--no-timing"]);
    assert_eq!(o.status.code(), Some(0));
    let m = RunManifest::from_json(&stdout(&o)).unwrap();
    assert!(m.all_satisfied());
    assert_eq!(m.suites.len(), 8);
    assert!(m.input_digests.contains_key("curves.jsonl"));
}

#[test]
fn violated_inequality_exits_one() {
    let o = ptk(&["bound", "matrix-lemma", "--t", "100", "--h", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("FAIL"));
    let o = ptk(&["bound", "matrix-lemma", "--t", "1.2", "--h", "1"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn input_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.jsonl");
    std::fs::write(&bad, "{\"label\": \"x\", \"degree\": 1}\n").unwrap();
    let o = ptk(&["verify", "--suite", "heights", "--records", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 1"));

    let o = Command::new(env!("CARGO_BIN_EXE_ptk"))
        .args(["verify", "--suite", "heights"])
        .env("PTK_FIXTURES", dir.path().join("nowhere"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(ptk(&["verify", "--suite", "nonsense"]).status.code(), Some(2));
}

#[test]
fn fixture_override_is_used() {
    let dir = tempfile::tempdir().unwrap();
    let line = r#"{"label": "37a1", "degree": 1, "embeddings": [{"tau_re": 0.0, "tau_im": 1.2211273607646272525}], "log_norm_minimal_discriminant": 3.6109179126442243, "j_num": "110592", "j_den": "37"}"#;
    std::fs::write(dir.path().join("curves.jsonl"), format!("{line}\n")).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_ptk")).arg("height").env("PTK_FIXTURES", dir.path()).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert_eq!(s.lines().count(), 1);
    assert!(s.contains("37a1 h_F=-0.99654220763736"), "{s}");
}

#[test]
fn small_commands() {
    let o = ptk(&["reduce", "--re", "3.0", "--im", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("map = "));
    let o = ptk(&["rho", "--re", "0", "--im", "2"]);
    assert!(stdout(&o).contains("rho^-2 = 2.0000000000000000"));
    let o = ptk(&["bound", "isogeny", "--case", "real", "--h-f", "1"]);
    assert!(stdout(&o).contains("bound = 3.58300000000000000e3"));
    let o = ptk(&["bound", "isogeny", "--case", "general", "--h-f", "985"]);
    assert!(stdout(&o).contains("bound = 9.70225000000000000e12"));
    let o = ptk(&["delta", "--re", "0", "--im", "1"]);
    assert!(stdout(&o).contains("j = 1.72800000000"), "{}", stdout(&o));
    let o = ptk(&["theta", "check", "--re", "0", "--im", "1", "--quad-points", "32"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(ptk(&["reduce", "--re", "0", "--im", "-1"]).status.code(), Some(2));
}
