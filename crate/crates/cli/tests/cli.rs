//! End-to-end runs of the `faultcast` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use faultcast::automata::{is_isomorphic, is_language_equal};
use faultcast::fixtures::{g1, g2};
use faultcast::synth::{synthesize, Mode, SynthesisProblem};
use faultcast_cli::file::AutomatonFile;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_faultcast"))
        .args(args)
        .env("NO_COLOR", "1")
        .output()
        .expect("binary runs")
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p(b: &Path) -> &str {
    b.to_str().unwrap()
}

#[test]
fn data_files_match_the_fixtures() {
    for (file, d) in [("g1.json", g1()), ("g2.json", g2())] {
        let parsed = AutomatonFile::load(&data(file)).unwrap().to_dfa().unwrap();
        assert!(is_isomorphic(&parsed, &d), "{file}");
    }
}

#[test]
fn verify_exit_codes() {
    let g1 = data("g1.json");
    assert_eq!(code(&["verify", "prognosis", "--k", "1", p(&g1)]), 0);
    let o = run(&["verify", "prognosis", "--k", "2", p(&g1)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("P(s) = a,"), "{}", stdout(&o));
    assert_eq!(code(&["verify", "max-k", p(&g1)]), 0);
    let o = run(&["verify", "diagnosis", p(&data("g2.json"))]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("N_o = 4, minimal N = 3"));
    assert_eq!(code(&["verify", "prognosis", p(&data("g2.json"))]), 1);
}

#[test]
fn report_records_the_witness() {
    let dir = tempfile::tempdir().unwrap();
    let rep = dir.path().join("r.json");
    let g1 = data("g1.json");
    code(&["verify", "prognosis", "--k", "2", p(&g1), "--report", p(&rep)]);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&rep).unwrap()).unwrap();
    assert_eq!(v["schema"], "1");
    assert_eq!(v["verdict"], false);
    assert_eq!(v["parameters"]["k"], 2);
    assert_eq!(v["witness"]["P(s)"], serde_json::json!(["a"]));
    assert_eq!(v["witness"]["P(t)"], serde_json::json!(["a"]));
    assert!(v["timing_ms"].is_null());
}

#[test]
fn usage_and_parse_errors_exit_2() {
    assert_eq!(code(&["verify"]), 2);
    assert_eq!(code(&["verify", "prognosis", "--k", "x", "g.json"]), 2);
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    assert_eq!(code(&["verify", "prognosis", p(&bad)]), 2);
    assert_eq!(code(&["verify", "prognosis", p(&dir.path().join("missing.json"))]), 2);
}

#[test]
fn dead_plant_exits_3_unless_forced() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("dead.json");
    std::fs::write(
        &f,
        r#"{"name": "dead", "events": [{"name": "a"}, {"name": "f", "observable": false, "controllable": false, "fault": true}],
            "states": ["0", "1", "2"], "initial": "0",
            "transitions": [["0", "a", "1"], ["0", "f", "2"], ["2", "a", "2"]]}"#,
    )
    .unwrap();
    assert_eq!(code(&["verify", "prognosis", p(&f)]), 3);
    assert_ne!(code(&["verify", "prognosis", "--force", p(&f)]), 3);
    assert_eq!(code(&["synthesize", "diagnosis", p(&f)]), 3);
}

#[test]
fn synthesize_g1_matches_the_library() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.json");
    assert_eq!(code(&["synthesize", "prognosis", "--k", "2", p(&data("g1.json")), "-o", p(&out)]), 0);
    let s = AutomatonFile::load(&out).unwrap().to_dfa().unwrap();
    let problem = SynthesisProblem::new(g1(), Mode::Prognosis(2))
        .with_uncontrollable(&["tau", "f1"])
        .unwrap();
    let expected = synthesize(&problem).unwrap().supervisor.unwrap();
    assert!(is_language_equal(&s, &expected).unwrap());
    assert!(is_isomorphic(&s, &expected));
}

#[test]
fn tiny_blocked_has_no_solution() {
    assert_eq!(code(&["synthesize", "prognosis", "--k", "0", p(&data("tiny-blocked.json"))]), 4);
}

#[test]
fn modular_writes_supervisors_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run(&[
        "modular",
        "synthesize",
        "--mode",
        "prognosis",
        p(&data("g1mod.json")),
        p(&data("g2.json")),
        "-o",
        p(&out),
        "--cross-check",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    for f in ["S_1.json", "S_2.json", "report.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(v["result"], "prognosable");
    assert!(v["notes"].as_array().unwrap().iter().any(|n| n == "cross-check: true"));

    let o = run(&[
        "modular",
        "synthesize",
        "--mode",
        "prognosis",
        p(&data("g1mod.json")),
        p(&data("g2.json")),
        "-o",
        p(&out),
        "--cross-check",
        "--budget",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(6));
}

#[test]
fn failing_component_exits_5() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let blocked = dir.path().join("blocked.json");
    let text = std::fs::read_to_string(data("tiny-blocked.json")).unwrap();
    std::fs::write(&blocked, text.replace("\"a\"", "\"x\"")).unwrap();
    let o = run(&[
        "modular",
        "synthesize",
        "--mode",
        "prognosis",
        p(&data("g2.json")),
        p(&blocked),
        "-o",
        p(&out),
    ]);
    assert_eq!(o.status.code(), Some(5));
    assert!(String::from_utf8_lossy(&o.stderr).contains("component 2"));
    // shared event with different attributes is a usage error
    let o = run(&[
        "modular",
        "synthesize",
        "--mode",
        "prognosis",
        p(&data("g2.json")),
        p(&data("tiny-blocked.json")),
        "-o",
        p(&out),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn observer_and_verifier_files() {
    let o = run(&["observer", p(&data("g2.json"))]);
    let obs = AutomatonFile::parse(&stdout(&o)).unwrap();
    assert_eq!(obs.states, ["{0,3}", "{1,2,4}", "{0,3,4}", "{4}"]);

    let dir = tempfile::tempdir().unwrap();
    let v = dir.path().join("v.json");
    assert_eq!(code(&["verifier", p(&data("g2.json")), "--N", "2", "-o", p(&v)]), 0);
    let ver = AutomatonFile::load(&v).unwrap();
    assert_eq!(ver.marked, Some(vec!["(4,0)".to_string(), "(4,3)".to_string()]));
    let d = ver.to_dfa().unwrap();
    assert_eq!(d.n_states(), 12);
}

#[test]
fn export_dot_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let v = dir.path().join("v.json");
    code(&["verifier", p(&data("g2.json")), "--N", "2", "-o", p(&v)]);
    let a = run(&["export-dot", p(&v), "--highlight-marked"]);
    let b = run(&["export-dot", p(&v), "--highlight-marked"]);
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(text.starts_with("digraph \"G2-verifier\" {"));
    assert_eq!(text.matches("fillcolor").count(), 2);
}

#[test]
fn compose_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.json");
    assert_eq!(code(&["compose", p(&data("g1mod.json")), p(&data("g2.json")), "-o", p(&out)]), 0);
    let d = AutomatonFile::load(&out).unwrap().to_dfa().unwrap();
    let direct = faultcast::automata::sync_product(&[faultcast::fixtures::g1_modified(), g2()]).unwrap();
    assert!(is_isomorphic(&d, &direct));
}

#[test]
fn construction_outputs_round_trip() {
    use faultcast::oracle::{random_plant, PlantParams};
    for seed in 0..40 {
        let g = random_plant(seed, &PlantParams::default());
        let mut outputs = vec![g.clone(), faultcast::verify::observer(&g).dfa];
        if let Some(s) = synthesize(&SynthesisProblem::new(g.clone(), Mode::Prognosis(1)))
            .unwrap()
            .supervisor
        {
            outputs.push(s);
        }
        for d in outputs {
            let f = AutomatonFile::from_dfa("x", &d).unwrap();
            let back = AutomatonFile::parse(&f.to_json()).unwrap().to_dfa().unwrap();
            assert!(is_isomorphic(&d, &back), "seed {seed}");
        }
    }
}
