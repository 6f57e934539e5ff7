use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn evifuse(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_evifuse"))
        .args(args)
        .env_remove("EVIFUSE_SEED")
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn row<'a>(table: &'a str, element: &str) -> Vec<&'a str> {
    table
        .lines()
        .map(|l| l.split_whitespace().collect::<Vec<_>>())
        .find(|cols| cols.first() == Some(&element))
        .unwrap_or_else(|| panic!("no row `{element}` in\n{table}"))
}

#[test]
fn fuse_m1_table() {
    let out = stdout(&evifuse(&[
        "fuse",
        &data("m1_expert1.json"),
        &data("m1_expert2.json"),
        "--rule",
        "conjunctive",
        "--decision",
        "pignistic",
    ]));
    assert_eq!(row(&out, "A"), ["A", "0.3000", "0.3000", "0.5000", "0.5238"]);
    assert_eq!(row(&out, "∅")[1], "0.3000");
    assert!(out.contains("decision (pignistic): A"));
}

#[test]
fn fuse_m4_pcr5() {
    let out = stdout(&evifuse(&["fuse", &data("m4_expert1.json"), &data("m4_expert2.json"), "--rule", "pcr5"]));
    assert_eq!(row(&out, "A")[1], "0.8000");
    assert_eq!(row(&out, "A")[4], "0.9000");
    assert_eq!(row(&out, "Θ")[1], "0.2000");
}

#[test]
fn fuse_json_round_trips() {
    let out = stdout(&evifuse(&["fuse", &data("m5_expert1.json"), &data("m5_expert2.json"), "--json"]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["world"], "open");
    assert!((v["masses"]["∅"].as_f64().unwrap() - 0.12).abs() < 1e-12);
}

#[test]
fn fuse_needs_two_files() {
    let out = evifuse(&["fuse", &data("m1_expert1.json")]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn fuse_rejects_frame_mismatch() {
    let out = evifuse(&["fuse", &data("m1_expert1.json"), &data("m4_expert1.json")]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("different frames"));
}

#[test]
fn decide_reports_json() {
    let out = stdout(&evifuse(&["decide", &data("m5_expert2.json"), "--criterion", "bel"]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["criterion"], "credibility");
    assert_eq!(v["chosen"], "A");
    assert_eq!(v["tie"], false);
}

#[test]
fn simulate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(format!("{name}.csv"));
        let hist = dir.path().join(format!("{name}_hist.csv"));
        stdout(&evifuse(&[
            "simulate",
            "--classes",
            "2..4",
            "--samples",
            "5000",
            "--seed",
            "7",
            "--bins",
            "10",
            "--out",
            out.to_str().unwrap(),
            "--hist",
            hist.to_str().unwrap(),
        ]));
        (std::fs::read(out).unwrap(), std::fs::read(hist).unwrap())
    };
    let (a, b) = (run("a"), run("b"));
    assert_eq!(a, b);
    let table = String::from_utf8(a.0).unwrap();
    assert_eq!(table.lines().count(), 4);
    assert!(table.lines().nth(1).unwrap().starts_with("2,5000,"));
    assert_eq!(String::from_utf8(a.1).unwrap().lines().count(), 31);
}

#[test]
fn simulate_seed_from_environment() {
    let with_env = Command::new(env!("CARGO_BIN_EXE_evifuse"))
        .args(["simulate", "--classes", "3", "--samples", "2000"])
        .env("EVIFUSE_SEED", "7")
        .output()
        .unwrap();
    let flagged = evifuse(&["simulate", "--classes", "3", "--samples", "2000", "--seed", "7"]);
    assert_eq!(stdout(&with_env), stdout(&flagged));
}

#[test]
fn simulate_rejects_bad_input() {
    assert!(!evifuse(&["simulate", "--samples", "0"]).status.success());
    assert!(!evifuse(&["simulate", "--classes", "1..3", "--samples", "10"]).status.success());
    assert!(!evifuse(&["simulate", "--classes", "5..3"]).status.success());
}

#[test]
fn corpus_demo_peaks_at_sand_silt() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = dir.path().join("matrix.csv");
    let summary = dir.path().join("summary.json");
    stdout(&evifuse(&[
        "corpus",
        &data("demo_corpus.csv"),
        "--experts",
        "expert1,expert2",
        "--matrix-out",
        matrix.to_str().unwrap(),
        "--summary-out",
        summary.to_str().unwrap(),
    ]));
    let csv = std::fs::read_to_string(matrix).unwrap();
    let mut best = (String::new(), String::new(), f64::MIN);
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        for (j, v) in cols[1..].iter().enumerate() {
            let v: f64 = v.parse().unwrap();
            if v > best.2 {
                best = (cols[0].to_string(), header[j + 1].to_string(), v);
            }
        }
    }
    assert_eq!((best.0.as_str(), best.1.as_str()), ("sand", "silt"));
    let s: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(summary).unwrap()).unwrap();
    assert_eq!(s["tiles"], 600);
    assert!(s["rate"].as_f64().unwrap() < 0.05);
}

#[test]
fn corpus_weight_override_and_errors() {
    let out = stdout(&evifuse(&["corpus", &data("demo_corpus.csv"), "--weights", "1,1,1", "--summary-out", "/dev/null"]));
    assert!(out.starts_with("expert1\\expert2,rock,"));
    assert!(!evifuse(&["corpus", &data("demo_corpus.csv"), "--experts", "expert1,ghost"]).status.success());
    assert!(!evifuse(&["corpus", &data("demo_corpus.csv"), "--weights", "1/3,1/2,2/3"]).status.success());
}

#[test]
fn corpus_parse_error_names_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(
        &path,
        "tile_id,expert_id,class,certainty_level,proportion\nt1,e1,rock,1,0.5\nt1,e2,rock,1,1.2\n",
    )
    .unwrap();
    let out = evifuse(&["corpus", path.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}
