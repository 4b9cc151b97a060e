use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::json;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn seek(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_seek"))
        .args(args)
        .env("SEEK_LOG", "error")
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Two 5 m rooms with a mug in the second; returns the scenario path.
fn small_scenario(dir: &Path) -> PathBuf {
    let plan = json!({
        "name": "pair",
        "rooms": [
            {"id": 1, "label": "office", "polygon": [[0, 0], [5, 0], [5, 5], [0, 5]]},
            {"id": 2, "label": "kitchen", "polygon": [[5, 0], [10, 0], [10, 5], [5, 5]]},
        ],
        "doors": [{"rooms": [1, 2], "position": [5.0, 2.5], "width_m": 0.9}],
    });
    let world = json!({
        "schema": "seek-world/1",
        "floor_plan": "plan.json",
        "cell_m": 0.1,
        "objects": [{"class": "coffee_mug", "position": [8.5, 4.0]}],
        "sensor": {"p_fp": 0.01},
    });
    let scenario = json!({
        "world": "world.json",
        "prior": data("prior_office.json"),
        "target": "coffee_mug",
        "starts": [[1.0, 1.0], [2.5, 4.0]],
        "planners": ["seek", "coverage"],
        "episodes_per_start": 2,
        "suite_seed": 99,
        "carry_over": true,
    });
    std::fs::write(dir.join("plan.json"), plan.to_string()).unwrap();
    std::fs::write(dir.join("world.json"), world.to_string()).unwrap();
    let path = dir.join("scenario.json");
    std::fs::write(&path, scenario.to_string()).unwrap();
    path
}

#[test]
fn graph_plan_and_belief() {
    let dir = tempfile::tempdir().unwrap();
    let dsg = dir.path().join("office.dsg.json");
    let msg = ok(&seek(&["graph", "build", s(&data("office_21.json")), "-o", s(&dsg)]));
    assert!(msg.contains("21 rooms"), "{msg}");

    let prior = data("prior_office.json");
    let policy = dir.path().join("policy.json");
    ok(&seek(&[
        "plan",
        s(&dsg),
        s(&prior),
        "--object",
        "coffee_mug",
        "-o",
        s(&policy),
    ]));
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&policy).unwrap()).unwrap();
    let rooms = doc["rooms"].as_object().unwrap();
    assert_eq!(rooms.len(), 21);
    for v in rooms.values() {
        assert!(v["value_m"].as_f64().unwrap() > 0.0);
        assert!(matches!(v["action"].as_str(), Some("move" | "search")));
    }

    let table = ok(&seek(&["belief", "show", s(&prior), s(&dsg), "--object", "coffee_mug"]));
    assert_eq!(table.lines().count(), 1 + 21);
    let unknown = ok(&seek(&["belief", "show", s(&prior), s(&dsg), "--object", "teapot"]));
    assert!(unknown.starts_with('#'));
}

#[test]
fn simulate_writes_a_trace() {
    let dir = tempfile::tempdir().unwrap();
    let scn = small_scenario(dir.path());
    let trace = dir.path().join("trace.jsonl");
    let out = ok(&seek(&["simulate", s(&scn), "--seed", "5", "--trace", s(&trace)]));
    let result: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(result["planner"], "seek");
    let ticks = result["ticks"].as_u64().unwrap();
    let lines: Vec<serde_json::Value> = std::fs::read_to_string(&trace)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert!(!lines.is_empty());
    // One record per simulator tick, plus the final finish when successful.
    let finishes = usize::from(result["success"].as_bool().unwrap());
    assert_eq!(lines.len() as u64, ticks + finishes as u64);

    let coverage = ok(&seek(&[
        "simulate",
        s(&scn),
        "--planner",
        "coverage",
        "--start-index",
        "1",
    ]));
    assert!(coverage.contains("\"coverage\""));
}

#[test]
fn eval_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let scn = small_scenario(dir.path());
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let summary = ok(&seek(&["eval", s(&scn), "-o", s(&a)]));
    ok(&seek(&["eval", s(&scn), "-o", s(&b)]));
    assert!(summary.contains("seek") && summary.contains("coverage"));
    for name in ["results.csv", "report.json", "store_seek.json", "store_coverage.json"] {
        assert_eq!(
            std::fs::read(a.join(name)).unwrap(),
            std::fs::read(b.join(name)).unwrap(),
            "{name}"
        );
    }
    let csv = std::fs::read_to_string(a.join("results.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 4);
}

#[test]
fn bad_input_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.json");
    let out = seek(&["graph", "build", s(&missing), "-o", s(&dir.path().join("x.json"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));

    let junk = dir.path().join("junk.json");
    std::fs::write(&junk, "{\"rooms\": 3}").unwrap();
    let out = seek(&["graph", "build", s(&junk), "-o", s(&dir.path().join("x.json"))]);
    assert_eq!(out.status.code(), Some(2));

    let scn = small_scenario(dir.path());
    let out = seek(&["simulate", s(&scn), "--planner", "teleport"]);
    assert_eq!(out.status.code(), Some(2));
    let out = seek(&["simulate", s(&scn), "--start-index", "7"]);
    assert_eq!(out.status.code(), Some(2));
}
