use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use afsp::decision::{rule_decide, Directive, RuleConfig};
use afsp::worldmodel::{topology_from_obstacles, EgoPose};

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn afsp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_afsp"))
        .args(args)
        .env_remove("AFSP_DECISION_URL")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(p: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn tokens(v: &serde_json::Value) -> Vec<String> {
    v.as_array().unwrap().iter().map(|t| t.as_str().unwrap().to_string()).collect()
}

#[test]
fn plan_realizes_the_guide() {
    let dir = tempfile::tempdir().unwrap();
    let s1 = scenario("s1.json");
    let o = afsp(&["plan", "--scenario", arg(&s1), "--guide", "left,keep,right", "--out", arg(dir.path())]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let dump = json(&dir.path().join("plan.json"));
    assert_eq!(tokens(&dump["realized"]), ["left", "keep", "right"]);
    assert_eq!(dump["success"], true);
    let svg = fs::read_to_string(dir.path().join("plan.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
}

#[test]
fn plan_without_guide_asks_the_rules() {
    let dir = tempfile::tempdir().unwrap();
    let file = afsp::worldmodel::ScenarioFile::from_json(&fs::read_to_string(scenario("s1.json")).unwrap()).unwrap();
    let map = file.grid_map().unwrap();
    let graph = topology_from_obstacles(map.obstacles(), EgoPose::new(map.start(), file.start.yaw));
    let want: Vec<&str> = rule_decide(&graph, 0.0, &RuleConfig::default())
        .directives
        .iter()
        .map(|d: &Directive| d.token())
        .collect();
    let o = afsp(&["plan", "--scenario", arg(&scenario("s1.json")), "--out", arg(dir.path())]);
    assert_eq!(o.status.code(), Some(0));
    let dump = json(&dir.path().join("plan.json"));
    assert_eq!(tokens(&dump["requested"]), want);
}

#[test]
fn blocked_goal_is_a_planning_failure() {
    let dir = tempfile::tempdir().unwrap();
    let mut doc = json(&scenario("case.json"));
    doc["obstacles"]
        .as_array_mut()
        .unwrap()
        .push(serde_json::json!({"x": 88.5, "y": 0.0, "radius": 1.0, "category": "barrier"}));
    let path = dir.path().join("blocked.json");
    fs::write(&path, doc.to_string()).unwrap();
    let o = afsp(&["plan", "--scenario", arg(&path), "--guide", "left", "--out", arg(&dir.path().join("o"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    assert_eq!(afsp(&["plan", "--guide", "left", "--out", arg(&out)]).status.code(), Some(1));
    let missing = dir.path().join("nope.json");
    assert_eq!(afsp(&["plan", "--scenario", arg(&missing), "--out", arg(&out)]).status.code(), Some(1));
    let s1 = scenario("s1.json");
    let bad_guide = afsp(&["plan", "--scenario", arg(&s1), "--guide", "left,jump", "--out", arg(&out)]);
    assert_eq!(bad_guide.status.code(), Some(1));
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"planner": {"epsilon": -1.0}}"#).unwrap();
    let o = afsp(&["plan", "--scenario", arg(&s1), "--config", arg(&cfg), "--out", arg(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(afsp(&["simulate", "--scenario", arg(&s1), "--seeds", "4..2"]).status.code(), Some(1));
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let body = serde_json::json!({"scenario": arg(&scenario("s1.json")), "guide": "right,keep,left", "out": "from-file"});
    fs::write(&cfg, body.to_string()).unwrap();
    let o = afsp(&["plan", "--config", arg(&cfg)]);
    assert_eq!(o.status.code(), Some(0));
    let dump = json(&dir.path().join("from-file/plan.json"));
    assert_eq!(tokens(&dump["requested"]), ["right", "keep", "left"]);
    let flag_out = dir.path().join("from-flag");
    let o = afsp(&["plan", "--config", arg(&cfg), "--guide", "left", "--out", arg(&flag_out)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(tokens(&json(&flag_out.join("plan.json"))["requested"]), ["left"]);
}

#[test]
fn tune_reproduces_the_case_study_then_warm_starts() {
    let dir = tempfile::tempdir().unwrap();
    let case = scenario("case.json");
    let memory = dir.path().join("memory.jsonl");
    let out = dir.path().join("o");
    let run = || afsp(&["tune", "--scenario", arg(&case), "--guide", "left,keep,right", "--memory", arg(&memory), "--out", arg(&out)]);
    let first = run();
    assert_eq!(first.status.code(), Some(0), "{}", stdout(&first));
    let report = json(&out.join("tune.json"));
    let delays: Vec<f64> = report["trials"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| t["theta"]["c_delay"].as_f64().unwrap())
        .collect();
    assert_eq!(delays, [1.0, 0.5, 0.3]);
    assert!(stdout(&first).contains("trial 3"));
    let second = run();
    assert_eq!(second.status.code(), Some(0));
    assert_eq!(json(&out.join("tune.json"))["trials_used"], 1);
    assert_eq!(fs::read_to_string(&memory).unwrap().lines().count(), 2);
}

#[test]
fn tune_with_one_trial_on_the_case_is_unaccepted() {
    let dir = tempfile::tempdir().unwrap();
    let o = afsp(&[
        "tune",
        "--scenario",
        arg(&scenario("case.json")),
        "--guide",
        "left,keep,right",
        "--max-retries",
        "1",
        "--out",
        arg(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(!dir.path().join("memory.jsonl").exists());
}

#[test]
fn single_seed_benchmark_smoke() {
    let dir = tempfile::tempdir().unwrap();
    let t0 = Instant::now();
    let o = afsp(&["benchmark", "--seeds", "0", "--out", arg(dir.path())]);
    assert_eq!(o.status.code(), Some(0));
    assert!(t0.elapsed() < Duration::from_secs(30));
    let mut rdr = csv::Reader::from_path(dir.path().join("benchmark.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 9);
    let ftime = |scheme: &str| -> f64 {
        let v: Vec<f64> = rows.iter().filter(|r| &r[1] == scheme).map(|r| r[4].parse().unwrap()).collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    assert!(ftime("afsp") < ftime("mpc"));
    assert_eq!(fs::read_dir(dir.path().join("traces")).unwrap().count(), 9);
    assert_eq!(fs::read_dir(dir.path().join("plots")).unwrap().count(), 9);
}

#[test]
fn simulate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let s2 = scenario("s2.json");
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = afsp(&["simulate", "--scenario", arg(&s2), "--scheme", "afsp", "--seeds", "3", "--out", arg(out)]);
        assert_eq!(o.status.code(), Some(0));
    }
    let name = "s2_afsp_3.csv";
    assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap());
}

#[test]
fn outputs_never_replace_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("plan.json");
    let original = fs::read_to_string(scenario("s1.json")).unwrap();
    fs::write(&input, &original).unwrap();
    let o = afsp(&["plan", "--scenario", arg(&input), "--guide", "left", "--out", arg(dir.path())]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(fs::read_to_string(&input).unwrap(), original);
}

fn write_lines(dir: &Path, name: &str, lines: &[&str]) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, lines.join("\n") + "\n").unwrap();
    p
}

fn mean_of(o: &Output) -> f64 {
    let text = stdout(o);
    let line = text.lines().find(|l| l.starts_with("mean:")).unwrap();
    line["mean:".len()..].trim().parse().unwrap()
}

/// Largest number of equal tokens over all one-to-one pairings, divided by the shorter length.
fn brute_force(a: &[&str], b: &[&str]) -> f64 {
    fn go(a: &[&str], b: &[&str], used: &mut Vec<bool>) -> usize {
        let Some((x, rest)) = a.split_first() else { return 0 };
        let mut best = go(rest, b, used);
        for k in 0..b.len() {
            if !used[k] {
                used[k] = true;
                best = best.max(usize::from(*x == b[k]) + go(rest, b, used));
                used[k] = false;
            }
        }
        best
    }
    let (s, l) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    go(s, l, &mut vec![false; l.len()]) as f64 / s.len() as f64
}

#[test]
fn score_examples() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_lines(dir.path(), "a.txt", &["left,keep,right", "keep keep"]);
    let same = afsp(&["score", arg(&a), arg(&a)]);
    assert_eq!(same.status.code(), Some(0));
    assert_eq!(mean_of(&same), 1.0);

    let x = write_lines(dir.path(), "x.txt", &["left,left", "right"]);
    let y = write_lines(dir.path(), "y.txt", &["right,keep", "left,keep"]);
    assert_eq!(mean_of(&afsp(&["score", arg(&x), arg(&y)])), 0.0);

    let p: [&[&str]; 3] = [&["left", "keep", "right", "keep"], &["right", "right"], &["keep", "left", "left"]];
    let q: [&[&str]; 3] = [&["keep", "left"], &["right", "keep", "left", "right"], &["left", "keep", "keep", "left", "right"]];
    let join = |s: &[&[&str]; 3]| s.iter().map(|l| l.join(",")).collect::<Vec<_>>();
    let (pl, ql) = (join(&p), join(&q));
    let pf = write_lines(dir.path(), "p.txt", &pl.iter().map(String::as_str).collect::<Vec<_>>());
    let qf = write_lines(dir.path(), "q.txt", &ql.iter().map(String::as_str).collect::<Vec<_>>());
    let want = p.iter().zip(&q).map(|(a, b)| brute_force(a, b)).sum::<f64>() / 3.0;
    assert!((mean_of(&afsp(&["score", arg(&pf), arg(&qf)])) - want).abs() < 1e-4);
}

#[test]
fn score_names_the_empty_line() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_lines(dir.path(), "a.txt", &["left", "", "keep"]);
    let o = afsp(&["score", arg(&a), arg(&a)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}
