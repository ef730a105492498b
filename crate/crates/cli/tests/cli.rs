use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use sealedbottle::formats::read_metrics_rows;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sealedbottle"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn field(text: &str, key: &str) -> u64 {
    let pat = format!("{key}=");
    let start = text
        .find(&pat)
        .unwrap_or_else(|| panic!("no {key} in {text}"))
        + pat.len();
    text[start..]
        .split(|c: char| !c.is_ascii_digit())
        .next()
        .unwrap()
        .parse()
        .unwrap()
}

fn gen(dir: &Path, name: &str, extra: &[&str]) -> String {
    let path = dir.join(name);
    let path_s = path.to_str().unwrap();
    let mut args = vec!["gen", "-o", path_s];
    args.extend_from_slice(extra);
    let o = run(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    path_s.to_string()
}

const RUN: &str = r#"
version = 1
[population]
n = 300
attrs = 6
seed = 1
[topology]
kind = "random-geometric"
radius = 0.15
[request]
protocol = "P2"
p = 11
initiator = 4
from_initiator = 4
theta = 0.5
[sim]
seeds = [1, 2]
capture = true
[sweep]
protocols = ["P2"]
ps = [3, 5, 7, 11, 13]
thetas = [0.5, 0.6, 0.8, 1.0]
seeds = [1, 2]
m_t = 2
"#;

#[test]
fn gen_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = run(&[
        "gen",
        "--n",
        "500",
        "--seed",
        "9",
        "-o",
        dir.path().join("a.csv").to_str().unwrap(),
    ]);
    let b = run(&[
        "gen",
        "--n",
        "500",
        "--seed",
        "9",
        "-o",
        dir.path().join("b.csv").to_str().unwrap(),
    ]);
    assert!(a.status.success() && b.status.success());
    assert!(stdout(&a).contains("uniqueness="));
    assert_eq!(
        fs::read(dir.path().join("a.csv")).unwrap(),
        fs::read(dir.path().join("b.csv")).unwrap()
    );
}

#[test]
fn gen_rejects_empty_population() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "gen",
        "--n",
        "0",
        "-o",
        dir.path().join("x.csv").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn load_summarizes_and_writes_stats() {
    let dir = tempfile::tempdir().unwrap();
    let pop = gen(dir.path(), "p.csv", &["--n", "200", "--categories", "2"]);
    let stats = dir.path().join("s.json");
    let o = run(&["load", &pop, "--stats-out", stats.to_str().unwrap()]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(field(&text, "users"), 200);
    assert!(text.contains("entropy_bits="));
    assert!(fs::read_to_string(stats)
        .unwrap()
        .contains("\"population\": 200"));
}

#[test]
fn match_candidates_shrink_with_p_and_agree_with_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let pop = gen(
        dir.path(),
        "p.csv",
        &["--n", "2000", "--seed", "3", "--attrs", "6"],
    );
    let mut last = u64::MAX;
    for p in ["5", "7", "13"] {
        let o = run(&[
            "match",
            &pop,
            "--protocol",
            "p2",
            "--p",
            p,
            "--from-user",
            "5",
            "--m-t",
            "4",
            "--theta",
            "0.5",
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let text = stdout(&o);
        assert_eq!(field(&text, "disagreements"), 0);
        let cand = field(&text, "candidates");
        assert!(cand <= last, "p={p}: {cand} > {last}");
        assert!(cand >= field(&text, "oracle_matches"));
        last = cand;
    }
}

#[test]
fn exact_copy_is_a_perfect_match() {
    let dir = tempfile::tempdir().unwrap();
    let pop = dir.path().join("p.csv");
    fs::write(&pop, "user_id,category,value\n0,tag,chess\n0,city,Paris\n1,tag,chess\n1,city,Paris\n2,tag,jazz\n").unwrap();
    let o = run(&[
        "match",
        pop.to_str().unwrap(),
        "--optional",
        "chess",
        "--optional",
        "city=Paris",
        "--theta",
        "1",
        "--list",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(field(&text, "perfect") >= 1, "{text}");
    assert_eq!(field(&text, "accepted"), 2);
}

#[test]
fn modulus_too_small_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let pop = gen(dir.path(), "p.csv", &["--n", "50", "--attrs", "6"]);
    let o = run(&[
        "match",
        &pop,
        "--p",
        "3",
        "--from-user",
        "0",
        "--m-t",
        "4",
        "--theta",
        "0.5",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn simulate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, RUN).unwrap();
    let mut traces = Vec::new();
    for k in 0..2 {
        let trace = dir.path().join(format!("t{k}.jsonl"));
        let metrics = dir.path().join(format!("m{k}.csv"));
        let o = run(&[
            "simulate",
            cfg.to_str().unwrap(),
            "--trace",
            trace.to_str().unwrap(),
            "--metrics",
            metrics.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(stdout(&o).contains("disagreements=0"));
        traces.push((fs::read(trace).unwrap(), fs::read(metrics).unwrap()));
    }
    assert_eq!(traces[0], traces[1]);
    let text = String::from_utf8(traces[0].0.clone()).unwrap();
    assert!(text.starts_with("# sealedbottle "));
    assert!(text.contains("\"event\":\"broadcast\""));
}

#[test]
fn sweep_writes_one_row_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, RUN).unwrap();
    let out = dir.path().join("sweep.csv");
    let o = run(&[
        "sweep",
        cfg.to_str().unwrap(),
        "-o",
        out.to_str().unwrap(),
        "--jobs",
        "2",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_metrics_rows(fs::read(&out).unwrap().as_slice()).unwrap();
    assert_eq!(rows.len(), 5 * 4 * 2);
    for r in &rows {
        let cand: f64 = r["candidate_fraction"].parse().unwrap();
        let truth: f64 = r["matching_fraction"].parse().unwrap();
        assert!(cand >= truth, "{r:?}");
    }
    // serial and parallel sweeps agree
    let serial = dir.path().join("serial.csv");
    assert!(run(&[
        "sweep",
        cfg.to_str().unwrap(),
        "-o",
        serial.to_str().unwrap()
    ])
    .status
    .success());
    assert_eq!(fs::read(out).unwrap(), fs::read(serial).unwrap());
}

#[test]
fn unknown_config_key_names_its_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(
        &cfg,
        "version = 1\n[population]\nn = 10\n[sim]\nwindw = 5\n",
    )
    .unwrap();
    let o = run(&["simulate", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("sim") && err.contains("windw"), "{err}");
}

#[test]
fn geo_default_pair() {
    let o = run(&["geo"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("vicinity_size=19"));
    assert!(text.contains("overlap=9/19"));
    assert!(text.contains("match=true oracle=true"));
}
