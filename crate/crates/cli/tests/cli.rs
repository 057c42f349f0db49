use std::path::PathBuf;
use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_basecheck")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("basecheck-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, contents).unwrap();
    p
}

fn committee_file(n: &str, variant: &str) -> PathBuf {
    let o = bin(&["committee", "--n", n, "--variant", variant]);
    assert!(o.status.success());
    scratch(&format!("committee-{n}-{variant}.json"), &stdout(&o))
}

const SMALL: &str = r#"{
    "agents": 2, "atoms": ["p", "q"],
    "gamma": {"1": ["p", "p -> q"], "2": ["q"]}, "base": {"1": ["p"]},
    "valuation": ["p", "q"], "query": "O 1 p"
}"#;

#[test]
fn exit_codes() {
    let model = committee_file("3", "first");
    let m = model.to_str().unwrap();
    let o = bin(&["check", "--model", m]);
    assert_eq!((stdout(&o).trim(), o.status.code()), ("TRUE", Some(0)));
    let o = bin(&["check", "--model", m, "--formula", "K 1 false"]);
    assert_eq!((stdout(&o).trim(), o.status.code()), ("FALSE", Some(1)));
    let o = bin(&["check", "--model", committee_file("3", "second").to_str().unwrap(), "--max-nodes", "50"]);
    assert_eq!((stdout(&o).trim(), o.status.code()), ("KO", Some(2)));
    let o = bin(&["check", "--model", m, "--formula", "K 1 ("]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("1:6"));
    let o = bin(&["check", "--model", "/nonexistent/model.json"]);
    assert_eq!(o.status.code(), Some(3));
    let o = bin(&["check", "--model", m, "--formula", "B 9 p"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn statistics() {
    let model = committee_file("3", "first");
    let o = bin(&["check", "--model", model.to_str().unwrap(), "--stats", "json"]);
    let line = stdout(&o).lines().nth(1).unwrap().to_string();
    let v: serde_json::Value = serde_json::from_str(&line).unwrap();
    assert_eq!(v["ratoms"], 100);
    assert_eq!(v["state_exponent"], 309);
    let o = bin(&["check", "--model", model.to_str().unwrap(), "--stats", "text"]);
    assert!(stdout(&o).contains("atom_count: 9"));
}

#[test]
fn engines_agree() {
    let model = scratch("small.json", SMALL);
    let m = model.to_str().unwrap();
    let file = scratch("query.txt", "K 1 (p -> q) | W 2 ~q\n");
    for q in ["O 1 p", "K 1 q", "W 2 ~q", "~K 2 ~B 1 p", "[+1 p -> q] K 1 q", file.to_str().unwrap()] {
        let a = bin(&["check", "--model", m, "--formula", q, "--engine", "bdd"]);
        let b = bin(&["check", "--model", m, "--formula", q, "--engine", "enumerate"]);
        let c = bin(&["check", "--model", m, "--formula", q]);
        assert_eq!(stdout(&a), stdout(&b), "{q}");
        assert_eq!(stdout(&a), stdout(&c), "{q}");
        assert_eq!(a.status.code(), b.status.code());
    }
}

#[test]
fn bench_csv() {
    let out = scratch("bench.csv", "");
    let o = bin(&["bench-committee", "--variant", "first", "--min", "3", "--max", "6", "--csv", out.to_str().unwrap()]);
    assert!(o.status.success());
    let mut r = csv::Reader::from_path(&out).unwrap();
    let header: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, ["n", "atom_count", "ratoms", "state_exponent", "verdict", "wall_ms", "peak_nodes"]);
    let rows: Vec<csv::StringRecord> = r.records().map(Result::unwrap).collect();
    let ratoms: Vec<&str> = rows.iter().map(|r| &r[2]).collect();
    assert_eq!(ratoms, ["100", "164", "244", "340"]);
    let verdicts: Vec<&str> = rows.iter().map(|r| &r[4]).collect();
    assert_eq!(verdicts, ["TRUE", "FALSE", "FALSE", "FALSE"]);
    for row in &rows {
        let num = |k: usize| row[k].parse::<usize>().unwrap();
        assert_eq!(num(3), num(1) + num(0) * num(2));
    }
    let o = bin(&["bench-committee", "--variant", "second", "--min", "3", "--max", "4"]);
    let text = stdout(&o);
    assert!(text.lines().nth(1).unwrap().starts_with("3,9,133,408,TRUE,"), "{text}");
    assert!(text.lines().nth(2).unwrap().starts_with("4,16,210,856,"));
}

#[test]
fn translate() {
    let model = scratch("small-t.json", SMALL);
    let m = model.to_str().unwrap();
    let o = bin(&["translate", "--model", m, "--formula", "false"]);
    assert!(stdout(&o).contains("p cnf 0 1\n0\n"), "{}", stdout(&o));
    let o = bin(&["translate", "--model", m, "--formula", "K 1 p"]);
    let text = stdout(&o);
    assert!(text.starts_with("c map "));
    assert!(text.contains("p cnf "));
    let o = bin(&["translate", "--model", committee_file("3", "first").to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).lines().any(|l| l.starts_with("c map ") && l.ends_with("vote(3,c3)@1")));
}
