use std::fs;
use std::process::{Command, Output};

fn rxtx(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rxtx")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn verify_builtins() {
    let o = rxtx(&["verify", "--cases", "8"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("rxtx: 10/10 output identities verified"), "{s}");
    assert!(s.contains("strassen-xxt: 3/3 output identities verified"));
    assert!(s.contains("53 + 47 = 100"));
    assert!(s.contains("8/8 random integer cases agree"));
}

#[test]
fn verify_round_trip_and_mutation() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("rxtx.txt");
    assert_eq!(rxtx(&["export-scheme", "--out", good.to_str().unwrap()]).status.code(), Some(0));
    let o = rxtx(&["verify", "--scheme", good.to_str().unwrap(), "--cases", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));

    // Drop X7 from the right factor of m7 (X6 + X7 -> X6).
    let text = fs::read_to_string(&good).unwrap();
    let mutated: String = text
        .lines()
        .map(|l| {
            if let Some(rest) = l.strip_prefix("7 : ") {
                let (left, right) = rest.split_once(" | ").unwrap();
                let mut r: Vec<&str> = right.split(' ').collect();
                r[6] = "0";
                format!("7 : {left} | {}\n", r.join(" "))
            } else {
                format!("{l}\n")
            }
        })
        .collect();
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, mutated).unwrap();
    let o = rxtx(&["verify", "--scheme", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAILED C12"), "{}", stdout(&o));
}

#[test]
fn counts() {
    for (args, want) in [
        (&["count", "--algo", "rxtx", "--metric", "mults", "--n", "4"][..], "34"),
        (&["count", "--algo", "strassen-xxt", "--metric", "mults", "--n", "4"][..], "38"),
        (&["count", "--algo", "rxtx", "--metric", "ops", "--n", "4"][..], "134"),
        (&["count", "--algo", "winograd", "--metric", "ops", "--n", "4"][..], "214"),
        (&["count", "--algo", "rxtx", "--metric", "ops", "--n", "16"][..], "8236"),
    ] {
        let o = rxtx(args);
        assert_eq!(o.status.code(), Some(0));
        assert_eq!(stdout(&o).trim(), want, "{args:?}");
    }
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(rxtx(&["count", "--algo", "rxtx", "--n", "8"]).status.code(), Some(2));
    assert_eq!(rxtx(&["count", "--algo", "bogus", "--n", "4"]).status.code(), Some(2));
    assert_eq!(rxtx(&["table", "--max-exp", "0"]).status.code(), Some(2));
    assert_eq!(rxtx(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn table_is_deterministic_and_shows_crossovers() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        assert_eq!(rxtx(&["table", "--max-exp", "5", "--out", p.to_str().unwrap()]).status.code(), Some(0));
    }
    let (ta, tb) = (fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    let csv = String::from_utf8(ta).unwrap();
    let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
    let cell = |n: &str, col: &str| -> f64 {
        let row = csv.lines().find(|l| l.starts_with(&format!("{n},"))).unwrap();
        let i = header.iter().position(|h| *h == col).unwrap();
        row.split(',').nth(i).unwrap().parse().unwrap()
    };
    assert!(cell("1024", "r_plus_over_naive_ops") < 1.0);
    assert!(cell("256", "r_plus_over_s_plus") < 1.0);
    assert!(cell("256", "r_plus_over_naive_ops") > 1.0);

    let o = rxtx(&["table", "--max-exp", "1", "--out", "/nonexistent-dir/x.csv"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn bench_writes_json_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bench.json");
    let o = Command::new(env!("CARGO_BIN_EXE_rxtx"))
        .args(["bench", "--n", "64", "--reps", "3", "--seed", "5", "--out", out.to_str().unwrap()])
        .env("RXTX_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["runs"].as_array().unwrap().len(), 3);
    assert_eq!(v["threads"], 2);
    assert!(v["max_relative_deviation"].as_f64().unwrap() <= 1e-10);
    assert!(v["sampler"].as_str().unwrap().contains("ChaCha8"));
}

#[test]
fn bench_warns_on_padding() {
    let o = rxtx(&["bench", "--n", "30", "--reps", "1", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("zero padded"));
    assert_eq!(stdout(&o).lines().count(), 2);
}

#[test]
fn discovered_scheme_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("found.txt");
    let o = rxtx(&["discover", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("minimal cover: 5 products"));
    let o = rxtx(&["verify", "--scheme", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("3/3 output identities verified"));
}
