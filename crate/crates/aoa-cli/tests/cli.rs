use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn aoa(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aoa")).current_dir(dir).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

const T0: &str = "4 4 2\n1 1 1 1\n1 2 2 2\n2 1 2 2\n2 2 1 1\n";
const OA: &str = "4 3 2\n1 1 1\n1 2 2\n2 1 2\n2 2 1\n";

#[test]
fn eval_reports() {
    let d = TempDir::new().unwrap();
    fs::write(d.path().join("t0.txt"), T0).unwrap();
    fs::write(d.path().join("oa.txt"), OA).unwrap();
    let o = aoa(d.path(), &["eval", "t0.txt", "--p", "1"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("unbalance(p=1,t=2): 4\n"));
    assert!(stdout(&o).contains("tolerance(t=2): 1\n"));
    let o = aoa(d.path(), &["eval", "oa.txt"]);
    let out = stdout(&o);
    assert!(out.contains("oa(t=2): true") && out.contains("unbalance(p=2,t=2): 0") && out.contains("tolerance(t=2): 0"));
}

#[test]
fn construct_and_d_criteria() {
    let d = TempDir::new().unwrap();
    let o = aoa(d.path(), &["construct", "half", "3", "2", "1", "-o", "h.txt"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));
    assert!(fs::read_to_string(d.path().join("h.txt")).unwrap().starts_with("9 5 3\n"));
    let o = aoa(d.path(), &["eval", "h.txt", "--d-criteria", "--discrepancies"]);
    let out = stdout(&o);
    assert!(out.contains("D1: 9/5") && out.contains("D2: 9/5"), "{out}");
    assert!(out.contains("(squared 0.338644)"), "{out}");

    let o = aoa(d.path(), &["construct", "odd-ext", "5", "2", "1", "-o", "e.txt"]);
    assert_eq!(code(&o), 0);
    assert!(fs::read_to_string(d.path().join("e.txt")).unwrap().starts_with("50 12 5\n"));

    let o = aoa(d.path(), &["construct", "half", "6", "2", "1"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("6 is not a prime power"));
}

#[test]
fn exit_codes() {
    let d = TempDir::new().unwrap();
    fs::write(d.path().join("bad.txt"), "2 2 2\n1 1\n1 3\n").unwrap();
    let o = aoa(d.path(), &["eval", "bad.txt"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3, column 3"));
    assert_eq!(code(&aoa(d.path(), &["frobnicate"])), 1);
    assert_eq!(code(&aoa(d.path(), &["eval", "missing.txt"])), 1);
    assert_eq!(code(&aoa(d.path(), &["--help"])), 0);
}

#[test]
fn search_fronts_are_deterministic() {
    let d = TempDir::new().unwrap();
    let o = aoa(d.path(), &["search", "4", "4", "2", "--p", "1", "--seed", "7", "--out-dir", "a"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("unbalance=4 tolerance=1"));
    aoa(d.path(), &["search", "4", "4", "2", "--p", "1", "--seed", "7", "--out-dir", "b"]);
    for f in ["front.txt", "front.csv", "front_0.txt"] {
        assert_eq!(fs::read(d.path().join("a").join(f)).unwrap(), fs::read(d.path().join("b").join(f)).unwrap(), "{f}");
    }
    let o = aoa(d.path(), &["search", "9", "5", "3", "--encoding", "bicyclic", "--p", "2", "--seed", "1"]);
    assert!(stdout(&o).contains("unbalance=18 tolerance=1"), "{}", stdout(&o));
    let o = aoa(d.path(), &["search", "4", "3", "2"]);
    assert!(stdout(&o).contains("unbalance=0 tolerance=0"));
    assert_eq!(code(&aoa(d.path(), &["search", "5", "3", "2", "--encoding", "bicyclic"])), 1);
}

#[test]
fn ip_emission_and_verification() {
    let d = TempDir::new().unwrap();
    let o = aoa(d.path(), &["ip", "2", "4", "1", "--p", "1", "--eps", "1", "-o", "m.lp", "--mps", "m.mps"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("x: 16,"));
    let lp = fs::read_to_string(d.path().join("m.lp")).unwrap();
    assert!(lp.contains("Binaries\n") && lp.ends_with("End\n"));
    assert!(fs::read_to_string(d.path().join("m.mps")).unwrap().ends_with("ENDATA\n"));

    aoa(d.path(), &["ip", "3", "5", "1", "--sym", "semicyclic:2", "-o", "s.lp"]);
    let lp = fs::read_to_string(d.path().join("s.lp")).unwrap();
    assert_eq!(lp.lines().filter(|l| l.starts_with(" sim_")).count(), 78);

    // OA(4,3,2) in canonical row order: x for the third column, everything else zero
    let sol = "# OA encoding\nx_1_3_1 1\nx_2_3_2 1\nx_3_3_2 1\nx_4_3_1 1\nx_1_3_2 0\nx_2_3_1 0\nx_3_3_1 0\nx_4_3_2 0\n";
    fs::write(d.path().join("oa.sol"), sol).unwrap();
    let o = aoa(d.path(), &["ip-verify", "2", "3", "1", "oa.sol", "-o", "oa.txt"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("objective: 0\n") && stdout(&o).contains("objective identity: holds"));
    assert_eq!(fs::read_to_string(d.path().join("oa.txt")).unwrap().lines().next(), Some("4 3 2"));

    fs::write(d.path().join("bad.sol"), "x_1_3_1 one\n").unwrap();
    assert_eq!(code(&aoa(d.path(), &["ip-verify", "2", "3", "1", "bad.sol"])), 2);
    fs::write(d.path().join("two.sol"), sol.replace("x_1_3_2 0", "x_1_3_2 1")).unwrap();
    assert_eq!(code(&aoa(d.path(), &["ip-verify", "2", "3", "1", "two.sol"])), 3);
}

#[test]
fn catalog_workflow() {
    let d = TempDir::new().unwrap();
    let cat = d.path().join("cat");
    fs::create_dir(&cat).unwrap();
    for (s, k) in [(3, 5), (4, 6), (5, 7), (7, 9), (8, 10), (9, 11)] {
        let f = format!("h{s}.txt");
        let o = aoa(d.path(), &["construct", "half", &s.to_string(), "2", "1", "-o", &f]);
        assert_eq!(code(&o), 0);
        let o = aoa(d.path(), &["catalog", "add", "cat", &f, "--provenance", "construction", "--config", &format!("half {s} 2 1 k={k}")]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let o = aoa(d.path(), &["catalog", "list", "cat"]);
    assert_eq!(stdout(&o).lines().count(), 6);
    let o = aoa(d.path(), &["catalog", "list", "cat", "--s", "3"]);
    assert_eq!(stdout(&o).lines().count(), 1);
    assert!(stdout(&o).contains("s=3"));
    let o = aoa(d.path(), &["catalog", "recheck", "cat"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));

    // flip one cell of the s = 3 array
    let path = cat.join("9x5_s3_construction_0.txt");
    let text = fs::read_to_string(&path).unwrap();
    let edited = text.replacen("\n1 ", "\n2 ", 1);
    assert_ne!(edited, text);
    fs::write(&path, edited).unwrap();
    let o = aoa(d.path(), &["catalog", "recheck", "cat"]);
    assert_eq!(code(&o), 3);
    assert!(stdout(&o).contains("FAIL") && stdout(&o).contains("metrics mismatch"));

    fs::write(cat.join("junk.json"), "{not json").unwrap();
    let o = aoa(d.path(), &["catalog", "list", "cat"]);
    assert_ne!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("corrupt"));
}
