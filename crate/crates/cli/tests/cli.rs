use std::fs;
use std::process::{Command, Output};

fn flt5(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flt5"))
        .args(args)
        .env_remove("FLT5_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn witness_line() {
    let o = flt5(&["witness", "13"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "p=13 n=10 q=131 method=theorem\n");
    let o = flt5(&["witness", "83"]);
    assert_eq!(stdout(&o), "p=83 n=56 q=4649 method=exceptional\n");
    let o = flt5(&["witness", "7"]);
    assert_eq!(stdout(&o), "p=7 n=10 q=71 method=corollary2b\n");
}

#[test]
fn witness_with_given_n() {
    let googol = format!("1{}267", "0".repeat(97));
    let o = flt5(&["witness", &googol, "--n", "754"]);
    assert_eq!(o.status.code(), Some(0));
    let line = stdout(&o);
    assert!(line.contains("n=754") && line.ends_with("method=theorem primality=probable\n"), "{line}");
    let o = flt5(&["witness", "37", "--n", "30"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("fails"));
}

#[test]
fn exponent_three_is_refused() {
    let o = flt5(&["witness", "3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("12^3"));
    assert_eq!(flt5(&["witness", "15"]).status.code(), Some(2));
}

#[test]
fn wendt_commands() {
    assert_eq!(stdout(&flt5(&["wendt", "10", "--factor"])), "-3 * 11^9 * 31^3\n");
    assert_eq!(stdout(&flt5(&["wendt", "2"])), "-3\n");
    assert_eq!(stdout(&flt5(&["wendt-divides", "89", "8"])), "false\n");
    assert_eq!(stdout(&flt5(&["wendt-divides", "31", "10"])), "true\n");
    assert_eq!(flt5(&["wendt-divides", "11", "3"]).status.code(), Some(2));
    assert_eq!(flt5(&["wendt-divides", "91", "10"]).status.code(), Some(2));
    assert_eq!(flt5(&["wendt", "1000"]).status.code(), Some(2));
}

#[test]
fn traces_and_exceptional() {
    assert_eq!(stdout(&flt5(&["aq", "--q", "89"])), "q=89 a=(-6, -6)\n");
    assert_eq!(flt5(&["aq", "--q", "13"]).status.code(), Some(2));
    let o = flt5(&["check-exceptional", "127", "4"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("q=509"));
    assert_eq!(flt5(&["check-exceptional", "11", "6"]).status.code(), Some(1));
}

#[test]
fn custom_curve_file() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("e.txt");
    fs::write(&good, "0,0 -1,1 0,0 0,-1 0,0\n").unwrap();
    let o = flt5(&["aq", "--q", "11", "--curve", good.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "0,0 0,0 0,0 -1,0 0,0\n").unwrap();
    let o = flt5(&["aq", "--q", "11", "--curve", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("validation"));
    let empty = dir.path().join("empty.txt");
    fs::write(&empty, "").unwrap();
    assert_eq!(
        flt5(&["aq", "--q", "11", "--curve", empty.to_str().unwrap()]).status.code(),
        Some(2)
    );
}

#[test]
fn verify_and_recheck() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.jsonl");
    let out_s = out.to_str().unwrap();
    let o = flt5(&["verify", "--from", "5", "--to", "100", "--out", out_s, "-q"]);
    assert_eq!(o.status.code(), Some(0));
    let log = fs::read_to_string(&out).unwrap();
    assert_eq!(log.lines().count(), 23);
    let o = flt5(&["verify", "--recheck", out_s]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("23 accepted"));

    let tampered = log.replacen(r#""q":131"#, r#""q":133"#, 1);
    fs::write(&out, tampered).unwrap();
    let o = flt5(&["verify", "--recheck", out_s]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("line 4"));
}

#[test]
fn verify_resume_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    let run = |path: &std::path::Path, extra: &[&str]| {
        let mut args = vec!["verify", "--from", "5", "--to", "5000", "--out", path.to_str().unwrap(), "-q"];
        args.extend_from_slice(extra);
        flt5(&args)
    };
    assert_eq!(run(&a, &["--threads", "1"]).status.code(), Some(0));
    assert_eq!(run(&b, &["--threads", "3", "--shard", "50"]).status.code(), Some(0));
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    // a completed checkpoint makes --resume a no-op
    assert_eq!(run(&b, &["--resume", "--shard", "50"]).status.code(), Some(0));
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let o = Command::new(env!("CARGO_BIN_EXE_flt5"))
        .args(["verify", "--from", "5", "--to", "5000", "--out", b.to_str().unwrap(), "-q"])
        .env("FLT5_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(flt5(&["verify", "--from", "5"]).status.code(), Some(2));
    assert_eq!(flt5(&["verify", "--bogus"]).status.code(), Some(2));
    assert_eq!(flt5(&["nonsense"]).status.code(), Some(2));
    assert_eq!(flt5(&["verify", "--recheck", "/nonexistent/file"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.jsonl");
    let o = flt5(&["verify", "--from", "2", "--to", "100", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_flt5"))
        .args(["verify", "--from", "5", "--to", "100", "--out", out.to_str().unwrap()])
        .env("FLT5_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn ring_checks() {
    let o = flt5(&["lemma1-check"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 6);
    let o = flt5(&["lemma1-check", "--pclass", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(flt5(&["lemma1-check", "--pclass", "3"]).status.code(), Some(2));
    let o = flt5(&["lemma3-check", "--samples", "20"]);
    let text = stdout(&o);
    assert!(text.contains("(1, u^2+2u): expected (5, 5, 4), 20/20 samples agree"), "{text}");
}
