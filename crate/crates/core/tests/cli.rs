use std::path::{Path, PathBuf};
use std::process::Command;

use tempfile::TempDir;

const EXAMPLE_THEORY: &str = "\
func a/0
pred P/1
pred R/2
clause c1: (P(a), 0.5)
clause c2: (P(a), 0.6) & (R(a, x), 0.3)
clause c3: (P(a), 0.5) -> (R(a, a), 0.1)
clause c4: (P(a), 0.6) & (R(a, x), 0.3) -> (P(x), 0.8)
clause c5: forall x. (P(x), 0.6) & (R(a, x), 0.3)
clause c6: forall x. (P(x), 0.6) & (R(a, x), 0.3) -> (P(a), 0.9)
";

const SIMILAR: &str = "\
func a/0
func b/0
pred P/1
sim
clause e: (a ~= b, 1)
clause p: (P(a), 0.6)
";

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_fuzzy-horn")).args(args).output().unwrap();
    Run {
        code: out.status.code().unwrap(),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn check_accepts_the_example_clauses() {
    let dir = TempDir::new().unwrap();
    let th = write(&dir, "ex.th", EXAMPLE_THEORY);
    let r = run(&["check", "--theory", s(&th)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.contains("c5: HornClause"));
    assert!(r.stdout.trim_end().ends_with("all Horn"));
}

#[test]
fn check_rejects_negated_atom() {
    let dir = TempDir::new().unwrap();
    let th = write(&dir, "bad.th", "func a/0\npred P/1\nclause bad: ~P(a)\n");
    let r = run(&["check", "--theory", s(&th)]);
    assert_eq!(r.code, 1);
    assert!(r.stdout.contains("not Horn"));
}

#[test]
fn parse_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let th = write(&dir, "broken.th", "pred P/1\nclause c: (P(a), 0.5\n");
    let r = run(&["check", "--theory", s(&th)]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.starts_with("error:"));
    let r = run(&["solve", "--theory", s(&dir.path().join("missing.th"))]);
    assert_eq!(r.code, 2);
}

#[test]
fn eval_prints_exact_and_decimal() {
    let dir = TempDir::new().unwrap();
    let st = write(&dir, "m.st", "domain a b\npred P: (a) = 0.4\npred P: (b) = 0.7\npred R: (a) = 0.7\npred R: (b) = 0.4\n");
    let r = run(&["eval", "--structure", s(&st), "--formula", "forall x. (P(x),1) & (R(x),1)"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.contains("1/10 (0.1)"), "{}", r.stdout);
    let r = run(&["eval", "--quiet", "--structure", s(&st), "--formula", "exists x. P(x) & P(x) & P(x)"]);
    assert_eq!(r.stdout, "1/10\n");
}

#[test]
fn solve_example_listing() {
    let dir = TempDir::new().unwrap();
    let th = write(&dir, "ex.th", EXAMPLE_THEORY);
    let r = run(&["solve", "--theory", s(&th)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.contains("# is_model: true"));
    assert!(r.stdout.contains("degree P(a) = 9/10"), "{}", r.stdout);
    assert!(r.stdout.contains("degree R(a,a) = 3/10"), "{}", r.stdout);
}

#[test]
fn solve_merges_similar_constants() {
    let dir = TempDir::new().unwrap();
    let th = write(&dir, "s.th", SIMILAR);
    let r = run(&["solve", "--theory", s(&th)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.contains("class a b"));
    assert!(r.stdout.contains("degree P(b) = 3/5"));
    assert!(r.stdout.contains("# is_reduced: true"));
}

#[test]
fn solve_output_feeds_freehom() {
    let dir = TempDir::new().unwrap();
    let th = write(&dir, "s.th", SIMILAR);
    let st = dir.path().join("sol.st");
    let r = run(&["solve", "--quiet", "--theory", s(&th), "--out", s(&st)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let r = run(&["freehom", "--theory", s(&th), "--structure", s(&st)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.contains("homomorphism: pass"));
}

#[test]
fn freehom_rejects_non_model() {
    let dir = TempDir::new().unwrap();
    let th = write(&dir, "s.th", SIMILAR);
    let st = write(&dir, "n.st", "domain u\nsim\nfunc a: () -> u\nfunc b: () -> u\npred P: (u) = 0.5\n");
    let r = run(&["freehom", "--theory", s(&th), "--structure", s(&st)]);
    assert_eq!(r.code, 1);
    assert!(!r.stdout.contains("homomorphism: pass"));
}

#[test]
fn oracle_agrees_with_fixpoint() {
    let dir = TempDir::new().unwrap();
    let th = write(&dir, "s.th", SIMILAR);
    let r = run(&["oracle", "--theory", s(&th)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.contains("P(b): fixpoint 3/5, oracle 3/5"));
    assert!(r.stdout.trim_end().ends_with("AGREE"));
    let r = run(&["oracle", "--theory", s(&th), "--grid", "0"]);
    assert_eq!(r.code, 2);
}
