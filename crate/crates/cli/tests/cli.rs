use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use tempfile::TempDir;

fn l1sketch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_l1sketch")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).trim().to_string()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn dense(values: &[i64]) -> String {
    values.iter().map(|v| format!("{v}\n")).collect()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn sketch(input: &Path, output: &Path, n: u64, m: u64, eps: f64, seed: &str) -> Output {
    l1sketch(&[
        "sketch",
        "--input",
        s(input),
        "--n",
        &n.to_string(),
        "--max-mag",
        &m.to_string(),
        "--eps",
        &eps.to_string(),
        "--seed",
        seed,
        "--output",
        s(output),
    ])
}

#[test]
fn exact_small_example() {
    let dir = TempDir::new().unwrap();
    let x = write(&dir, "x.txt", "3\n-2\n");
    let y = write(&dir, "y.txt", "1\n1\n");
    let out = l1sketch(&["exact", s(&x), s(&y)]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "5");
    assert_eq!(stdout(&l1sketch(&["exact", s(&x), s(&x)])), "0");
    let sparse = write(&dir, "s.txt", "2 -2\n1 3\n");
    assert_eq!(stdout(&l1sketch(&["exact", s(&sparse), s(&y)])), "5");
}

#[test]
fn exact_dimension_mismatch() {
    let dir = TempDir::new().unwrap();
    let x = write(&dir, "x.txt", "3\n-2\n");
    let y = write(&dir, "y.txt", "1\n1\n4\n");
    let out = l1sketch(&["exact", s(&x), s(&y)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(out.stdout.is_empty());
    let out = l1sketch(&["exact", s(&x), s(&y), "--n", "2"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(stdout(&l1sketch(&["exact", s(&x), s(&y), "--n", "3"])), "9");
}

#[test]
fn zero_vector_and_self_estimate() {
    let dir = TempDir::new().unwrap();
    let x = write(&dir, "x.txt", &dense(&[0; 100]));
    let a = dir.path().join("a.sk");
    let out = sketch(&x, &a, 100, 10, 0.5, "abc");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout(&out), s(&a));
    let out = l1sketch(&["estimate", s(&a), s(&a)]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "0");
}

#[test]
fn sketching_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let x = write(&dir, "x.txt", "4 7\n90 -3\n");
    let (a, b) = (dir.path().join("a.sk"), dir.path().join("b.sk"));
    assert!(sketch(&x, &a, 100, 10, 0.5, "1234").status.success());
    assert!(sketch(&x, &b, 100, 10, 0.5, "1234").status.success());
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn three_processes_estimate_the_distance() {
    let dir = TempDir::new().unwrap();
    let (n, m, eps) = (1_000u64, 50i64, 0.2);
    let mut good = 0;
    let runs = 10;
    for run in 0..runs {
        let mut rng = StdRng::seed_from_u64(run);
        let xv: Vec<i64> = (0..n).map(|_| rng.gen_range(-m..=m)).collect();
        let yv: Vec<i64> = (0..n).map(|_| rng.gen_range(-m..=m)).collect();
        let x = write(&dir, "x.txt", &dense(&xv));
        let y = write(&dir, "y.txt", &dense(&yv));
        let (a, b) = (dir.path().join("a.sk"), dir.path().join("b.sk"));
        let seed = format!("{:x}", 0xfeed + run);
        assert!(sketch(&x, &a, n, m as u64, eps, &seed).status.success());
        assert!(sketch(&y, &b, n, m as u64, eps, &seed).status.success());
        let est: f64 = stdout(&l1sketch(&["estimate", s(&a), s(&b)])).parse().unwrap();
        let truth: f64 = stdout(&l1sketch(&["exact", s(&x), s(&y)])).parse().unwrap();
        good += ((est - truth).abs() <= eps * truth) as u32;
    }
    assert!(good >= 6, "{good}/{runs} within eps");
}

#[test]
fn repetitions_write_suffixed_files() {
    let dir = TempDir::new().unwrap();
    let mut rng = StdRng::seed_from_u64(9);
    let xv: Vec<i64> = (0..500).map(|_| rng.gen_range(-20..=20)).collect();
    let yv: Vec<i64> = (0..500).map(|_| rng.gen_range(-20..=20)).collect();
    let x = write(&dir, "x.txt", &dense(&xv));
    let y = write(&dir, "y.txt", &dense(&yv));
    let (a, b) = (dir.path().join("a.sk"), dir.path().join("b.sk"));
    for (input, out) in [(&x, &a), (&y, &b)] {
        let args = [
            "sketch", "--input", s(input), "--n", "500", "--max-mag", "20", "--eps", "0.3", "--seed", "77",
            "--reps", "3", "--output", s(out),
        ];
        let res = l1sketch(&args);
        assert!(res.status.success());
        assert_eq!(stdout(&res).lines().count(), 3);
    }
    let mut files = Vec::new();
    for r in 0..3 {
        files.push(format!("{}.{r}", s(&a)));
        files.push(format!("{}.{r}", s(&b)));
    }
    assert_ne!(std::fs::read(&files[0]).unwrap(), std::fs::read(&files[2]).unwrap());
    let args: Vec<&str> = std::iter::once("estimate").chain(files.iter().map(String::as_str)).collect();
    let out = l1sketch(&args);
    assert!(out.status.success());
    let est: f64 = stdout(&out).parse().unwrap();
    let truth: f64 = stdout(&l1sketch(&["exact", s(&x), s(&y)])).parse().unwrap();
    assert!((est - truth).abs() <= 0.3 * truth, "{est} vs {truth}");
    // an odd number of files is not a set of pairs
    assert_eq!(l1sketch(&args[..4]).status.code(), Some(3));
}

#[test]
fn incompatible_seeds_exit_3() {
    let dir = TempDir::new().unwrap();
    let x = write(&dir, "x.txt", "1 5\n");
    let (a, b) = (dir.path().join("a.sk"), dir.path().join("b.sk"));
    assert!(sketch(&x, &a, 100, 10, 0.5, "1").status.success());
    assert!(sketch(&x, &b, 100, 10, 0.5, "2").status.success());
    let out = l1sketch(&["estimate", s(&a), s(&b)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(out.stdout.is_empty());
    let c = dir.path().join("c.sk");
    assert!(sketch(&x, &c, 100, 10, 0.6, "1").status.success());
    assert_eq!(l1sketch(&["estimate", s(&a), s(&c)]).status.code(), Some(3));
}

#[test]
fn malformed_input_exit_2_with_line_number() {
    let dir = TempDir::new().unwrap();
    let x = write(&dir, "x.txt", "1 5\n2 five\n");
    let out = sketch(&x, &dir.path().join("a.sk"), 100, 10, 0.5, "1");
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    let big = write(&dir, "big.txt", "1 50\n");
    assert_eq!(sketch(&big, &dir.path().join("a.sk"), 100, 10, 0.5, "1").status.code(), Some(2));
    let far = write(&dir, "far.txt", "101 1\n");
    assert_eq!(sketch(&far, &dir.path().join("a.sk"), 100, 10, 0.5, "1").status.code(), Some(2));
}

#[test]
fn bad_sketch_files_exit_2() {
    let dir = TempDir::new().unwrap();
    let x = write(&dir, "x.txt", "1 5\n");
    let a = dir.path().join("a.sk");
    assert!(sketch(&x, &a, 100, 10, 0.5, "1").status.success());
    let bytes = std::fs::read(&a).unwrap();
    let cut = write(&dir, "cut.sk", "");
    std::fs::write(&cut, &bytes[..bytes.len() / 2]).unwrap();
    let out = l1sketch(&["estimate", s(&a), s(&cut)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    let junk = write(&dir, "junk.sk", "not a sketch");
    assert_eq!(l1sketch(&["estimate", s(&junk), s(&a)]).status.code(), Some(2));
}

#[test]
fn parameter_errors_exit_3() {
    let dir = TempDir::new().unwrap();
    let x = write(&dir, "x.txt", "1 5\n");
    let a = dir.path().join("a.sk");
    assert_eq!(sketch(&x, &a, 100, 10, 1.5, "1").status.code(), Some(3));
    assert_eq!(sketch(&x, &a, 100, 10, 0.5, "xyz").status.code(), Some(3));
    assert_eq!(sketch(&x, &a, 0, 10, 0.5, "1").status.code(), Some(3));
    assert_eq!(l1sketch(&["sketch", "--input", s(&x)]).status.code(), Some(3));
    assert_eq!(l1sketch(&["frobnicate"]).status.code(), Some(3));
    assert_eq!(l1sketch(&["--help"]).status.code(), Some(0));
}

#[test]
fn undecodable_sketch_exits_4() {
    let dir = TempDir::new().unwrap();
    let mut rng = StdRng::seed_from_u64(3);
    let xv: Vec<i64> = (0..300).map(|_| rng.gen_range(-20..=20)).collect();
    let x = write(&dir, "x.txt", &dense(&xv));
    let a = dir.path().join("a.sk");
    assert!(sketch(&x, &a, 300, 20, 0.5, "5").status.success());
    let mut bytes = std::fs::read(&a).unwrap();
    // counters sit between the 99-byte header and the 600 rough accumulators
    let p = u64::from_le_bytes(bytes[71..79].try_into().unwrap());
    let end = bytes.len() - 600 * 16;
    for chunk in bytes[99..end].chunks_mut(4) {
        chunk.copy_from_slice(&(rng.gen_range(0..p) as u32).to_le_bytes());
    }
    let garbled = dir.path().join("g.sk");
    std::fs::write(&garbled, &bytes).unwrap();
    let out = l1sketch(&["estimate", s(&garbled), s(&a)]);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
}

#[test]
fn desk_scale_sketch_is_fast() {
    let dir = TempDir::new().unwrap();
    let mut rng = StdRng::seed_from_u64(4);
    let xv: Vec<i64> = (0..10_000).map(|_| rng.gen_range(-100..=100)).collect();
    let x = write(&dir, "x.txt", &dense(&xv));
    let start = Instant::now();
    let out = sketch(&x, &dir.path().join("a.sk"), 10_000, 100, 0.1, "6");
    let elapsed = start.elapsed();
    assert!(out.status.success());
    assert!(elapsed.as_secs_f64() < 1.0, "{elapsed:?}");
}

#[test]
fn selftest_runs() {
    let out = l1sketch(&["selftest", "--trials", "10", "--seed", "2"]);
    assert!(out.status.success(), "{}", stdout(&out));
    let report = stdout(&out);
    for suite in ["rangecount", "syndrome", "kset", "end-to-end"] {
        assert!(report.contains(suite), "{report}");
    }
    let out = l1sketch(&["selftest", "--trials", "0"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
}
