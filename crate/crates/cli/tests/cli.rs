use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use setinc_cli::builders::build_ideal;
use setinc_cli::commands::{self, Options};
use setinc_cli::{load, Loaded, ProblemFile};
use setinc_core::solver::certify_solution;
use setinc_core::{Matrix, Vector};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_setinc")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn certify_i1_at_origin() {
    let r = json(&run(&["certify", "i1", "--x", "0"]));
    assert_eq!(r["result"]["feasible"], true);
    assert_eq!(r["command"], "certify");
    assert_eq!(r["provenance"]["instance_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn solve_i1_in_one_step_with_trace() {
    let dir = std::env::temp_dir().join(format!("setinc-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let trace = dir.join("t.csv");
    let r = json(&run(&["solve", "i1", "--x0", "5", "--trace", trace.to_str().unwrap()]));
    assert_eq!(r["result"]["iterations"], 1);
    let csv = std::fs::read_to_string(&trace).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "iter,nu,step,slope");
    assert_eq!(csv.lines().count(), 3);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn bconst_i1_cone() {
    let r = json(&run(&["bconst", "i1", "--restriction", "cone"]));
    let v = r["result"]["bconst"].as_f64().unwrap();
    assert!((v - 1.0).abs() < 1e-6, "{v}");
}

#[test]
fn reports_echo_seed_and_tolerance() {
    let r = json(&run(&["eval", "i3", "--x", "2,0", "--seed", "11"]));
    assert_eq!(r["config"]["seed"], 11);
    assert!(r["config"]["tolerances"]["feas"].is_number());
    assert_eq!(r["provenance"]["version"], setinc_core::VERSION);
    let nu = r["result"]["merit"].as_f64().unwrap();
    assert!((nu - 1.0).abs() < 1e-12);
    let s = json(&run(&["solve", "i3", "--x0", "2,0", "--tol", "1e-8"]));
    assert_eq!(s["config"]["tol"], 1e-8);
}

#[test]
fn problem_files_from_disk() {
    let dir = std::env::temp_dir().join(format!("setinc-file-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("i4.json");
    let shown = run(&["show", "i4"]);
    std::fs::write(&path, &shown.stdout).unwrap();
    let from_file = json(&run(&["certify", path.to_str().unwrap(), "--x", "1,1"]));
    let builtin = json(&run(&["certify", "i4", "--x", "1,1"]));
    assert_eq!(from_file, builtin);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn error_categories() {
    let cases: [(&[&str], &str); 7] = [
        (&["certify", "nonexistent.json", "--x", "0"], "IoError:"),
        (&["certify", "i1", "--x", "0,0"], "DimensionError:"),
        (&["certify", "i1", "--x", "abc"], "ParseError:"),
        (&["bconst", "i2-fan", "--restriction", "cone"], "NotACone:"),
        (&["bconst", "i2"], "NotFanNormalizable:"),
        (&["banach", "--matrix", "[[1,2],[2,4]]"], "RankDeficient:"),
        (&["eval"], "UsageError:"),
    ];
    for (args, prefix) in cases {
        let out = run(args);
        assert!(!out.status.success(), "{args:?}");
        assert!(stderr(&out).starts_with(prefix), "{args:?}: {}", stderr(&out));
        assert!(out.stdout.is_empty());
    }
}

#[test]
fn same_seed_same_bytes() {
    for args in [&["audit", "i3", "--samples", "200", "--seed", "5"][..], &["tangent", "i3", "--x", "1,1", "--seed", "5"]] {
        assert_eq!(run(args).stdout, run(args).stdout);
    }
    let a = run(&["audit", "i3", "--samples", "200", "--seed", "5"]).stdout;
    let b = run(&["audit", "i3", "--samples", "200", "--seed", "6"]).stdout;
    assert_ne!(a, b);
}

/// The ideal-point problem is solved exactly at points dominated by every
/// image point.
#[test]
fn ideal_point_certificates_match_dominance() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..40 {
        let (n, m) = (rng.random_range(1..=3), rng.random_range(1..=3));
        let objective = Matrix::from_fn(m, n, |_, _| rng.random_range(-2i32..=2) as f64);
        let points: Vec<Vector> =
            (0..rng.random_range(1..=4)).map(|_| Vector::from_fn(n, |_, _| rng.random_range(-2i32..=2) as f64)).collect();
        let file = build_ideal(&points, &objective).unwrap();
        let loaded = Loaded::from_file(ProblemFile::parse(&file.to_json()).unwrap()).unwrap();
        for _ in 0..10 {
            let x = Vector::from_fn(n, |_, _| rng.random_range(-3i32..=3) as f64);
            let fx = &objective * &x;
            let dominated = points.iter().all(|r| (&objective * r - &fx).iter().all(|d| *d >= 0.0));
            let cert = certify_solution(&loaded.problem, &x, 1e-9).unwrap();
            assert_eq!(cert.feasible, dominated, "M = {objective}, R = {points:?}, x = {x}");
        }
    }
}

#[test]
fn ideal_point_with_identity_objective_has_exact_set() {
    let pts = [Vector::from_vec(vec![1.0, 2.0]), Vector::from_vec(vec![2.0, 1.0]), Vector::from_vec(vec![3.0, 3.0])];
    let file = build_ideal(&pts, &Matrix::identity(2, 2)).unwrap();
    let set = file.solution_set().unwrap().unwrap();
    assert!(set.contains(&Vector::from_vec(vec![1.0, 1.0]), 0.0));
    assert!(!set.contains(&Vector::from_vec(vec![1.0, 1.5]), 0.0));
}

#[test]
fn library_and_binary_agree() {
    let loaded = load("i3").unwrap();
    let opts = Options { seed: 4, ..Options::default() };
    let lib = commands::eval(&loaded, &Vector::from_vec(vec![2.0, -1.0]), &opts).unwrap().to_json();
    let bin = run(&["eval", "i3", "--x", "2,-1", "--seed", "4"]).stdout;
    assert_eq!(lib.as_bytes(), &bin[..]);
}
