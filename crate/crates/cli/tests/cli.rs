use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use kronred::solver::solve_interior;
use kronred_cli::format::{load_network, ReducedFile};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn networks() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../networks")
}

fn net(name: &str) -> String {
    networks().join(name).display().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kronred")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

const VALID: &[&str] = &[
    "diode_opposite.toml",
    "diode_same.toml",
    "mixed_chain.toml",
    "cocontent_pair.toml",
    "linear_star.toml",
    "linear_series.toml",
    "quadratic_triangle.toml",
    "diode_triangle.toml",
    "memristor_pair.toml",
];

#[test]
fn shipped_networks_pass_check() {
    for name in VALID {
        let o = run(&["check", &net(name)]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", stdout(&o));
        assert!(stdout(&o).ends_with("all checks passed\n"));
    }
}

#[test]
fn check_failures_exit_one() {
    let o = run(&["check", &net("invalid/not_monotone.toml")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("[FAIL] strong convexity, edge 0 (1 -> 0) `tanh(y) - y`"));
    let o = run(&["check", &net("invalid/disconnected.toml")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("[FAIL] connectivity: 2 component(s)"));
    // other verbs refuse the same files with the same code
    let o = run(&["solve", &net("invalid/not_monotone.toml"), "--set", "1=0,2=0"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn parse_errors_exit_two_with_location() {
    let o = run(&["check", &net("invalid/syntax_error.toml")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("edges[0] (0 -> 1): law `exp(y - 1`"), "{}", stderr(&o));
    let o = run(&["check", &net("missing.toml")]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
}

fn value_of(text: &str, key: &str) -> f64 {
    let line = text.lines().find(|l| l.trim_start().starts_with(key)).unwrap_or_else(|| panic!("{key} in {text}"));
    line.split('=').nth(1).unwrap().trim().parse().unwrap()
}

#[test]
fn solve_prints_the_interior_solution() {
    let o = run(&["solve", &net("diode_opposite.toml"), "--set", "1=1", "--set", "2=0"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    // ln(2e/(1+e)), from equal and opposite diode currents
    let oracle = (2.0 * std::f64::consts::E / (1.0 + std::f64::consts::E)).ln();
    assert!((value_of(&text, "0 =") - oracle).abs() < 1e-12);
    assert!((oracle - 0.379885).abs() < 1e-6);
    assert!(text.contains("(balanced)"));

    let o = run(&["solve", &net("mixed_chain.toml"), "--set", "a=0.7,b=0.7,d=0.7"]);
    let text = stdout(&o);
    for node in ["a =", "b =", "d ="] {
        assert!(value_of(&text, node).abs() < 1e-12);
    }
    for node in ["c1 =", "c2 ="] {
        assert!((value_of(&text, node) - 0.7).abs() < 1e-12);
    }

    let o = run(&["solve", &net("diode_opposite.toml"), "--set", "1=1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("missing boundary assignment for 2"));
}

#[test]
fn memristor_domain_changes_labels_only() {
    let args = ["--set", "1=0.8,2=-0.3"];
    let r = stdout(&run(&[&["solve", &net("diode_opposite.toml")][..], &args].concat()));
    let m = stdout(&run(&[&["solve", &net("memristor_pair.toml")][..], &args].concat()));
    assert_ne!(r, m);
    assert!(m.contains("boundary charges:") && m.contains("reduced action"));
    let numbers = |s: &str| -> Vec<String> {
        s.split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| t.parse::<f64>().is_ok())
            .map(String::from)
            .collect()
    };
    assert_eq!(numbers(&r), numbers(&m));
}

#[test]
fn curve_matches_closed_forms() {
    let o = run(&["curve", &net("diode_opposite.toml"), "--pair", "1,2", "--vmin", "-2", "--vmax", "2", "--points", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let rows: Vec<Vec<f64>> = stdout(&o)
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(stdout(&o).lines().next(), Some("V,I,Ghat"));
    assert!(rows.windows(2).all(|w| w[1][0] > w[0][0]));
    assert_eq!(rows[2], vec![0.0, 0.0, 0.0]);
    assert!((rows[4][1] - 0.7615942).abs() < 1e-7);

    let o = run(&["curve", &net("diode_same.toml"), "--pair", "2,1", "--vmin", "0", "--vmax", "2", "--points", "3"]);
    let last = stdout(&o).lines().last().unwrap().to_string();
    let i: f64 = last.split(',').nth(1).unwrap().parse().unwrap();
    assert!((i - 1.7182818).abs() < 1e-7);
    // 17 significant digits
    assert_eq!(last.split(',').next().unwrap(), "2.0000000000000000e0");
}

#[test]
fn curve_failures_are_marked() {
    let o = run(&["curve", &net("linear_series.toml"), "--pair", "1,2", "--vmin", "0", "--vmax", "40", "--points", "3"]);
    assert_eq!(o.status.code(), Some(3));
    let text = stdout(&o);
    assert!(text.lines().nth(1).unwrap().starts_with("0.0000000000000000e0,0.0"));
    assert!(text.lines().last().unwrap().ends_with("NaN,NaN"));
    assert!(stderr(&o).contains("2 of 3 points failed"));
    let o = run(&["curve", &net("linear_series.toml"), "--pair", "1,1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn power_checks() {
    let o = run(&["power", &net("linear_series.toml"), "--set", "1=1,2=-0.5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("(agree)"));
    let o = run(&["power", &net("diode_opposite.toml"), "--set", "1=1,2=0"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stdout(&o).contains("refused"));
}

fn reduce_to(name: &str, dir: &Path, extra: &[&str]) -> (Output, PathBuf) {
    let out = dir.join(name);
    let path = out.display().to_string();
    let o = run(&[&["reduce", &net(name), "--out", &path][..], extra].concat());
    (o, out)
}

#[test]
fn reduce_examples() {
    let dir = tempfile::tempdir().unwrap();
    let (o, path) = reduce_to("diode_opposite.toml", dir.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let file = ReducedFile::load(&path).unwrap();
    assert_eq!(file.edges.len(), 1);
    assert!(file.certificate.acyclic && file.certificate.accepted);
    let t = &file.edges[0].table;
    for (y, i) in t.y.iter().zip(&t.current) {
        assert!((i - (0.5 * y).tanh()).abs() <= 1e-8);
    }

    let (o, path) = reduce_to("linear_star.toml", dir.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let file = ReducedFile::load(&path).unwrap();
    assert_eq!(file.edges.len(), 3);
    for e in &file.edges {
        assert!((e.exact_weight.unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(e.table.slope.iter().all(|s| (s - 1.0 / 3.0).abs() < 1e-8));
    }

    let (o, path) = reduce_to("mixed_chain.toml", dir.path(), &[]);
    assert_eq!(o.status.code(), Some(0));
    assert!(ReducedFile::load(&path).unwrap().certificate.acyclic);

    let (o, path) = reduce_to("diode_triangle.toml", dir.path(), &[]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("NOT accepted"));
    assert!(!ReducedFile::load(&path).unwrap().certificate.accepted);
}

#[test]
fn reduce_is_deterministic() {
    let a = run(&["reduce", &net("mixed_chain.toml"), "--seed", "7", "--samples", "16"]);
    let b = Command::new(env!("CARGO_BIN_EXE_kronred"))
        .args(["reduce", &net("mixed_chain.toml"), "--seed", "7", "--samples", "16"])
        .env("KRONRED_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let c = run(&["reduce", &net("mixed_chain.toml"), "--seed", "8", "--samples", "16"]);
    assert_ne!(a.stdout, c.stdout);

    let bad = Command::new(env!("CARGO_BIN_EXE_kronred"))
        .args(["check", &net("diode_same.toml")])
        .env("KRONRED_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn reduced_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["diode_opposite.toml", "diode_same.toml", "mixed_chain.toml", "cocontent_pair.toml", "linear_series.toml"] {
        let (o, path) = reduce_to(name, dir.path(), &[]);
        assert_eq!(o.status.code(), Some(0), "{name}");
        let reduced = ReducedFile::load(&path).unwrap().to_reduced().unwrap();
        let (original, _) = load_network(&networks().join(name)).unwrap();
        let n_b = original.partition().boundary().len();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..50 {
            let z_b: Vec<f64> = (0..n_b).map(|_| rng.gen_range(-1.9..1.9)).collect();
            let j = solve_interior(&original, &z_b, None).unwrap().j_b;
            let scale = 1.0 + j.iter().map(|v| v.abs()).fold(0.0, f64::max);
            let got = reduced.nodal_currents(&z_b).unwrap();
            let err = got.iter().zip(&j).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err <= 1e-6 * scale, "{name}: {err}");
        }
    }
}
