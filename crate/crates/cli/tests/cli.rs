use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use valiant_cli::problem::ProblemFile;

fn problems_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../problems")
}

fn shipped() -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = fs::read_dir(problems_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "toml"))
        .collect();
    files.sort();
    files
}

fn valiant(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_valiant"))
        .args(args)
        .env_remove("VALIANT_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn shipped_files_round_trip() {
    let files = shipped();
    assert!(files.len() >= 3);
    for path in files {
        let src = fs::read_to_string(&path).unwrap();
        let loaded = ProblemFile::load_str(&src).unwrap();
        let again = ProblemFile::load_str(&loaded.file.to_toml()).unwrap();
        assert_eq!(loaded.file, again.file, "{}", path.display());
    }
}

#[test]
fn solve_writes_trace_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let problem = problems_dir().join("two_slab.toml");
    let out = valiant(&[
        "solve",
        path_str(&problem),
        "--x0",
        "3,-2",
        "--out",
        path_str(dir.path()),
        "--plot",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let trace = fs::read_to_string(dir.path().join("two_slab.vpm.trace.csv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(lines.next(), Some("k,i_k,step_norm,residual,fejer_dist"));
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first[0], "0");
    assert_eq!(first[1], "1");
    assert!(first[4].parse::<f64>().is_ok());

    let summary = fs::read_to_string(dir.path().join("two_slab.vpm.summary.txt")).unwrap();
    assert!(summary.contains("status: converged"));
    assert!(summary.contains("fejer_check: pass"));
    assert!(dir.path().join("two_slab.vpm.residual.svg").exists());
}

#[test]
fn trace_every_thins_rows() {
    let dir = tempfile::tempdir().unwrap();
    let problem = problems_dir().join("random_halfspaces.toml");
    let p = path_str(&problem);
    let d = path_str(dir.path());
    valiant(&["solve", p, "--x0", "random:4", "--out", d]);
    let full = fs::read_to_string(dir.path().join("random_halfspaces.vpm.trace.csv")).unwrap();
    valiant(&[
        "solve",
        p,
        "--x0",
        "random:4",
        "--out",
        d,
        "--trace-every",
        "3",
    ]);
    let thin = fs::read_to_string(dir.path().join("random_halfspaces.vpm.trace.csv")).unwrap();
    let rows = full.lines().count() - 1;
    assert_eq!(thin.lines().count() - 1, rows.div_ceil(3));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = path_str(dir.path());
    let problem = problems_dir().join("random_halfspaces.toml");
    let p = path_str(&problem);

    let capped = valiant(&[
        "solve",
        p,
        "--x0",
        "random:1",
        "--max-sweeps",
        "1",
        "--tol",
        "1e-14",
        "--out",
        d,
    ]);
    assert_eq!(capped.status.code(), Some(2));
    let summary = fs::read_to_string(dir.path().join("random_halfspaces.vpm.summary.txt")).unwrap();
    assert!(summary.contains("status: unconverged"));

    let bad = dir.path().join("bad.toml");
    fs::write(
        &bad,
        "dim = 2\n\n[[sets]]\nkind = \"ball\"\ncenter = [0.0]\nradius = 1.0\nbeta = 0.1\n",
    )
    .unwrap();
    let out = valiant(&["solve", path_str(&bad), "--out", d]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line 3"), "{stderr}");

    assert_eq!(
        valiant(&["solve", p, "--tau", "2.5", "--out", d])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        valiant(&["solve", p, "--method", "arm", "--out", d])
            .status
            .code(),
        Some(1)
    );
    assert_ne!(
        valiant(&["solve", p, "--method", "newton"]).status.code(),
        Some(0)
    );
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for problem in shipped() {
        for dir in [&a, &b] {
            let out = valiant(&[
                "solve",
                path_str(&problem),
                "--x0",
                "random:11",
                "--out",
                path_str(dir.path()),
            ]);
            assert_eq!(out.status.code(), Some(0));
        }
        let name = format!(
            "{}.vpm.trace.csv",
            problem.file_stem().unwrap().to_str().unwrap()
        );
        assert_eq!(
            fs::read(a.path().join(&name)).unwrap(),
            fs::read(b.path().join(&name)).unwrap()
        );
    }
}

#[test]
fn compare_lists_every_method() {
    let dir = tempfile::tempdir().unwrap();
    let problem = problems_dir().join("two_slab.toml");
    let out = valiant(&[
        "compare",
        path_str(&problem),
        "--x0",
        "random:2",
        "--out",
        path_str(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let table = String::from_utf8(out.stdout).unwrap();
    for m in ["vpm", "bik", "relaxed", "arm"] {
        assert!(table.lines().any(|l| l.starts_with(m)), "{table}");
    }
    let csv = fs::read_to_string(dir.path().join("two_slab.compare.csv")).unwrap();
    assert!(csv.starts_with("method,k,residual\n"));

    let mixed = problems_dir().join("ball_box.toml");
    let out = valiant(&["compare", path_str(&mixed), "--out", path_str(dir.path())]);
    let table = String::from_utf8(out.stdout).unwrap();
    assert!(!table.lines().any(|l| l.starts_with("arm")));
}

#[test]
fn arm_and_vpm_traces_agree_on_slabs() {
    let dir = tempfile::tempdir().unwrap();
    let problem = problems_dir().join("two_slab.toml");
    for m in ["vpm", "arm"] {
        valiant(&[
            "solve",
            path_str(&problem),
            "--method",
            m,
            "--x0",
            "7,-4",
            "--tau",
            "0.7",
            "--out",
            path_str(dir.path()),
        ]);
    }
    let read = |m: &str| -> Vec<Vec<f64>> {
        fs::read_to_string(dir.path().join(format!("two_slab.{m}.trace.csv")))
            .unwrap()
            .lines()
            .skip(1)
            .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
            .collect()
    };
    let (vpm, arm) = (read("vpm"), read("arm"));
    assert_eq!(vpm.len(), arm.len());
    for (a, b) in vpm.iter().zip(&arm) {
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()), "{a:?} vs {b:?}");
        }
    }
}

#[test]
fn verify_small_suite() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("report.csv");
    let out = valiant(&[
        "verify",
        "--suite",
        "fix",
        "--trials",
        "300",
        "--seed",
        "5",
        "--csv",
        path_str(&csv),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    let text = fs::read_to_string(csv).unwrap();
    assert!(text.starts_with("property,trials,violations,worst_margin,seed\n"));
    assert_eq!(text.lines().count(), 1 + 4);
}
