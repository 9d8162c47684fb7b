use std::path::Path;
use std::process::{Command, Output};

fn slsqp(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slsqp"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn solve_example_converges() {
    let dir = tempfile::tempdir().unwrap();
    let o = slsqp(
        dir.path(),
        &[
            "solve",
            "--problem",
            "example2d",
            "--save-file",
            "h.jsonl",
            "--summary-file",
            "s.out",
            "--visualize",
        ],
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let out = stdout(&o);
    let xline = out.lines().find(|l| l.starts_with("x*:")).unwrap();
    let xs: Vec<f64> = xline
        .trim_start_matches("x*:")
        .trim()
        .trim_matches(|c| c == '[' || c == ']')
        .split(',')
        .map(|v| v.trim().parse().unwrap())
        .collect();
    assert!(xs.iter().all(|v| (v - 0.5).abs() < 1e-6), "{xline}");
    assert!(out.contains("status:      Converged"));
    for f in ["h.jsonl", "s.out", "slsqp_plot.png"] {
        assert!(dir.path().join(f).exists(), "{f} missing");
    }
    assert!(!dir.path().join("slsqp_summary.out").exists());
}

#[test]
fn summary_goes_to_the_default_file() {
    let dir = tempfile::tempdir().unwrap();
    let o = slsqp(dir.path(), &["solve", "--problem", "example2d", "--quiet"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(!stdout(&o).contains("MAJOR"));
    let s = std::fs::read_to_string(dir.path().join("slsqp_summary.out")).unwrap();
    assert!(s.starts_with("MAJOR"));
}

#[test]
fn iteration_limit_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = slsqp(
        dir.path(),
        &[
            "solve",
            "--problem",
            "rosenbrock2d-con",
            "--maxiter",
            "1",
            "--summary-file",
            "s.out",
        ],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("MaxIterReached"), "{}", stdout(&o));
}

#[test]
fn errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = slsqp(dir.path(), &["solve", "--problem", "nope"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nope"));
    let o = slsqp(
        dir.path(),
        &[
            "solve",
            "--problem",
            "example2d",
            "--acc",
            "-1",
            "--summary-file",
            "s.out",
        ],
    );
    assert_eq!(o.status.code(), Some(1));
    let o = slsqp(
        dir.path(),
        &[
            "solve",
            "--problem",
            "example2d",
            "--save-file",
            "h.jsonl",
            "--save-vars",
            "foo",
        ],
    );
    assert_eq!(o.status.code(), Some(1));
    let o = slsqp(dir.path(), &["inspect", "--file", "missing.jsonl"]);
    assert_eq!(o.status.code(), Some(1));
    let o = slsqp(dir.path(), &["frobnicate"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn plot_and_inspect_a_save_file() {
    let dir = tempfile::tempdir().unwrap();
    let o = slsqp(
        dir.path(),
        &[
            "solve",
            "--problem",
            "example2d",
            "--save-file",
            "h.jsonl",
            "--save-itr",
            "all",
            "--summary-file",
            "s.out",
            "--quiet",
        ],
    );
    assert_eq!(o.status.code(), Some(0));
    let majors = std::fs::read_to_string(dir.path().join("h.jsonl"))
        .unwrap()
        .lines()
        .filter(|l| l.starts_with(r#"{"kind":"major""#))
        .count();

    let o = slsqp(
        dir.path(),
        &[
            "plot",
            "--file",
            "h.jsonl",
            "--vars",
            "objective,x[0]",
            "--out",
            "p.png",
        ],
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(stdout(&o).contains("2 panels"));
    assert!(std::fs::metadata(dir.path().join("p.png")).unwrap().len() > 0);
    let o = slsqp(
        dir.path(),
        &[
            "plot", "--file", "h.jsonl", "--vars", "x[7]", "--out", "q.png",
        ],
    );
    assert_eq!(o.status.code(), Some(1));

    let o = slsqp(dir.path(), &["inspect", "--file", "h.jsonl"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("n, m, meq: 2, 2, 1"));
    let table: Vec<&str> = out
        .lines()
        .skip_while(|l| !l.starts_with("MAJOR"))
        .skip(1)
        .collect();
    assert_eq!(table.len(), majors);
}

#[test]
fn hot_start_from_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "solve",
        "--problem",
        "example2d",
        "--summary-file",
        "s.out",
        "--quiet",
    ];
    let o = slsqp(
        dir.path(),
        &[&args[..], &["--save-file", "h.jsonl", "--save-itr", "all"]].concat(),
    );
    assert_eq!(o.status.code(), Some(0));
    let o = slsqp(
        dir.path(),
        &[&args[..], &["--hot-start", "h.jsonl"]].concat(),
    );
    assert_eq!(o.status.code(), Some(0));
    let first = std::fs::read_to_string(dir.path().join("s.out")).unwrap();
    assert!(first.lines().count() > 1);
    let both = slsqp(
        dir.path(),
        &[
            &args[..],
            &["--hot-start", "h.jsonl", "--warm-start", "h.jsonl"],
        ]
        .concat(),
    );
    assert_eq!(both.status.code(), Some(1));
}

#[test]
fn list_problems_names_the_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let o = slsqp(dir.path(), &["list-problems"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    for name in ["example2d", "rosenbrock2d-con", "dblint-20"] {
        assert!(out.contains(name), "{out}");
    }
    assert!(out.contains("save variables: majiter,"));
}
