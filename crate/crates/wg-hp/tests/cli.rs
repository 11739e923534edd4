use std::path::Path;
use std::process::{Command, Output};

use wg_hp::error::exit;
use wg_hp::output::RECORD_HEADER;

fn wg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wg-hp")).args(args).output().expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

const GRID: &str = "1e-8:1,1e-5:1e-2,1e-6:1e-6,1e-4:1e-5";

#[test]
fn solve_model_problem_writes_samples_and_nodes() {
    let out = wg(&["solve", "--eps1", "1e-5", "--eps2", "1e-2", "--p", "4", "--kappa", "1", "--b", "cos(x)", "--r", "1+x", "--f", "exp(x)"]);
    assert_eq!(out.status.code(), Some(exit::SUCCESS), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "kind,element,x,u");
    let nodes: Vec<&str> = lines.iter().copied().filter(|l| l.starts_with("node,")).collect();
    let interior = lines.iter().filter(|l| l.starts_with("interior,")).count();
    assert_eq!(interior, 200 * (nodes.len() - 1));
    assert!(nodes.first().unwrap().ends_with(",0.0000000000000000e0"));
    assert!(nodes.last().unwrap().ends_with(",0.0000000000000000e0"));
    // the solution of the model problem is O(1) away from the layers
    let mid: Vec<f64> = lines[1..]
        .iter()
        .filter(|l| l.starts_with("interior,"))
        .filter_map(|l| {
            let c: Vec<&str> = l.split(',').collect();
            let x: f64 = c[2].parse().unwrap();
            (0.3..0.7).contains(&x).then(|| c[3].parse().unwrap())
        })
        .collect();
    assert!(!mid.is_empty() && mid.iter().all(|&u| u > 0.5 && u < 2.0));
}

#[test]
fn zero_load_gives_zero_solution() {
    let out = wg(&["solve", "--eps1", "1e-5", "--eps2", "1e-2", "--p", "4", "--f", "0"]);
    assert_eq!(out.status.code(), Some(exit::SUCCESS));
    let text = String::from_utf8(out.stdout).unwrap();
    for line in text.lines().skip(1) {
        let u: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!(u.abs() <= 1e-12, "{line}");
    }
}

#[test]
fn malformed_expression_reports_offset() {
    let out = wg(&["solve", "--eps1", "1e-5", "--eps2", "1e-2", "--p", "4", "--r", "1+*x"]);
    assert_eq!(out.status.code(), Some(exit::SYNTAX));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("offset 2"), "{err}");
    let out = wg(&["convergence", "--eps1", "1e-5", "--eps2", "1e-2", "--manufactured-u", "sin(pi*x"]);
    assert_eq!(out.status.code(), Some(exit::SYNTAX));
}

#[test]
fn usage_errors_exit_with_usage_code() {
    for args in [
        &["solve", "--eps1", "0", "--eps2", "1e-2", "--p", "4"][..],
        &["solve", "--eps1", "1e-5", "--eps2", "2", "--p", "4"],
        &["solve", "--eps1", "1e-5", "--eps2", "1e-2", "--p", "0"],
        &["solve", "--eps1", "1e-5", "--eps2", "1e-2", "--p", "4", "--kappa", "-1"],
        &["solve", "--eps1", "1e-5", "--eps2", "1e-2"],
        &["convergence", "--eps-grid", "1e-5"],
        &["convergence", "--eps1", "1e-5", "--eps2", "1e-2", "--p-range", "5..2"],
        &["solve", "--bogus"],
    ] {
        assert_eq!(wg(args).status.code(), Some(exit::USAGE), "{args:?}");
    }
}

#[test]
fn violated_assumption_exits_with_problem_code() {
    let out = wg(&["solve", "--eps1", "1e-5", "--eps2", "1e-2", "--p", "2", "--r", "-1"]);
    assert_eq!(out.status.code(), Some(exit::PROBLEM), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn missing_output_directory_exits_with_io_code() {
    let out = wg(&["solve", "--eps1", "1e-5", "--eps2", "1e-2", "--p", "2", "--out", "/nonexistent/dir/u.csv"]);
    assert_eq!(out.status.code(), Some(exit::IO));
}

#[test]
fn convergence_table_schema_and_cardinality() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("conv.csv");
    let out = wg(&["convergence", "--eps-grid", GRID, "--p-range", "1..10", "--out", path_str(&csv)]);
    assert_eq!(out.status.code(), Some(exit::SUCCESS), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(!text.contains('\r'));
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, RECORD_HEADER);
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 40);
    assert!(rows.iter().all(|r| r.len() == 10));
    let regimes: std::collections::BTreeSet<&str> = rows.iter().map(|r| r.get(0).unwrap()).collect();
    assert_eq!(regimes.into_iter().collect::<Vec<_>>(), ["CD", "RCD", "RD"]);
    // sorted by (eps1, eps2, p)
    let keys: Vec<(f64, f64, usize)> = rows
        .iter()
        .map(|r| (r[1].parse().unwrap(), r[2].parse().unwrap(), r[3].parse().unwrap()))
        .collect();
    assert!(keys.windows(2).all(|w| w[0] <= w[1]));
    assert!(rows.iter().all(|r| &r[9] == "0.0000000000000000e0"));

    let slopes = std::fs::read_to_string(dir.path().join("conv-slopes.csv")).unwrap();
    let lines: Vec<&str> = slopes.lines().collect();
    assert_eq!(lines[0], "eps1,eps2,regime,slope");
    assert_eq!(lines.len(), 5);
    for l in &lines[1..] {
        let s: f64 = l.rsplit(',').next().unwrap().parse().unwrap();
        assert!(s < 0.0, "{l}");
    }
}

#[test]
fn reruns_are_byte_identical_and_svg_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |tag: &str| {
        let csv = dir.path().join(format!("{tag}.csv"));
        let svg = dir.path().join(format!("{tag}.svg"));
        let out = wg(&["convergence", "--eps-grid", GRID, "--p-range", "1..6", "--out", path_str(&csv), "--svg", path_str(&svg)]);
        assert_eq!(out.status.code(), Some(exit::SUCCESS));
        (std::fs::read(csv).unwrap(), std::fs::read(svg).unwrap())
    };
    let (a_csv, a_svg) = run("a");
    let (b_csv, b_svg) = run("b");
    assert_eq!(a_csv, b_csv);
    assert_eq!(a_svg, b_svg);
    let svg = String::from_utf8(a_svg).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 4);

    let s1 = dir.path().join("u1.svg");
    let s2 = dir.path().join("u2.svg");
    for s in [&s1, &s2] {
        let out = wg(&["solve", "--eps1", "1e-5", "--eps2", "1e-2", "--p", "4", "--out", path_str(&dir.path().join("u.csv")), "--svg", path_str(s)]);
        assert_eq!(out.status.code(), Some(exit::SUCCESS));
    }
    assert_eq!(std::fs::read(&s1).unwrap(), std::fs::read(&s2).unwrap());
}

#[test]
fn manufactured_solution_and_rebuilt_reference() {
    let out = wg(&["convergence", "--eps1", "1e-5", "--eps2", "1e-2", "--p-range", "2..4", "--manufactured-u", "x*(1-x)", "--ref-mesh", "rebuilt"]);
    assert_eq!(out.status.code(), Some(exit::SUCCESS));
    let text = String::from_utf8(out.stdout).unwrap();
    for line in text.lines().skip(1) {
        let err: f64 = line.split(',').nth(6).unwrap().parse().unwrap();
        assert!(err < 1e-7, "{line}");
    }
}

#[test]
fn failed_cases_flag_partial_completion() {
    // b' is singular at 0.5, so every case fails its assumption check
    let out = wg(&["convergence", "--eps1", "1e-5", "--eps2", "1e-2", "--p-range", "1..2", "--b", "1/(x-0.5)"]);
    assert_eq!(out.status.code(), Some(exit::PARTIAL));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().skip(1).all(|l| l.split(',').nth(6) == Some("NaN")));
    assert!(String::from_utf8(out.stderr).unwrap().contains("failed:"));
}

#[test]
fn timing_flag_records_wall_time() {
    let out = wg(&["convergence", "--eps1", "1e-5", "--eps2", "1e-2", "--p-range", "6..6", "--timing"]);
    assert_eq!(out.status.code(), Some(exit::SUCCESS));
    let text = String::from_utf8(out.stdout).unwrap();
    let ms: f64 = text.lines().nth(1).unwrap().rsplit(',').next().unwrap().parse().unwrap();
    assert!(ms > 0.0);
}

#[test]
fn check_default_passes() {
    let out = wg(&["check"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(out.status.code(), Some(exit::SUCCESS), "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS ")).count(), 8);
    assert!(text.contains("8 of 8 suites passed"));
}

#[test]
fn check_with_zero_penalty_fails_deterministically() {
    let a = wg(&["check", "--penalty-scale", "0"]);
    let b = wg(&["check", "--penalty-scale", "0"]);
    assert_eq!(a.status.code(), Some(exit::CHECK_FAILED));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("FAIL coercivity")), "{text}");
}

#[test]
fn check_with_doubled_quadrature_passes() {
    let out = wg(&["check", "--quad-double"]);
    assert_eq!(out.status.code(), Some(exit::SUCCESS), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn config_file_is_merged_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# model problem\neps1 = 1e-5\neps2 = 1e-2\np-range = 2..3\n").unwrap();
    let out = wg(&["convergence", "--config", path_str(&cfg)]);
    assert_eq!(out.status.code(), Some(exit::SUCCESS));
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 3);
    let out = wg(&["convergence", "--config", path_str(&cfg), "--p-range", "2..5"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 5);

    std::fs::write(&cfg, "eps1 = 1e-5\nwhat = 1\n").unwrap();
    let out = wg(&["convergence", "--config", path_str(&cfg)]);
    assert_eq!(out.status.code(), Some(exit::USAGE));
    assert!(String::from_utf8(out.stderr).unwrap().contains("line 2"));
    let out = wg(&["convergence", "--config", path_str(&dir.path().join("missing.cfg"))]);
    assert_eq!(out.status.code(), Some(exit::IO));
}
