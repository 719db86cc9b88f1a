use std::process::Command;

use ftk::harness::io::{parse_instance, parse_tree};
use ftk::{check, makespan};

fn ftk(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_ftk")).args(args).output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn solve_cross4_prints_five_and_writes_a_valid_tree() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("cross4.txt");
    let tree = dir.path().join("cross4.tree");
    let (code, _, _) = ftk(&["gen", "cross4", "--norm", "l1", "--out", inst.to_str().unwrap()]);
    assert_eq!(code, 0);
    let (code, out, err) = ftk(&["solve", "--strategy", "l1_five", inst.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    assert!(out.starts_with("makespan 5.000000\n"), "{out}");
    let instance = parse_instance(&std::fs::read_to_string(&inst).unwrap()).unwrap();
    let t = parse_tree(&std::fs::read_to_string(&tree).unwrap(), instance.norm()).unwrap();
    check(&t, &instance).unwrap();
    assert!((makespan(&t, instance.norm()).unwrap() - 5.0).abs() < 1e-12);
}

#[test]
fn every_strategy_tree_file_revalidates() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("d.txt");
    ftk(&["gen", "random_disk:8", "--norm", "l1", "--seed", "3", "--out", inst.to_str().unwrap()]);
    let instance = parse_instance(&std::fs::read_to_string(&inst).unwrap()).unwrap();
    for s in ftk::harness::STRATEGIES {
        let tree = dir.path().join(format!("{s}.tree"));
        let (code, _, err) = ftk(&["solve", "--strategy", s, "--out", tree.to_str().unwrap(), inst.to_str().unwrap()]);
        assert_eq!(code, 0, "{s}: {err}");
        let t = parse_tree(&std::fs::read_to_string(&tree).unwrap(), instance.norm()).unwrap();
        check(&t, &instance).unwrap();
    }
}

#[test]
fn contract_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "norm l1\n2\n0 0\n1 0\n").unwrap();
    let (code, _, err) = ftk(&["solve", bad.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("expected 3 points, got 2"), "{err}");

    let l2 = dir.path().join("l2.txt");
    ftk(&["gen", "uniform_circle:5", "--norm", "l2", "--out", l2.to_str().unwrap()]);
    let (code, _, err) = ftk(&["solve", "--strategy", "l1_five", l2.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("l1"), "{err}");
    let (code, out, _) = ftk(&["solve", "--strategy", "l1_five", "--scale-to-unit", l2.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.starts_with("makespan "));

    assert_eq!(ftk(&["gen", "spiral:3"]).0, 2);
    assert_eq!(ftk(&["solve", "--strategy", "nope", l2.to_str().unwrap()]).0, 2);
    assert_eq!(ftk(&["frobnicate"]).0, 2);
}

#[test]
fn compare_on_uniform_six_reports_exact_row() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("u6.txt");
    ftk(&["gen", "uniform_circle:6", "--norm", "l2", "--out", inst.to_str().unwrap()]);
    let (code, out, _) = ftk(&["compare", inst.to_str().unwrap()]);
    assert_eq!(code, 0);
    let row = out.lines().find(|l| l.starts_with("exact")).unwrap();
    let v: f64 = row.split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!((v - 3.732).abs() < 1e-3, "{row}");
}

#[test]
fn bench_writes_csv_and_render_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("b.csv");
    let (code, _, err) = ftk(&[
        "bench",
        "--strategy",
        "l1_five",
        "--norm",
        "l1",
        "--n",
        "100,200",
        "--seeds",
        "2",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next().unwrap(), "strategy_name,n,norm,makespan,claimed_bound,construct_time_ns,seed");
    assert_eq!(text.lines().count(), 5);

    let inst = dir.path().join("c.txt");
    ftk(&["gen", "random_disk:30", "--norm", "l1", "--out", inst.to_str().unwrap()]);
    let a = ftk(&["render", inst.to_str().unwrap()]).1;
    let b = ftk(&["render", inst.to_str().unwrap()]).1;
    assert_eq!(a, b);
    assert!(a.starts_with("<svg") && a.contains("marker-end"));
}
