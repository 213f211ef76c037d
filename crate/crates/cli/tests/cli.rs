use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_thresholdscope"));
    cmd.env_remove("THRESHOLDSCOPE_THREADS");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

fn field(line: &str, k: usize) -> f64 {
    line.split(',').nth(k).unwrap().parse().unwrap()
}

#[test]
fn unit_barrier_wronskian_at_threshold() {
    let o = run(&["wronskian", "--barrier-g", "1", "--zeta", "0"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next().unwrap(), "re_zeta,im_zeta,re_w,im_w,abs_w");
    let row = lines.next().unwrap();
    assert!((field(row, 2) - 2f64.sinh()).abs() < 1e-12);
    assert_eq!(field(row, 3), 0.0);
}

#[test]
fn wronskian_scan_covers_the_grid() {
    let o = run(&["wronskian", "--n", "4"]);
    assert!(o.status.success());
    // free case: w = -2iζ
    for row in stdout(&o).lines().skip(1) {
        let (zr, zi, wr, wi) = (field(row, 0), field(row, 1), field(row, 2), field(row, 3));
        assert!((wr - 2.0 * zi).abs() < 1e-12 && (wi + 2.0 * zr).abs() < 1e-12);
    }
    assert_eq!(stdout(&o).lines().count(), 17);
}

#[test]
fn zero_potential_has_a_virtual_level_with_constant_state() {
    let dir = tempfile::tempdir().unwrap();
    let zero = write(dir.path(), "zero.json", r#"{"segments":[]}"#);
    let o = run(&["--format", "json", "detect", "--potential", &zero, "--z0", "0"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["classification"], "virtual_level");
    assert_eq!(v["rank"], 1);
    let values = v["virtual_state"]["values"].as_array().unwrap();
    assert!(!values.is_empty());
    for p in values {
        assert!((p[0].as_f64().unwrap() - 1.0).abs() < 1e-12 && p[1].as_f64().unwrap().abs() < 1e-12);
    }
}

#[test]
fn jordan_block_needs_rank_one() {
    let o = run(&["rank-demo", "--matrix", "jordan3"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "matrix,n,min_rank,svd_nullity\njordan3,3,1,1\n");
}

#[test]
fn bound_states_of_deep_well() {
    let dir = tempfile::tempdir().unwrap();
    let well = write(dir.path(), "well.json", r#"{"segments":[{"a":-1,"b":1,"coeffs":[[-10,0]]}]}"#);
    let o = run(&["bound-states", "--potential", &well, "--kappa-max", "4"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(out.lines().next().unwrap(), "kappa,energy,wronskian_abs");
    assert_eq!(out.lines().count(), 4);
    for row in out.lines().skip(1) {
        let (k, e) = (field(row, 0), field(row, 1));
        assert!((e + k * k).abs() < 1e-12 && e > -10.0);
    }
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        vec!["detect", "--zeta", "1"],
        vec!["jost", "--zeta", "0-1i"],
        vec!["jost", "--zeta", "abc"],
        vec!["disk2d", "--g", "-1"],
        vec!["--format", "xml", "rank-demo"],
        vec!["wronskian", "--barrier-g", "1", "--potential", "x.json"],
        vec!["nonsense"],
    ] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
        assert!(o.stdout.is_empty());
    }
    let o = run(&["jost", "--zeta", "0-1i"]);
    assert!(stderr(&o).contains("--zeta"));
}

#[test]
fn computational_errors_exit_with_one_and_name_the_module() {
    let dir = tempfile::tempdir().unwrap();
    let one = write(dir.path(), "one.json", r#"{"segments":[{"a":-1,"b":1,"coeffs":[[1,0]]}]}"#);
    let o = run(&["bifurcate", "--potential", &one]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("BifurcationError"), "{}", stderr(&o));

    let o = run(&["detect", "--potential", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("PotentialError"));
}

#[test]
fn thread_variable_is_validated() {
    let o = bin().args(["rank-demo"]).env("THRESHOLDSCOPE_THREADS", "lots").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("THRESHOLDSCOPE_THREADS"));
}

#[test]
fn output_is_byte_identical_across_runs_and_thread_counts() {
    let args = ["--seed", "7", "lap-sweep", "--family", "barrier1d", "--g", "1", "--points", "120", "--extent", "20"];
    let a = run(&args);
    let b = run(&args);
    let c = bin().args(args).env("THRESHOLDSCOPE_THREADS", "1").output().unwrap();
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);

    let r1 = run(&["--seed", "3", "rank-demo", "--matrix", "random", "--n", "5", "--nullity", "2"]);
    let r2 = run(&["--seed", "3", "rank-demo", "--matrix", "random", "--n", "5", "--nullity", "2"]);
    assert_eq!(r1.stdout, r2.stdout);
    assert!(stdout(&r1).ends_with(",2,2\n"), "{}", stdout(&r1));
}

#[test]
fn output_and_plot_files_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.json");
    let plot = dir.path().join("plot.csv");
    let o = run(&[
        "--format",
        "json",
        "--output",
        out.to_str().unwrap(),
        "--plot-data",
        plot.to_str().unwrap(),
        "lap-sweep",
        "--points",
        "100",
        "--extent",
        "20",
        "--kmax",
        "3",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["norms"].as_array().unwrap().len(), 3);
    let p = std::fs::read_to_string(&plot).unwrap();
    assert_eq!(p.lines().next().unwrap(), "x,y");
    assert_eq!(p.lines().count(), 4);
    // no stray temporary files next to the outputs
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 2);
}

#[test]
fn every_subcommand_selftest_passes() {
    for sub in [
        "jost",
        "wronskian",
        "detect",
        "bound-states",
        "lap-sweep",
        "disk2d",
        "bifurcate",
        "bessel-selftest",
        "shift-demo",
        "rank-demo",
    ] {
        let o = run(&[sub, "--selftest"]);
        assert!(o.status.success(), "{sub}: {}{}", stdout(&o), stderr(&o));
        let out = stdout(&o);
        assert!(out.lines().skip(1).all(|l| l.starts_with(sub) && l.contains(",pass,")), "{out}");
    }
}

#[test]
fn disk_reports_gamma() {
    let o = run(&["--format", "json", "disk2d", "--g", "0.04", "--points", "5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["gamma"].as_f64().unwrap() - 0.020_100_166_805_625_023).abs() < 1e-15);
    assert_eq!(v["samples"].as_array().unwrap().len(), 5);
}

#[test]
fn shift_demo_and_bessel_table() {
    let o = run(&["shift-demo", "--n", "50"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = run(&["bessel-selftest", "--points", "20"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 21);
}

#[test]
fn help_documents_csv_schemas() {
    let o = run(&["--help"]);
    let h = stdout(&o);
    assert!(h.contains("kappa,energy,wronskian_abs"));
    assert!(h.contains("THRESHOLDSCOPE_THREADS"));
}
