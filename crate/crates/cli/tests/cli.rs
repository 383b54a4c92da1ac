use std::process::{Command, Output};

fn cur_kit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cur-kit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let idx = lines
        .next()
        .unwrap()
        .split(',')
        .position(|h| h == name)
        .unwrap();
    lines
        .map(|l| l.split(',').nth(idx).unwrap().to_string())
        .collect()
}

#[test]
fn two_by_two_independent_vs_dependent() {
    let out = stdout(&cur_kit(&[
        "sweep",
        "--gen",
        "two_by_two:1e-8",
        "--k",
        "1",
        "--strategy",
        "independent,dependent",
    ]));
    let errs: Vec<f64> = column(&out, "relative_error")
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
    let tsvd: f64 = column(&out, "tsvd_error")[0].parse().unwrap();
    assert_eq!(errs.len(), 2);
    assert!(errs[0] / tsvd > 1e7, "independent ratio {}", errs[0] / tsvd);
    assert!(errs[1] / tsvd < 1.01, "dependent ratio {}", errs[1] / tsvd);
}

#[test]
fn empty_grid_writes_header_only() {
    let out = stdout(&cur_kit(&["sweep", "--gen", "lowrank:20x20:r3", "--k", ""]));
    assert_eq!(out.lines().count(), 1);
    assert!(out.starts_with("seed,k,p,mode,strategy,relative_error,tsvd_error,bound_value,kappa,sigma_min_core,wall_time_ms,status"));
}

#[test]
fn output_is_byte_stable_across_runs_and_thread_counts() {
    let args = [
        "sweep",
        "--gen",
        "geometric:60x50:0.8",
        "--k",
        "2..12:5",
        "--p",
        "0,3",
        "--modes",
        "stable,scurca",
        "--seeds",
        "0..2",
    ];
    let a = cur_kit(&args);
    let b = cur_kit(&args);
    let c = Command::new(env!("CARGO_BIN_EXE_cur-kit"))
        .args(args)
        .env("CURKIT_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(stdout(&a), stdout(&b));
    assert_eq!(stdout(&a), stdout(&c));
}

#[test]
fn both_sides_needs_opt_in() {
    let refused = cur_kit(&[
        "sweep",
        "--gen",
        "lowrank:30x30:r5",
        "--k",
        "5",
        "--p",
        "2",
        "--side",
        "both",
    ]);
    assert!(!refused.status.success());
    let out = stdout(&cur_kit(&[
        "sweep",
        "--gen",
        "lowrank:30x30:r5",
        "--k",
        "5",
        "--p",
        "2",
        "--side",
        "both",
        "--danger-both-sides",
    ]));
    assert_eq!(column(&out, "bound_value"), vec!["NaN"]);
}

#[test]
fn fractional_oversampling_amount() {
    let out = stdout(&cur_kit(&[
        "sweep",
        "--gen",
        "lowrank:60x40:r8",
        "--k",
        "4,8",
        "--p",
        "0.5k",
    ]));
    assert_eq!(column(&out, "p"), vec!["2", "4"]);
}

#[test]
fn os_compare_has_one_baseline_per_k() {
    let out = stdout(&cur_kit(&[
        "os-compare",
        "--gen",
        "lowrank:100x80:r10",
        "--k",
        "5,10",
        "--p",
        "0,2",
    ]));
    let ps = column(&out, "p");
    assert_eq!(ps.iter().filter(|p| *p == "0").count(), 2);
    assert_eq!(ps.len(), 2 + 2 * 3);
}

#[test]
fn verify_quick_passes_and_bad_eps_fails() {
    let out = stdout(&cur_kit(&["verify", "--quick"]));
    assert_eq!(out.lines().filter(|l| l.starts_with("PASS")).count(), 5);
    assert!(!cur_kit(&["verify", "--eps", "-1"]).status.success());
}

#[test]
fn decompose_writes_factors() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = stdout(&cur_kit(&[
        "decompose",
        "--gen",
        "lowrank:50x40:r5",
        "--k",
        "5",
        "--out-dir",
        d,
    ]));
    assert!(out.contains("status ok"));
    for f in ["left.mtx", "right.mtx", "rows.txt", "cols.txt"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let rows = std::fs::read_to_string(dir.path().join("rows.txt")).unwrap();
    assert_eq!(rows.lines().count(), 5);

    let raw = tempfile::tempdir().unwrap();
    stdout(&cur_kit(&[
        "decompose",
        "--gen",
        "lowrank:50x40:r5",
        "--k",
        "5",
        "--format",
        "raw",
        "--out-dir",
        raw.path().to_str().unwrap(),
    ]));
    assert!(raw.path().join("left.bin").exists());
}

#[test]
fn csv_file_output_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    let args = ["sweep", "--gen", "lowrank:30x30:r4", "--k", "1..4"];
    let printed = stdout(&cur_kit(&args));
    let mut with_out = args.to_vec();
    with_out.extend(["--out", path.to_str().unwrap()]);
    stdout(&cur_kit(&with_out));
    assert_eq!(std::fs::read_to_string(path).unwrap(), printed);
}
