use std::path::Path;
use std::process::{Command, Output};

use rmtlaw::moments::limiting_moment;
use rmtlaw::{AspectRatio, HSequence, MomentReport};

fn rmtlaw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rmtlaw"))
        .args(args)
        .env_remove("RMTLAW_BUDGET")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_str(&stdout(o)).expect("stdout is JSON")
}

fn moments(v: &serde_json::Value) -> Vec<f64> {
    v["moments"].as_array().unwrap().iter().map(|r| r["moment"].as_f64().unwrap()).collect()
}

#[test]
fn predict_examples() {
    let o = rmtlaw(&["--quiet", "predict", "--model", "iid:dist=rademacher,var=1", "--y", "1", "--kmax", "4"]);
    assert_eq!(code(&o), 0);
    assert_eq!(moments(&json(&o)), vec![1.0, 2.0, 5.0, 14.0]);

    let o = rmtlaw(&["predict", "--h", "1,1.6667", "--y", "0.5", "--kmax", "2"]);
    assert_eq!(moments(&json(&o)), vec![1.0, 2.1667]);

    let o = rmtlaw(&["predict", "--model", "ar1:p=0", "--y", "2", "--kmax", "1"]);
    assert_eq!(moments(&json(&o)), vec![1.0]);
}

#[test]
fn predict_matches_library_digit_for_digit() {
    let h = [1.3, 2.9, 7.7, 21.5, 66.0];
    let arg = h.map(|x| x.to_string()).join(",");
    let o = rmtlaw(&["predict", "--h", &arg, "--y", "0.37", "--kmax", "5", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    let seq = HSequence::user(h.to_vec()).unwrap();
    let y = AspectRatio::new(0.37).unwrap();
    for (k, line) in stdout(&o).lines().skip(1).enumerate() {
        let lib = limiting_moment(k + 1, y, &seq).unwrap();
        let printed = line.split(',').nth(2).unwrap();
        assert_eq!(printed, rmtlaw::format::fmt_sig(lib));
    }
}

#[test]
fn predict_qform_with_unit_htilde() {
    let plain = rmtlaw(&["predict", "--h", "1,2,5", "--y", "0.8", "--kmax", "3"]);
    let q = rmtlaw(&["predict", "--h", "1,2,5", "--htilde", "1,1,1", "--y", "0.8", "--kmax", "3"]);
    let (a, b) = (moments(&json(&plain)), moments(&json(&q)));
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() <= 1e-10 * x.abs());
    }
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        vec!["predict", "--model", "nosuch:x=1", "--y", "1"],
        vec!["predict", "--model", "ar1:p=0.5", "--y", "-1"],
        vec!["predict", "--h", "1", "--y", "1", "--kmax", "3"],
        vec!["predict", "--y", "1"],
        vec!["nc", "complement", "--blocks", "1,2|x"],
        vec!["nc", "complement", "--blocks", "1,3|2,4"],
        vec!["nc", "count", "--k", "4", "--sizes", "4-1"],
        vec!["nc", "enumerate", "--k", "40"],
        vec!["simulate", "--model", "ar1:p=0.5", "--m", "600", "--n", "10", "--reps", "1"],
        vec!["spectrum", "--model", "ar1:p=0.5", "--m", "10", "--n", "10", "--reps", "1", "--range", "2:1"],
        vec!["frobnicate"],
        vec!["predict", "--model", "ar1:p=0.5", "--y", "1", "--bogus-flag"],
    ] {
        let o = rmtlaw(&args);
        assert_eq!(code(&o), 2, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn numeric_failure_exits_1() {
    // no limiting H for a user chain without --m
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("chain.json");
    std::fs::write(
        &path,
        r#"{"states":[-1,1],"transition":[[0.7,0.3],[0.3,0.7]],"stationary":[0.5,0.5]}"#,
    )
    .unwrap();
    let model = format!("chain:file={}", path.display());
    let o = rmtlaw(&["predict", "--model", &model, "--y", "1"]);
    assert_eq!(code(&o), 1);
    let o = rmtlaw(&["predict", "--model", &model, "--m", "50", "--y", "1", "--kmax", "2"]);
    assert_eq!(code(&o), 0);
}

#[test]
fn nc_examples() {
    let o = rmtlaw(&["nc", "complement", "--blocks", "1,2,4|3|5"]);
    assert_eq!(stdout(&o).trim(), "1|2,3|4,5");
    let o = rmtlaw(&["nc", "graphs", "--blocks", "1,3|2,4"]);
    assert_eq!(stdout(&o).trim(), "0");
    let o = rmtlaw(&["nc", "graphs", "--blocks", "1,2,4|3|5"]);
    assert_eq!(stdout(&o).lines().collect::<Vec<_>>(), vec!["1", "1,5|2|3,4"]);
    let o = rmtlaw(&["nc", "count", "--k", "4", "--sizes", "4:1"]);
    assert_eq!(stdout(&o).trim(), "1");
    let o = rmtlaw(&["nc", "count", "--k", "6"]);
    assert_eq!(stdout(&o).trim(), "132");
    let o = rmtlaw(&["nc", "enumerate", "--k", "4", "--json"]);
    assert_eq!(json(&o).as_array().unwrap().len(), 14);
}

#[test]
fn json_outputs_parse() {
    for args in [
        vec!["nc", "complement", "--blocks", "1,2,4|3|5", "--json"],
        vec!["nc", "graphs", "--blocks", "1,2|3", "--json"],
        vec!["nc", "count", "--k", "5", "--sizes", "2:1,1:3", "--json"],
        vec!["spectrum", "--model", "ar1:p=0.3", "--m", "20", "--n", "40", "--reps", "2", "--format", "json"],
        vec!["compare", "--model", "ar1:p=0.3", "--m", "20", "--n", "40", "--reps", "20"],
    ] {
        let o = rmtlaw(&args);
        json(&o);
    }
}

fn simulate_to(path: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "--quiet", "simulate", "--model", "ar1:p=0.5", "--m", "30", "--n", "60", "--reps", "30", "--seed", "7", "--out",
    ];
    let p = path.to_str().unwrap();
    args.push(p);
    args.extend_from_slice(extra);
    rmtlaw(&args)
}

#[test]
fn simulate_is_byte_identical_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    assert_eq!(code(&simulate_to(&a, &["--workers", "1"])), 0);
    assert_eq!(code(&simulate_to(&b, &["--workers", "3"])), 0);
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    let report = MomentReport::from_json(std::str::from_utf8(&ta).unwrap()).unwrap();
    assert_eq!(report.moments.len(), 4);
    assert_eq!(report.config.mode, rmtlaw::SimMode::Direct);
    assert!(report.runtime_seconds.is_none());

    let t = dir.path().join("t.json");
    simulate_to(&t, &["--timing"]);
    assert!(MomentReport::from_json(&std::fs::read_to_string(&t).unwrap()).unwrap().runtime_seconds.is_some());
}

#[test]
fn simulate_modes_and_models() {
    let o = rmtlaw(&["simulate", "--model", "twostate:alpha=0.5", "--m", "20", "--n", "40", "--reps", "5"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["moments"].as_array().unwrap().len(), 4);
    let o = rmtlaw(&["simulate", "--model", "ar1:p=0.5", "--m", "20", "--n", "40", "--reps", "5", "--mode", "remark1"]);
    assert_eq!(json(&o)["config"]["mode"], "remark1");
    let o = rmtlaw(&["simulate", "--model", "ar1:p=0.5", "--m", "20", "--n", "40", "--reps", "5", "--format", "csv"]);
    assert!(stdout(&o).starts_with("k,predicted_limit,predicted_finite,empirical_mean,empirical_stderr\n"));
}

#[test]
fn budget_override() {
    let args = ["simulate", "--model", "ar1:p=0.2", "--m", "10", "--n", "10", "--reps", "3"];
    let o = Command::new(env!("CARGO_BIN_EXE_rmtlaw")).args(args).env("RMTLAW_BUDGET", "299").output().unwrap();
    assert_eq!(code(&o), 2);
    let o = Command::new(env!("CARGO_BIN_EXE_rmtlaw")).args(args).env("RMTLAW_BUDGET", "300").output().unwrap();
    assert_eq!(code(&o), 0);
    let mut forced = args.to_vec();
    forced.push("--force");
    let o = Command::new(env!("CARGO_BIN_EXE_rmtlaw")).args(&forced).env("RMTLAW_BUDGET", "1").output().unwrap();
    assert_eq!(code(&o), 0);
    let o = Command::new(env!("CARGO_BIN_EXE_rmtlaw")).args(args).env("RMTLAW_BUDGET", "lots").output().unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn compare_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    simulate_to(&a, &["--kmax", "3"]);
    let ap = a.to_str().unwrap();

    let o = rmtlaw(&["compare", ap, ap]);
    assert_eq!(code(&o), 0);
    let rows = json(&o)["rows"].as_array().unwrap().clone();
    assert!(rows.iter().all(|r| r["verdict"] == "PASS" && r["z"] == 0.0));

    let o = rmtlaw(&["compare", ap, "--format", "csv"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));

    // moment 2 depends on y through y·H_1²
    let o = rmtlaw(&["compare", ap, "--y", "1.5", "--format", "csv"]);
    assert_eq!(code(&o), 1);
    let k2 = stdout(&o).lines().nth(2).unwrap().to_string();
    assert!(k2.starts_with("2,") && k2.ends_with("FAIL"), "{k2}");

    let b = dir.path().join("b.json");
    simulate_to(&b, &["--kmax", "4"]);
    let o = rmtlaw(&["compare", ap, b.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let o = rmtlaw(&["compare", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn spectrum_csv() {
    let o = rmtlaw(&[
        "--quiet", "spectrum", "--model", "iid:dist=gaussian,var=1", "--m", "200", "--n", "200", "--reps", "3", "--bins",
        "40",
    ]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("bin_lo,bin_hi,count,density"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 40);
    let total: f64 = rows.iter().map(|r| r[2]).sum();
    assert_eq!(total, 600.0);
    // y = 1 Marčenko–Pastur support is [0, 4]
    let inside: f64 = rows.iter().filter(|r| r[1] <= 4.0 + 1e-9).map(|r| r[2]).sum();
    let mass = rows.iter().map(|r| r[3] * (r[1] - r[0])).sum::<f64>();
    assert!((mass - 1.0).abs() < 1e-9);
    assert!(inside / total >= 0.97, "{inside}/{total}");
}
