use std::path::Path;
use std::process::{Command, Output};

fn jspursuit(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jspursuit"))
        .args(args)
        .current_dir(dir)
        .env("JSPURSUIT_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn gen_then_solve_recovers_support() {
    let dir = tempfile::tempdir().unwrap();
    let g = jspursuit(dir.path(), &["gen", "--m", "20", "--n", "50", "--l", "3", "--k", "6", "--seed", "9", "--out", "inst"]);
    assert!(g.status.success());
    for algo in ["tsmp", "osmp", "tsmp_qr", "sa_music", "music"] {
        let v = stdout_json(&jspursuit(dir.path(), &["solve", "--problem", "inst/problem.json", "--algo", algo]));
        assert_eq!(v["success"], true, "{algo}");
    }
    let v = stdout_json(&jspursuit(dir.path(), &["solve", "--problem", "inst/problem.json", "--algo", "tsmp2", "--kappa", "0.05"]));
    assert_eq!(v["success"], true);
    assert_eq!(jspursuit(dir.path(), &["solve", "--problem", "inst/problem.json", "--algo", "tsmp2"]).status.code(), Some(2));
}

#[test]
fn solve_writes_result_files() {
    let dir = tempfile::tempdir().unwrap();
    jspursuit(dir.path(), &["gen", "--m", "12", "--n", "30", "--l", "2", "--k", "4", "--field", "complex", "--out", "c"]);
    let v = stdout_json(&jspursuit(dir.path(), &["solve", "--problem", "c/problem.json", "--out", "res.json"]));
    assert_eq!(v["success"], true);
    let manifest: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("res.json")).unwrap()).unwrap();
    assert_eq!(manifest["algo"], "tsmp");
    let x_hat = std::fs::read_to_string(dir.path().join("res_x_hat.mtx")).unwrap();
    assert!(x_hat.starts_with("%%MatrixMarket matrix array complex general\n30 2\n"));
}

#[test]
fn sweep_csv_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &'static str| {
        [
            "sweep", "--m", "12", "--n", "24", "--l", "2", "--r", "1", "--k-grid", "1,3,5", "--trials", "8", "--seed", "5",
            "--algos", "tsmp,music", "--no-runtime", "--out", out,
        ]
    };
    assert!(jspursuit(dir.path(), &args("a.csv")).status.success());
    assert!(jspursuit(dir.path(), &args("b.csv")).status.success());
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, std::fs::read(dir.path().join("b.csv")).unwrap());
    let text = String::from_utf8(a).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("algo,m,n,l,r,k,snr_db,trials,successes,success_rate,mean_l2_err,mean_runtime_ms,seed")
    );
    assert_eq!(lines.count(), 6);
    assert!(!text.contains('\r'));
}

#[test]
fn sweep_from_config_file_with_override() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("cfg.json"),
        r#"{"m":10,"n":20,"l":2,"r":2,"k_grid":[2],"snr_db":30,"trials":50,"algos":["osmp"]}"#,
    )
    .unwrap();
    let out = jspursuit(dir.path(), &["sweep", "--config", "cfg.json", "--trials", "3", "--verbose", "--out", "o.csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("o.csv")).unwrap();
    assert!(text.lines().next().unwrap().ends_with(",seed,mean_fro_err"));
    assert!(text.lines().nth(1).unwrap().starts_with("osmp,10,20,2,2,2,30,3,"));
}

#[test]
fn k95_reports_json() {
    let dir = tempfile::tempdir().unwrap();
    let v = stdout_json(&jspursuit(
        dir.path(),
        &["k95", "--m", "10", "--n", "20", "--l", "1", "--trials", "4", "--algos", "tsmp", "--l-grid", "9", "--out", "k.csv"],
    ));
    assert_eq!(v[0]["l"], 9);
    assert_eq!(v[0]["k95"], 9);
    assert_eq!(v[0]["l0_bound"], 9.0);
}

#[test]
fn diagnose_small_matrix() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("a.mtx"),
        "%%MatrixMarket matrix array real general\n2 3\n1\n0\n0\n1\n1\n1\n",
    )
    .unwrap();
    let v = stdout_json(&jspursuit(dir.path(), &["diagnose", "--matrix", "a.mtx", "--wrip-b", "1"]));
    assert_eq!(v["krank"], 2);
    assert!((v["coherence"].as_f64().unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
    assert_eq!(v["exhaustive"], true);
}

#[test]
fn bounds_json_and_noiseless_z() {
    let v = stdout_json(&jspursuit(Path::new("."), &["bounds", "--k", "10", "--n", "200", "--r", "3"]));
    assert!((v["z"].as_f64().unwrap() - 0.05).abs() < 1e-12);
    assert!(v["tsmp_m"].is_null());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| jspursuit(dir.path(), args).status.code();
    assert_eq!(code(&["bounds", "--k", "5", "--n", "4", "--r", "1"]), Some(2));
    assert_eq!(code(&["sweep", "--m", "8"]), Some(2));
    assert_eq!(code(&["sweep", "--m", "8", "--n", "16", "--l", "1", "--k-grid", "1", "--algos", "nope"]), Some(2));
    assert_eq!(code(&["solve", "--problem", "missing.json"]), Some(3));
    assert_eq!(code(&["diagnose", "--matrix", "missing.mtx"]), Some(3));
    assert_eq!(code(&["frobnicate"]), Some(2));
}
