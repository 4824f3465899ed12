use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ris-parafac"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ris-parafac-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

const SMALL: [&str; 10] = ["--m", "8", "--k", "8", "--t", "8", "--trials", "3", "--snr", "0:20:10"];

#[test]
fn sweep_snr_writes_csv_to_stdout() {
    let out = bin().arg("sweep-snr").args(SMALL).args(["--n", "4", "--p", "4"]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "sweep_var,sweep_value,snr_db,method,nmse_h1,nmse_h1_db,nmse_h2,nmse_h2_db,trials,discarded,mean_iters,converged_frac"
    );
    assert_eq!(lines.len(), 1 + 3 * 3);
    assert!(lines[1].starts_with("snr,0,0,als,"));
    assert!(lines[2].starts_with("snr,0,0,genie_ls_h1,"));
}

#[test]
fn infeasible_sweep_exits_nonzero() {
    let out = bin().arg("sweep-n").args(SMALL).args(["--n", "4,16", "--p", "4"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("M >= N violated (M=8, N=16)"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = scratch("config");
    let cfg = dir.join("run.toml");
    let out_path = dir.join("out.json");
    std::fs::write(
        &cfg,
        "m = 8\nk = 8\nt = 8\nn = 4\np = [2, 4]\nsnr = [0, 10]\ntrials = 5\nseed = 11\nformat = \"csv\"\n",
    )
    .unwrap();
    let out = bin()
        .arg("sweep-p")
        .arg("--config")
        .arg(&cfg)
        .args(["--trials", "2", "--format", "json", "--out"])
        .arg(&out_path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(v["config"]["trials"], 2);
    assert_eq!(v["config"]["base_seed"], 11);
    assert_eq!(v["config"]["sweep"]["var"], "P");
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2 * 2);
    assert!(rows.iter().all(|r| r["trials"] == 2 && r["method"] == "als"));

    let out = bin()
        .arg("sweep-p")
        .arg("--config")
        .arg(&cfg)
        .arg("--baselines")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 1 + 2 * 2 * 3);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn identical_runs_are_byte_identical() {
    let run = || {
        bin().arg("sweep-p").args(SMALL).args(["--n", "4", "--p", "2,4", "--seed", "3"]).output().unwrap().stdout
    };
    let a = run();
    assert!(!a.is_empty());
    assert_eq!(a, run());
}

#[test]
fn single_trial_reports_one_trial() {
    let out = bin()
        .arg("single-trial")
        .args(["--m", "8", "--k", "8", "--t", "8", "--n", "4", "--p", "4", "--snr", "15"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.lines().skip(1).all(|l| l.split(',').nth(8) == Some("1")));

    let out = bin().arg("single-trial").args(["--snr", "0,10"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bad_flags_are_rejected() {
    let out = bin().arg("sweep-snr").args(["--snr", "abc"]).output().unwrap();
    assert!(!out.status.success());
    let out = bin().arg("sweep-snr").args(["--format", "xml"]).output().unwrap();
    assert!(!out.status.success());
}
