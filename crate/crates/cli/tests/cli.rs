use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_flcount"));
    c.env_remove("ORBITAL_BUDGET");
    c
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn scratch_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("flcount-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn verify_good_n1() {
    let out = bin().arg("verify").arg(data("good_n1.json")).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["pass"], true);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["m"], serde_json::json!([1, 1, 1]));
    assert_eq!(v["N"], 1);
}

#[test]
fn verify_worked_n2() {
    let out = bin().arg("verify").arg(data("worked_n2.json")).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["v"], 2);
    assert_eq!(v["signed_sum"], 1);
}

#[test]
fn malformed_parity_exits_2() {
    let out = bin().arg("verify").arg(data("malformed.json")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("a[1] parity"), "{err}");
}

#[test]
fn missing_field_is_named() {
    let dir = scratch_dir("missing");
    let text = std::fs::read_to_string(data("good_n1.json")).unwrap();
    let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    doc.as_object_mut().unwrap().remove("ext");
    let path = dir.join("no_ext.json");
    std::fs::write(&path, doc.to_string()).unwrap();
    let out = bin().arg("verify").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ext"));
}

#[test]
fn budget_exceeded_exits_3() {
    let out = bin()
        .env("ORBITAL_BUDGET", "1")
        .arg("verify")
        .arg(data("worked_n2.json"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

fn sweep_csv(dir: &Path, name: &str, jobs: &str) -> String {
    let path = dir.join(name);
    let out = bin()
        .args(["sweep", "--n", "2", "--q", "3", "--ext", "inert", "--max-val", "4", "--count", "50"])
        .args(["--seed", "7", "--jobs", jobs, "--out"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    std::fs::read_to_string(path).unwrap()
}

fn without_wall_ms(csv: &str) -> Vec<String> {
    csv.lines()
        .map(|l| l.rsplit_once(',').map(|(head, _)| head.to_string()).unwrap_or_default())
        .collect()
}

#[test]
fn sweep_fifty_rows_all_pass_and_deterministic() {
    let dir = scratch_dir("sweep");
    let first = sweep_csv(&dir, "a.csv", "1");
    let second = sweep_csv(&dir, "b.csv", "4");
    let rows: Vec<&str> = first.lines().collect();
    assert_eq!(rows.len(), 51);
    assert!(rows[0].starts_with("seed,n,q,ext,v,eta_delta,m_0,"));
    assert!(rows[0].ends_with("signed_sum,N,pass,wall_ms"));
    assert!(rows[1..].iter().all(|r| r.contains(",true,")));
    assert_eq!(without_wall_ms(&first), without_wall_ms(&second));

    let report = bin().arg("report").arg(dir.join("a.csv")).output().unwrap();
    assert_eq!(report.status.code(), Some(0));
    let summary = stdout_json(&report);
    assert_eq!(summary["instances"], 50);
    assert_eq!(summary["passed"], 50);
}

#[test]
fn gen_output_verifies_unchanged() {
    let dir = scratch_dir("gen");
    for (mode, ext, extra) in [("lie", "split", None), ("lie", "inert", Some("--with-matrix")), ("group", "inert", None)] {
        let mut cmd = bin();
        cmd.args(["gen", "--n", "2", "--q", "5", "--ext", ext, "--max-val", "3", "--count", "3"])
            .args(["--seed", "11", "--mode", mode, "--out-dir"])
            .arg(&dir);
        if let Some(flag) = extra {
            cmd.arg(flag);
        }
        assert_eq!(cmd.output().unwrap().status.code(), Some(0));
    }
    let files: Vec<PathBuf> = std::fs::read_dir(&dir).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(files.len(), 9);
    for f in files {
        let out = bin().arg("verify").arg(&f).output().unwrap();
        assert_eq!(out.status.code(), Some(0), "{}", f.display());
        let out = bin().arg("oracle").arg(&f).output().unwrap();
        assert_eq!(out.status.code(), Some(0), "{}", f.display());
        let report = stdout_json(&out);
        assert!(report["checks"]
            .as_array()
            .unwrap()
            .iter()
            .all(|c| c["status"] != "disagree"));
    }
}

#[test]
fn precision_flag_is_honoured() {
    let out = bin()
        .args(["--precision", "12", "verify"])
        .arg(data("worked_n2.json"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["precision"], 12);
}
