use std::path::Path;
use std::process::{Command, Output};

fn unruh(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_unruh"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("UNRUH_OUT")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn payload(path: &Path) -> serde_json::Value {
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    v["payload"].clone()
}

fn cache_entries(out: &Path) -> Vec<std::path::PathBuf> {
    let mut v: Vec<_> = std::fs::read_dir(out.join(".cache"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json") && !p.to_string_lossy().ends_with(".meta.json"))
        .collect();
    v.sort();
    v
}

#[test]
fn respond_undeformed_is_thermal() {
    let dir = tempfile::tempdir().unwrap();
    let o = unruh(dir.path(), &["respond", "--spec", "none", "--omega=-1:1:0.5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = payload(&dir.path().join("respond/respond.json"));
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 5);
    for r in rows {
        if r["omega"].as_f64().unwrap() == 0.0 {
            assert_eq!(r["status"], "below_floor");
            assert!(r["value"].is_null());
            // The thermal reference has a finite Ω → 0 limit, a/(8π²).
            assert!((r["planck"].as_f64().unwrap() * 8.0 * std::f64::consts::PI.powi(2) - 1.0).abs() < 1e-15);
        } else {
            assert_eq!(r["status"], "converged");
            let ratio = r["ratio"].as_f64().unwrap();
            assert!((ratio - 1.0).abs() < 1e-5, "ratio {ratio}");
        }
    }
    let csv = std::fs::read_to_string(dir.path().join("respond/respond.csv")).unwrap();
    assert!(csv.starts_with("spec_id,method,sigma,omega,value,abs_error,status,planck,ratio,notes\n"));
    assert_eq!(csv.lines().count(), 6);
    let dat = std::fs::read_to_string(dir.path().join("respond/response_none_residue.dat")).unwrap();
    assert!(dat.starts_with('#'));
    assert_eq!(dat.lines().filter(|l| !l.starts_with('#')).count(), 4);
    assert!(std::fs::read_to_string(dir.path().join("respond/respond.gp")).unwrap().contains("plot"));
    // Every row survives the JSON round trip, so the run is cached.
    assert_eq!(cache_entries(dir.path()).len(), 1);
    assert!(!stderr(&o).contains("not cached"), "{}", stderr(&o));
}

#[test]
fn validation_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["respond", "--a", "-1"],
        vec!["respond", "--spec", "nonexistent"],
        vec!["respond", "--sigma", "40,20"],
        vec!["respond", "--omega", "1:0:0.5"],
        vec!["respond", "--eps-w-sign", "0"],
        vec!["respond", "--workers", "0"],
        vec!["respond", "--no-such-flag"],
        vec!["poles", "--spec", "none", "--track"],
        vec!["table1", "--only", "42"],
    ] {
        let o = unruh(dir.path(), &args);
        assert_eq!(o.status.code(), Some(1), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn help_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = unruh(dir.path(), &["--help"]);
    assert_eq!(o.status.code(), Some(0));
    for cmd in ["respond", "poles", "kms", "preserve", "table1"] {
        assert!(stdout(&o).contains(cmd));
    }
}

#[test]
fn cache_hits_and_recovers_from_corruption() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["respond", "--spec", "1", "--omega", "1"];
    assert!(unruh(dir.path(), &args).status.success());
    let entries = cache_entries(dir.path());
    assert_eq!(entries.len(), 1);
    let first = std::fs::read(&entries[0]).unwrap();
    let meta = entries[0].with_extension("meta.json");
    let meta_before = std::fs::read(&meta).unwrap();

    // A hit leaves the entry and its sidecar untouched.
    let o = unruh(dir.path(), &args);
    assert!(o.status.success());
    assert_eq!(std::fs::read(&meta).unwrap(), meta_before);

    // A corrupt entry is reported and replaced by an identical recomputation.
    std::fs::write(&entries[0], b"{ truncated").unwrap();
    let o = unruh(dir.path(), &args);
    assert!(o.status.success());
    assert!(stderr(&o).contains("corrupt"), "{}", stderr(&o));
    assert_eq!(std::fs::read(&entries[0]).unwrap(), first);

    // --force recomputes and reproduces the entry byte for byte.
    let mut forced = args.to_vec();
    forced.push("--force");
    assert!(unruh(dir.path(), &forced).status.success());
    assert_eq!(std::fs::read(&entries[0]).unwrap(), first);

    // A different configuration gets its own entry.
    assert!(unruh(dir.path(), &["respond", "--spec", "1", "--omega", "2"]).status.success());
    assert_eq!(cache_entries(dir.path()).len(), 2);
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let one = tempfile::tempdir().unwrap();
    let four = tempfile::tempdir().unwrap();
    let args = ["respond", "--spec", "1,5", "--omega", "0.5,1"];
    let mut a = args.to_vec();
    a.extend(["--workers", "1"]);
    let mut b = args.to_vec();
    b.extend(["--workers", "4"]);
    assert!(unruh(one.path(), &a).status.success());
    assert!(unruh(four.path(), &b).status.success());
    let x = std::fs::read(one.path().join("respond/respond.json")).unwrap();
    let y = std::fs::read(four.path().join("respond/respond.json")).unwrap();
    assert_eq!(x, y);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "spec = [\"none\"]\nomega = \"0.5:1.5:0.5\"\na = 2.0\n").unwrap();
    let o = unruh(dir.path(), &["respond", "--config", cfg.to_str().unwrap(), "--a", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("respond/respond.json")).unwrap()).unwrap();
    assert_eq!(v["config"]["a"], 1.0);
    assert_eq!(v["payload"].as_array().unwrap().len(), 3);

    std::fs::write(&cfg, "omgea = 1.0\n").unwrap();
    let o = unruh(dir.path(), &["respond", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn out_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_unruh"))
        .args(["respond", "--spec", "none"])
        .env("UNRUH_OUT", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(dir.path().join("respond/respond.json").exists());
}

#[test]
fn poles_with_tracking() {
    let dir = tempfile::tempdir().unwrap();
    let o = unruh(dir.path(), &["poles", "--spec", "3", "--w", "0", "--track"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let p = payload(&dir.path().join("poles/poles.json"));
    let snap = &p["snapshots"][0];
    let inside = snap["in_strip"].as_array().unwrap().iter().filter(|b| b.as_bool().unwrap()).count();
    // Undeformed stations at iε, 2πi + iε, 4πi + iε (the last on the closed
    // boundary) plus the interior pole pairs the deformation adds.
    assert!(inside > 3, "{inside}");
    assert!(!p["tracks"][0]["tracks"]["trajectories"].as_array().unwrap().is_empty());
    let csv = std::fs::read_to_string(dir.path().join("poles/tracks_3_w0.csv")).unwrap();
    assert!(csv.starts_with("trajectory,provenance,split_born,ell,re,im,order\n"));
}

#[test]
fn kms_flags_the_expected_rows() {
    let dir = tempfile::tempdir().unwrap();
    let o = unruh(dir.path(), &["kms", "--spec", "1,3,6"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = payload(&dir.path().join("kms/kms.json"));
    let verdicts: Vec<[String; 4]> = rows
        .as_array()
        .unwrap()
        .iter()
        .map(|r| {
            ["imaginary_periodicity", "stationarity", "holomorphicity", "polynomial_bound"]
                .map(|k| r[k]["verdict"].as_str().unwrap().to_string())
        })
        .collect();
    assert_eq!(verdicts[0], ["yes", "yes", "yes", "yes"]);
    assert_eq!(verdicts[1], ["yes", "yes", "no", "yes"]);
    assert_eq!(verdicts[2], ["no", "no", "yes", "yes"]);
}

#[test]
fn table1_single_matching_row_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = unruh(dir.path(), &["table1", "--only", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("table1/table1.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.lines().nth(1).unwrap().starts_with("1,lorentzian,yes,yes,yes,yes,yes,"));
}

#[test]
fn preserve_reports_all_conditions() {
    let dir = tempfile::tempdir().unwrap();
    let o = unruh(dir.path(), &["preserve", "--spec", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    for k in ["condition A", "condition B", "condition C", "detailed balance gap", "preservation"] {
        assert!(text.contains(k), "{text}");
    }
    let r = &payload(&dir.path().join("preserve/preserve.json"))[0];
    assert_eq!(r["preservation"], "yes");
    assert!(r["detailed_balance_gap"]["evidence"]["gap"].as_f64().unwrap().abs() < 1e-6);
}

#[test]
fn table1_mismatch_exits_two_and_names_the_cells() {
    let dir = tempfile::tempdir().unwrap();
    let o = unruh(dir.path(), &["table1", "--only", "6"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("row 6 preservation"), "{}", stderr(&o));
    // The table is still written.
    assert!(dir.path().join("table1/table1.json").exists());
}
