use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_paleodemog"));
    c.env_remove("PALEODEMOG_DATA").env_remove("RUST_LOG");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn version_lists_data_hashes() {
    let o = run(&["--version"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let hashes: Vec<&str> = text.lines().filter(|l| l.contains("  ")).collect();
    assert_eq!(hashes.len(), 7, "{text}");
    for line in hashes {
        let hash = line.split_whitespace().next().unwrap();
        assert_eq!(hash.len(), 64);
        assert!(hash.chars().all(|c| c.is_ascii_hexdigit()));
    }
}

#[test]
fn data_override_changes_provenance() {
    let dir = tempfile::tempdir().unwrap();
    fs::create_dir(dir.path().join("fertility")).unwrap();
    fs::write(
        dir.path().join("fertility/booth.csv"),
        "age_lower,proportion\n15,0.1\n20,0.2\n25,0.2\n30,0.2\n35,0.15\n40,0.1\n45,0.05\n",
    )
    .unwrap();
    let base = stdout(&run(&["--version"]));
    let o = bin()
        .arg("--version")
        .env("PALEODEMOG_DATA", dir.path())
        .output()
        .unwrap();
    let overridden = stdout(&o);
    let line = |t: &str| {
        t.lines()
            .find(|l| l.ends_with("fertility/booth.csv"))
            .unwrap()
            .to_string()
    };
    assert_ne!(line(&base), line(&overridden));
    let other = |t: &str| {
        t.lines()
            .find(|l| l.ends_with("mortality/west_female.csv"))
            .unwrap()
            .to_string()
    };
    assert_eq!(other(&base), other(&overridden));
}

#[test]
fn single_cell_sweep() {
    let o = run(&["sweep", "--tfr", "5:5:0.2", "--e0", "27.5:27.5:2.5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "tfr,e0,cwr,growth_per_year,residual");
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("5,27.5,"));
    let cwr = lines[1].split(',').nth(2).unwrap();
    assert!(cwr.trim_start_matches("0.").len() <= 6, "{cwr}");
}

#[test]
fn invert_from_saved_surface_matches_recompute() {
    let dir = tempfile::tempdir().unwrap();
    let surface = dir.path().join("surface.json");
    let s = surface.to_str().unwrap();
    let o = run(&["sweep", "--format", "json", "--out", s]);
    assert!(o.status.success(), "{}", stderr(&o));
    let args = ["--cwr", "0.95:1.05", "--growth", "-0.004:-0.002"];
    let from_file = run(&[&["invert", "--surface", s][..], &args].concat());
    let fresh = run(&[&["invert"][..], &args].concat());
    assert!(from_file.status.success(), "{}", stderr(&from_file));
    assert_eq!(stdout(&from_file), stdout(&fresh));
    assert!(stdout(&fresh).lines().count() >= 1);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let read = |name: &str| fs::read(dir.path().join(name)).unwrap();
    for name in ["a.json", "b.json"] {
        let path = dir.path().join(name);
        assert!(
            run(&["sweep", "--format", "json", "--out", path.to_str().unwrap()])
                .status
                .success()
        );
    }
    assert_eq!(read("a.json"), read("b.json"));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let o = run(&["sweep", "--bogus"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--bogus"));
}

#[test]
fn malformed_range_is_a_usage_error() {
    let o = run(&["invert", "--cwr", "1.05:0.95"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_subcommand_is_a_usage_error() {
    assert_eq!(run(&[]).status.code(), Some(2));
}

#[test]
fn domain_errors_exit_one_with_one_line() {
    let o = run(&["sweep", "--e0", "10:120:10"]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert_eq!(err.trim_end().lines().count(), 1, "{err}");
    assert!(err.starts_with("error:"));
    let o = run(&["sweep", "--family", "north"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn contours_are_json_polylines() {
    let o = run(&["contours", "--levels", "0.8,1.0"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let lines = v.as_array().unwrap();
    assert!(!lines.is_empty());
    for l in lines {
        assert!(l["level"].is_f64());
        for p in l["points"].as_array().unwrap() {
            assert_eq!(p.as_array().unwrap().len(), 2);
        }
    }
}

fn write(path: &Path, text: &str) -> String {
    fs::write(path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn project_writes_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write(
        &dir.path().join("s.json"),
        r#"{"initial": {"tfr": 5.0, "e0": 30.0, "total": 100000},
            "phases": [{"time": 0, "tfr": 5.25, "e0": 30.0}],
            "horizon": 100}"#,
    );
    let o = run(&["project", "--scenario", &scenario]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "time,cwr,growth_per_year,total_population");
    assert_eq!(lines.len(), 22);
    let json = run(&["project", "--scenario", &scenario, "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(v["points"].as_array().unwrap().len(), 21);
}

#[test]
fn project_rejects_unreachable_e0() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write(
        &dir.path().join("s.json"),
        r#"{"initial": {"tfr": 5.0, "e0": 30.0, "total": 1},
            "phases": [{"time": 0, "tfr": 5.0, "e0": 30.0}, {"time": 20, "tfr": 5.0, "e0": 99.0}],
            "horizon": 50}"#,
    );
    let o = run(&["project", "--scenario", &scenario]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn census_aligns_sample_and_custom_files() {
    let o = run(&["census"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert_eq!(
        text.lines().next(),
        Some("midpoint,start_year,end_year,cwr,growth_per_year")
    );
    assert_eq!(text.lines().count(), 7);

    let dir = tempfile::tempdir().unwrap();
    let csv = write(
        &dir.path().join("c.csv"),
        "# two counts\nyear,children_0_14,women_15_plus,total_population\n1900,110,100,400\n\n1905,110,100,400\n",
    );
    let o = run(&["census", "--in", &csv, "--format", "json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v[0]["growth"], 0.0);
    assert_eq!(v[0]["midpoint"], 1902.5);

    let bad = write(&dir.path().join("bad.csv"), "year,children_0_14\n1900,1\n");
    assert_eq!(run(&["census", "--in", &bad]).status.code(), Some(1));
}

#[test]
fn census_infer_reports_each_period() {
    let o = run(&["census", "--infer", "--format", "json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let periods = v.as_array().unwrap();
    assert_eq!(periods.len(), 6);
    for p in periods {
        let c = &p["feasible"]["cwr_range"];
        let mid = p["observation"]["cwr"].as_f64().unwrap();
        assert!((c["lo"].as_f64().unwrap() - (mid - 0.05)).abs() < 1e-12);
    }
    let wide = run(&[
        "census",
        "--infer",
        "--cwr-halfwidth",
        "100",
        "--growth-halfwidth",
        "1",
    ]);
    let rows = stdout(&wide).lines().count() - 1;
    assert_eq!(rows, 6 * 36 * 17);
}

#[test]
fn survival_table_rows() {
    let o = run(&[
        "survival", "--sex", "female", "--e0", "20,40", "--groups", "0,5",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "sex,e0,age_lower,probability");
    assert_eq!(lines.len(), 5);
    let p = |i: usize| lines[i].split(',').nth(3).unwrap().parse::<f64>().unwrap();
    assert!(p(3) > p(1));
    let all = run(&["survival"]);
    assert_eq!(stdout(&all).lines().count(), 1 + 2 * 5 * 17);
}
