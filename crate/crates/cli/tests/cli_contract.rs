mod common;

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use common::{check_golden, data, exit_code, pac_sim, stderr, stdout};
use pac_core::SegmentParams;
use pac_sim::files::ScenarioFile;
use serde_json::Value;

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

fn read(p: &Path) -> String {
    fs::read_to_string(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn fk_straight_arm_matches_golden() {
    let tmp = tempfile::tempdir().unwrap();
    let out = pac_sim([
        "fk",
        "--robot",
        path_str(&data("robots/arm3.json")),
        "--out",
        path_str(tmp.path()),
    ]);
    assert_eq!(exit_code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("0 0 1 0.4062"), "{}", stdout(&out));
    let csv = read(&tmp.path().join("centerline.csv"));
    assert_eq!(csv.lines().count(), 1 + 3 * 101);
    check_golden("fk_arm3_straight.csv", &csv, 1e-9, 1e-12);
}

#[test]
fn fk_bent_state_matches_golden() {
    let tmp = tempfile::tempdir().unwrap();
    let out = pac_sim([
        "fk",
        "--robot",
        path_str(&data("robots/arm3.json")),
        "--state",
        "1.2,-0.8,0.3,-0.004;0.5,0.9,2.0,0;-1,0.4,-1.1,0.002",
        "--out",
        path_str(tmp.path()),
    ]);
    assert_eq!(exit_code(&out), 0, "{}", stderr(&out));
    check_golden(
        "fk_arm3_bent.csv",
        &read(&tmp.path().join("centerline.csv")),
        1e-8,
        1e-12,
    );
}

#[test]
fn statics_matches_golden() {
    let tmp = tempfile::tempdir().unwrap();
    let out = pac_sim([
        "statics",
        "--robot",
        path_str(&data("robots/arm3.json")),
        "--scenario",
        path_str(&data("scenarios/tip_mass_200g.json")),
        "--out",
        path_str(tmp.path()),
    ]);
    assert_eq!(exit_code(&out), 0, "{}", stderr(&out));
    // The equilibrium is only defined up to the solver tolerance.
    check_golden(
        "statics_tip_mass_200g.csv",
        &read(&tmp.path().join("state.csv")),
        1e-4,
        1e-8,
    );
    let report: Value = serde_json::from_str(&read(&tmp.path().join("report.json"))).unwrap();
    assert_eq!(report["converged"], Value::Bool(true));
    assert!(report["residual_norm"].as_f64().unwrap() < 1e-6);
}

#[test]
fn compare_matches_golden() {
    let tmp = tempfile::tempdir().unwrap();
    let out = pac_sim([
        "compare",
        "--robot",
        path_str(&data("robots/arm3.json")),
        "--scenario",
        path_str(&data("compare/demo.json")),
        "--out",
        path_str(tmp.path()),
    ]);
    assert_eq!(exit_code(&out), 0, "{}", stderr(&out));
    check_golden(
        "compare_demo.csv",
        &read(&tmp.path().join("comparison.csv")),
        1e-3,
        1e-9,
    );
    for k in 1..=3 {
        let svg = fs::read_dir(tmp.path())
            .unwrap()
            .filter_map(|e| e.ok())
            .any(|e| e.file_name().to_string_lossy().starts_with(&format!("compare_{k:02}_")));
        assert!(svg, "overlay {k} missing");
    }
}

#[test]
fn compare_reads_shipped_markers() {
    let tmp = tempfile::tempdir().unwrap();
    let out = pac_sim([
        "compare",
        "--robot",
        path_str(&data("robots/arm3.json")),
        "--scenario",
        path_str(&data("compare/markers_demo.json")),
        "--out",
        path_str(tmp.path()),
    ]);
    assert_eq!(exit_code(&out), 0, "{}", stderr(&out));
    let csv = read(&tmp.path().join("comparison.csv"));
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    let (pac, pcc): (f64, f64) = (row[1].parse().unwrap(), row[2].parse().unwrap());
    assert!(pac < 0.1 * pcc, "{csv}");
    // No orientation is available from markers.
    assert_eq!(row[4], "");
}

fn run_twice(args: &[&str], files: &[&str]) {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for (dir, workers) in [(&a, "1"), (&b, "3")] {
        let mut full: Vec<&str> = args.to_vec();
        full.extend(["--out", path_str(dir.path()), "--workers", workers]);
        let out = pac_sim(&full);
        assert_eq!(exit_code(&out), 0, "{}", stderr(&out));
    }
    for f in files {
        let x = fs::read(a.path().join(f)).unwrap();
        let y = fs::read(b.path().join(f)).unwrap();
        assert!(x == y, "{f} differs between runs");
    }
}

#[test]
fn csv_output_is_byte_identical_across_runs() {
    let robot = data("robots/arm3.json");
    run_twice(&["fk", "--robot", path_str(&robot)], &["centerline.csv"]);
    let scenario = data("scenarios/tip_mass_400g.json");
    run_twice(
        &[
            "statics",
            "--robot",
            path_str(&robot),
            "--scenario",
            path_str(&scenario),
        ],
        &["state.csv", "report.json", "equilibrium.json"],
    );
    let set = data("compare/demo.json");
    run_twice(
        &["compare", "--robot", path_str(&robot), "--scenario", path_str(&set)],
        &["comparison.csv", "reference_02_tip_force_0_1_N.csv"],
    );
    let tmp = tempfile::tempdir().unwrap();
    let sweep = write(
        tmp.path(),
        "sweep.json",
        r#"{"units": {"length": "mm"}, "contractions": [[0, 12], [0, 12], [0, 12]], "tip_masses": [0, 0.5], "kp": 5, "kd": 5}"#,
    );
    run_twice(
        &[
            "workspace",
            "--robot",
            path_str(&data("robots/section.json")),
            "--scenario",
            path_str(&sweep),
        ],
        &["workspace.csv", "summary.csv", "workspace.svg"],
    );
}

#[test]
fn malformed_json_is_an_input_error_with_position() {
    let tmp = tempfile::tempdir().unwrap();
    let robot = write(
        tmp.path(),
        "robot.json",
        "{\n  \"segments\": [\n    { \"rest_length\": 0.1, }\n  ]\n}\n",
    );
    let out = pac_sim(["fk", "--robot", path_str(&robot)]);
    assert_eq!(exit_code(&out), 2);
    let err = stderr(&out);
    assert!(err.contains("robot.json:3:"), "{err}");
}

#[test]
fn empty_segment_list_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let robot = write(tmp.path(), "robot.json", r#"{"segments": []}"#);
    let out = pac_sim(["fk", "--robot", path_str(&robot), "--out", path_str(tmp.path())]);
    assert_eq!(exit_code(&out), 2, "{}", stderr(&out));
}

#[test]
fn unknown_keys_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let text = read(&data("robots/section.json")).replacen('{', "{\"colour\": \"red\",", 1);
    let robot = write(tmp.path(), "robot.json", &text);
    let out = pac_sim(["fk", "--robot", path_str(&robot)]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr(&out).contains("colour"), "{}", stderr(&out));
}

#[test]
fn pcc_state_with_curvature_slope_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let out = pac_sim([
        "fk",
        "--robot",
        path_str(&data("robots/arm3.json")),
        "--model",
        "pcc",
        "--state",
        "0.5,0.2,0,0;0,0,0,0;0,0,0,0",
        "--out",
        path_str(tmp.path()),
    ]);
    assert_eq!(exit_code(&out), 2, "{}", stderr(&out));
    assert!(!tmp.path().join("centerline.csv").exists());
}

#[test]
fn load_on_missing_segment_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let scenario = write(
        tmp.path(),
        "s.json",
        r#"{"loads": [{"segment": 4, "s": 1, "force": [1, 0, 0]}]}"#,
    );
    let out = pac_sim([
        "statics",
        "--robot",
        path_str(&data("robots/arm3.json")),
        "--scenario",
        path_str(&scenario),
        "--out",
        path_str(tmp.path()),
    ]);
    assert_eq!(exit_code(&out), 2, "{}", stderr(&out));
}

#[test]
fn marker_header_error_names_expected_columns() {
    let tmp = tempfile::tempdir().unwrap();
    let markers = write(tmp.path(), "m.csv", "seg,s,x,y,z\n1,1,0,0,0.1\n");
    let out = pac_sim([
        "compare",
        "--robot",
        path_str(&data("robots/arm3.json")),
        "--scenario",
        path_str(&data("compare/demo.json")),
        "--markers",
        path_str(&markers),
        "--out",
        path_str(tmp.path()),
    ]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr(&out).contains("segment,s,x,y,z"), "{}", stderr(&out));
}

#[test]
fn empty_sweep_grid_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let sweep = write(tmp.path(), "sweep.json", r#"{"contractions": []}"#);
    let out = pac_sim([
        "workspace",
        "--robot",
        path_str(&data("robots/section.json")),
        "--scenario",
        path_str(&sweep),
        "--out",
        path_str(tmp.path()),
    ]);
    assert_eq!(exit_code(&out), 2, "{}", stderr(&out));
}

#[test]
fn missing_robot_flag_is_an_input_error() {
    let out = pac_sim(["statics"]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn solver_failure_exits_one_and_dumps_history() {
    let tmp = tempfile::tempdir().unwrap();
    let scenario = write(
        tmp.path(),
        "s.json",
        r#"{"units": {"mass": "g"}, "tip_mass": 400, "solver": {"max_steps": 3}}"#,
    );
    let out = pac_sim([
        "statics",
        "--robot",
        path_str(&data("robots/arm3.json")),
        "--scenario",
        path_str(&scenario),
        "--out",
        path_str(tmp.path()),
    ]);
    assert_eq!(exit_code(&out), 1, "{}", stderr(&out));
    let history = read(&tmp.path().join("residual_history.csv"));
    assert!(history.starts_with("step,residual\n"));
    assert!(history.lines().count() >= 2);
    assert!(!tmp.path().join("equilibrium.json").exists());
}

#[test]
fn emitted_equilibrium_round_trips_and_resolves_at_once() {
    let tmp = tempfile::tempdir().unwrap();
    let first = tmp.path().join("first");
    let out = pac_sim([
        "statics",
        "--robot",
        path_str(&data("robots/arm3.json")),
        "--scenario",
        path_str(&data("scenarios/tip_mass_200g.json")),
        "--out",
        path_str(&first),
    ]);
    assert_eq!(exit_code(&out), 0, "{}", stderr(&out));
    let eq_path = first.join("equilibrium.json");
    let parsed = ScenarioFile::load(&eq_path).unwrap();
    let text = serde_json::to_string_pretty(&parsed).unwrap();
    let reparsed: ScenarioFile = serde_json::from_str(&text).unwrap();
    assert_eq!(parsed, reparsed);
    assert_eq!(parsed, parsed.normalized());

    let second = tmp.path().join("second");
    let out = pac_sim([
        "statics",
        "--robot",
        path_str(&data("robots/arm3.json")),
        "--scenario",
        path_str(&eq_path),
        "--out",
        path_str(&second),
    ]);
    assert_eq!(exit_code(&out), 0, "{}", stderr(&out));
    let report: Value = serde_json::from_str(&read(&second.join("report.json"))).unwrap();
    assert!(report["iterations"].as_u64().unwrap() <= 2, "{report}");
    common::csv_close(
        &read(&second.join("state.csv")),
        &read(&first.join("state.csv")),
        1e-6,
        1e-9,
    )
    .unwrap();
}

fn schema(name: &str) -> jsonschema::Validator {
    let s: Value = serde_json::from_str(&read(&data(&format!("schema/{name}.schema.json")))).unwrap();
    jsonschema::validator_for(&s).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn shipped_files_validate_against_schemas() {
    for (dir, name) in [
        ("robots", "robot"),
        ("scenarios", "scenario"),
        ("sweeps", "sweep"),
        ("compare", "compare"),
    ] {
        let v = schema(name);
        let mut count = 0;
        for entry in fs::read_dir(data(dir)).unwrap() {
            let p = entry.unwrap().path();
            if p.extension().is_some_and(|e| e == "json") {
                let doc: Value = serde_json::from_str(&read(&p)).unwrap();
                if let Err(e) = v.validate(&doc) {
                    panic!("{}: {e}", p.display());
                }
                count += 1;
            }
        }
        assert!(count > 0, "no {dir} examples");
    }
}

#[test]
fn schema_and_parser_agree_on_fields() {
    let robot: Value = serde_json::from_str(&read(&data("schema/robot.schema.json"))).unwrap();
    let seg = &robot["$defs"]["segment"];
    let schema_keys: BTreeSet<String> = seg["properties"].as_object().unwrap().keys().cloned().collect();
    let required: BTreeSet<String> = seg["required"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_owned())
        .collect();
    let p = SegmentParams {
        rest_length: 0.1,
        radius: 0.01,
        mass: 0.01,
        k_bending: 1.0,
        k_torsion: 1.0,
        k_axial: 100.0,
    };
    let serde_keys: BTreeSet<String> = serde_json::to_value(&p)
        .unwrap()
        .as_object()
        .unwrap()
        .keys()
        .cloned()
        .collect();
    assert_eq!(schema_keys, serde_keys);
    assert_eq!(required, serde_keys);

    let scenario: Value = serde_json::from_str(&read(&data("schema/scenario.schema.json"))).unwrap();
    let schema_keys: BTreeSet<String> = scenario["properties"].as_object().unwrap().keys().cloned().collect();
    let full = read(&first_emitted_equilibrium());
    let keys: BTreeSet<String> = serde_json::from_str::<Value>(&full)
        .unwrap()
        .as_object()
        .unwrap()
        .keys()
        .cloned()
        .collect();
    assert!(keys.is_subset(&schema_keys), "{keys:?} vs {schema_keys:?}");
    assert!(schema("scenario").is_valid(&serde_json::from_str::<Value>(&full).unwrap()));

    // Both layers reject an unknown key.
    let mut doc: Value = serde_json::from_str(&read(&data("scenarios/rest.json"))).unwrap();
    doc["colour"] = Value::from("red");
    assert!(!schema("scenario").is_valid(&doc));
    assert!(serde_json::from_value::<ScenarioFile>(doc).is_err());
}

fn first_emitted_equilibrium() -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("pac-sim-eq-{}", std::process::id()));
    let out = pac_sim([
        "statics",
        "--robot",
        path_str(&data("robots/arm3.json")),
        "--scenario",
        path_str(&data("scenarios/bent.json")),
        "--out",
        path_str(&dir),
    ]);
    assert_eq!(exit_code(&out), 0, "{}", stderr(&out));
    dir.join("equilibrium.json")
}

#[test]
fn workspace_writes_cloud_summary_and_plot() {
    let tmp = tempfile::tempdir().unwrap();
    let sweep = write(
        tmp.path(),
        "sweep.json",
        r#"{"units": {"length": "mm"}, "contractions": [[0, 15], [0, 15], [0, 15]], "tip_masses": [0, 1], "kp": 5, "kd": 5}"#,
    );
    let out = pac_sim([
        "workspace",
        "--robot",
        path_str(&data("robots/section.json")),
        "--scenario",
        path_str(&sweep),
        "--out",
        path_str(tmp.path()),
    ]);
    assert_eq!(exit_code(&out), 0, "{}", stderr(&out));
    let cloud = read(&tmp.path().join("workspace.csv"));
    assert_eq!(cloud.lines().count(), 1 + 2 * 8);
    let svg = read(&tmp.path().join("workspace.svg"));
    assert!(svg.contains("0 kg") && svg.contains("1 kg"));
}
