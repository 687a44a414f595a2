use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use auricle_core::geometry::io::write_obj;
use auricle_core::geometry::load_ply;
use auricle_core::geometry::primitives::plane_grid;
use serde_json::Value;

fn auricle(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_auricle")).current_dir(dir).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn plane(dir: &Path) -> PathBuf {
    let path = dir.join("plane.obj");
    let mut f = fs::File::create(&path).unwrap();
    write_obj(&plane_grid(20.0, 20.0, 40, 40), &mut f).unwrap();
    path
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn design_on_plane_gives_three_mm_everywhere() {
    let dir = tempfile::tempdir().unwrap();
    plane(dir.path());
    let o = auricle(dir.path(), &["design", "plane.obj", "--out", "design.json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("design: 10/10"));
    let d = json(&dir.path().join("design.json"));
    let specs = d["design"]["electrodes"].as_array().unwrap();
    assert_eq!(specs.len(), 10);
    for s in specs {
        assert!((s["diameter_mm"].as_f64().unwrap() - 3.0).abs() < 3e-3);
    }
    assert_eq!(d["provenance"]["config_sha256"].as_str().unwrap().len(), 64);
    assert!(d["provenance"]["seed"].is_null());
}

#[test]
fn design_missing_mesh_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = auricle(dir.path(), &["design", "nope.obj", "--out", "d.json"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("nope.obj"));
}

#[test]
fn design_unreachable_target_is_partial() {
    let dir = tempfile::tempdir().unwrap();
    plane(dir.path());
    let o = auricle(dir.path(), &["design", "plane.obj", "--target-area", "450", "--out", "d.json"]);
    assert_eq!(code(&o), 2);
    let d = json(&dir.path().join("d.json"));
    assert_eq!(d["design"]["failed"].as_array().unwrap().len(), 10);
    assert_eq!(d["design"]["failed"][0]["ap"], "AP1");
}

#[test]
fn simulate_requires_seed() {
    let dir = tempfile::tempdir().unwrap();
    let o = auricle(dir.path(), &["simulate", "cohort", "--out", "c.csv"]);
    assert_eq!(code(&o), 1);
    assert!(!dir.path().join("c.csv").exists());
}

#[test]
fn cohort_is_reproducible_and_has_sixty_rows() {
    let dir = tempfile::tempdir().unwrap();
    let a = auricle(dir.path(), &["simulate", "cohort", "--seed", "7", "--out", "a.csv"]);
    let b = auricle(dir.path(), &["simulate", "cohort", "--seed", "7", "--out", "b.csv"]);
    assert_eq!((code(&a), code(&b)), (0, 0));
    let ta = fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(ta, fs::read(dir.path().join("b.csv")).unwrap());
    let text = String::from_utf8(ta).unwrap();
    let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(data.len(), 61);
    assert!(text.contains("# seed 7"));
    assert!(text.contains("# config_sha256 "));
}

#[test]
fn invalid_config_field_is_named() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.json"), r#"{ "noise_sigma": -0.5 }"#).unwrap();
    let o = auricle(dir.path(), &["simulate", "cohort", "bad.json", "--seed", "1", "--out", "c.csv"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("noise_sigma"));

    fs::write(dir.path().join("bad2.json"), r#"{ "hr_gain": 0 }"#).unwrap();
    let o = auricle(dir.path(), &["simulate", "session", "bad2.json", "--seed", "1", "--out", "s.json"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("hr_gain"));
}

#[test]
fn noiseless_control_session_is_flat() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("b1.json"), r#"{ "volunteers": 1, "tests": ["B1"], "noise_sigma": 0.0 }"#).unwrap();
    let o = auricle(dir.path(), &["simulate", "session", "b1.json", "--seed", "5", "--out", "s.json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s = json(&dir.path().join("s.json"));
    let periods = s["sessions"][0]["aesr"].as_array().unwrap();
    assert_eq!(periods.len(), 4);
    assert!(periods.iter().all(|p| p == &periods[0]));
    assert_eq!(s["provenance"]["seed"], 5);
}

#[test]
fn noiseless_archetypes_score_perfect_silhouette() {
    let dir = tempfile::tempdir().unwrap();
    let trends = [[1.0, 2.0, 3.0, 1.0, 2.0], [1.0, 0.5, 0.5, 2.0, 1.0], [1.0, 3.0, 1.0, 3.0, 0.7]];
    let mut csv = String::from("label,AP1,AP2,AP3,AP4,AP5\n");
    for (c, t) in trends.iter().enumerate() {
        for i in 0..6 {
            let row: Vec<String> = t.iter().map(|v| format!("{}", v * 1e5 * (i + 1) as f64)).collect();
            csv.push_str(&format!("{c}-{i},{}\n", row.join(",")));
        }
    }
    fs::write(dir.path().join("d.csv"), csv).unwrap();
    let o = auricle(dir.path(), &["analyze", "d.csv", "--seed", "3", "--out", "r.json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&dir.path().join("r.json"));
    assert_eq!(r["cluster"]["k"], 3);
    assert!((r["cluster"]["mean_silhouette"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!(r["concordance"].is_null());
}

#[test]
fn malformed_row_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let csv = "label,AP1,AP2\na,1,2\nb,1,2\nc,1,oops\nd,2,2\ne,3,1\n";
    fs::write(dir.path().join("d.csv"), csv).unwrap();
    let o = auricle(dir.path(), &["analyze", "d.csv", "--out", "r.json"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("row 3"), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn cohort_analysis_with_covariate() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&auricle(dir.path(), &["simulate", "cohort", "--seed", "2", "--out", "c.csv", "--truth", "t.csv"])), 0);
    let text = fs::read_to_string(dir.path().join("c.csv")).unwrap();
    let mut cov = String::from("label,value\n");
    for (i, l) in text.lines().filter(|l| !l.starts_with('#')).skip(1).enumerate() {
        let label = l.split(',').next().unwrap();
        cov.push_str(&format!("{label},{}\n", (i as f64 * 0.7).sin()));
    }
    fs::write(dir.path().join("cov.csv"), cov).unwrap();
    let o = auricle(
        dir.path(),
        &["analyze", "c.csv", "--seed", "2", "--covariate", "cov.csv", "--permutations", "999", "--out", "r.json"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&dir.path().join("r.json"));
    assert_eq!(r["cluster"]["k"], 4);
    assert!(r["concordance"]["fraction"].as_f64().unwrap() > 0.6);
    let cols = r["covariate"]["columns"].as_array().unwrap();
    assert_eq!(cols.len(), 10);
    assert_eq!(cols[0]["reference"], true);
    assert!(cols[1]["result"]["p_value"].as_f64().unwrap() > 0.0);
}

fn placed(dir: &Path) {
    plane(dir);
    assert_eq!(code(&auricle(dir, &["place", "plane.obj", "--out", "aps.json"])), 0);
}

fn ap_values(n: usize, f: impl Fn(usize) -> f64) -> String {
    let mut s = String::from("ap,value\n");
    for i in 0..n {
        s.push_str(&format!("AP{},{}\n", i + 1, f(i)));
    }
    s
}

#[test]
fn contour_constant_field_round_trips_through_ply() {
    let dir = tempfile::tempdir().unwrap();
    placed(dir.path());
    fs::write(dir.path().join("v.csv"), ap_values(10, |_| 2.5)).unwrap();
    let o = auricle(dir.path(), &["contour", "plane.obj", "aps.json", "v.csv", "--format", "ply", "--out", "c.ply"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let ply = load_ply(&dir.path().join("c.ply")).unwrap();
    assert_eq!(ply.mesh.vertex_count(), 41 * 41);
    let aesr = &ply.vertex_scalars["aesr"];
    assert!(aesr.iter().all(|v| (v - 2.5).abs() < 1e-12));
    assert!(ply.comments.iter().any(|c| c.starts_with("config_sha256 ")));
}

#[test]
fn contour_count_mismatch_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    placed(dir.path());
    fs::write(dir.path().join("v.csv"), ap_values(9, |i| i as f64)).unwrap();
    let o = auricle(dir.path(), &["contour", "plane.obj", "aps.json", "v.csv", "--out", "c.ply"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("10 APs but 9 values"));
}

#[test]
fn contour_vtk_has_point_data() {
    let dir = tempfile::tempdir().unwrap();
    placed(dir.path());
    fs::write(dir.path().join("v.csv"), ap_values(10, |i| 1.0 + i as f64 / 10.0)).unwrap();
    let o = auricle(dir.path(), &["contour", "plane.obj", "aps.json", "v.csv", "--format", "vtk", "--field", "ratio", "--out", "c.vtk"]);
    assert_eq!(code(&o), 0);
    let text = fs::read_to_string(dir.path().join("c.vtk")).unwrap();
    assert!(text.lines().nth(1).unwrap().contains("config_sha256="));
    assert!(text.contains("POINT_DATA 1681"));
    assert!(text.contains("SCALARS ratio double 1"));
}

#[test]
fn session_matrix_feeds_analysis() {
    let dir = tempfile::tempdir().unwrap();
    let o = auricle(dir.path(), &["simulate", "session", "--seed", "4", "--out", "s.json", "--matrix-out", "p.csv", "--periods", "II"]);
    assert_eq!(code(&o), 0);
    let o = auricle(dir.path(), &["analyze", "p.csv", "--normalize", "none", "--select", "3-", "--out", "r.json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&dir.path().join("r.json"));
    assert_eq!(r["input"]["rows_used"], 5);
    assert_eq!(r["cluster"]["k"], 2);
}
