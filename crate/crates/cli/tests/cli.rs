use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn demo(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../demo").join(name)
}

fn hygrotherm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hygrotherm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn mesh_info_reports_counts() {
    let o = hygrotherm(&["mesh-info", path(&demo("wall.cfg"))]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("nodes"), "{s}");
    assert!(s.contains("triangles"), "{s}");
}

#[test]
fn check_materials_lists_every_material() {
    let o = hygrotherm(&["check-materials", path(&demo("linear.cfg"))]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("material soft (linear)"), "{s}");
    assert!(s.contains("material hard (linear)"), "{s}");
}

#[test]
fn reentrant_corner_is_singular() {
    let o = hygrotherm(&["analyze-corner", path(&demo("reentrant.cfg"))]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("singular"), "{s}");
    let o = hygrotherm(&["analyze-corner", path(&demo("wall.cfg"))]);
    assert!(!stdout(&o).contains("singular"));
}

#[test]
fn verify_mms_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("mms.cfg");
    fs::write(
        &cfg,
        "[mms]\ncase = two_layer_spatial\nh_list = 0.25, 0.125\nht_list = 0.05\n\n[output]\ndir = report\n",
    )
    .unwrap();
    let o = hygrotherm(&["--threads", "2", "verify-mms", path(&cfg)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("report/convergence.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.starts_with("h,h_t,error,order"));
}

#[test]
fn run_writes_outputs_next_to_config() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(demo("linear.cfg"))
        .unwrap()
        .replace("t_end = 1", "t_end = 0.1")
        .replace("snapshots = 0, 0.5, 1", "snapshots = 0.1");
    let cfg = dir.path().join("linear.cfg");
    fs::write(&cfg, text).unwrap();
    let o = hygrotherm(&["--log-level", "warn", "run", path(&cfg)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("steps: 10"));
    let out = dir.path().join("out/linear");
    for f in ["snapshot_000000.vtk", "snapshot_000010.vtk", "probes.csv", "steps.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
}

#[test]
fn invalid_config_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    let text = fs::read_to_string(demo("linear.cfg")).unwrap().replace("h_t = 0.01", "h_t = -1");
    fs::write(&cfg, text).unwrap();
    let o = hygrotherm(&["run", path(&cfg)]);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("time.h_t"), "{err}");
}
