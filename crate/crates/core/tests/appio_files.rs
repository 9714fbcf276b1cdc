mod common;

use std::fs;
use std::path::Path;

use common::demo;
use hygrotherm::appio::{
    self, config_to_string, load_config, parse_config, write_vtk_to, ConfigError, Forcing,
    ModelKind,
};
use hygrotherm::assembly::Field;
use hygrotherm::domain::{Mesh, Side, Triangle};
use hygrotherm::Exec;

const CONSTANT_RUN: &str = "\
# single linear layer held at its boundary state
[mesh]
h_target = 0.25

[time]
h_t = 0.1
t_end = 1
strategy = semi_implicit

[layer.slab]
x0 = 0
y0 = 0
x1 = 1
y1 = 0.5
material = lin
initial = 2, 0.25

[material.lin]
model = linear
beta = 1, 0.1, 0.1, 1
kappa = 2, 0.5, 0.5, 1
nu = 3, 3

[boundary.west]
sigma = 2, 0.25

[boundary.north]
alpha = 1, 1
sigma = 2, 0.25

[output]
dir = out
snapshots = 0, 0.5, 1
probes = 0.5 0.25; 1 0.5
";

#[test]
fn config_fields_and_round_trip() {
    let cfg = parse_config(CONSTANT_RUN, Path::new("/base")).unwrap();
    assert_eq!(cfg.mesh.as_ref().unwrap().h_target, 0.25);
    let time = cfg.time.as_ref().unwrap();
    assert_eq!((time.h_t, time.t_end, time.eps_fp, time.k_max), (0.1, 1.0, 1e-8, 50));
    assert_eq!(cfg.layers.len(), 1);
    assert_eq!(cfg.layers[0].rect, [0.0, 0.0, 1.0, 0.5]);
    assert_eq!(cfg.layers[0].initial, [2.0, 0.25]);
    assert_eq!(cfg.materials[0].model, ModelKind::Linear);
    let west = cfg.boundary(Side::West).unwrap();
    assert_eq!(west.alpha, None);
    assert_eq!(west.forcing, Forcing::Constant([2.0, 0.25]));
    assert_eq!(cfg.boundary(Side::North).unwrap().alpha, Some([1.0, 1.0]));
    assert!(cfg.boundary(Side::East).is_none());
    assert_eq!(cfg.output.snapshots, vec![0.0, 0.5, 1.0]);
    assert_eq!(cfg.output.probes, vec![[0.5, 0.25], [1.0, 0.5]]);
    assert!(cfg.output.vtk);
    assert_eq!(cfg.resolve(Path::new("a.csv")), Path::new("/base/a.csv"));

    let again = parse_config(&config_to_string(&cfg), Path::new("/base")).unwrap();
    assert_eq!(again, cfg);
}

#[test]
fn demo_configs_round_trip() {
    for name in ["wall.cfg", "kiessl.cfg", "linear.cfg", "reentrant.cfg", "mms_spatial.cfg", "mms_temporal.cfg"] {
        let cfg = load_config(&demo(name)).unwrap();
        let again = parse_config(&config_to_string(&cfg), &cfg.base_dir).unwrap();
        assert_eq!(again, cfg, "{name}");
    }
}

#[test]
fn config_errors_carry_location() {
    let dup = CONSTANT_RUN.replace("h_target = 0.25", "h_target = 0.25\nh_target = 0.5");
    match parse_config(&dup, Path::new(".")) {
        Err(ConfigError::Parse { line, .. }) => assert_eq!(line, 4),
        other => panic!("expected parse error, got {other:?}"),
    }
    let bad = CONSTANT_RUN.replace("strategy = semi_implicit", "strategy = newton");
    let err = parse_config(&bad, Path::new(".")).unwrap_err();
    assert_eq!(err.key(), Some("time.strategy"));
}

fn one_triangle() -> Mesh {
    Mesh {
        nodes: vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
        triangles: vec![Triangle {
            nodes: [0, 1, 2],
            layer: 0,
        }],
        exterior_edges: vec![],
        interface_edges: vec![],
        h_mesh: 1.0,
        node_layer: vec![0; 3],
        layer_count: 1,
        interface_count: 0,
        segment_count: 0,
    }
}

const ONE_TRIANGLE_VTK: &str = "\
# vtk DataFile Version 3.0
hygrotherm field
ASCII
DATASET UNSTRUCTURED_GRID
POINTS 3 double
0.0000000000000000e0 0.0000000000000000e0 0.0000000000000000e0
1.0000000000000000e0 0.0000000000000000e0 0.0000000000000000e0
0.0000000000000000e0 1.0000000000000000e0 0.0000000000000000e0
CELLS 1 4
3 0 1 2
CELL_TYPES 1
5
POINT_DATA 3
SCALARS theta double 1
LOOKUP_TABLE default
2.9314999999999998e2
2.9414999999999998e2
-1.0000000000000001e-1
SCALARS moisture double 1
LOOKUP_TABLE default
5.0000000000000000e-1
3.3333333333333331e-1
0.0000000000000000e0
";

#[test]
fn vtk_is_byte_exact() {
    let mesh = one_triangle();
    let field = Field::from_fn(&mesh, |p, _| [[293.15, 294.15, -0.1][p], [0.5, 1.0 / 3.0, 0.0][p]]);
    let mut out = Vec::new();
    write_vtk_to(&mut out, &mesh, &field).unwrap();
    assert_eq!(String::from_utf8(out).unwrap(), ONE_TRIANGLE_VTK);
}

/// Reads the point arrays back from a legacy VTK file.
fn reload_vtk(text: &str) -> (Vec<[f64; 2]>, Vec<[f64; 2]>) {
    let lines: Vec<&str> = text.lines().collect();
    let n: usize = lines[4].split_whitespace().nth(1).unwrap().parse().unwrap();
    let points = lines[5..5 + n]
        .iter()
        .map(|l| {
            let v: Vec<f64> = l.split_whitespace().map(|x| x.parse().unwrap()).collect();
            [v[0], v[1]]
        })
        .collect();
    let start = |name: &str| lines.iter().position(|l| l.starts_with(&format!("SCALARS {name}"))).unwrap() + 2;
    let (a, b) = (start("theta"), start("moisture"));
    let values = (0..n)
        .map(|k| [lines[a + k].parse().unwrap(), lines[b + k].parse().unwrap()])
        .collect();
    (points, values)
}

#[test]
fn run_outputs_reload_exactly() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.cfg"), CONSTANT_RUN).unwrap();
    let cfg = load_config(&dir.path().join("c.cfg")).unwrap();
    let summary = appio::run_config(&cfg, Exec::Sequential).unwrap();
    let out = dir.path().join("out");
    assert_eq!(summary.output_dir, out);
    for name in ["snapshot_000000.vtk", "snapshot_000005.vtk", "snapshot_000010.vtk", "probes.csv", "steps.csv"] {
        assert!(out.join(name).exists(), "{name}");
    }

    let last = summary.trajectory.snapshots.last().unwrap();
    let (points, values) = reload_vtk(&fs::read_to_string(out.join("snapshot_000010.vtk")).unwrap());
    let setup = appio::prepare(&cfg).unwrap();
    assert_eq!(points, setup.mesh.nodes);
    for (p, v) in values.iter().enumerate() {
        assert_eq!(*v, last.field.get(p));
    }

    // boundary state everywhere: nothing moves
    let probes = fs::read_to_string(out.join("probes.csv")).unwrap();
    let mut rows = probes.lines();
    let header: Vec<&str> = rows.next().unwrap().split(',').collect();
    assert_eq!(header.len(), 5);
    assert_eq!(header[0], "t_s");
    assert!(header[1].starts_with("probe0_node") && header[1].ends_with("_theta"));
    let body: Vec<Vec<f64>> = rows.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(body.len(), 11);
    for (k, r) in body.iter().enumerate() {
        assert!((r[0] - 0.1 * k as f64).abs() < 1e-15);
        for p in 0..2 {
            assert!((r[1 + 2 * p] - 2.0).abs() < 1e-9);
            assert!((r[2 + 2 * p] - 0.25).abs() < 1e-9);
        }
    }

    let steps = fs::read_to_string(out.join("steps.csv")).unwrap();
    assert_eq!(steps.lines().count(), 11);
    assert!(steps.starts_with("step,t_s,picard_iters,"));
}

#[test]
fn runs_are_identical_across_policies() {
    let cfg = load_config(&demo("linear.cfg")).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let mut a = cfg.clone();
    a.output.dir = dir.path().join("a");
    let mut b = cfg;
    b.output.dir = dir.path().join("b");
    let ra = appio::run_config(&a, Exec::Sequential).unwrap();
    let rb = appio::run_config(&b, Exec::Parallel).unwrap();
    assert_eq!(ra.trajectory, rb.trajectory);
    for f in ["probes.csv", "snapshot_000100.vtk"] {
        assert_eq!(fs::read(a.output.dir.join(f)).unwrap(), fs::read(b.output.dir.join(f)).unwrap());
    }
}
