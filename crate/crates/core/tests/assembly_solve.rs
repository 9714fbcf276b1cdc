mod common;

use common::demo;
use hygrotherm::appio::{self, driver, load_config};
use hygrotherm::assembly::assemble_step_system;
use hygrotherm::linsolve::{solve, SolveOptions};
use hygrotherm::Exec;
use nalgebra::{DMatrix, DVector};

#[test]
fn iterative_solve_matches_dense_lu() {
    let cfg = load_config(&demo("linear.cfg")).unwrap();
    let mut small = cfg.clone();
    small.mesh.as_mut().unwrap().h_target = 0.125;
    let setup = appio::prepare(&small).unwrap();
    let stepper = driver::make_stepper(&setup, driver::step_options(&small, Exec::Sequential));
    let (coeffs, _) = stepper.coefficients(&setup.initial).unwrap();
    let mut sys = assemble_step_system(
        &setup.mesh,
        &coeffs,
        &setup.initial,
        0.01,
        &setup.drive,
        &setup.source,
        0.01,
        Exec::Sequential,
    )
    .unwrap();
    sys.equilibrate_components();
    let n = sys.n();
    let dense = DMatrix::from_fn(n, n, |r, c| sys.matrix.get(r, c));
    let want = dense.lu().solve(&DVector::from_column_slice(&sys.rhs)).unwrap();
    let got = solve(
        &sys,
        SolveOptions {
            tol: 1e-13,
            ..Default::default()
        },
    )
    .unwrap();
    let err = (DVector::from_column_slice(&got.x) - &want).amax();
    assert!(err <= 1e-10 * want.amax(), "max deviation {err}");
}

#[test]
fn demo_meshes_are_conforming() {
    for name in ["wall.cfg", "kiessl.cfg", "linear.cfg", "reentrant.cfg"] {
        let cfg = load_config(&demo(name)).unwrap();
        let (domain, mesh) = driver::build_mesh(&cfg).unwrap();
        let area: f64 = (0..mesh.triangles.len()).map(|t| mesh.triangle_area(t)).sum();
        assert!((area - domain.area()).abs() <= 1e-12 * domain.area(), "{name}");
        assert!((0..mesh.triangles.len()).all(|t| mesh.triangle_area(t) > 0.0));
        // every interior edge has exactly two triangles, boundary edges one
        let mut count = std::collections::HashMap::new();
        for tri in &mesh.triangles {
            let [a, b, c] = tri.nodes;
            for (p, q) in [(a, b), (b, c), (c, a)] {
                *count.entry((p.min(q), p.max(q))).or_insert(0) += 1;
            }
        }
        let singles = count.values().filter(|&&k| k == 1).count();
        assert!(count.values().all(|&k| k <= 2), "{name}");
        assert_eq!(singles, mesh.exterior_edges.len(), "{name}");
        for e in &mesh.interface_edges {
            assert_ne!(e.layers[0], e.layers[1]);
        }
    }
}
