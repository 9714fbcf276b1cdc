mod common;

use common::{golden, num};
use hygrotherm::assembly::{BoundaryDrive, NoSource, SegmentDrive, TimeSeries, Field};
use hygrotherm::domain::{build_domain, triangulate, LayerRect, Side};
use hygrotherm::materials::{LinearParams, Material, MaterialModel};
use hygrotherm::stepper::{run, Problem, RunOptions, StepOptions, Stepper, Strategy};

/// Decoupled linear strip with Newton exchange at both ends and insulated
/// long sides; every component solves a 1D problem.
#[test]
fn strip_matches_one_dimensional_reference() {
    let domain = build_domain(vec![LayerRect::new(0.0, 0.0, 1.0, 0.1, "strip")]).unwrap();
    let mesh = triangulate(&domain, 1.0 / 40.0).unwrap();
    let material = Material::Linear(LinearParams {
        beta: [[1.0, 0.0], [0.0, 2.0]],
        kappa: [[1.0, 0.0], [0.0, 0.5]],
        nu: [0.0, 0.0],
    });
    let segments = domain
        .exterior
        .iter()
        .map(|s| match s.side {
            Side::West => ([2.0, 1.0], [1.0, 0.5]),
            Side::East => ([1.0, 1.0], [0.0, 0.0]),
            _ => ([0.0, 0.0], [0.0, 0.0]),
        })
        .map(|(alpha, sigma)| SegmentDrive {
            alpha,
            sigma: TimeSeries::constant(sigma),
        })
        .collect();
    let drive = BoundaryDrive { segments };
    let mut opts = StepOptions::default();
    opts.solve.tol = 1e-12;
    let stepper = Stepper::new(
        Problem {
            mesh: &mesh,
            materials: vec![&material as &dyn MaterialModel],
            drive: &drive,
            source: &NoSource,
        },
        opts,
    );
    let xs = [0.0, 0.25, 0.5, 0.75, 1.0];
    let probes: Vec<usize> = xs.iter().map(|&x| mesh.nearest_node([x, 0.05])).collect();
    let h_t = 1.0 / 4000.0;
    let traj = run(
        &stepper,
        Field::zeros(mesh.node_count()),
        &RunOptions {
            h_t,
            t_end: 0.5,
            strategy: Strategy::SemiImplicit,
            snapshot_times: vec![],
            probes: probes.clone(),
        },
    )
    .unwrap();

    let mut worst = 0.0f64;
    for r in golden("pseudo1d_reference.csv") {
        let c = if &r[0] == "theta" { 0 } else { 1 };
        let (t, x, u) = (num(&r, 1), num(&r, 2), num(&r, 3));
        let k = (t / h_t).round() as usize;
        let p = xs.iter().position(|&v| v == x).unwrap();
        let got = traj.probe_values[p][k][c];
        worst = worst.max((got - u).abs());
    }
    println!("max nodal deviation {worst:.3e}");
    assert!(worst < 1e-3, "max deviation {worst}");
}
