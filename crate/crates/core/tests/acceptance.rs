//! End-to-end acceptance checks. Each test prints one `PASS`/`FAIL` line.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hygrotherm::appio::{self, load_config};
use hygrotherm::assembly::{
    component_totals, discrete_energy, interface_flux_jump, BoundaryDrive, Field, NoSource,
};
use hygrotherm::domain::{build_domain, triangulate, LayerRect};
use hygrotherm::materials::{
    check_structure_conditions, state_grid, CrossScaled, LinearParams, Material, MaterialModel,
    StateSample, StructureCondition,
};
use hygrotherm::pencil::{regularity_verdict, roots_in_window, PencilProblem, SearchWindow};
use hygrotherm::stepper::{
    mms_verify, picard_step, MmsCase, Problem, SimState, StepError, StepOptions, Stepper,
    TimeProfile,
};
use hygrotherm::Exec;

fn report(label: &str, ok: bool, detail: String) {
    println!("{} {label}: {detail}", if ok { "PASS" } else { "FAIL" });
}

fn demo(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../demo").join(name)
}

fn tight() -> StepOptions {
    let mut o = StepOptions::default();
    o.solve.tol = 1e-12;
    o.solve.exec = Exec::Parallel;
    o
}

#[test]
fn spatial_convergence() {
    let start = Instant::now();
    let case = MmsCase::two_layer_spatial();
    let t = mms_verify(&case, &[1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0], &[0.01], Exec::Parallel).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let ok = t.spatial_orders.len() == 2
        && t.spatial_orders.iter().all(|o| (1.7..=2.3).contains(o))
        && secs < 60.0;
    report(
        "spatial convergence",
        ok,
        format!("orders {:?} in [1.7, 2.3], {secs:.1} s", t.spatial_orders),
    );
    assert!(ok, "{t}");
}

#[test]
fn temporal_convergence() {
    let start = Instant::now();
    let case = MmsCase::two_layer_temporal();
    let tt = case.t_end;
    let t = mms_verify(&case, &[1.0 / 32.0], &[tt / 8.0, tt / 16.0, tt / 32.0], Exec::Parallel).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let ok = t.temporal_orders.len() == 2
        && t.temporal_orders.iter().all(|o| (0.8..=1.2).contains(o))
        && secs < 60.0;
    report(
        "temporal convergence",
        ok,
        format!("orders {:?} in [0.8, 1.2], {secs:.1} s", t.temporal_orders),
    );
    assert!(ok, "{t}");
}

/// Two layers on the unit square split at x = 0.5, insulated, with a
/// nonzero smooth initial field.
fn closed_two_layer(params: [LinearParams; 2]) -> (Vec<Material>, hygrotherm::domain::LayeredDomain) {
    let domain = build_domain(vec![
        LayerRect::new(0.0, 0.0, 0.5, 1.0, "left"),
        LayerRect::new(0.5, 0.0, 1.0, 1.0, "right"),
    ])
    .unwrap();
    (params.iter().map(|p| Material::Linear(*p)).collect(), domain)
}

fn bump(x: [f64; 2]) -> [f64; 2] {
    let r2 = (x[0] - 0.3).powi(2) + (x[1] - 0.6).powi(2);
    [1.0 + (-10.0 * r2).exp(), 0.5 + 0.3 * (PI * x[0]).cos() * (PI * x[1]).sin()]
}

#[test]
fn conservation_without_exchange() {
    let params = [
        LinearParams {
            beta: [[1.0, 0.2], [0.1, 2.0]],
            kappa: [[1.0, 0.3], [0.2, 1.0]],
            nu: [0.0, 0.0],
        },
        LinearParams {
            beta: [[3.0, 0.1], [0.4, 1.0]],
            kappa: [[2.0, 0.1], [0.5, 0.7]],
            nu: [0.0, 0.0],
        },
    ];
    let (materials, domain) = closed_two_layer(params);
    let mesh = triangulate(&domain, 1.0 / 16.0).unwrap();
    let drive = BoundaryDrive::insulated(&domain);
    let stepper = Stepper::new(
        Problem {
            mesh: &mesh,
            materials: materials.iter().map(|m| m as &dyn MaterialModel).collect(),
            drive: &drive,
            source: &NoSource,
        },
        tight(),
    );
    let mut state = SimState {
        t: 0.0,
        n: 0,
        field: Field::from_fn(&mesh, |_, x| bump(x)),
    };
    let (coeffs, _) = stepper.coefficients(&state.field).unwrap();
    let m0 = component_totals(&mesh, &state.field, &coeffs);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let (next, rep) = stepper.semi_implicit_step(&state, 0.01).unwrap();
        for j in 0..2 {
            worst = worst.max((rep.mass[j] - m0[j]).abs() / m0[j].abs());
        }
        state = next;
    }
    let ok = worst <= 1e-8;
    report("conservation", ok, format!("max relative drift {worst:.2e} over 100 steps"));
    assert!(ok);
}

#[test]
fn energy_decay() {
    let kappa = [[2.0, 1.0], [1.0, 2.0]];
    let params = [
        LinearParams {
            beta: [[1.0, 0.0], [0.0, 1.0]],
            kappa,
            nu: [0.0, 0.0],
        },
        LinearParams {
            beta: [[2.0, 0.0], [0.0, 3.0]],
            kappa,
            nu: [0.0, 0.0],
        },
    ];
    let (materials, domain) = closed_two_layer(params);
    let mesh = triangulate(&domain, 1.0 / 16.0).unwrap();
    let drive = BoundaryDrive::insulated(&domain);
    let stepper = Stepper::new(
        Problem {
            mesh: &mesh,
            materials: materials.iter().map(|m| m as &dyn MaterialModel).collect(),
            drive: &drive,
            source: &NoSource,
        },
        tight(),
    )
    .with_linear_params(params.to_vec());
    let mut state = SimState {
        t: 0.0,
        n: 0,
        field: Field::from_fn(&mesh, |_, x| bump(x)),
    };
    let mut prev = discrete_energy(&mesh, &state.field, &params);
    let e0 = prev;
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..100 {
        let (next, rep) = stepper.semi_implicit_step(&state, 0.01).unwrap();
        let e = rep.energy.expect("linear run reports energy");
        worst = worst.max((e - prev) / prev.abs().max(f64::MIN_POSITIVE));
        prev = e;
        state = next;
    }
    let ok = worst <= 1e-8 && prev < e0;
    report(
        "energy decay",
        ok,
        format!("largest relative increase {worst:.2e}, energy {e0:.4e} -> {prev:.4e}"),
    );
    assert!(ok);
}

fn random_eps(rng: &mut ChaCha8Rng) -> [[f64; 2]; 2] {
    loop {
        let m = [
            [rng.gen_range(0.1..5.0), rng.gen_range(0.1..5.0)],
            [rng.gen_range(0.1..5.0), rng.gen_range(0.1..5.0)],
        ];
        if m[0][0] * m[1][1] - m[0][1] * m[1][0] > 0.1 {
            return m;
        }
    }
}

#[test]
fn half_angle_roots_match_closed_form() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    let mut found = 0;
    let mut all_regular = true;
    let mut missing = 0;
    for omega_l in [PI / 6.0, PI / 4.0, PI / 2.0] {
        for _ in 0..5 {
            let p = PencilProblem::new(omega_l, 2.0 * omega_l, random_eps(&mut rng), random_eps(&mut rng)).unwrap();
            let roots = roots_in_window(&p, SearchWindow::strip(-3.0, 0.0, 12.0)).unwrap();
            let step = PI / (2.0 * omega_l);
            let expected = ((3.0 / step).ceil() as usize).saturating_sub(1);
            let distinct: usize = roots.len();
            if distinct < expected {
                missing += 1;
            }
            for r in &roots {
                let k = (-r.lambda.im / step).round();
                let target = Complex64::new(0.0, -k * step);
                worst = worst.max((r.lambda - target).norm());
                found += 1;
            }
            all_regular &= regularity_verdict(&p).unwrap().regular;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = worst <= 1e-9 && all_regular && missing == 0 && secs < 30.0;
    report(
        "half-angle pencil roots",
        ok,
        format!("{found} roots, max deviation {worst:.1e}, all verdicts regular: {all_regular}, {secs:.1} s"),
    );
    assert!(ok);
}

#[test]
fn reentrant_corner_root() {
    let eps = [[2.0, 1.0], [1.0, 2.0]];
    let p = PencilProblem::single_material(1.5 * PI, eps).unwrap();
    let v = regularity_verdict(&p).unwrap();
    let target = Complex64::new(0.0, -2.0 / 3.0);
    let ok = v.roots_in_strip.len() == 1
        && (v.roots_in_strip[0].lambda - target).norm() <= 1e-9
        && !v.regular;
    let detail = match v.roots_in_strip.first() {
        Some(r) => format!(
            "{} distinct strip root(s), first {:.12} (multiplicity {}), verdict {}",
            v.roots_in_strip.len(),
            r.lambda,
            r.multiplicity,
            v.label()
        ),
        None => "no strip roots".to_owned(),
    };
    report("reentrant corner root", ok, detail);
    assert!(ok);
}

#[test]
fn picard_contraction_regime() {
    let cfg = load_config(&demo("wall.cfg")).unwrap();
    let setup = appio::prepare(&cfg).unwrap();
    let opts = appio::driver::step_options(&cfg, Exec::Parallel);
    let stepper = appio::driver::make_stepper(&setup, opts);
    let start = SimState {
        t: 0.0,
        n: 0,
        field: setup.initial.clone(),
    };

    let mut state = start.clone();
    let mut max_ratio = 0.0f64;
    let mut last_delta = 0.0;
    for _ in 0..5 {
        let (next, rep) = picard_step(&stepper, &state, 60.0, 1e-8, 50).unwrap();
        max_ratio = rep.contraction_ratios.iter().copied().fold(max_ratio, f64::max);
        last_delta = *rep.deltas.last().unwrap();
        state = next;
    }
    let small_ok = max_ratio < 1.0 && last_delta < 1e-8;

    let mut broke_at = None;
    let mut h_t = 60.0;
    for factor in [2u32, 4, 8, 16, 32, 64] {
        h_t = 60.0 * factor as f64;
        match picard_step(&stepper, &start, h_t, 1e-8, 50) {
            Ok(_) => {}
            Err(StepError::NonContraction { .. }) => {
                broke_at = Some(factor);
                break;
            }
            Err(e) => panic!("unexpected failure at h_t = {h_t}: {e}"),
        }
    }
    let ok = small_ok && broke_at.is_some();
    report(
        "picard contraction",
        ok,
        format!(
            "h_t = 60 s: max ratio {max_ratio:.3}, final delta {last_delta:.1e}; non-contraction at x{} (h_t = {h_t} s)",
            broke_at.map_or("none".to_owned(), |f| f.to_string())
        ),
    );
    assert!(ok);
}

/// Steady manufactured two-layer problem: smooth data, κ¹¹ jumping from 1
/// to 2 across the interface, flux-continuous exact solution.
fn steady_jump(h: f64) -> f64 {
    let mut case = MmsCase::two_layer(TimeProfile::Linear { a: 1.0, b: 0.0 }, 0.0);
    case.stationary = true;
    let mesh = triangulate(&case.domain, h).unwrap();
    let materials: Vec<Material> = case.params.iter().map(|p| Material::Linear(*p)).collect();
    let stepper = Stepper::new(
        Problem {
            mesh: &mesh,
            materials: materials.iter().map(|m| m as &dyn MaterialModel).collect(),
            drive: &case,
            source: &case,
        },
        tight(),
    );
    let u = stepper.steady(&Field::zeros(mesh.node_count()), 0.0).unwrap();
    let (coeffs, _) = stepper.coefficients(&u).unwrap();
    let jump = interface_flux_jump(&mesh, &u, &coeffs);
    jump.iter().map(|j| j[0].hypot(j[1])).fold(0.0, f64::max)
}

#[test]
fn interface_flux_jump_decays() {
    let hs = [1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0];
    let jumps: Vec<f64> = hs.iter().map(|&h| steady_jump(h)).collect();
    let factors: Vec<f64> = jumps.windows(2).map(|w| w[0] / w[1]).collect();
    let ok = factors.iter().all(|&f| f >= 1.5);
    report(
        "interface flux jump decay",
        ok,
        format!(
            "jumps {}, reduction factors {}",
            jumps.iter().map(|j| format!("{j:.3e}")).collect::<Vec<_>>().join(" "),
            factors.iter().map(|f| format!("{f:.2}")).collect::<Vec<_>>().join(" ")
        ),
    );
    assert!(ok);
}

#[test]
fn structure_validator_on_demo_materials() {
    let cfg = load_config(&demo("wall.cfg")).unwrap();
    let grid = state_grid([273.0, 313.0], [0.05, 0.95], 11, 11);
    let mut lines = Vec::new();
    let mut ok = true;
    for m in appio::driver::layer_materials(&cfg).unwrap() {
        let r = check_structure_conditions(&m, &grid);
        let clean = r.passed(StructureCondition::StorageMonotone)
            && r.passed(StructureCondition::Ellipticity)
            && r.evaluation_errors.is_empty();
        let corrupted = CrossScaled {
            inner: m.clone(),
            factor: 50.0,
        };
        let rc = check_structure_conditions(&corrupted, &grid);
        let fails = rc.get(StructureCondition::Ellipticity).failures;
        ok &= clean && fails >= 1;
        lines.push(format!("{}: clean {clean}, corrupted fails at {fails}/121", m.kind()));
    }
    report("structure validator", ok, lines.join("; "));
    assert!(ok);
}

/// Central differences of the storage quantities against the chain-rule
/// capacities, skipping samples whose stencil straddles a table
/// breakpoint (the interpolants are only C¹ there).
fn storage_consistency(m: &Material, breaks: &[Vec<f64>; 2], rng: &mut ChaCha8Rng) -> (f64, usize) {
    let b = m.bounds();
    let steps = [1e-3, 1e-5];
    let mut worst = 0.0f64;
    let mut used = 0;
    while used < 100 {
        let s = StateSample::new(
            rng.gen_range(b.theta[0] + 1.0..b.theta[1] - 1.0),
            rng.gen_range(b.m[0] + 0.01..b.m[1] - 0.01),
        );
        let z = s.as_array();
        if (0..2).any(|i| breaks[i].iter().any(|&x| (x - z[i]).abs() <= 2.0 * steps[i])) {
            continue;
        }
        let c = m.evaluate(s).unwrap();
        for i in 0..2 {
            let mut up = z;
            let mut down = z;
            up[i] += steps[i];
            down[i] -= steps[i];
            let bu = m.evaluate(StateSample::from_array(up)).unwrap().storage;
            let bd = m.evaluate(StateSample::from_array(down)).unwrap().storage;
            for j in 0..2 {
                let fd = (bu[j] - bd[j]) / (2.0 * steps[i]);
                let scale = c.b[i][j].abs().max(c.b[0][j].abs().max(c.b[1][j].abs()) * 1e-6);
                worst = worst.max((fd - c.b[i][j]).abs() / scale);
            }
        }
        used += 1;
    }
    (worst, used)
}

fn curve_breaks(path: &str) -> Vec<f64> {
    appio::load_curve_csv(&demo(path)).unwrap().breakpoints().map(|(x, _)| x).collect()
}

#[test]
fn capacities_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let wall = load_config(&demo("wall.cfg")).unwrap();
    let kunzel = appio::driver::layer_materials(&wall).unwrap().remove(0);
    let kunzel_breaks = [Vec::new(), curve_breaks("materials/brick_storage.csv")];
    let kiessl_cfg = load_config(&demo("kiessl.cfg")).unwrap();
    let kiessl = appio::driver::layer_materials(&kiessl_cfg).unwrap().remove(0);
    let mut pot = curve_breaks("materials/kiessl_f.csv");
    pot.extend(curve_breaks("materials/kiessl_g.csv"));
    let kiessl_breaks = [curve_breaks("materials/kiessl_rho_ps.csv"), pot];

    let (wk, _) = storage_consistency(&kunzel, &kunzel_breaks, &mut rng);
    let (wi, _) = storage_consistency(&kiessl, &kiessl_breaks, &mut rng);
    let ok = wk <= 1e-5 && wi <= 1e-5;
    report(
        "capacity consistency",
        ok,
        format!("max relative error kunzel {wk:.1e}, kiessl {wi:.1e} over 100 states each"),
    );
    assert!(ok);
}
