//! Manufactured solutions for the linear model.
//!
//! A case supplies an exact field per layer; sources and Newton boundary
//! data are derived from it so the continuous solution is known exactly.

use std::f64::consts::PI;

use super::{run, step_count, Problem, RunOptions, StepError, StepOptions, Stepper, Strategy};
use crate::assembly::{Assembler, BoundaryForcing, Field, VolumeSource};
use crate::domain::{build_domain, triangulate, DomainError, LayerRect, LayeredDomain, Mesh};
use crate::linsolve::SolveOptions;
use crate::materials::{LinearParams, Material, MaterialModel};
use crate::Exec;

/// Exact field, piecewise smooth by layer.
pub trait ExactSolution: Send + Sync {
    fn value(&self, layer: usize, x: [f64; 2], t: f64) -> [f64; 2];
    /// `[component][axis]`.
    fn gradient(&self, layer: usize, x: [f64; 2], t: f64) -> [[f64; 2]; 2];
    fn time_derivative(&self, layer: usize, x: [f64; 2], t: f64) -> [f64; 2];
    fn laplacian(&self, layer: usize, x: [f64; 2], t: f64) -> [f64; 2];
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstantField(pub [f64; 2]);

impl ExactSolution for ConstantField {
    fn value(&self, _: usize, _: [f64; 2], _: f64) -> [f64; 2] {
        self.0
    }
    fn gradient(&self, _: usize, _: [f64; 2], _: f64) -> [[f64; 2]; 2] {
        [[0.0; 2]; 2]
    }
    fn time_derivative(&self, _: usize, _: [f64; 2], _: f64) -> [f64; 2] {
        [0.0; 2]
    }
    fn laplacian(&self, _: usize, _: [f64; 2], _: f64) -> [f64; 2] {
        [0.0; 2]
    }
}

/// `u = offset + slope·x`, stationary.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearXField {
    pub offset: [f64; 2],
    pub slope: [f64; 2],
}

impl ExactSolution for LinearXField {
    fn value(&self, _: usize, x: [f64; 2], _: f64) -> [f64; 2] {
        [
            self.offset[0] + self.slope[0] * x[0],
            self.offset[1] + self.slope[1] * x[0],
        ]
    }
    fn gradient(&self, _: usize, _: [f64; 2], _: f64) -> [[f64; 2]; 2] {
        [[self.slope[0], 0.0], [self.slope[1], 0.0]]
    }
    fn time_derivative(&self, _: usize, _: [f64; 2], _: f64) -> [f64; 2] {
        [0.0; 2]
    }
    fn laplacian(&self, _: usize, _: [f64; 2], _: f64) -> [f64; 2] {
        [0.0; 2]
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TimeProfile {
    /// `a + b t`
    Linear { a: f64, b: f64 },
    /// `a + b sin(ω t)`
    Trig { a: f64, b: f64, omega: f64 },
}

impl TimeProfile {
    pub fn value(self, t: f64) -> f64 {
        match self {
            TimeProfile::Linear { a, b } => a + b * t,
            TimeProfile::Trig { a, b, omega } => a + b * (omega * t).sin(),
        }
    }

    pub fn derivative(self, t: f64) -> f64 {
        match self {
            TimeProfile::Linear { b, .. } => b,
            TimeProfile::Trig { b, omega, .. } => b * omega * (omega * t).cos(),
        }
    }
}

/// Smooth in each of two layers split at `x = interface_x`, continuous
/// across it, with the first component's normal derivative jumping by the
/// factor that balances a jump in the first column of κ.
///
/// u¹ = (sin πx + s_ℓ (x − x_I)) cos(πy/2) T(t), u² = (1 + cos πx sin πy) T(t)
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoLayerField {
    pub interface_x: f64,
    /// Kink slope of u¹ in each layer.
    pub slopes: [f64; 2],
    pub time: TimeProfile,
}

impl TwoLayerField {
    fn first(&self, layer: usize, x: [f64; 2]) -> (f64, f64, f64) {
        let s = self.slopes[layer];
        let phi = (PI * x[0]).sin() + s * (x[0] - self.interface_x);
        let dphi = PI * (PI * x[0]).cos() + s;
        let ddphi = -PI * PI * (PI * x[0]).sin();
        (phi, dphi, ddphi)
    }
}

impl ExactSolution for TwoLayerField {
    fn value(&self, layer: usize, x: [f64; 2], t: f64) -> [f64; 2] {
        let tt = self.time.value(t);
        let (phi, _, _) = self.first(layer, x);
        let psi = (0.5 * PI * x[1]).cos();
        let chi = 1.0 + (PI * x[0]).cos() * (PI * x[1]).sin();
        [phi * psi * tt, chi * tt]
    }

    fn gradient(&self, layer: usize, x: [f64; 2], t: f64) -> [[f64; 2]; 2] {
        let tt = self.time.value(t);
        let (phi, dphi, _) = self.first(layer, x);
        let psi = (0.5 * PI * x[1]).cos();
        let dpsi = -0.5 * PI * (0.5 * PI * x[1]).sin();
        let (cx, sx) = ((PI * x[0]).cos(), (PI * x[0]).sin());
        let (cy, sy) = ((PI * x[1]).cos(), (PI * x[1]).sin());
        [
            [dphi * psi * tt, phi * dpsi * tt],
            [-PI * sx * sy * tt, PI * cx * cy * tt],
        ]
    }

    fn time_derivative(&self, layer: usize, x: [f64; 2], t: f64) -> [f64; 2] {
        let dt = self.time.derivative(t);
        let tt = self.time.value(t);
        let v = self.value(layer, x, t);
        if tt != 0.0 {
            [v[0] / tt * dt, v[1] / tt * dt]
        } else {
            let one = TwoLayerField {
                time: TimeProfile::Linear { a: 1.0, b: 0.0 },
                ..*self
            };
            let w = one.value(layer, x, 0.0);
            [w[0] * dt, w[1] * dt]
        }
    }

    fn laplacian(&self, layer: usize, x: [f64; 2], t: f64) -> [f64; 2] {
        let tt = self.time.value(t);
        let (phi, _, ddphi) = self.first(layer, x);
        let psi = (0.5 * PI * x[1]).cos();
        let ddpsi = -0.25 * PI * PI * psi;
        let lap2 = -2.0 * PI * PI * (PI * x[0]).cos() * (PI * x[1]).sin();
        [(ddphi * psi + phi * ddpsi) * tt, lap2 * tt]
    }
}

/// Linear-model problem with a known solution.
pub struct MmsCase {
    pub name: String,
    pub domain: LayeredDomain,
    /// Per layer; `nu` is the Newton coefficient on that layer's exterior.
    pub params: Vec<LinearParams>,
    pub exact: Box<dyn ExactSolution>,
    pub t_end: f64,
    /// Solved once with the stationary operator at `t_end`.
    pub stationary: bool,
}

impl std::fmt::Debug for MmsCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MmsCase")
            .field("name", &self.name)
            .field("params", &self.params)
            .field("t_end", &self.t_end)
            .field("stationary", &self.stationary)
            .finish()
    }
}

fn unit_square() -> LayeredDomain {
    build_domain(vec![LayerRect::new(0.0, 0.0, 1.0, 1.0, "m")]).expect("unit square")
}

impl MmsCase {
    pub fn constant(value: [f64; 2]) -> Self {
        Self {
            name: "constant".into(),
            domain: unit_square(),
            params: vec![LinearParams {
                beta: [[1.0, 0.2], [0.1, 1.0]],
                kappa: [[1.0, 0.3], [0.2, 1.0]],
                nu: [2.0, 1.0],
            }],
            exact: Box::new(ConstantField(value)),
            t_end: 1.0,
            stationary: false,
        }
    }

    pub fn linear_x() -> Self {
        Self {
            name: "linear_x".into(),
            domain: unit_square(),
            params: vec![LinearParams {
                beta: [[1.0, 0.0], [0.0, 1.0]],
                kappa: [[1.0, 0.3], [0.2, 1.0]],
                nu: [2.0, 3.0],
            }],
            exact: Box::new(LinearXField {
                offset: [1.0, 0.5],
                slope: [2.0, -1.0],
            }),
            t_end: 0.0,
            stationary: true,
        }
    }

    /// Two layers on the unit square split at x = 1/2. The first column of
    /// κ doubles from left to right while u¹'s normal derivative halves, so
    /// both fluxes are continuous.
    pub fn two_layer(time: TimeProfile, t_end: f64) -> Self {
        let domain = build_domain(vec![
            LayerRect::new(0.0, 0.0, 0.5, 1.0, "left"),
            LayerRect::new(0.5, 0.0, 1.0, 1.0, "right"),
        ])
        .expect("two-layer square");
        Self {
            name: "two_layer".into(),
            domain,
            params: vec![
                LinearParams {
                    beta: [[1.0, 0.1], [0.1, 1.0]],
                    kappa: [[1.0, 0.3], [0.2, 1.0]],
                    nu: [5.0, 3.0],
                },
                LinearParams {
                    beta: [[2.0, 0.2], [0.2, 1.5]],
                    kappa: [[2.0, 0.3], [0.4, 1.0]],
                    nu: [5.0, 3.0],
                },
            ],
            exact: Box::new(TwoLayerField {
                interface_x: 0.5,
                slopes: [2.0, 1.0],
                time,
            }),
            t_end,
            stationary: false,
        }
    }

    /// Spatial-convergence case: linear in time.
    pub fn two_layer_spatial() -> Self {
        Self::two_layer(TimeProfile::Linear { a: 1.0, b: 1.0 }, 0.1)
    }

    /// Temporal-convergence case: oscillating in time.
    pub fn two_layer_temporal() -> Self {
        Self::two_layer(
            TimeProfile::Trig {
                a: 1.0,
                b: 1.0,
                omega: 2.0 * PI,
            },
            0.5,
        )
    }

    /// Flux `Σ_i κ^{ji} ∇u^i · n` of equation j.
    fn flux(&self, layer: usize, x: [f64; 2], t: f64, n: [f64; 2]) -> [f64; 2] {
        let g = self.exact.gradient(layer, x, t);
        let k = &self.params[layer].kappa;
        let dn = [
            g[0][0] * n[0] + g[0][1] * n[1],
            g[1][0] * n[0] + g[1][1] * n[1],
        ];
        [
            k[0][0] * dn[0] + k[0][1] * dn[1],
            k[1][0] * dn[0] + k[1][1] * dn[1],
        ]
    }

    pub fn interpolant(&self, mesh: &Mesh, t: f64) -> Field {
        Field::from_fn(mesh, |i, x| self.exact.value(mesh.node_layer[i], x, t))
    }
}

impl BoundaryForcing for MmsCase {
    fn alpha(&self, segment: usize) -> [f64; 2] {
        self.params[self.domain.exterior[segment].layer].nu
    }

    fn sigma(&self, segment: usize, x: [f64; 2], t: f64) -> [f64; 2] {
        let seg = &self.domain.exterior[segment];
        let alpha = self.params[seg.layer].nu;
        let u = self.exact.value(seg.layer, x, t);
        let q = self.flux(seg.layer, x, t, seg.side.outward_normal());
        [u[0] + q[0] / alpha[0], u[1] + q[1] / alpha[1]]
    }
}

impl VolumeSource for MmsCase {
    fn value(&self, layer: usize, x: [f64; 2], t: f64) -> [f64; 2] {
        let p = &self.params[layer];
        let lap = self.exact.laplacian(layer, x, t);
        let dt = if self.stationary {
            [0.0; 2]
        } else {
            self.exact.time_derivative(layer, x, t)
        };
        let mut f = [0.0; 2];
        for j in 0..2 {
            for i in 0..2 {
                f[j] += p.beta[j][i] * dt[i] - p.kappa[j][i] * lap[i];
            }
        }
        f
    }
}

/// `sqrt(Σ_c e_cᵀ M e_c)` with `e` the nodal error against the exact field.
pub fn l2_error(
    mesh: &Mesh,
    assembler: &Assembler<'_>,
    field: &Field,
    exact: &dyn ExactSolution,
    t: f64,
) -> f64 {
    let mass = assembler.scalar_mass();
    let n = mesh.node_count();
    let mut total = 0.0;
    for c in 0..2 {
        let e: Vec<f64> = (0..n)
            .map(|p| field.get(p)[c] - exact.value(mesh.node_layer[p], mesh.nodes[p], t)[c])
            .collect();
        let me = mass.mul(Exec::Sequential, &e);
        total += e.iter().zip(&me).map(|(a, b)| a * b).sum::<f64>();
    }
    total.max(0.0).sqrt()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub h: f64,
    pub h_t: f64,
    pub error: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConvergenceTable {
    pub case: String,
    pub rows: Vec<ConvergenceRow>,
    /// Orders between successive mesh sizes at the smallest time step.
    pub spatial_orders: Vec<f64>,
    /// Orders between successive time steps at the smallest mesh size.
    pub temporal_orders: Vec<f64>,
}

#[derive(Debug, thiserror::Error)]
pub enum MmsError {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Step(#[from] StepError),
}

fn orders(points: &[(f64, f64)]) -> Vec<f64> {
    points
        .windows(2)
        .map(|w| (w[0].1 / w[1].1).ln() / (w[0].0 / w[1].0).ln())
        .collect()
}

/// Runs `case` for every `(h, h_t)` pair and reports errors at `t_end`.
pub fn mms_verify(
    case: &MmsCase,
    h_list: &[f64],
    ht_list: &[f64],
    exec: Exec,
) -> Result<ConvergenceTable, MmsError> {
    let materials: Vec<Material> = case.params.iter().map(|&p| Material::Linear(p)).collect();
    let mut table = ConvergenceTable {
        case: case.name.clone(),
        ..Default::default()
    };
    let hts: Vec<f64> = if case.stationary {
        vec![f64::INFINITY]
    } else {
        ht_list.to_vec()
    };
    for &h in h_list {
        let mesh = triangulate(&case.domain, h)?;
        let stepper = Stepper::new(
            Problem {
                mesh: &mesh,
                materials: materials.iter().map(|m| m as &dyn MaterialModel).collect(),
                drive: case,
                source: case,
            },
            StepOptions {
                solve: SolveOptions {
                    tol: 1e-12,
                    exec,
                    ..Default::default()
                },
                ..Default::default()
            },
        );
        for &h_t in &hts {
            let field = if case.stationary {
                stepper.steady(&Field::zeros(mesh.node_count()), case.t_end)?
            } else {
                step_count(h_t, case.t_end)?;
                let traj = run(
                    &stepper,
                    case.interpolant(&mesh, 0.0),
                    &RunOptions {
                        h_t,
                        t_end: case.t_end,
                        strategy: Strategy::SemiImplicit,
                        snapshot_times: vec![case.t_end],
                        probes: vec![],
                    },
                )?;
                traj.snapshots.last().expect("final snapshot").field.clone()
            };
            let error = l2_error(&mesh, stepper.assembler(), &field, case.exact.as_ref(), case.t_end);
            table.rows.push(ConvergenceRow {
                h: mesh.h_mesh,
                h_t,
                error,
            });
        }
    }
    let ht_min = hts.iter().copied().fold(f64::INFINITY, f64::min);
    let h_min = table.rows.iter().map(|r| r.h).fold(f64::INFINITY, f64::min);
    let mut spatial: Vec<(f64, f64)> = table
        .rows
        .iter()
        .filter(|r| r.h_t == ht_min)
        .map(|r| (r.h, r.error))
        .collect();
    spatial.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut temporal: Vec<(f64, f64)> = table
        .rows
        .iter()
        .filter(|r| r.h == h_min && r.h_t.is_finite())
        .map(|r| (r.h_t, r.error))
        .collect();
    temporal.sort_by(|a, b| b.0.total_cmp(&a.0));
    table.spatial_orders = orders(&spatial);
    table.temporal_orders = orders(&temporal);
    Ok(table)
}

impl std::fmt::Display for ConvergenceTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "case {}", self.case)?;
        writeln!(f, "{:>12} {:>12} {:>14}", "h", "h_t", "error")?;
        for r in &self.rows {
            writeln!(f, "{:>12.6} {:>12.6} {:>14.6e}", r.h, r.h_t, r.error)?;
        }
        if !self.spatial_orders.is_empty() {
            let s: Vec<String> = self.spatial_orders.iter().map(|o| format!("{o:.3}")).collect();
            writeln!(f, "spatial orders: {}", s.join(" "))?;
        }
        if !self.temporal_orders.is_empty() {
            let s: Vec<String> = self.temporal_orders.iter().map(|o| format!("{o:.3}")).collect();
            writeln!(f, "temporal orders: {}", s.join(" "))?;
        }
        Ok(())
    }
}
