//! Per-step linear systems of the weak form and discrete diagnostics.
//!
//! Unknowns are interleaved by node: row `2p` is the first component at
//! node `p`, row `2p + 1` the second. Coefficients are frozen per triangle;
//! mass and stiffness are integrated exactly for P1, volume sources with a
//! degree-5 rule and boundary data with two-point Gauss.

mod drive;
pub mod quadrature;
mod sparse;

use thiserror::Error;

use crate::domain::Mesh;
use crate::materials::{CoefficientSet, LinearParams};
use crate::Exec;

pub use drive::{
    BoundaryDrive, BoundaryForcing, LayerSource, NoSource, SegmentDrive, SeriesError, TimeSeries,
    VolumeSource,
};
pub use sparse::{CsrMatrix, Pattern, SparseSystem};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AssemblyError {
    #[error("{what}: expected length {expected}, got {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("non-finite coefficient on triangle {element}")]
    NonfiniteCoefficient { element: usize },
    #[error("time step must be positive, got {0}")]
    InvalidStep(f64),
}

/// Nodal values of both unknowns, interleaved by node.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    pub values: Vec<f64>,
}

impl Field {
    pub fn zeros(nodes: usize) -> Self {
        Self {
            values: vec![0.0; 2 * nodes],
        }
    }

    pub fn constant(nodes: usize, v: [f64; 2]) -> Self {
        Self {
            values: (0..nodes).flat_map(|_| v).collect(),
        }
    }

    pub fn from_fn(mesh: &Mesh, mut f: impl FnMut(usize, [f64; 2]) -> [f64; 2]) -> Self {
        Self {
            values: mesh
                .nodes
                .iter()
                .enumerate()
                .flat_map(|(i, &x)| f(i, x))
                .collect(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.values.len() / 2
    }

    pub fn get(&self, node: usize) -> [f64; 2] {
        [self.values[2 * node], self.values[2 * node + 1]]
    }

    pub fn set(&mut self, node: usize, v: [f64; 2]) {
        self.values[2 * node] = v[0];
        self.values[2 * node + 1] = v[1];
    }

    pub fn component(&self, c: usize) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().skip(c).step_by(2).copied()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Largest nodal difference per component.
    pub fn max_diff(&self, other: &Field) -> [f64; 2] {
        let mut d = [0.0f64; 2];
        for (k, (a, b)) in self.values.iter().zip(&other.values).enumerate() {
            d[k % 2] = d[k % 2].max((a - b).abs());
        }
        d
    }

    pub fn max_abs_diff(&self, other: &Field) -> f64 {
        let d = self.max_diff(other);
        d[0].max(d[1])
    }
}

/// Gradients of the three barycentric coordinates and the area.
pub fn p1_gradients(v: &[[f64; 2]; 3]) -> ([[f64; 2]; 3], f64) {
    let det = (v[1][0] - v[0][0]) * (v[2][1] - v[0][1]) - (v[2][0] - v[0][0]) * (v[1][1] - v[0][1]);
    let g = [
        [(v[1][1] - v[2][1]) / det, (v[2][0] - v[1][0]) / det],
        [(v[2][1] - v[0][1]) / det, (v[0][0] - v[2][0]) / det],
        [(v[0][1] - v[1][1]) / det, (v[1][0] - v[0][0]) / det],
    ];
    (g, 0.5 * det)
}

/// Constant gradient of both components on triangle `t`.
pub fn element_gradient(mesh: &Mesh, field: &Field, t: usize) -> [[f64; 2]; 2] {
    let (g, _) = p1_gradients(&mesh.vertices(t));
    let mut out = [[0.0; 2]; 2];
    for (a, &p) in mesh.triangles[t].nodes.iter().enumerate() {
        let u = field.get(p);
        for c in 0..2 {
            out[c][0] += u[c] * g[a][0];
            out[c][1] += u[c] * g[a][1];
        }
    }
    out
}

/// Average of the vertex states of every triangle.
pub fn centroid_states(mesh: &Mesh, field: &Field) -> Vec<[f64; 2]> {
    mesh.triangles
        .iter()
        .map(|t| {
            let mut s = [0.0; 2];
            for &p in &t.nodes {
                let u = field.get(p);
                s[0] += u[0];
                s[1] += u[1];
            }
            [s[0] / 3.0, s[1] / 3.0]
        })
        .collect()
}

struct Local {
    vals: [[[[f64; 2]; 2]; 3]; 3],
    rhs: [[f64; 2]; 3],
}

/// Reusable assembler for one mesh.
#[derive(Clone, Debug)]
pub struct Assembler<'m> {
    pub mesh: &'m Mesh,
    pattern: Pattern,
    exec: Exec,
}

impl<'m> Assembler<'m> {
    pub fn new(mesh: &'m Mesh, exec: Exec) -> Self {
        Self {
            mesh,
            pattern: Pattern::new(mesh),
            exec,
        }
    }

    pub fn exec(&self) -> Exec {
        self.exec
    }

    pub fn dimension(&self) -> usize {
        2 * self.mesh.node_count()
    }

    /// System of one backward-Euler step from `prev` to `t_now`:
    ///
    /// `Σ_i b^{ji}(u^i − prev^i)/h_t·v^j + a^{ji}∇u^i·∇v^j` on elements,
    /// `α^j u^j v^j` on exterior edges, and loads `f^j v^j`, `α^j σ^j v^j`.
    /// An infinite `h_t` drops the storage term (steady problem).
    pub fn assemble(
        &self,
        coeffs: &[CoefficientSet],
        prev: &Field,
        h_t: f64,
        drive: &dyn BoundaryForcing,
        source: &dyn VolumeSource,
        t_now: f64,
    ) -> Result<SparseSystem, AssemblyError> {
        let mesh = self.mesh;
        if coeffs.len() != mesh.triangles.len() {
            return Err(AssemblyError::DimensionMismatch {
                what: "coefficients",
                expected: mesh.triangles.len(),
                found: coeffs.len(),
            });
        }
        if prev.values.len() != self.dimension() {
            return Err(AssemblyError::DimensionMismatch {
                what: "previous field",
                expected: self.dimension(),
                found: prev.values.len(),
            });
        }
        if !(h_t > 0.0) {
            return Err(AssemblyError::InvalidStep(h_t));
        }
        if let Some(element) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(AssemblyError::NonfiniteCoefficient { element });
        }
        let inv_h = if h_t.is_infinite() { 0.0 } else { 1.0 / h_t };
        let rule = quadrature::triangle_rule();

        let locals = self.exec.map_range(mesh.triangles.len(), |t| {
            let tri = &mesh.triangles[t];
            let v = mesh.vertices(t);
            let (g, area) = p1_gradients(&v);
            let c = &coeffs[t];
            let mut loc = Local {
                vals: [[[[0.0; 2]; 2]; 3]; 3],
                rhs: [[0.0; 2]; 3],
            };
            for a in 0..3 {
                for b in 0..3 {
                    let stiff = area * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
                    let mass = area / 12.0 * if a == b { 2.0 } else { 1.0 };
                    let u_prev = prev.get(tri.nodes[b]);
                    for j in 0..2 {
                        for i in 0..2 {
                            let m = c.b[i][j] * inv_h * mass;
                            loc.vals[a][b][j][i] = c.a[j][i] * stiff + m;
                            loc.rhs[a][j] += m * u_prev[i];
                        }
                    }
                }
                for j in 0..2 {
                    loc.rhs[a][j] += c.source[j] * area / 3.0;
                }
            }
            for (l, w) in rule.iter() {
                let f = source.value(tri.layer, quadrature::map_point(&v, *l), t_now);
                for a in 0..3 {
                    for j in 0..2 {
                        loc.rhs[a][j] += w * area * f[j] * l[a];
                    }
                }
            }
            loc
        });

        let mut matrix = self.pattern.empty_matrix();
        let mut rhs = vec![0.0; self.dimension()];
        for (t, loc) in locals.iter().enumerate() {
            let nodes = mesh.triangles[t].nodes;
            let slots = &self.pattern.slots[t];
            for a in 0..3 {
                let p = nodes[a];
                for b in 0..3 {
                    for j in 0..2 {
                        for i in 0..2 {
                            matrix.vals[self.pattern.position(p, j, slots[a][b], i)] +=
                                loc.vals[a][b][j][i];
                        }
                    }
                }
                rhs[2 * p] += loc.rhs[a][0];
                rhs[2 * p + 1] += loc.rhs[a][1];
            }
        }

        for e in &mesh.exterior_edges {
            let alpha = drive.alpha(e.segment);
            if alpha == [0.0, 0.0] {
                continue;
            }
            let [p, q] = e.nodes;
            let (x0, x1) = (mesh.nodes[p], mesh.nodes[q]);
            let len = ((x1[0] - x0[0]).powi(2) + (x1[1] - x0[1]).powi(2)).sqrt();
            let kpq = self.pattern.neighbour_index(p, q);
            let kqp = self.pattern.neighbour_index(q, p);
            for j in 0..2 {
                let diag = alpha[j] * len / 3.0;
                let off = alpha[j] * len / 6.0;
                matrix.vals[self.pattern.position(p, j, self.pattern.neighbour_index(p, p), j)] += diag;
                matrix.vals[self.pattern.position(q, j, self.pattern.neighbour_index(q, q), j)] += diag;
                matrix.vals[self.pattern.position(p, j, kpq, j)] += off;
                matrix.vals[self.pattern.position(q, j, kqp, j)] += off;
            }
            for (s, w) in quadrature::edge_rule() {
                let x = [x0[0] + s * (x1[0] - x0[0]), x0[1] + s * (x1[1] - x0[1])];
                let sigma = drive.sigma(e.segment, x, t_now);
                for j in 0..2 {
                    let g = alpha[j] * sigma[j] * w * len;
                    rhs[2 * p + j] += g * (1.0 - s);
                    rhs[2 * q + j] += g * s;
                }
            }
        }

        Ok(SparseSystem { matrix, rhs })
    }

    /// Consistent P1 mass matrix for one scalar component.
    pub fn scalar_mass(&self) -> CsrMatrix {
        let mesh = self.mesh;
        let n = mesh.node_count();
        let mut rows: Vec<std::collections::BTreeMap<usize, f64>> = vec![Default::default(); n];
        for t in 0..mesh.triangles.len() {
            let nodes = mesh.triangles[t].nodes;
            let area = mesh.triangle_area(t);
            for a in 0..3 {
                for b in 0..3 {
                    *rows[nodes[a]].entry(nodes[b]).or_insert(0.0) +=
                        area / 12.0 * if a == b { 2.0 } else { 1.0 };
                }
            }
        }
        let mut m = CsrMatrix {
            n,
            row_ptr: vec![0],
            col_idx: vec![],
            vals: vec![],
        };
        for r in rows {
            for (c, v) in r {
                m.col_idx.push(c);
                m.vals.push(v);
            }
            m.row_ptr.push(m.col_idx.len());
        }
        m
    }
}

/// Functional form of [`Assembler::assemble`].
#[allow(clippy::too_many_arguments)]
pub fn assemble_step_system(
    mesh: &Mesh,
    coeffs: &[CoefficientSet],
    prev: &Field,
    h_t: f64,
    drive: &dyn BoundaryForcing,
    source: &dyn VolumeSource,
    t_now: f64,
    exec: Exec,
) -> Result<SparseSystem, AssemblyError> {
    Assembler::new(mesh, exec).assemble(coeffs, prev, h_t, drive, source, t_now)
}

/// Edge-length weighted L² norm of the normal-flux jump across each
/// interface, per component. Index `k` refers to `domain.interfaces[k]`.
pub fn interface_flux_jump(
    mesh: &Mesh,
    field: &Field,
    coeffs: &[CoefficientSet],
) -> Vec<[f64; 2]> {
    let mut acc = vec![[0.0f64; 2]; mesh.interface_count];
    for e in &mesh.interface_edges {
        let [p, q] = e.nodes;
        let (x0, x1) = (mesh.nodes[p], mesh.nodes[q]);
        let d = [x1[0] - x0[0], x1[1] - x0[1]];
        let len = (d[0] * d[0] + d[1] * d[1]).sqrt();
        let mut n = [d[1] / len, -d[0] / len];
        // orient outward from the first triangle
        let c = mesh.centroid(e.triangles[0]);
        if (c[0] - x0[0]) * n[0] + (c[1] - x0[1]) * n[1] > 0.0 {
            n = [-n[0], -n[1]];
        }
        let flux = |t: usize| {
            let g = element_gradient(mesh, field, t);
            let a = &coeffs[t].a;
            let mut q = [0.0; 2];
            for j in 0..2 {
                for i in 0..2 {
                    q[j] += a[j][i] * (g[i][0] * n[0] + g[i][1] * n[1]);
                }
            }
            q
        };
        let (q1, q2) = (flux(e.triangles[0]), flux(e.triangles[1]));
        for j in 0..2 {
            acc[e.interface][j] += (q1[j] - q2[j]).powi(2) * len;
        }
    }
    acc.into_iter().map(|v| [v[0].sqrt(), v[1].sqrt()]).collect()
}

/// Convex energy of the linear model:
/// `Σ ∫ κ²¹κ¹¹|∇u¹|²/2 + κ¹²κ²²|∇u²|²/2 + κ¹²κ²¹∇u¹·∇u²`, with the
/// parameters of each triangle's layer.
pub fn discrete_energy(mesh: &Mesh, field: &Field, layers: &[LinearParams]) -> f64 {
    (0..mesh.triangles.len())
        .map(|t| {
            let k = &layers[mesh.triangles[t].layer].kappa;
            let g = element_gradient(mesh, field, t);
            let g11 = g[0][0] * g[0][0] + g[0][1] * g[0][1];
            let g22 = g[1][0] * g[1][0] + g[1][1] * g[1][1];
            let g12 = g[0][0] * g[1][0] + g[0][1] * g[1][1];
            mesh.triangle_area(t)
                * (0.5 * k[1][0] * k[0][0] * g11
                    + 0.5 * k[0][1] * k[1][1] * g22
                    + k[0][1] * k[1][0] * g12)
        })
        .sum()
}

/// Storage-weighted totals `Σ_T ∫ Σ_i b^{ji} u^i` for both equations.
pub fn component_totals(mesh: &Mesh, field: &Field, coeffs: &[CoefficientSet]) -> [f64; 2] {
    let mut tot = [0.0; 2];
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let mut mean = [0.0; 2];
        for &p in &tri.nodes {
            let u = field.get(p);
            mean[0] += u[0] / 3.0;
            mean[1] += u[1] / 3.0;
        }
        let area = mesh.triangle_area(t);
        let b = &coeffs[t].b;
        for j in 0..2 {
            tot[j] += area * (b[0][j] * mean[0] + b[1][j] * mean[1]);
        }
    }
    tot
}
