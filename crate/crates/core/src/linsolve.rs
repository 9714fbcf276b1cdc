//! BiCGStab with a 2×2 block-Jacobi preconditioner.
//!
//! Preconditioning is applied on the right, so the residual that drives
//! termination is the true residual of the original system. Inner products
//! are accumulated sequentially in index order; only matrix-vector products
//! use the execution policy, which keeps iterates identical across
//! policies.

use thiserror::Error;

use crate::assembly::{CsrMatrix, SparseSystem};
use crate::Exec;

#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// ‖Ax − b‖₂ of the returned iterate.
    pub residual: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("matrix is {rows}x{rows} but right-hand side has {rhs} entries")]
    DimensionMismatch { rows: usize, rhs: usize },
    #[error("system contains non-finite entries")]
    NonFinite,
    #[error("BiCGStab breakdown after {iterations} iterations")]
    Breakdown { iterations: usize },
    #[error("no convergence in {} iterations (residual {:.3e})", best.iterations, best.residual)]
    MaxIterExceeded { best: Solution },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveOptions {
    /// Relative residual target ‖Ax − b‖ ≤ tol·‖b‖.
    pub tol: f64,
    /// Defaults to `10·n` when `None`.
    pub max_iter: Option<usize>,
    pub exec: Exec,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: None,
            exec: Exec::Sequential,
        }
    }
}

const BREAKDOWN: f64 = 1e-30;
const MAX_RESTARTS: usize = 5;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Inverses of the 2×2 diagonal node blocks (scalar inverse on the
/// diagonal when a block is singular, identity when that fails too).
#[derive(Clone, Debug)]
pub struct BlockJacobi {
    blocks: Vec<[[f64; 2]; 2]>,
    tail: Option<f64>,
}

impl BlockJacobi {
    pub fn new(a: &CsrMatrix) -> Self {
        let inv_scalar = |d: f64| if d != 0.0 && d.is_finite() { 1.0 / d } else { 1.0 };
        let blocks = (0..a.n / 2)
            .map(|k| {
                let (r0, r1) = (2 * k, 2 * k + 1);
                let m = [[a.get(r0, r0), a.get(r0, r1)], [a.get(r1, r0), a.get(r1, r1)]];
                let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
                let scale = (m[0][0] * m[1][1]).abs().max((m[0][1] * m[1][0]).abs());
                if det.is_finite() && det.abs() > 1e-14 * scale && scale > 0.0 {
                    [
                        [m[1][1] / det, -m[0][1] / det],
                        [-m[1][0] / det, m[0][0] / det],
                    ]
                } else {
                    [[inv_scalar(m[0][0]), 0.0], [0.0, inv_scalar(m[1][1])]]
                }
            })
            .collect();
        let tail = (a.n % 2 == 1).then(|| inv_scalar(a.get(a.n - 1, a.n - 1)));
        Self { blocks, tail }
    }

    pub fn apply(&self, r: &[f64], z: &mut [f64]) {
        for (k, b) in self.blocks.iter().enumerate() {
            let (x0, x1) = (r[2 * k], r[2 * k + 1]);
            z[2 * k] = b[0][0] * x0 + b[0][1] * x1;
            z[2 * k + 1] = b[1][0] * x0 + b[1][1] * x1;
        }
        if let Some(t) = self.tail {
            let n = r.len();
            z[n - 1] = t * r[n - 1];
        }
    }
}

/// ‖Ax − b‖₂.
pub fn residual_norm(system: &SparseSystem, x: &[f64]) -> f64 {
    let ax = system.matrix.mul(Exec::Sequential, x);
    ax.iter()
        .zip(&system.rhs)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// Solves `system` from a zero initial guess.
pub fn solve(system: &SparseSystem, opts: SolveOptions) -> Result<Solution, SolveError> {
    solve_from(system, None, opts)
}

/// Solves `system` starting from `x0` (zero when `None`).
pub fn solve_from(
    system: &SparseSystem,
    x0: Option<&[f64]>,
    opts: SolveOptions,
) -> Result<Solution, SolveError> {
    let a = &system.matrix;
    let b = &system.rhs;
    let n = a.n;
    if b.len() != n || x0.is_some_and(|x| x.len() != n) {
        return Err(SolveError::DimensionMismatch { rows: n, rhs: b.len() });
    }
    if !a.is_finite() || !b.iter().all(|v| v.is_finite()) {
        return Err(SolveError::NonFinite);
    }
    let exec = opts.exec;
    let max_iter = opts.max_iter.unwrap_or(10 * n.max(1));
    let bnorm = norm(b);
    let target = opts.tol * bnorm;

    let mut x = x0.map(<[f64]>::to_vec).unwrap_or_else(|| vec![0.0; n]);
    if bnorm == 0.0 && x0.is_none() {
        return Ok(Solution {
            x,
            iterations: 0,
            residual: 0.0,
        });
    }
    let pc = BlockJacobi::new(a);

    let mut r = vec![0.0; n];
    let true_residual = |x: &[f64], r: &mut [f64]| {
        a.matvec(exec, x, r);
        for (ri, bi) in r.iter_mut().zip(b) {
            *ri = bi - *ri;
        }
        norm(r)
    };
    let mut rnorm = true_residual(&x, &mut r);
    let mut best = (x.clone(), rnorm);
    if rnorm <= target {
        return Ok(Solution {
            x,
            iterations: 0,
            residual: rnorm,
        });
    }

    let mut r_hat = r.clone();
    let (mut p, mut v) = (vec![0.0; n], vec![0.0; n]);
    let (mut y, mut z, mut s, mut t) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let (mut rho, mut alpha, mut omega) = (1.0f64, 1.0f64, 1.0f64);
    let mut restarts = 0;
    let mut it = 0;

    while it < max_iter {
        it += 1;
        let rho_new = dot(&r_hat, &r);
        if rho_new.abs() < BREAKDOWN * norm(&r_hat) * rnorm || omega == 0.0 {
            restarts += 1;
            if restarts > MAX_RESTARTS {
                return Err(SolveError::Breakdown { iterations: it });
            }
            rnorm = true_residual(&x, &mut r);
            r_hat.copy_from_slice(&r);
            p.iter_mut().for_each(|e| *e = 0.0);
            v.iter_mut().for_each(|e| *e = 0.0);
            rho = 1.0;
            alpha = 1.0;
            omega = 1.0;
            continue;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for k in 0..n {
            p[k] = r[k] + beta * (p[k] - omega * v[k]);
        }
        pc.apply(&p, &mut y);
        a.matvec(exec, &y, &mut v);
        let rv = dot(&r_hat, &v);
        if rv.abs() < BREAKDOWN * norm(&r_hat) * norm(&v) || rv == 0.0 {
            omega = 0.0;
            continue;
        }
        alpha = rho / rv;
        for k in 0..n {
            s[k] = r[k] - alpha * v[k];
        }
        if norm(&s) <= target {
            for k in 0..n {
                x[k] += alpha * y[k];
            }
            rnorm = true_residual(&x, &mut r);
            if rnorm <= target {
                return Ok(Solution {
                    x,
                    iterations: it,
                    residual: rnorm,
                });
            }
            omega = 0.0;
            continue;
        }
        pc.apply(&s, &mut z);
        a.matvec(exec, &z, &mut t);
        let tt = dot(&t, &t);
        omega = if tt > 0.0 { dot(&t, &s) / tt } else { 0.0 };
        for k in 0..n {
            x[k] += alpha * y[k] + omega * z[k];
            r[k] = s[k] - omega * t[k];
        }
        rnorm = norm(&r);
        if rnorm <= target {
            rnorm = true_residual(&x, &mut r);
            if rnorm <= target {
                return Ok(Solution {
                    x,
                    iterations: it,
                    residual: rnorm,
                });
            }
        }
        if rnorm < best.1 {
            best = (x.clone(), rnorm);
        }
    }
    let residual = residual_norm(system, &best.0);
    Err(SolveError::MaxIterExceeded {
        best: Solution {
            x: best.0,
            iterations: it,
            residual,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn system(d: Vec<Vec<f64>>, rhs: Vec<f64>) -> SparseSystem {
        SparseSystem {
            matrix: CsrMatrix::from_dense(&d),
            rhs,
        }
    }

    fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        for c in 0..n {
            let p = (c..n)
                .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
                .unwrap();
            a.swap(c, p);
            b.swap(c, p);
            for r in c + 1..n {
                let f = a[r][c] / a[c][c];
                for k in c..n {
                    a[r][k] -= f * a[c][k];
                }
                b[r] -= f * b[c];
            }
        }
        let mut x = vec![0.0; n];
        for r in (0..n).rev() {
            let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
            x[r] = (b[r] - s) / a[r][r];
        }
        x
    }

    #[test]
    fn identity() {
        let s = SparseSystem {
            matrix: CsrMatrix::identity(4),
            rhs: vec![1.0, -2.0, 3.0, 0.5],
        };
        let sol = solve(&s, SolveOptions::default()).unwrap();
        assert_eq!(sol.x, s.rhs);
        assert!(sol.iterations <= 1);
    }

    #[test]
    fn two_by_two() {
        let s = system(vec![vec![4.0, 1.0], vec![1.0, 3.0]], vec![1.0, 2.0]);
        let sol = solve(&s, SolveOptions::default()).unwrap();
        assert!((sol.x[0] - 1.0 / 11.0).abs() < 1e-14);
        assert!((sol.x[1] - 7.0 / 11.0).abs() < 1e-14);
    }

    #[test]
    fn zero_rhs() {
        let s = system(vec![vec![4.0, 1.0], vec![1.0, 3.0]], vec![0.0, 0.0]);
        let sol = solve(&s, SolveOptions::default()).unwrap();
        assert_eq!(sol.x, vec![0.0, 0.0]);
    }

    #[test]
    fn residual_norm_examples() {
        let s = system(vec![vec![4.0, 1.0], vec![1.0, 3.0]], vec![1.0, 2.0]);
        assert!((residual_norm(&s, &[0.0, 0.0]) - 5f64.sqrt()).abs() < 1e-15);
        let x = [1.0 / 11.0, 7.0 / 11.0];
        assert!(residual_norm(&s, &x) <= 1e-14 * 5f64.sqrt());
        let eps = 1e-3;
        let r = residual_norm(&s, &[x[0] + eps, x[1]]);
        assert!((r - eps * 17f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn matches_dense_elimination_on_random_spd() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [2usize, 6, 17, 50] {
            let m: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
            let mut a = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in 0..n {
                    a[i][j] = (0..n).map(|k| m[k][i] * m[k][j]).sum::<f64>();
                }
                a[i][i] += 0.5;
            }
            let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let exact = dense_solve(a.clone(), b.clone());
            for exec in [Exec::Sequential, Exec::Parallel] {
                let s = system(a.clone(), b.clone());
                let sol = solve(&s, SolveOptions { exec, ..Default::default() }).unwrap();
                let scale = exact.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                for (x, e) in sol.x.iter().zip(&exact) {
                    assert!((x - e).abs() <= 1e-8 * scale, "n={n}: {x} vs {e}");
                }
                assert!(sol.residual <= 1e-10 * norm(&b));
            }
        }
    }

    #[test]
    fn nonsymmetric_block_system() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 40;
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            a[i][i] = 4.0 + rng.gen_range(0.0..1.0);
            if i + 1 < n {
                a[i][i + 1] = -1.0 + rng.gen_range(-0.3..0.3);
                a[i + 1][i] = -1.2;
            }
            if i % 2 == 0 {
                a[i][i + 1] = 2.0;
            }
        }
        let b: Vec<f64> = (0..n).map(|k| (k as f64).sin()).collect();
        let s = system(a, b);
        let seq = solve(&s, SolveOptions::default()).unwrap();
        let par = solve(&s, SolveOptions { exec: Exec::Parallel, ..Default::default() }).unwrap();
        assert_eq!(seq, par);
        assert!(residual_norm(&s, &seq.x) <= 1e-10 * norm(&s.rhs));
    }

    #[test]
    fn iteration_cap_reports_best_iterate() {
        let n = 30;
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            a[i][i] = 2.0;
            if i + 1 < n {
                a[i][i + 1] = -1.0;
                a[i + 1][i] = -1.0;
            }
        }
        let s = system(a, vec![1.0; n]);
        let err = solve(&s, SolveOptions { max_iter: Some(2), ..Default::default() }).unwrap_err();
        match err {
            SolveError::MaxIterExceeded { best } => {
                assert_eq!(best.iterations, 2);
                assert!(best.residual <= norm(&s.rhs));
            }
            e => panic!("unexpected {e:?}"),
        }
    }
}
