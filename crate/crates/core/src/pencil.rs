//! Corner analysis of the transmission problem with frozen coefficients.
//!
//! At a point where an interface meets the exterior boundary, layer ℓ
//! occupies the angle (0, ω_ℓ) and layer ℓ+1 the angle (ω_ℓ, ω_{ℓ+1}). The
//! pencil eigenvalues are the zeros of
//!
//! `D(λ) = D¹¹D²² − D¹²D²¹`,
//! `D^{jk} = ε^{jk}_ℓ sin(iλω_ℓ) cos(iλ(ω_{ℓ+1} − ω_ℓ)) + ε^{jk}_{ℓ+1} cos(iλω_ℓ) sin(iλ(ω_{ℓ+1} − ω_ℓ))`.
//!
//! The solution is W²,² near the corner when no zero lies in the open strip
//! `Im λ ∈ (−1, 0)`. Zeros are counted with the argument principle on
//! rectangles and refined by Newton's method.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

use crate::domain::{quarter_turns_to_radians, BoundaryCorner, CornerKind};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PencilError {
    #[error("invalid corner problem: {0}")]
    InvalidProblem(String),
    #[error("determinant vanishes on the contour near {0}")]
    ContourThroughZero(Complex64),
    #[error("could not isolate zeros in rectangle [{re_lo}, {re_hi}] x [{im_lo}, {im_hi}]")]
    IsolationFailed {
        re_lo: f64,
        re_hi: f64,
        im_lo: f64,
        im_hi: f64,
    },
}

/// Corner geometry and frozen coefficient matrices `eps[j][k] = ε^{jk}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PencilProblem {
    pub omega_l: f64,
    pub omega_total: f64,
    pub eps_l: [[f64; 2]; 2],
    pub eps_next: [[f64; 2]; 2],
}

fn det2(m: &[[f64; 2]; 2]) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

impl PencilProblem {
    pub fn new(
        omega_l: f64,
        omega_total: f64,
        eps_l: [[f64; 2]; 2],
        eps_next: [[f64; 2]; 2],
    ) -> Result<Self, PencilError> {
        let p = Self {
            omega_l,
            omega_total,
            eps_l,
            eps_next,
        };
        p.validate()?;
        Ok(p)
    }

    /// The same material on both sides of a fictitious interface that
    /// halves the angle.
    pub fn single_material(omega: f64, eps: [[f64; 2]; 2]) -> Result<Self, PencilError> {
        Self::new(0.5 * omega, omega, eps, eps)
    }

    pub fn validate(&self) -> Result<(), PencilError> {
        if !(self.omega_l > 0.0 && self.omega_l < self.omega_total && self.omega_total <= 2.0 * PI)
        {
            return Err(PencilError::InvalidProblem(format!(
                "angles must satisfy 0 < {} < {} <= 2pi",
                self.omega_l, self.omega_total
            )));
        }
        for (name, m) in [("eps_l", &self.eps_l), ("eps_next", &self.eps_next)] {
            if m.iter().flatten().any(|v| !(v.is_finite() && *v > 0.0)) {
                return Err(PencilError::InvalidProblem(format!(
                    "{name} entries must be positive"
                )));
            }
            if !(det2(m) > 0.0) {
                return Err(PencilError::InvalidProblem(format!(
                    "{name} violates ellipticity (det <= 0)"
                )));
            }
        }
        Ok(())
    }

    /// True in the regime where the half-angle closed form applies:
    /// ω_ℓ = ω_{ℓ+1}/2 and ω_{ℓ+1} ≤ π.
    pub fn closed_form_regime(&self) -> bool {
        let tol = 1e-12 * self.omega_total;
        (self.omega_l - 0.5 * self.omega_total).abs() <= tol && self.omega_total <= PI + tol
    }

    fn cross(&self) -> f64 {
        let (e, f) = (&self.eps_l, &self.eps_next);
        e[0][0] * f[1][1] + f[0][0] * e[1][1] - e[0][1] * f[1][0] - f[0][1] * e[1][0]
    }

    fn trig(&self, lambda: Complex64) -> (Complex64, Complex64, f64) {
        let z = Complex64::i() * lambda;
        let (s1, c1) = ((z * self.omega_l).sin(), (z * self.omega_l).cos());
        let rest = z * (self.omega_total - self.omega_l);
        let (s2, c2) = (rest.sin(), rest.cos());
        let mag = (s1.norm() + c1.norm()) * (s2.norm() + c2.norm());
        (s1 * c2, c1 * s2, mag)
    }

    /// Size of the individual products entering `D(λ)`, used to judge
    /// whether a computed value is zero.
    pub fn scale(&self, lambda: Complex64) -> f64 {
        let (_, _, mag) = self.trig(lambda);
        let terms = det2(&self.eps_l).abs() + det2(&self.eps_next).abs() + self.cross().abs();
        terms * mag * mag
    }

    /// `D(λ)` written as the quadratic form `det(ε_ℓ)P² + det(ε_{ℓ+1})Q² + cPQ`
    /// and factored into two linear forms in `(P, Q)`. Near zeros where both
    /// `P` and `Q` are small this keeps relative accuracy, which the direct
    /// 2×2 expansion loses to cancellation.
    pub fn determinant_factored(&self, lambda: Complex64) -> Complex64 {
        let (p, q, _) = self.trig(lambda);
        let (d0, d1, c) = (det2(&self.eps_l), det2(&self.eps_next), self.cross());
        let disc = Complex64::new(c * c - 4.0 * d0 * d1, 0.0).sqrt();
        let r1 = (-c + disc) / (2.0 * d0);
        let r2 = (-c - disc) / (2.0 * d0);
        (p - q * r1) * (p - q * r2) * d0
    }
}

/// `D(λ)` computed literally from the four entries `D^{jk}`.
pub fn determinant(p: &PencilProblem, lambda: Complex64) -> Complex64 {
    let (pp, qq, _) = p.trig(lambda);
    let d = |j: usize, k: usize| pp * p.eps_l[j][k] + qq * p.eps_next[j][k];
    d(0, 0) * d(1, 1) - d(0, 1) * d(1, 0)
}

/// Closed-form zeros for ω_ℓ = ω_{ℓ+1}/2: `λ_k = −i·kπ/(2ω_ℓ)` for the `k`
/// whose imaginary part lies in the open interval `(im_lo, im_hi)`.
pub fn equal_angle_roots(omega_l: f64, im_lo: f64, im_hi: f64) -> Vec<Complex64> {
    let step = PI / (2.0 * omega_l);
    let k_lo = (-im_hi / step).floor() as i64 - 1;
    let k_hi = (-im_lo / step).ceil() as i64 + 1;
    (k_lo..=k_hi)
        .map(|k| Complex64::new(0.0, -(k as f64) * step))
        .filter(|l| l.im > im_lo && l.im < im_hi)
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PencilRoot {
    pub lambda: Complex64,
    /// Number of zeros the argument principle counted at this point.
    pub multiplicity: usize,
}

/// Search window for [`roots_in_window`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchWindow {
    pub re: [f64; 2],
    /// Open interval of imaginary parts.
    pub im: [f64; 2],
    /// Distance of the contour from the edges of the open interval.
    pub inset: f64,
}

impl SearchWindow {
    pub fn critical_strip(re_half_width: f64) -> Self {
        Self {
            re: [-re_half_width, re_half_width],
            im: [-1.0, 0.0],
            inset: 1e-6,
        }
    }

    pub fn strip(im_lo: f64, im_hi: f64, re_half_width: f64) -> Self {
        Self {
            re: [-re_half_width, re_half_width],
            im: [im_lo, im_hi],
            inset: 1e-6,
        }
    }
}

impl Default for SearchWindow {
    fn default() -> Self {
        Self::critical_strip(12.0)
    }
}

#[derive(Clone, Copy, Debug)]
struct Rect {
    re: [f64; 2],
    im: [f64; 2],
}

impl Rect {
    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re[0], self.im[0]),
            Complex64::new(self.re[1], self.im[0]),
            Complex64::new(self.re[1], self.im[1]),
            Complex64::new(self.re[0], self.im[1]),
        ]
    }

    fn width(&self) -> f64 {
        self.re[1] - self.re[0]
    }

    fn height(&self) -> f64 {
        self.im[1] - self.im[0]
    }

    fn center(&self) -> Complex64 {
        Complex64::new(
            0.5 * (self.re[0] + self.re[1]),
            0.5 * (self.im[0] + self.im[1]),
        )
    }

    fn contains(&self, z: Complex64, pad: f64) -> bool {
        z.re >= self.re[0] - pad
            && z.re <= self.re[1] + pad
            && z.im >= self.im[0] - pad
            && z.im <= self.im[1] + pad
    }

    fn split(&self, frac: f64) -> (Rect, Rect) {
        if self.width() >= self.height() {
            let m = self.re[0] + frac * self.width();
            (
                Rect { re: [self.re[0], m], im: self.im },
                Rect { re: [m, self.re[1]], im: self.im },
            )
        } else {
            let m = self.im[0] + frac * self.height();
            (
                Rect { re: self.re, im: [self.im[0], m] },
                Rect { re: self.re, im: [m, self.im[1]] },
            )
        }
    }
}

const MAX_PHASE_STEP: f64 = PI / 8.0;
const MAX_DEPTH: u32 = 48;
const ZERO_TOL: f64 = 1e-14;
const SPLIT_FRACTIONS: [f64; 4] = [0.4718, 0.5281, 0.4391, 0.5607];
const NEWTON_STEP: f64 = 1e-7;

struct Counter<'a> {
    p: &'a PencilProblem,
}

impl Counter<'_> {
    fn eval(&self, z: Complex64) -> Result<Complex64, PencilError> {
        let d = self.p.determinant_factored(z);
        if d.norm() <= ZERO_TOL * self.p.scale(z) || !d.is_finite() {
            return Err(PencilError::ContourThroughZero(z));
        }
        Ok(d)
    }

    fn phase(
        &self,
        a: Complex64,
        da: Complex64,
        b: Complex64,
        db: Complex64,
        depth: u32,
    ) -> Result<f64, PencilError> {
        // Accept a piece only when D is close to linear on it, so that the
        // principal phase increment cannot alias a full turn.
        let step = (db / da).arg();
        let m = 0.5 * (a + b);
        let dm = self.eval(m)?;
        let linear = (dm - 0.5 * (da + db)).norm() <= 0.1 * da.norm().min(db.norm());
        if step.abs() <= MAX_PHASE_STEP && linear {
            return Ok(step);
        }
        if depth >= MAX_DEPTH {
            return Err(PencilError::ContourThroughZero(m));
        }
        Ok(self.phase(a, da, m, dm, depth + 1)? + self.phase(m, dm, b, db, depth + 1)?)
    }

    /// Number of zeros inside `r` (counterclockwise winding of `D`).
    fn count(&self, r: &Rect) -> Result<usize, PencilError> {
        let c = r.corners();
        let mut total = 0.0;
        for k in 0..4 {
            let (a, b) = (c[k], c[(k + 1) % 4]);
            let pieces = (((b - a).norm() * 8.0).ceil() as usize).max(4);
            let mut za = a;
            let mut da = self.eval(za)?;
            for s in 1..=pieces {
                let zb = a + (b - a) * (s as f64 / pieces as f64);
                let db = self.eval(zb)?;
                total += self.phase(za, da, zb, db, 0)?;
                za = zb;
                da = db;
            }
        }
        let w = total / (2.0 * PI);
        let n = w.round();
        if (w - n).abs() > 0.1 || n < 0.0 {
            return Err(PencilError::ContourThroughZero(r.center()));
        }
        Ok(n as usize)
    }

    fn newton(&self, start: Complex64, m: usize) -> Option<Complex64> {
        let h = Complex64::new(NEWTON_STEP, 0.0);
        let mut z = start;
        for _ in 0..100 {
            let d = self.p.determinant_factored(z);
            if d == Complex64::new(0.0, 0.0) {
                return Some(z);
            }
            let dd = (self.p.determinant_factored(z + h) - self.p.determinant_factored(z - h))
                / (2.0 * NEWTON_STEP);
            if dd.norm() == 0.0 || !dd.is_finite() {
                return None;
            }
            let step = d / dd * m as f64;
            z -= step;
            if step.norm() <= 1e-15 * (1.0 + z.norm()) {
                return Some(z);
            }
        }
        let d = self.p.determinant_factored(z);
        (d.norm() <= 1e-9 * self.p.scale(z)).then_some(z)
    }

    fn isolate(&self, r: Rect, n: usize, out: &mut Vec<PencilRoot>) -> Result<(), PencilError> {
        if n == 0 {
            return Ok(());
        }
        let size = r.width().max(r.height());
        if (n == 1 && size <= 0.25) || size <= 1e-6 {
            if let Some(z) = self.newton(r.center(), n) {
                if r.contains(z, 1e-9) {
                    out.push(PencilRoot {
                        lambda: z,
                        multiplicity: n,
                    });
                    return Ok(());
                }
            }
            if size <= 1e-6 {
                return Err(PencilError::IsolationFailed {
                    re_lo: r.re[0],
                    re_hi: r.re[1],
                    im_lo: r.im[0],
                    im_hi: r.im[1],
                });
            }
        }
        for frac in SPLIT_FRACTIONS {
            let (a, b) = r.split(frac);
            let (Ok(na), Ok(nb)) = (self.count(&a), self.count(&b)) else {
                continue;
            };
            if na + nb != n {
                continue;
            }
            let mark = out.len();
            match self
                .isolate(a, na, out)
                .and_then(|_| self.isolate(b, nb, out))
            {
                Ok(()) => return Ok(()),
                Err(_) => out.truncate(mark),
            }
        }
        Err(PencilError::IsolationFailed {
            re_lo: r.re[0],
            re_hi: r.re[1],
            im_lo: r.im[0],
            im_hi: r.im[1],
        })
    }
}

/// Zeros of `D` in the window, each refined and tagged with the number
/// of zeros the argument principle attributes to it. Sorted by (Im, Re).
pub fn roots_in_window(
    p: &PencilProblem,
    window: SearchWindow,
) -> Result<Vec<PencilRoot>, PencilError> {
    p.validate()?;
    let counter = Counter { p };
    let mut inset = window.inset;
    let mut last_err = None;
    for _ in 0..4 {
        let rect = Rect {
            re: window.re,
            im: [window.im[0] + inset, window.im[1] - inset],
        };
        let result = counter.count(&rect).and_then(|n| {
            let mut out = Vec::new();
            counter.isolate(rect, n, &mut out)?;
            Ok(out)
        });
        match result {
            Ok(mut roots) => {
                roots.sort_by(|a, b| {
                    a.lambda
                        .im
                        .total_cmp(&b.lambda.im)
                        .then(a.lambda.re.total_cmp(&b.lambda.re))
                });
                return Ok(roots);
            }
            Err(e) => {
                log::debug!("root search failed with inset {inset:e}: {e}; retrying");
                last_err = Some(e);
                inset *= 1.618;
            }
        }
    }
    Err(last_err.expect("at least one attempt"))
}

/// Zeros in the open strip `Im λ ∈ (−1, 0)` with `Re λ ∈ [−re_half_width, re_half_width]`.
pub fn roots_in_strip(p: &PencilProblem, re_half_width: f64) -> Result<Vec<PencilRoot>, PencilError> {
    roots_in_window(p, SearchWindow::critical_strip(re_half_width))
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegularityVerdict {
    pub regular: bool,
    pub roots_in_strip: Vec<PencilRoot>,
    /// False when the geometry lies outside ω_ℓ = ω_{ℓ+1}/2, ω_{ℓ+1} ≤ π;
    /// the verdict is then an extrapolation.
    pub closed_form_regime: bool,
}

impl RegularityVerdict {
    pub fn label(&self) -> &'static str {
        match (self.regular, self.closed_form_regime) {
            (true, true) => "regular",
            (false, true) => "singular",
            (true, false) => "regular (extrapolated)",
            (false, false) => "singular (extrapolated)",
        }
    }
}

pub fn regularity_verdict(p: &PencilProblem) -> Result<RegularityVerdict, PencilError> {
    let roots = roots_in_strip(p, 12.0)?;
    Ok(RegularityVerdict {
        regular: roots.is_empty(),
        roots_in_strip: roots,
        closed_form_regime: p.closed_form_regime(),
    })
}

/// Verdict for one boundary corner of a layered domain.
#[derive(Clone, Debug, PartialEq)]
pub struct CornerVerdict {
    pub point: [f64; 2],
    pub layers: Vec<usize>,
    pub problem: PencilProblem,
    pub verdict: RegularityVerdict,
}

impl fmt::Display for CornerVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let layers: Vec<String> = self.layers.iter().map(|l| l.to_string()).collect();
        write!(
            f,
            "({}, {}) layers [{}] omega_l={:.4} omega_total={:.4}: {}",
            self.point[0],
            self.point[1],
            layers.join(","),
            self.problem.omega_l,
            self.problem.omega_total,
            self.verdict.label()
        )?;
        for r in &self.verdict.roots_in_strip {
            write!(f, " root {:.10}{:+.10}i (x{})", r.lambda.re, r.lambda.im, r.multiplicity)?;
        }
        Ok(())
    }
}

/// Builds the pencil problem at a boundary corner from the conductivity
/// matrices `eps_of(layer)`.
pub fn corner_problem(
    corner: &BoundaryCorner,
    eps_of: impl Fn(usize) -> [[f64; 2]; 2],
) -> Result<(Vec<usize>, PencilProblem), PencilError> {
    match corner.kind {
        CornerKind::Interface {
            layers,
            quarter_turns,
        } => {
            let omega_l = quarter_turns_to_radians(quarter_turns[0]);
            let total = quarter_turns_to_radians(quarter_turns[0] + quarter_turns[1]);
            Ok((
                layers.to_vec(),
                PencilProblem::new(omega_l, total, eps_of(layers[0]), eps_of(layers[1]))?,
            ))
        }
        CornerKind::Exterior {
            layer,
            quarter_turns,
        } => Ok((
            vec![layer],
            PencilProblem::single_material(quarter_turns_to_radians(quarter_turns), eps_of(layer))?,
        )),
    }
}

pub fn analyze_corners(
    corners: &[BoundaryCorner],
    eps_of: impl Fn(usize) -> [[f64; 2]; 2],
) -> Result<Vec<CornerVerdict>, PencilError> {
    corners
        .iter()
        .map(|c| {
            let (layers, problem) = corner_problem(c, &eps_of)?;
            Ok(CornerVerdict {
                point: c.point,
                layers,
                problem,
                verdict: regularity_verdict(&problem)?,
            })
        })
        .collect()
}
