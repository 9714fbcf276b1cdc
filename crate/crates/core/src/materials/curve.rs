//! Tabulated material functions.

use super::MaterialError;

/// Monotone piecewise-cubic Hermite interpolant (PCHIP).
///
/// Interior slopes are weighted harmonic means of the adjacent secants
/// (zero at local extrema of the data), end slopes use the one-sided
/// three-point formula with the usual shape-preserving limiter. The result
/// is C¹ and monotone on every interval of non-decreasing data.
#[derive(Clone, Debug, PartialEq)]
pub struct MonotoneCurve {
    x: Vec<f64>,
    y: Vec<f64>,
    slopes: Vec<f64>,
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn edge_slope(h0: f64, h1: f64, m0: f64, m1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if sign(d) != sign(m0) {
        0.0
    } else if sign(m0) != sign(m1) && d.abs() > 3.0 * m0.abs() {
        3.0 * m0
    } else {
        d
    }
}

impl MonotoneCurve {
    /// Builds the interpolant. Requires at least two points, strictly
    /// increasing `x` and non-decreasing `y`.
    pub fn new(points: &[(f64, f64)]) -> Result<Self, MaterialError> {
        if points.len() < 2 {
            return Err(MaterialError::InvalidTable(
                "a curve needs at least two breakpoints".into(),
            ));
        }
        if points.iter().any(|(a, b)| !a.is_finite() || !b.is_finite()) {
            return Err(MaterialError::InvalidTable("non-finite breakpoint".into()));
        }
        let x: Vec<f64> = points.iter().map(|p| p.0).collect();
        let y: Vec<f64> = points.iter().map(|p| p.1).collect();
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(MaterialError::InvalidTable(
                "curve abscissae must be strictly increasing".into(),
            ));
        }
        if y.windows(2).any(|w| w[1] < w[0]) {
            return Err(MaterialError::InvalidTable(
                "curve values must be non-decreasing".into(),
            ));
        }
        let n = x.len();
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let m: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
        let mut d = vec![0.0; n];
        if n == 2 {
            d[0] = m[0];
            d[1] = m[0];
        } else {
            for k in 1..n - 1 {
                let (m0, m1) = (m[k - 1], m[k]);
                if sign(m0) != sign(m1) || m0 == 0.0 || m1 == 0.0 {
                    d[k] = 0.0;
                } else {
                    let w1 = 2.0 * h[k] + h[k - 1];
                    let w2 = h[k] + 2.0 * h[k - 1];
                    d[k] = (w1 + w2) / (w1 / m0 + w2 / m1);
                }
            }
            d[0] = edge_slope(h[0], h[1], m[0], m[1]);
            d[n - 1] = edge_slope(h[n - 2], h[n - 3], m[n - 2], m[n - 3]);
        }
        Ok(Self { x, y, slopes: d })
    }

    pub fn domain(&self) -> [f64; 2] {
        [self.x[0], self.x[self.x.len() - 1]]
    }

    pub fn breakpoints(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.x.iter().copied().zip(self.y.iter().copied())
    }

    pub fn contains(&self, x: f64) -> bool {
        let [lo, hi] = self.domain();
        lo <= x && x <= hi
    }

    fn interval(&self, x: f64) -> usize {
        let k = self.x.partition_point(|&b| b <= x);
        k.clamp(1, self.x.len() - 1) - 1
    }

    /// Value and derivative at `x`, or `None` outside the tabulated range.
    pub fn eval_with_slope(&self, x: f64) -> Option<(f64, f64)> {
        if !self.contains(x) {
            return None;
        }
        let k = self.interval(x);
        let h = self.x[k + 1] - self.x[k];
        let t = (x - self.x[k]) / h;
        let (y0, y1) = (self.y[k], self.y[k + 1]);
        let (d0, d1) = (self.slopes[k], self.slopes[k + 1]);
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let value = h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1;
        let dh00 = (6.0 * t2 - 6.0 * t) / h;
        let dh10 = 3.0 * t2 - 4.0 * t + 1.0;
        let dh01 = (-6.0 * t2 + 6.0 * t) / h;
        let dh11 = 3.0 * t2 - 2.0 * t;
        let slope = dh00 * y0 + dh10 * d0 + dh01 * y1 + dh11 * d1;
        Some((value, slope.max(0.0)))
    }

    pub fn eval(&self, x: f64) -> Option<f64> {
        self.eval_with_slope(x).map(|v| v.0)
    }

    pub fn derivative(&self, x: f64) -> Option<f64> {
        self.eval_with_slope(x).map(|v| v.1)
    }

    pub(crate) fn eval_named(&self, name: &'static str, x: f64) -> Result<(f64, f64), MaterialError> {
        self.eval_with_slope(x).ok_or_else(|| {
            let [lo, hi] = self.domain();
            MaterialError::OutOfDomain {
                what: name,
                value: x,
                lo,
                hi,
            }
        })
    }

    /// Returns a copy with every value multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self, MaterialError> {
        let pts: Vec<(f64, f64)> = self.breakpoints().map(|(x, y)| (x, y * factor)).collect();
        Self::new(&pts)
    }
}

/// Bilinear interpolation on a rectilinear (m, θ) grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Surface2 {
    m_axis: Vec<f64>,
    theta_axis: Vec<f64>,
    /// Row-major: `values[i * theta_axis.len() + j]` at `(m_axis[i], theta_axis[j])`.
    values: Vec<f64>,
}

impl Surface2 {
    pub fn new(m_axis: Vec<f64>, theta_axis: Vec<f64>, values: Vec<f64>) -> Result<Self, MaterialError> {
        if m_axis.len() < 2 || theta_axis.len() < 2 {
            return Err(MaterialError::InvalidTable(
                "a surface needs at least two breakpoints per axis".into(),
            ));
        }
        if values.len() != m_axis.len() * theta_axis.len() {
            return Err(MaterialError::InvalidTable(format!(
                "surface has {} values, expected {}",
                values.len(),
                m_axis.len() * theta_axis.len()
            )));
        }
        for axis in [&m_axis, &theta_axis] {
            if axis.iter().any(|v| !v.is_finite()) || axis.windows(2).any(|w| w[1] <= w[0]) {
                return Err(MaterialError::InvalidTable(
                    "surface axes must be finite and strictly increasing".into(),
                ));
            }
        }
        if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(MaterialError::InvalidTable(
                "surface values must be positive and finite".into(),
            ));
        }
        Ok(Self {
            m_axis,
            theta_axis,
            values,
        })
    }

    /// Constant surface over the given ranges.
    pub fn constant(m_range: [f64; 2], theta_range: [f64; 2], value: f64) -> Result<Self, MaterialError> {
        Self::new(
            m_range.to_vec(),
            theta_range.to_vec(),
            vec![value; 4],
        )
    }

    pub fn m_axis(&self) -> &[f64] {
        &self.m_axis
    }

    pub fn theta_axis(&self) -> &[f64] {
        &self.theta_axis
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn m_range(&self) -> [f64; 2] {
        [self.m_axis[0], self.m_axis[self.m_axis.len() - 1]]
    }

    pub fn theta_range(&self) -> [f64; 2] {
        [self.theta_axis[0], self.theta_axis[self.theta_axis.len() - 1]]
    }

    fn locate(axis: &[f64], v: f64) -> Option<(usize, f64)> {
        if !(axis[0] <= v && v <= axis[axis.len() - 1]) {
            return None;
        }
        let k = axis.partition_point(|&b| b <= v).clamp(1, axis.len() - 1) - 1;
        Some((k, (v - axis[k]) / (axis[k + 1] - axis[k])))
    }

    pub fn eval(&self, m: f64, theta: f64) -> Option<f64> {
        let (i, s) = Self::locate(&self.m_axis, m)?;
        let (j, t) = Self::locate(&self.theta_axis, theta)?;
        let nt = self.theta_axis.len();
        let v00 = self.values[i * nt + j];
        let v01 = self.values[i * nt + j + 1];
        let v10 = self.values[(i + 1) * nt + j];
        let v11 = self.values[(i + 1) * nt + j + 1];
        Some((1.0 - s) * ((1.0 - t) * v00 + t * v01) + s * ((1.0 - t) * v10 + t * v11))
    }

    pub(crate) fn eval_named(&self, name: &'static str, m: f64, theta: f64) -> Result<f64, MaterialError> {
        self.eval(m, theta).ok_or_else(|| {
            let ([lo, hi], value) = if Self::locate(&self.m_axis, m).is_none() {
                (self.m_range(), m)
            } else {
                (self.theta_range(), theta)
            };
            MaterialError::OutOfDomain {
                what: name,
                value,
                lo,
                hi,
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn linear_data_is_reproduced() {
        let c = MonotoneCurve::new(&[(0.0, 0.0), (0.25, 0.25), (0.5, 0.5), (1.0, 1.0)]).unwrap();
        for x in [0.0, 0.1, 0.3, 0.77, 1.0] {
            let (v, d) = c.eval_with_slope(x).unwrap();
            assert!((v - x).abs() < 1e-15);
            assert!((d - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn flat_segment_stays_flat() {
        let c = MonotoneCurve::new(&[(0.0, 0.0), (1.0, 1.0), (2.0, 1.0), (3.0, 1.0)]).unwrap();
        assert_eq!(c.derivative(1.0).unwrap(), 0.0);
        for k in 0..=100 {
            let x = 1.0 + 2.0 * k as f64 / 100.0;
            assert!((c.eval(x).unwrap() - 1.0).abs() < 1e-15);
        }
        // no overshoot on the rising interval
        for k in 0..=100 {
            assert!(c.eval(k as f64 / 100.0).unwrap() <= 1.0);
        }
    }

    #[test]
    fn outside_range_is_none() {
        let c = MonotoneCurve::new(&[(0.0, 0.0), (1.0, 2.0)]).unwrap();
        assert!(c.eval(-1e-12).is_none());
        assert!(c.eval(1.0 + 1e-12).is_none());
        assert_eq!(c.eval(0.5), Some(1.0));
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(MonotoneCurve::new(&[(0.0, 0.0)]).is_err());
        assert!(MonotoneCurve::new(&[(0.0, 0.0), (0.0, 1.0)]).is_err());
        assert!(MonotoneCurve::new(&[(0.0, 1.0), (1.0, 0.0)]).is_err());
        assert!(Surface2::new(vec![0.0, 1.0], vec![0.0, 1.0], vec![1.0, 1.0, 1.0, 0.0]).is_err());
        assert!(Surface2::new(vec![0.0, 1.0], vec![0.0, 1.0], vec![1.0; 3]).is_err());
    }

    #[test]
    fn bilinear_reproduces_bilinear_function() {
        let m = vec![0.0, 0.5, 2.0];
        let th = vec![270.0, 280.0, 300.0];
        let f = |a: f64, b: f64| 1.0 + 2.0 * a + 0.01 * b + 0.3 * a * (b - 270.0);
        let vals: Vec<f64> = m.iter().flat_map(|&a| th.iter().map(move |&b| f(a, b))).collect();
        let s = Surface2::new(m, th, vals).unwrap();
        for (a, b) in [(0.1, 271.0), (1.3, 299.0), (2.0, 300.0), (0.0, 270.0)] {
            assert!((s.eval(a, b).unwrap() - f(a, b)).abs() < 1e-12);
        }
        assert!(s.eval(2.1, 280.0).is_none());
    }

    fn monotone_points() -> impl Strategy<Value = Vec<(f64, f64)>> {
        prop::collection::vec((0.01f64..1.0, 0.0f64..1.0), 2..12).prop_map(|steps| {
            let mut x = 0.0;
            let mut y = 0.0;
            steps
                .into_iter()
                .map(|(dx, dy)| {
                    let p = (x, y);
                    x += dx;
                    y += if dy < 0.2 { 0.0 } else { dy };
                    p
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn interpolant_is_monotone_and_exact_at_breakpoints(pts in monotone_points(), probes in prop::collection::vec(0.0f64..1.0, 20)) {
            let c = MonotoneCurve::new(&pts).unwrap();
            for &(x, y) in &pts {
                prop_assert_eq!(c.eval(x).unwrap(), y);
            }
            let [lo, hi] = c.domain();
            let mut xs: Vec<f64> = probes.iter().map(|p| lo + p * (hi - lo)).collect();
            xs.sort_by(f64::total_cmp);
            let mut prev = f64::NEG_INFINITY;
            for x in xs {
                let (v, d) = c.eval_with_slope(x).unwrap();
                prop_assert!(d >= 0.0);
                prop_assert!(v >= prev - 1e-12);
                prev = v;
            }
        }
    }
}
