use super::{CoefficientSet, MaterialError, StateSample};

/// Constant-coefficient model of the linearised transmission system.
///
/// `beta[j][i]` and `kappa[j][i]` are β^{ji} and κ^{ji}: the coefficient of
/// unknown `i` in equation `j`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearParams {
    pub beta: [[f64; 2]; 2],
    pub kappa: [[f64; 2]; 2],
    /// Newton coefficients ν^j ≥ 0 on exterior boundaries.
    pub nu: [f64; 2],
}

impl LinearParams {
    pub fn identity() -> Self {
        Self {
            beta: [[1.0, 0.0], [0.0, 1.0]],
            kappa: [[1.0, 0.0], [0.0, 1.0]],
            nu: [0.0, 0.0],
        }
    }

    /// Entries must be finite and non-negative with positive diagonals; the
    /// strict coupling inequalities are checked separately by
    /// [`super::check_linear_conditions`].
    pub fn validate(&self) -> Result<(), MaterialError> {
        for (name, m) in [("beta", &self.beta), ("kappa", &self.kappa)] {
            if m.iter().flatten().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(MaterialError::InvalidParameter {
                    name,
                    reason: "entries must be finite and non-negative".into(),
                });
            }
            if !(m[0][0] > 0.0 && m[1][1] > 0.0) {
                return Err(MaterialError::InvalidParameter {
                    name,
                    reason: "diagonal entries must be positive".into(),
                });
            }
        }
        if self.nu.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(MaterialError::InvalidParameter {
                name: "nu",
                reason: "must be finite and non-negative".into(),
            });
        }
        Ok(())
    }
}

/// `B^j = β^{ji} z^i`, `b^{ij} = β^{ji}`, `a = κ`, no source.
pub fn eval_linear(p: &LinearParams, s: StateSample) -> CoefficientSet {
    let z = s.as_array();
    let beta = p.beta;
    CoefficientSet {
        storage: [
            beta[0][0] * z[0] + beta[0][1] * z[1],
            beta[1][0] * z[0] + beta[1][1] * z[1],
        ],
        b: [[beta[0][0], beta[1][0]], [beta[0][1], beta[1][1]]],
        a: p.kappa,
        source: [0.0, 0.0],
    }
}
