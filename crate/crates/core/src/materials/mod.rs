//! Coefficient models for the coupled heat and moisture balance.
//!
//! Every model maps a state sample `(θ, m)` to a [`CoefficientSet`]:
//! storage functions `B^j`, their Jacobian `b^{ij} = ∂B^j/∂z^i`, the
//! scalar conductivities `a^{ji}` and a volumetric source `f^j`. The first
//! unknown is always temperature; the second is the moisture potential
//! (Kiessl) or relative humidity (Künzel).

mod curve;
mod kiessl;
mod kunzel;
mod linear;
mod validate;

use std::fmt;

use thiserror::Error;

pub use curve::{MonotoneCurve, Surface2};
pub use kiessl::{eval_kiessl, KiesslParams};
pub use kunzel::{eval_kunzel, KunzelParams};
pub use linear::{eval_linear, LinearParams};
pub use validate::{
    check_linear_conditions, check_structure_conditions, state_grid, ConditionOutcome,
    CrossScaled, Inequality, LinearConditionReport, StructureCondition, StructureReport,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MaterialError {
    #[error("{what} = {value} outside tabulated range [{lo}, {hi}]")]
    OutOfDomain {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("invalid table: {0}")]
    InvalidTable(String),
}

/// A state `(θ, m)`: temperature in K and the model's moisture variable.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateSample {
    pub theta: f64,
    pub m: f64,
}

impl StateSample {
    pub fn new(theta: f64, m: f64) -> Self {
        Self { theta, m }
    }

    pub fn as_array(self) -> [f64; 2] {
        [self.theta, self.m]
    }

    pub fn from_array(z: [f64; 2]) -> Self {
        Self::new(z[0], z[1])
    }
}

impl fmt::Display for StateSample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(theta={}, m={})", self.theta, self.m)
    }
}

/// Coefficients of the balance equations at one state.
///
/// Index convention: `b[i][j] = ∂B^j/∂z^i` and `a[j][i] = a^{ji}`, zero
/// based. Equation `j` therefore reads
/// `Σ_i b[i][j] ∂u^i/∂t − ∇·(Σ_i a[j][i] ∇u^i) = source[j]`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct CoefficientSet {
    pub storage: [f64; 2],
    pub b: [[f64; 2]; 2],
    pub a: [[f64; 2]; 2],
    pub source: [f64; 2],
}

impl CoefficientSet {
    /// Capacity coupling of unknown `i` in equation `j`.
    pub fn capacity(&self, j: usize, i: usize) -> f64 {
        self.b[i][j]
    }

    pub fn is_finite(&self) -> bool {
        self.storage.iter().all(|v| v.is_finite())
            && self.b.iter().flatten().all(|v| v.is_finite())
            && self.a.iter().flatten().all(|v| v.is_finite())
            && self.source.iter().all(|v| v.is_finite())
    }
}

/// Closed ranges of `θ` and `m` on which a model can be evaluated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateBounds {
    pub theta: [f64; 2],
    pub m: [f64; 2],
}

impl StateBounds {
    pub const UNBOUNDED: StateBounds = StateBounds {
        theta: [f64::NEG_INFINITY, f64::INFINITY],
        m: [f64::NEG_INFINITY, f64::INFINITY],
    };

    pub fn contains(&self, s: StateSample) -> bool {
        self.theta[0] <= s.theta
            && s.theta <= self.theta[1]
            && self.m[0] <= s.m
            && s.m <= self.m[1]
    }

    /// Projects `s` onto the bounds; the flag tells whether it moved.
    pub fn clamp(&self, s: StateSample) -> (StateSample, bool) {
        let c = StateSample::new(
            s.theta.clamp(self.theta[0], self.theta[1]),
            s.m.clamp(self.m[0], self.m[1]),
        );
        (c, c != s)
    }
}

/// A state-dependent coefficient model.
pub trait MaterialModel: Send + Sync + fmt::Debug {
    fn evaluate(&self, s: StateSample) -> Result<CoefficientSet, MaterialError>;

    fn bounds(&self) -> StateBounds;

    /// True when the coefficients do not depend on the state.
    fn is_constant(&self) -> bool {
        false
    }
}

/// The three built-in models.
#[derive(Clone, Debug, PartialEq)]
pub enum Material {
    Kiessl(KiesslParams),
    Kunzel(KunzelParams),
    Linear(LinearParams),
}

impl Material {
    pub fn kind(&self) -> &'static str {
        match self {
            Material::Kiessl(_) => "kiessl",
            Material::Kunzel(_) => "kunzel",
            Material::Linear(_) => "linear",
        }
    }

    pub fn as_linear(&self) -> Option<&LinearParams> {
        match self {
            Material::Linear(p) => Some(p),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<(), MaterialError> {
        match self {
            Material::Kiessl(p) => p.validate(),
            Material::Kunzel(p) => p.validate(),
            Material::Linear(p) => p.validate(),
        }
    }

    /// Default Newton coefficients stored with the material.
    pub fn alpha(&self) -> [f64; 2] {
        match self {
            Material::Kiessl(p) => p.alpha,
            Material::Kunzel(p) => p.alpha,
            Material::Linear(p) => p.nu,
        }
    }
}

impl MaterialModel for Material {
    fn evaluate(&self, s: StateSample) -> Result<CoefficientSet, MaterialError> {
        match self {
            Material::Kiessl(p) => eval_kiessl(p, s),
            Material::Kunzel(p) => eval_kunzel(p, s),
            Material::Linear(p) => Ok(eval_linear(p, s)),
        }
    }

    fn bounds(&self) -> StateBounds {
        match self {
            Material::Kiessl(p) => p.bounds(),
            Material::Kunzel(p) => p.bounds(),
            Material::Linear(_) => StateBounds::UNBOUNDED,
        }
    }

    fn is_constant(&self) -> bool {
        matches!(self, Material::Linear(_))
    }
}

fn positive(name: &'static str, v: f64) -> Result<(), MaterialError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(MaterialError::InvalidParameter {
            name,
            reason: format!("must be positive and finite, got {v}"),
        })
    }
}

fn intersect(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0].max(b[0]), a[1].min(b[1])]
}
