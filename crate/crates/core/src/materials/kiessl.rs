use super::{
    intersect, positive, CoefficientSet, MaterialError, MonotoneCurve, StateBounds, StateSample,
    Surface2,
};

/// Kiessl model: the second unknown is the dimensionless moisture potential
/// Φ, related to moisture content and relative humidity by `w = f(Φ)` and
/// `φ = g(Φ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct KiesslParams {
    /// Dry density (kg m⁻³).
    pub rho0: f64,
    /// Dry specific heat (J kg⁻¹ K⁻¹).
    pub c0: f64,
    pub rho_w: f64,
    pub c_w: f64,
    /// Porosity, in (0, 1].
    pub porosity: f64,
    /// Latent heat of evaporation (J kg⁻¹).
    pub latent_heat: f64,
    /// Newton coefficients (α¹, α²).
    pub alpha: [f64; 2],
    /// Sorption isotherm w = f(Φ).
    pub f: MonotoneCurve,
    /// Pore-size relation φ = g(Φ).
    pub g: MonotoneCurve,
    /// Saturated vapour partial density ρ_{p,s}(θ).
    pub rho_ps: MonotoneCurve,
    /// λ(w, θ).
    pub conductivity: Surface2,
    /// D_w(w, θ).
    pub d_w: Surface2,
    /// D_φ(w, θ).
    pub d_phi: Surface2,
    /// D_θ(w, θ).
    pub d_theta: Surface2,
}

impl KiesslParams {
    pub fn validate(&self) -> Result<(), MaterialError> {
        positive("rho0", self.rho0)?;
        positive("c0", self.c0)?;
        positive("rho_w", self.rho_w)?;
        positive("c_w", self.c_w)?;
        positive("latent_heat", self.latent_heat)?;
        positive("alpha1", self.alpha[0])?;
        positive("alpha2", self.alpha[1])?;
        if !(self.porosity > 0.0 && self.porosity <= 1.0) {
            return Err(MaterialError::InvalidParameter {
                name: "porosity",
                reason: format!("must lie in (0, 1], got {}", self.porosity),
            });
        }
        for (name, curve) in [("f", &self.f), ("g", &self.g)] {
            if curve.domain()[0] != 0.0 || curve.eval(0.0) != Some(0.0) {
                return Err(MaterialError::InvalidParameter {
                    name,
                    reason: "curve must start at (0, 0)".into(),
                });
            }
        }
        let g0 = self.g.derivative(0.0).unwrap_or(f64::NAN);
        if !((g0 - 1.0).abs() <= 1e-6) {
            return Err(MaterialError::InvalidParameter {
                name: "g",
                reason: format!("slope at 0 must be 1, got {g0}"),
            });
        }
        Ok(())
    }

    pub fn bounds(&self) -> StateBounds {
        let mut theta = self.rho_ps.domain();
        for s in [&self.conductivity, &self.d_w, &self.d_phi, &self.d_theta] {
            theta = intersect(theta, s.theta_range());
        }
        StateBounds {
            theta,
            m: intersect(self.f.domain(), self.g.domain()),
        }
    }
}

/// Coefficients of the Kiessl model at `s = (θ, Φ)`.
pub fn eval_kiessl(p: &KiesslParams, s: StateSample) -> Result<CoefficientSet, MaterialError> {
    let theta = s.theta;
    let (f, df) = p.f.eval_named("moisture potential (f)", s.m)?;
    let (g, dg) = p.g.eval_named("moisture potential (g)", s.m)?;
    let (rps, drps) = p.rho_ps.eval_named("temperature (rho_ps)", theta)?;
    let lambda = p.conductivity.eval_named("conductivity", f, theta)?;
    let d_w = p.d_w.eval_named("D_w", f, theta)?;
    let d_phi = p.d_phi.eval_named("D_phi", f, theta)?;
    let d_theta = p.d_theta.eval_named("D_theta", f, theta)?;

    let e = p.porosity;
    let lv = p.latent_heat;
    let rcw = p.rho_w * p.c_w;
    let vapour = (e - f) * g; // (e − w)φ
    let dvapour = -df * g + (e - f) * dg; // ∂/∂Φ of (e − w)φ

    let b1 = p.rho0 * p.c0 * theta + rcw * g * theta + lv * vapour * rps;
    let b2 = p.rho_w * f + vapour * rps;

    let db1_dtheta = p.rho0 * p.c0 + rcw * g + lv * vapour * drps;
    let db1_dphi = rcw * dg * theta + lv * dvapour * rps;
    let db2_dtheta = vapour * drps;
    let db2_dphi = p.rho_w * df + dvapour * rps;

    let moisture = d_w * df + d_phi * dg;
    Ok(CoefficientSet {
        storage: [b1, b2],
        b: [[db1_dtheta, db2_dtheta], [db1_dphi, db2_dphi]],
        a: [[lambda, lv * moisture], [d_theta, moisture]],
        source: [0.0, 0.0],
    })
}
