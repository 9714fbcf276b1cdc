use super::{
    intersect, positive, CoefficientSet, MaterialError, MonotoneCurve, StateBounds, StateSample,
    Surface2,
};

/// Künzel model: the second unknown is relative humidity φ ∈ [0, 1] with
/// moisture content `w = h(φ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct KunzelParams {
    pub rho0: f64,
    pub c0: f64,
    pub rho_w: f64,
    pub c_w: f64,
    pub latent_heat: f64,
    /// Vapour diffusion resistance factor (–).
    pub mu: f64,
    pub alpha: [f64; 2],
    /// Moisture storage function w = h(φ).
    pub storage: MonotoneCurve,
    /// Saturation vapour pressure p_s(θ) in Pa.
    pub saturation_pressure: MonotoneCurve,
    /// Vapour diffusion coefficient in air δ(θ).
    pub vapour_diffusion: MonotoneCurve,
    /// λ(w, θ).
    pub conductivity: Surface2,
    /// Liquid conduction coefficient D̂_φ(φ, θ).
    pub liquid_conduction: Surface2,
}

impl KunzelParams {
    pub fn validate(&self) -> Result<(), MaterialError> {
        positive("rho0", self.rho0)?;
        positive("c0", self.c0)?;
        positive("rho_w", self.rho_w)?;
        positive("c_w", self.c_w)?;
        positive("latent_heat", self.latent_heat)?;
        positive("mu", self.mu)?;
        positive("alpha1", self.alpha[0])?;
        positive("alpha2", self.alpha[1])?;
        if self.storage.domain()[0] != 0.0 || self.storage.eval(0.0) != Some(0.0) {
            return Err(MaterialError::InvalidParameter {
                name: "storage",
                reason: "moisture storage curve must start at (0, 0)".into(),
            });
        }
        Ok(())
    }

    pub fn bounds(&self) -> StateBounds {
        let mut theta = intersect(
            self.saturation_pressure.domain(),
            self.vapour_diffusion.domain(),
        );
        theta = intersect(theta, self.conductivity.theta_range());
        theta = intersect(theta, self.liquid_conduction.theta_range());
        let m = intersect(
            intersect(self.storage.domain(), self.liquid_conduction.m_range()),
            [0.0, 1.0],
        );
        StateBounds { theta, m }
    }
}

/// Coefficients of the Künzel model at `s = (θ, φ)`.
pub fn eval_kunzel(p: &KunzelParams, s: StateSample) -> Result<CoefficientSet, MaterialError> {
    let (theta, phi) = (s.theta, s.m);
    if !(0.0..=1.0).contains(&phi) {
        return Err(MaterialError::OutOfDomain {
            what: "relative humidity",
            value: phi,
            lo: 0.0,
            hi: 1.0,
        });
    }
    let (w, dw) = p.storage.eval_named("relative humidity (h)", phi)?;
    let (ps, dps) = p.saturation_pressure.eval_named("temperature (p_s)", theta)?;
    let (delta, _) = p.vapour_diffusion.eval_named("temperature (delta)", theta)?;
    let lambda = p.conductivity.eval_named("conductivity", w, theta)?;
    let liquid = p.liquid_conduction.eval_named("liquid conduction", phi, theta)?;

    let rcw = p.rho_w * p.c_w;
    let vap = delta / p.mu;
    let lv = p.latent_heat;

    Ok(CoefficientSet {
        storage: [p.rho0 * p.c0 * theta + rcw * w * theta, p.rho_w * w],
        b: [
            [p.rho0 * p.c0 + rcw * w, 0.0],
            [rcw * theta * dw, p.rho_w * dw],
        ],
        a: [
            [lambda + lv * vap * phi * dps, lv * vap * ps],
            [vap * phi * dps, liquid + vap * ps],
        ],
        source: [0.0, 0.0],
    })
}
