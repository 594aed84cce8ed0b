//! Laboratory couplings and the dimensionless parameters derived from them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Laboratory parameters of the anisotropic Rabi Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Field frequency ω.
    pub omega: f64,
    /// Qubit frequency Ω.
    #[serde(rename = "Omega")]
    pub big_omega: f64,
    /// Rotating-wave coupling λ₁.
    pub lambda1: f64,
    /// Counterrotating-wave coupling λ₂.
    pub lambda2: f64,
}

/// Dimensionless quantities used by every analytic formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedParams {
    pub g: f64,
    pub gamma: f64,
    /// η = Ω/ω.
    pub eta: f64,
    /// ξ = γ² − 1.
    pub xi: f64,
    /// μ = 1 − γ²g².
    pub mu: f64,
    /// Δ_g = 4(1 − g²)(1 − γ²g²).
    pub delta_g: f64,
    /// Normal-phase gap ω√Δ_g/2; `None` when Δ_g < 0.
    pub eps_np: Option<f64>,
    /// Normal-phase ground energy; `None` when Δ_g < 0.
    pub e_np: Option<f64>,
}

impl ModelParams {
    pub fn new(omega: f64, big_omega: f64, lambda1: f64, lambda2: f64) -> Result<Self> {
        let p = ModelParams { omega, big_omega, lambda1, lambda2 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return Err(Error::Domain { param: "omega", value: self.omega, reason: "must be finite and > 0" });
        }
        if !(self.big_omega.is_finite() && self.big_omega > 0.0) {
            return Err(Error::Domain { param: "Omega", value: self.big_omega, reason: "must be finite and > 0" });
        }
        for (name, v) in [("lambda1", self.lambda1), ("lambda2", self.lambda2)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Domain { param: name, value: v, reason: "must be finite and >= 0" });
            }
        }
        Ok(())
    }

    /// Couplings exchanged (γ → −γ).
    pub fn swapped(&self) -> Self {
        ModelParams { lambda1: self.lambda2, lambda2: self.lambda1, ..*self }
    }

    pub fn eta(&self) -> f64 {
        self.big_omega / self.omega
    }
}

/// Dimensionless parameters from laboratory couplings.
pub fn derive(p: &ModelParams) -> Result<DerivedParams> {
    p.validate()?;
    let sum = p.lambda1 + p.lambda2;
    if sum == 0.0 {
        return Err(Error::DegenerateCoupling);
    }
    let g = sum / (p.omega * p.big_omega).sqrt();
    let gamma = (p.lambda1 - p.lambda2) / sum;
    let eta = p.eta();
    let g2 = g * g;
    let mu = 1.0 - gamma * gamma * g2;
    let delta_g = 4.0 * (1.0 - g2) * mu;
    let eps_np = (delta_g >= 0.0).then(|| p.omega * delta_g.sqrt() / 2.0);
    let e_np = eps_np.map(|eps| {
        0.5 * (eps - p.omega + (p.lambda1 * p.lambda1 - p.lambda2 * p.lambda2) / p.big_omega - p.big_omega)
    });
    Ok(DerivedParams { g, gamma, eta, xi: gamma * gamma - 1.0, mu, delta_g, eps_np, e_np })
}

/// Inverse map: couplings realizing (g, γ) at frequency ratio η.
pub fn from_g_gamma(g: f64, gamma: f64, omega: f64, eta: f64) -> Result<ModelParams> {
    if !(g.is_finite() && g >= 0.0) {
        return Err(Error::Domain { param: "g", value: g, reason: "must be finite and >= 0" });
    }
    if !(gamma.is_finite() && gamma.abs() <= 1.0) {
        return Err(Error::Domain { param: "gamma", value: gamma, reason: "|gamma| > 1 requires a negative coupling" });
    }
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::Domain { param: "eta", value: eta, reason: "must be finite and > 0" });
    }
    let big_omega = eta * omega;
    let scale = g * (omega * big_omega).sqrt() / 2.0;
    ModelParams::new(omega, big_omega, scale * (1.0 + gamma), scale * (1.0 - gamma))
}

/// Dimensionless parameters straight from (g, γ, η); convenience for scans.
pub fn derived(g: f64, gamma: f64, eta: f64) -> Result<DerivedParams> {
    derive(&from_g_gamma(g, gamma, 1.0, eta)?)
}

/// Anisotropy for a coupling ratio λ₁/λ₂.
pub fn gamma_from_ratio(ratio: f64) -> Result<f64> {
    if !(ratio.is_finite() && ratio > 0.0) {
        return Err(Error::Domain { param: "ratio_l1_l2", value: ratio, reason: "must be finite and > 0" });
    }
    Ok((ratio - 1.0) / (ratio + 1.0))
}

/// Coupling ratio λ₁/λ₂ for an anisotropy γ (infinite at γ = 1).
pub fn ratio_from_gamma(gamma: f64) -> f64 {
    (1.0 + gamma) / (1.0 - gamma)
}

impl DerivedParams {
    pub fn is_normal_phase(&self) -> bool {
        self.g < 1.0
    }

    /// Guard used by every normal-phase formula.
    pub fn require_normal_phase(&self) -> Result<()> {
        if self.delta_g > 0.0 {
            Ok(())
        } else {
            Err(Error::NotNormalPhase { g: self.g, gamma: self.gamma, delta_g: self.delta_g })
        }
    }

    /// τ_k = 2kπ/(√Δ_g ω): return times of the normal-phase oscillator.
    pub fn tau_k(&self, omega: f64, k: u32) -> Result<f64> {
        self.require_normal_phase()?;
        Ok(2.0 * std::f64::consts::PI * k as f64 / (self.delta_g.sqrt() * omega))
    }
}

pub fn is_normal_phase(d: &DerivedParams) -> bool {
    d.is_normal_phase()
}
