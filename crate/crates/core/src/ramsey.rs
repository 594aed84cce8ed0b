//! Ramsey-interferometry baseline: P↑ = (1 + cos θ)/2 with θ = ω_q τ.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scan::{linspace, ScanRow};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RamseyPoint {
    pub theta: f64,
    pub p_up: f64,
    /// |∂P↑/∂θ|.
    pub susceptibility: f64,
    /// (∂P↑/∂θ)²/[P↑(1 − P↑)]; `None` where the single-shot variance vanishes.
    pub inv_var: Option<f64>,
}

/// Ramsey readout at accumulated phase θ.  Half-angle forms keep P↑(1 − P↑)
/// accurate near θ ∈ {0, π}.
pub fn ramsey_point(theta: f64) -> RamseyPoint {
    let (s, c) = (theta / 2.0).sin_cos();
    let (p_up, p_down) = (c * c, s * s);
    let susceptibility = theta.sin().abs() / 2.0;
    let var = p_up * p_down;
    let inv_var = (var > 0.0).then(|| susceptibility * susceptibility / var);
    RamseyPoint { theta, p_up, susceptibility, inv_var }
}

/// |δω_q τ| < π/2: the readout is one-to-one in the frequency shift.
pub fn linear_range_check(delta_omega_q: f64, tau: f64) -> Result<bool> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::Domain { param: "tau", value: tau, reason: "must be finite and > 0" });
    }
    Ok((delta_omega_q * tau).abs() < FRAC_PI_2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RamseyConfig {
    pub theta_min: f64,
    pub theta_max: f64,
    pub samples: usize,
}

impl Default for RamseyConfig {
    fn default() -> Self {
        RamseyConfig { theta_min: 0.0, theta_max: 2.0 * std::f64::consts::PI, samples: 65 }
    }
}

/// One closed-form row per θ sample.
pub fn ramsey_scan(cfg: &RamseyConfig) -> Result<Vec<ScanRow>> {
    if !(cfg.theta_min.is_finite() && cfg.theta_max.is_finite() && cfg.theta_min <= cfg.theta_max) {
        return Err(Error::Domain { param: "theta", value: cfg.theta_min, reason: "need finite theta_min <= theta_max" });
    }
    Ok(linspace(cfg.theta_min, cfg.theta_max, cfg.samples)
        .into_iter()
        .map(|theta| {
            let p = ramsey_point(theta);
            let row = ScanRow::new()
                .input("theta", theta)
                .number("p_up", Some(p.p_up))
                .number("susceptibility", Some(p.susceptibility))
                .number("inv_var", p.inv_var);
            if p.inv_var.is_none() {
                row.warn(format!("theta={theta}: single-shot variance vanishes, inverted variance undefined"))
            } else {
                row
            }
        })
        .collect())
}
