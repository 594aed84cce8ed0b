//! Finite-frequency (η = Ω/ω < ∞) corrections to the quadrature scheme: the
//! small-γ series of the laboratory inverted variance and its numerical
//! realization under the quartic effective Hamiltonian.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{
    converge_traces, hamiltonian_np_finite, hamiltonian_np_finite_quadratic, quad_x, FieldState, Propagator,
    Truncation,
};
use crate::homodyne::moments_at;
use crate::model::{derive, derived, from_g_gamma, ratio_from_gamma, ModelParams};
use crate::numdiff::{central_difference_trace, relative_step};
use crate::scan::{linspace, par_map, ScanRow};

/// Coefficients of 𝓘_lab(τ) = c0 + c1·γ + c2·γ² + 𝒪(γ³).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiniteFreqSeries {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub g: f64,
    pub eta: f64,
}

/// E = 4g¹⁰ + 4(2+η²) + 2g⁸(3η²−8) − 2g²(9η²+4) − 2g⁶(11η²+10) + g⁴(30η²+32−π²).
pub fn e_polynomial(g: f64, eta: f64) -> f64 {
    let e2 = eta * eta;
    4.0 * g.powi(10) + 4.0 * (2.0 + e2) + 2.0 * g.powi(8) * (3.0 * e2 - 8.0) - 2.0 * g.powi(2) * (9.0 * e2 + 4.0)
        - 2.0 * g.powi(6) * (11.0 * e2 + 10.0)
        + g.powi(4) * (30.0 * e2 + 32.0 - PI * PI)
}

impl FiniteFreqSeries {
    pub fn new(g: f64, eta: f64) -> Result<Self> {
        if !(g > 0.0 && g < 1.0) {
            return Err(Error::Domain { param: "g", value: g, reason: "series defined for 0 < g < 1" });
        }
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::Domain { param: "eta", value: eta, reason: "must be finite and > 0" });
        }
        let (g2, q) = (g * g, 1.0 - g * g);
        Ok(FiniteFreqSeries {
            c0: g2 * PI * PI / (2.0 * q.powi(3)),
            c1: g2 * PI * PI * (2.0 + g2 * g2) / (q.powi(4) * eta),
            c2: g2 * PI * PI * e_polynomial(g, eta) / (4.0 * q.powi(6) * eta * eta),
            g,
            eta,
        })
    }

    pub fn eval(&self, gamma: f64) -> f64 {
        self.c0 + gamma * (self.c1 + gamma * self.c2)
    }
}

/// c0 + c1·γ + c2·γ²; small |γ| assumed, not enforced.
pub fn series_inverted_variance(g: f64, eta: f64, gamma: f64) -> Result<f64> {
    Ok(FiniteFreqSeries::new(g, eta)?.eval(gamma))
}

/// Which finite-frequency Hamiltonian drives the evolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FiniteModel {
    /// Full fourth-order effective Hamiltonian.
    #[default]
    Quartic,
    /// Quadrature-quadratic truncation of it (diagnostic).
    Quadratic,
}

fn propagator(model: FiniteModel, g: f64, gamma: f64, omega: f64, eta: f64, n: usize) -> Result<Propagator> {
    let p = from_g_gamma(g, gamma, omega, eta)?;
    let h = match model {
        FiniteModel::Quartic => hamiltonian_np_finite(&p, n)?,
        FiniteModel::Quadratic => hamiltonian_np_finite_quadratic(&p, n)?,
    };
    Propagator::new(&h.op)
}

/// χ²/(ΔX)² along a time trace at fixed (g, γ, η), with its cutoff.
#[derive(Debug, Clone, PartialEq)]
pub struct LabTrace {
    pub times: Vec<f64>,
    pub inv_var: Vec<f64>,
    pub n_used: usize,
}

/// Laboratory inverted variance for the initial field (|0⟩ + i|1⟩)/√2; the
/// moments are converged in the cutoff, χ_g = ∂_g⟨X⟩ at fixed t is taken at
/// the accepted cutoff.
pub fn lab_trace(
    model: FiniteModel,
    g: f64,
    gamma: f64,
    omega: f64,
    eta: f64,
    times: &[f64],
    tr: &Truncation,
) -> Result<LabTrace> {
    derived(g, gamma, eta)?.require_normal_phase()?;
    let state = FieldState::PlusI01;
    let conv = converge_traces(tr, |n| {
        let (m, v) = moments_at(&propagator(model, g, gamma, omega, eta, n)?, &quad_x(n), &state.ket(n)?, times)?;
        Ok(vec![m, v])
    })?;
    let n = conv.n_used;
    let (psi, x) = (state.ket(n)?, quad_x(n));
    let (chi, _) = central_difference_trace(
        |gg| Ok(moments_at(&propagator(model, gg, gamma, omega, eta, n)?, &x, &psi, times)?.0),
        g,
        relative_step(g, 1e-4),
    )?;
    let var = &conv.value[1];
    let mut inv_var = Vec::with_capacity(times.len());
    for (c, v) in chi.iter().zip(var) {
        if *v < 1e-12 {
            return Err(Error::Numerical(format!("quadrature variance {v:e} below floor")));
        }
        inv_var.push(c * c / v);
    }
    Ok(LabTrace { times: times.to_vec(), inv_var, n_used: n })
}

/// 𝓘_lab at one time, quartic model.
pub fn numeric_inverted_variance_lab(p: &ModelParams, t: f64, tr: &Truncation) -> Result<(f64, usize)> {
    let d = derive(p)?;
    let lt = lab_trace(FiniteModel::Quartic, d.g, d.gamma, p.omega, d.eta, &[t], tr)?;
    Ok((lt.inv_var[0], lt.n_used))
}

/// Grid for the optimal-anisotropy scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig3Config {
    pub g: Vec<f64>,
    pub eta: Vec<f64>,
    pub gamma: Vec<f64>,
    /// Window as fractions of the nominal τ = 2π/(√Δ_g ω) with Δ_g at η → ∞.
    pub t_window: (f64, f64),
    pub t_samples: usize,
    pub omega: f64,
    pub model: FiniteModel,
}

impl Default for Fig3Config {
    fn default() -> Self {
        Fig3Config {
            g: vec![0.8, 0.9, 0.95],
            eta: vec![50.0],
            gamma: linspace(-0.5, 0.5, 81),
            t_window: (0.9, 1.0),
            t_samples: 21,
            omega: 1.0,
            model: FiniteModel::Quartic,
        }
    }
}

/// Maximum of 𝓘_lab over the (γ, t) grid at one (g, η).
#[derive(Debug, Clone, PartialEq)]
pub struct OptimalRatio {
    /// Argmax γ refined by a parabola through the best three γ samples at t*.
    pub gamma_star: f64,
    pub gamma_grid_argmax: f64,
    pub t_star_over_tau: f64,
    pub inv_var_max: f64,
    pub n_used: usize,
    /// γ samples whose cutoff did not converge (excluded from the argmax).
    pub unconverged: Vec<f64>,
}

fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> Option<f64> {
    let d1 = (y[1] - y[0]) / (x[1] - x[0]);
    let d2 = (y[2] - y[1]) / (x[2] - x[1]);
    let a = (d2 - d1) / (x[2] - x[0]);
    if a >= 0.0 {
        return None;
    }
    let b = d1 - a * (x[0] + x[1]);
    let v = -b / (2.0 * a);
    (v >= x[0] && v <= x[2]).then_some(v)
}

/// Grid search of 𝓘_lab over γ and t ∈ [t₀τ, t₁τ].
pub fn optimal_ratio(cfg: &Fig3Config, g: f64, eta: f64, tr: &Truncation) -> Result<OptimalRatio> {
    if cfg.gamma.len() < 3 || cfg.t_samples < 1 {
        return Err(Error::Domain { param: "gamma", value: cfg.gamma.len() as f64, reason: "need >= 3 gamma and >= 1 t samples" });
    }
    let tau = derived(g, 0.0, eta)?.tau_k(cfg.omega, 1)?;
    let times = linspace(cfg.t_window.0 * tau, cfg.t_window.1 * tau, cfg.t_samples);
    let mut table: Vec<Option<Vec<f64>>> = Vec::with_capacity(cfg.gamma.len());
    let mut unconverged = Vec::new();
    let mut n_used = 0;
    for &gamma in &cfg.gamma {
        match lab_trace(cfg.model, g, gamma, cfg.omega, eta, &times, tr) {
            Ok(lt) => {
                n_used = n_used.max(lt.n_used);
                table.push(Some(lt.inv_var));
            }
            Err(Error::NonConvergence { .. }) => {
                unconverged.push(gamma);
                table.push(None);
            }
            Err(e) => return Err(e),
        }
    }
    let mut best: Option<(usize, usize, f64)> = None;
    for (i, row) in table.iter().enumerate() {
        if let Some(row) = row {
            for (j, v) in row.iter().enumerate() {
                if best.map_or(true, |b| *v > b.2) {
                    best = Some((i, j, *v));
                }
            }
        }
    }
    let (i, j, vmax) = best.ok_or(Error::NonConvergence { n_max: tr.n_max, previous: f64::NAN, last: f64::NAN })?;
    let mut gamma_star = cfg.gamma[i];
    if i > 0 && i + 1 < cfg.gamma.len() {
        if let (Some(a), Some(c)) = (&table[i - 1], &table[i + 1]) {
            let xs = [cfg.gamma[i - 1], cfg.gamma[i], cfg.gamma[i + 1]];
            if let Some(v) = parabola_vertex(xs, [a[j], vmax, c[j]]) {
                gamma_star = v;
            }
        }
    }
    Ok(OptimalRatio {
        gamma_star,
        gamma_grid_argmax: cfg.gamma[i],
        t_star_over_tau: times[j] / tau,
        inv_var_max: vmax,
        n_used,
        unconverged,
    })
}

/// One row per (g, η).
pub fn optimal_ratio_scan(cfg: &Fig3Config, tr: &Truncation, workers: usize) -> Result<Vec<ScanRow>> {
    let cells: Vec<(f64, f64)> = cfg.g.iter().flat_map(|&g| cfg.eta.iter().map(move |&e| (g, e))).collect();
    par_map(&cells, workers, |&(g, eta)| {
        let row = ScanRow::new().input("g", g).input("eta", eta);
        match optimal_ratio(cfg, g, eta, tr) {
            Ok(o) => {
                let mut row = row
                    .number("gamma_star", Some(o.gamma_star))
                    .number("ratio_star", Some(ratio_from_gamma(o.gamma_star)))
                    .number("t_star_over_tau", Some(o.t_star_over_tau))
                    .number("inv_var_max", Some(o.inv_var_max))
                    .with_convergence(o.n_used, o.unconverged.is_empty());
                if !o.unconverged.is_empty() {
                    row = row.warn(format!("g={g} eta={eta}: {} gamma samples unconverged, excluded", o.unconverged.len()));
                }
                Ok(row)
            }
            Err(Error::NonConvergence { n_max, .. }) => Ok(row
                .number("gamma_star", None)
                .number("ratio_star", None)
                .number("t_star_over_tau", None)
                .number("inv_var_max", None)
                .warn(format!("g={g} eta={eta}: no gamma sample converged up to n={n_max}"))
                .with_convergence(n_max, false)),
            Err(e) => Err(e),
        }
    })?
    .into_iter()
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homodyne::inverted_variance;

    #[test]
    fn leading_coefficient() {
        let s = FiniteFreqSeries::new(0.5, 50.0).unwrap();
        assert!((s.c0 - 2.924_327_229_952_402).abs() < 1e-12);
        let mut x = 0.123_f64;
        for _ in 0..20 {
            x = (x * 7.77 + 0.31).fract();
            let g = 0.05 + 0.9 * x;
            let s = FiniteFreqSeries::new(g, 10.0).unwrap();
            let d = derived(g, 0.0, 1.0).unwrap();
            let hom = inverted_variance(&d, 1.0, d.tau_k(1.0, 1).unwrap()).unwrap();
            // at γ = 0 the homodyne τ₁ value is 8π²g²/Δ_g³·μ⁴(…) = g²π²/(2(1−g²)³)
            assert!((s.c0 - hom).abs() < 1e-9 * hom, "g={g}: {} vs {hom}", s.c0);
            assert!(s.c1 > 0.0);
        }
        let big = FiniteFreqSeries::new(0.7, 1e8).unwrap();
        assert!(big.c1 / big.c0 < 1e-6);
    }

    #[test]
    fn large_eta_recovers_lower_branch() {
        let tr = Truncation::new(16, 512, 1e-9).unwrap();
        let d = derived(0.5, 0.0, 1.0).unwrap();
        let t = d.tau_k(1.0, 1).unwrap();
        let lab = lab_trace(FiniteModel::Quartic, 0.5, 0.0, 1.0, 1e6, &[t], &tr).unwrap();
        let hom = inverted_variance(&d, 1.0, t).unwrap();
        assert!((lab.inv_var[0] - hom).abs() < 1e-3 * hom, "{} vs {hom}", lab.inv_var[0]);
    }

    #[test]
    fn quadratic_model_matches_series_slope() {
        let tr = Truncation::new(16, 512, 1e-9).unwrap();
        let (g, eta) = (0.8, 50.0);
        let t = derived(g, 0.0, eta).unwrap().tau_k(1.0, 1).unwrap();
        let at = |gamma| lab_trace(FiniteModel::Quadratic, g, gamma, 1.0, eta, &[t], &tr).unwrap().inv_var[0];
        let h = 1e-3;
        let slope = (at(h) - at(-h)) / (2.0 * h);
        let c1 = FiniteFreqSeries::new(g, eta).unwrap().c1;
        assert!((slope - c1).abs() < 0.01 * c1, "{slope} vs {c1}");
    }

    #[test]
    fn parabola() {
        let v = parabola_vertex([0.0, 1.0, 2.0], [0.0, 1.0, 0.0]).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        assert!(parabola_vertex([0.0, 1.0, 2.0], [0.0, 1.0, 2.0]).is_none());
    }
}
