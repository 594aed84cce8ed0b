//! Quadrature (homodyne) estimation scheme: analytic moments of X, the
//! susceptibility χ_g, inverted variance, and the exact-evolution oracle.
//!
//! Analytic formulas assume the field starts in (|0⟩ + i|1⟩)/√2.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{
    converge_traces, hamiltonian_np_down, quad_x, FieldState, Ket, Operator, Propagator, Truncation,
};
use crate::model::{derived, gamma_from_ratio, DerivedParams};
use crate::numdiff::{central_difference_trace, relative_step};
use crate::qfi::{build_generators, qfi_exact_generator};
use crate::scan::{linspace, par_map, ScanRow};

/// Which closed form of (ΔX)² to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceForm {
    /// 1 − 2g²ξ²μ²Δ_g⁻¹[1 − cos(√Δ_g ωt)]; disagrees with exact evolution (legacy).
    MainText,
    /// 1 − μ(2g²ξ + μ)Δ_g⁻¹[1 − cos(√Δ_g ωt)]; reproduces exact evolution.
    Appendix,
}

impl VarianceForm {
    /// The form selected by the exact-evolution reconciliation.
    pub const ADOPTED: VarianceForm = VarianceForm::Appendix;

    pub fn is_legacy(self) -> bool {
        self != Self::ADOPTED
    }
}

impl Default for VarianceForm {
    fn default() -> Self {
        Self::ADOPTED
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceSource {
    Analytic,
    Numeric,
}

/// Time trace of the quadrature moments.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureTrace {
    pub times: Vec<f64>,
    pub mean_x: Vec<f64>,
    pub var_x: Vec<f64>,
    pub chi_g: Vec<f64>,
    pub inv_var: Vec<f64>,
    pub source: TraceSource,
    pub n_used: usize,
}

fn phase(d: &DerivedParams, omega: f64, t: f64) -> f64 {
    d.delta_g.sqrt() * omega * t / 2.0
}

/// ⟨X⟩_t = √2 Δ_g^{−1/2} μ sin(√Δ_g ωt/2).
pub fn mean_x_analytic(d: &DerivedParams, omega: f64, t: f64) -> Result<f64> {
    d.require_normal_phase()?;
    Ok(SQRT_2 * d.mu / d.delta_g.sqrt() * phase(d, omega, t).sin())
}

/// (ΔX)² in the requested closed form.
pub fn var_x_analytic(d: &DerivedParams, omega: f64, t: f64, form: VarianceForm) -> Result<f64> {
    d.require_normal_phase()?;
    let c = 1.0 - (2.0 * phase(d, omega, t)).cos();
    let g2 = d.g * d.g;
    Ok(match form {
        VarianceForm::MainText => 1.0 - 2.0 * g2 * d.xi * d.xi * d.mu * d.mu / d.delta_g * c,
        VarianceForm::Appendix => 1.0 - d.mu * (2.0 * g2 * d.xi + d.mu) / d.delta_g * c,
    })
}

/// χ_g = ∂_g⟨X⟩_t = −(1/√2)(4μ²/Δ_g + γ²)gωt·cos(√Δ_g ωt/2)
///                 − 4√2 μgξΔ_g^{−3/2}·sin(√Δ_g ωt/2).
pub fn susceptibility_analytic(d: &DerivedParams, omega: f64, t: f64) -> Result<f64> {
    d.require_normal_phase()?;
    let x = phase(d, omega, t);
    let cos_term = -(4.0 * d.mu * d.mu / d.delta_g + d.gamma * d.gamma) * d.g * omega * t * x.cos() / SQRT_2;
    let sin_term = -4.0 * SQRT_2 * d.mu * d.g * d.xi / d.delta_g.powf(1.5) * x.sin();
    Ok(cos_term + sin_term)
}

/// 𝓘_g = χ_g²/(ΔX)² with the adopted variance form.
pub fn inverted_variance(d: &DerivedParams, omega: f64, t: f64) -> Result<f64> {
    let var = var_x_analytic(d, omega, t, VarianceForm::ADOPTED)?;
    if var <= 0.0 {
        return Err(Error::Numerical(format!("non-positive quadrature variance {var}")));
    }
    Ok(susceptibility_analytic(d, omega, t)?.powi(2) / var)
}

/// Near-critical closed form 𝓘_g(τ_k) ≃ 32π²g²μ⁴Δ_g⁻³k².
pub fn inverted_variance_at_tau_k(d: &DerivedParams, _omega: f64, k: u32) -> Result<f64> {
    d.require_normal_phase()?;
    if k == 0 {
        return Err(Error::Domain { param: "k", value: 0.0, reason: "k >= 1 required" });
    }
    Ok(32.0 * PI * PI * (d.g * d.mu * d.mu).powi(2) * (k as f64).powi(2) / d.delta_g.powi(3))
}

/// Exact value of χ²/(ΔX)² at τ_k: 32π²g²k²μ²(μ + γ²(1 − g²))²/Δ_g³.
pub fn inverted_variance_tau_k_exact(d: &DerivedParams, k: u32) -> Result<f64> {
    d.require_normal_phase()?;
    let inner = d.mu + d.gamma * d.gamma * (1.0 - d.g * d.g);
    Ok(32.0 * PI * PI * (d.g * d.mu * inner).powi(2) * (k as f64).powi(2) / d.delta_g.powi(3))
}

/// |χ_g(τ₁)| with the μ² factor; the isotropic case reduces to 4√2πgΔ_g^{−3/2}.
pub fn chi_at_tau(d: &DerivedParams) -> Result<f64> {
    d.require_normal_phase()?;
    Ok(4.0 * SQRT_2 * PI * d.g * d.mu * d.mu / d.delta_g.powf(1.5))
}

/// Envelope 8g²ω²μ⁴Δ_g⁻²t² traced by the local maxima of 𝓘_g(t).
pub fn inverted_variance_envelope(d: &DerivedParams, omega: f64, t: f64) -> Result<f64> {
    d.require_normal_phase()?;
    Ok(8.0 * (d.g * omega * t).powi(2) * d.mu.powi(4) / d.delta_g.powi(2))
}

/// Uniform time grid over `periods` periods 2π/(√Δ_g ω), `per_period` points each.
pub fn time_grid(d: &DerivedParams, omega: f64, periods: f64, per_period: usize) -> Result<Vec<f64>> {
    let tau = d.tau_k(omega, 1)?;
    let num = (periods * per_period as f64).round() as usize + 1;
    Ok(linspace(0.0, periods * tau, num))
}

/// Interior strict-rise / non-strict-fall local maxima (three-point stencil).
pub fn local_maxima(values: &[f64]) -> Vec<usize> {
    (1..values.len().saturating_sub(1))
        .filter(|&i| values[i] > values[i - 1] && values[i] >= values[i + 1])
        .collect()
}

/// Closed-form trace.
pub fn analytic_trace(d: &DerivedParams, omega: f64, times: &[f64]) -> Result<QuadratureTrace> {
    let mut tr = QuadratureTrace {
        times: times.to_vec(),
        mean_x: Vec::with_capacity(times.len()),
        var_x: Vec::with_capacity(times.len()),
        chi_g: Vec::with_capacity(times.len()),
        inv_var: Vec::with_capacity(times.len()),
        source: TraceSource::Analytic,
        n_used: 0,
    };
    for &t in times {
        tr.mean_x.push(mean_x_analytic(d, omega, t)?);
        tr.var_x.push(var_x_analytic(d, omega, t, VarianceForm::ADOPTED)?);
        tr.chi_g.push(susceptibility_analytic(d, omega, t)?);
        tr.inv_var.push(inverted_variance(d, omega, t)?);
    }
    Ok(tr)
}

pub(crate) fn moments_at(prop: &Propagator, x: &Operator, psi: &Ket, times: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut mean = Vec::with_capacity(times.len());
    let mut var = Vec::with_capacity(times.len());
    for &t in times {
        let phi = prop.evolve(t, psi)?;
        let v = phi.apply(x)?;
        let m = crate::fock::state_inner(phi.amplitudes(), &v).re;
        mean.push(m);
        var.push(v.iter().map(|z| z.norm_sqr()).sum::<f64>() - m * m);
    }
    Ok((mean, var))
}

fn propagator(g: f64, gamma: f64, omega: f64, n: usize) -> Result<Propagator> {
    let d = derived(g, gamma, 1.0)?;
    Propagator::new(&hamiltonian_np_down(&d, omega, n)?.op)
}

/// Mean and variance of X at a fixed cutoff.
fn moment_traces_at(g: f64, gamma: f64, omega: f64, state: &FieldState, times: &[f64], n: usize) -> Result<Vec<Vec<f64>>> {
    let (mean, var) = moments_at(&propagator(g, gamma, omega, n)?, &quad_x(n), &state.ket(n)?, times)?;
    Ok(vec![mean, var])
}

/// ∂_g⟨X⟩ at a fixed cutoff by central differences in g.
fn chi_trace_at(g: f64, gamma: f64, omega: f64, state: &FieldState, times: &[f64], n: usize) -> Result<Vec<f64>> {
    let psi = state.ket(n)?;
    let x = quad_x(n);
    let (chi, _) = central_difference_trace(
        |gg| Ok(moments_at(&propagator(gg, gamma, omega, n)?, &x, &psi, times)?.0),
        g,
        relative_step(g, 1e-4),
    )?;
    Ok(chi)
}

/// Exact-evolution trace under H_np^↓ from an arbitrary initial state, with
/// χ_g from central differences in g at fixed t.  The moments are converged
/// in the cutoff; χ_g is then evaluated at the accepted cutoff (difference
/// quotients carry eigensolver noise well above the convergence tolerance).
pub fn numeric_trace(
    g: f64,
    gamma: f64,
    omega: f64,
    state: &FieldState,
    times: &[f64],
    tr: &Truncation,
) -> Result<QuadratureTrace> {
    derived(g, gamma, 1.0)?.require_normal_phase()?;
    let conv = converge_traces(tr, |n| moment_traces_at(g, gamma, omega, state, times, n))?;
    let mut it = conv.value.into_iter();
    let (mean_x, var_x) = (it.next().unwrap(), it.next().unwrap());
    let chi_g = chi_trace_at(g, gamma, omega, state, times, conv.n_used)?;
    let inv_var = chi_g.iter().zip(&var_x).map(|(c, v)| c * c / v).collect();
    Ok(QuadratureTrace { times: times.to_vec(), mean_x, var_x, chi_g, inv_var, source: TraceSource::Numeric, n_used: conv.n_used })
}

/// Outcome of comparing both variance forms with exact evolution.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconciliation {
    /// The unique form within tolerance, if exactly one qualifies.
    pub selected: Option<VarianceForm>,
    pub residual_main_text: f64,
    pub residual_appendix: f64,
    pub n_used: usize,
}

/// Compares both closed forms of (ΔX)² with exact evolution over one full
/// period of ⟨X⟩, residuals relative to the largest variance.
pub fn reconcile_variance_form(g: f64, gamma: f64, omega: f64, tol: f64, tr: &Truncation) -> Result<Reconciliation> {
    let d = derived(g, gamma, 1.0)?;
    let times = time_grid(&d, omega, 2.0, 100)?;
    let num = numeric_trace(g, gamma, omega, &FieldState::PlusI01, &times, tr)?;
    let scale = num.var_x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let residual = |form| -> Result<f64> {
        let mut r: f64 = 0.0;
        for (t, v) in times.iter().zip(&num.var_x) {
            r = r.max((var_x_analytic(&d, omega, *t, form)? - v).abs());
        }
        Ok(r / scale)
    };
    let (rm, ra) = (residual(VarianceForm::MainText)?, residual(VarianceForm::Appendix)?);
    let selected = match (rm < tol, ra < tol) {
        (true, false) => Some(VarianceForm::MainText),
        (false, true) => Some(VarianceForm::Appendix),
        _ => None,
    };
    Ok(Reconciliation { selected, residual_main_text: rm, residual_appendix: ra, n_used: num.n_used })
}

/// Quantities reported per homodyne scan cell.
#[derive(Debug, Clone, PartialEq)]
pub struct HomodynePoint {
    pub mean_x_analytic: f64,
    pub mean_x_numeric: f64,
    pub var_x_analytic: f64,
    pub var_x_numeric: f64,
    pub chi_analytic: f64,
    pub chi_numeric: f64,
    /// χ²/(ΔX)² from exact evolution.
    pub inv_var: f64,
    /// QFI for g from the exact local generator.
    pub qfi: f64,
    pub n_used: usize,
}

/// Analytic and exact homodyne quantities at one (g, γ, t).
pub fn homodyne_point(g: f64, gamma: f64, omega: f64, t: f64, tr: &Truncation) -> Result<HomodynePoint> {
    let d = derived(g, gamma, 1.0)?;
    let state = FieldState::PlusI01;
    let num = numeric_trace(g, gamma, omega, &state, &[t], tr)?;
    let n = num.n_used;
    let gs = build_generators(&d, omega, n)?;
    let qfi = qfi_exact_generator(&gs, t, &state.ket(n)?)?.in_g(g).value;
    Ok(HomodynePoint {
        mean_x_analytic: mean_x_analytic(&d, omega, t)?,
        mean_x_numeric: num.mean_x[0],
        var_x_analytic: var_x_analytic(&d, omega, t, VarianceForm::ADOPTED)?,
        var_x_numeric: num.var_x[0],
        chi_analytic: susceptibility_analytic(&d, omega, t)?,
        chi_numeric: num.chi_g[0],
        inv_var: num.inv_var[0],
        qfi,
        n_used: n,
    })
}

/// Grid for the quadrature-scheme scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig1Config {
    pub g: Vec<f64>,
    pub ratio_l1_l2: Vec<f64>,
    pub omega: f64,
    /// Evolution times as multiples of τ₁ = 2π/(√Δ_g ω) of each point.
    pub tau_multiples: Vec<f64>,
    /// Absolute ωt values; when present they replace `tau_multiples`.
    pub omega_t: Option<Vec<f64>>,
}

impl Default for Fig1Config {
    fn default() -> Self {
        Fig1Config {
            g: linspace(0.9, 0.99, 10),
            ratio_l1_l2: vec![1.0, 2.0, 4.0],
            omega: 1.0,
            tau_multiples: vec![1.0],
            omega_t: None,
        }
    }
}

/// One row per (g, ratio, t): analytic and numeric columns side by side.
pub fn scan_fig1(cfg: &Fig1Config, tr: &Truncation, workers: usize) -> Result<Vec<ScanRow>> {
    let mut cells = Vec::new();
    for &ratio in &cfg.ratio_l1_l2 {
        let gamma = gamma_from_ratio(ratio)?;
        for &g in &cfg.g {
            let d = derived(g, gamma, 1.0)?;
            d.require_normal_phase()?;
            let times: Vec<f64> = match &cfg.omega_t {
                Some(wt) => wt.iter().map(|x| x / cfg.omega).collect(),
                None => {
                    let tau = d.tau_k(cfg.omega, 1)?;
                    cfg.tau_multiples.iter().map(|m| m * tau).collect()
                }
            };
            for t in times {
                cells.push((g, gamma, ratio, t));
            }
        }
    }
    par_map(&cells, workers, |&(g, gamma, ratio, t)| {
        let row = ScanRow::new()
            .input("g", g)
            .input("gamma", gamma)
            .input("ratio_l1_l2", ratio)
            .input("omega_t", cfg.omega * t);
        match homodyne_point(g, gamma, cfg.omega, t, tr) {
            Ok(p) => Ok(row
                .number("mean_x_analytic", Some(p.mean_x_analytic))
                .number("mean_x_numeric", Some(p.mean_x_numeric))
                .number("var_x", Some(p.var_x_numeric))
                .number("chi_analytic", Some(p.chi_analytic))
                .number("chi_numeric", Some(p.chi_numeric))
                .number("inv_var", Some(p.inv_var))
                .number("qfi", Some(p.qfi))
                .with_convergence(p.n_used, true)),
            Err(Error::NonConvergence { n_max, previous, last }) => Ok(fig1_unconverged(row, cfg.omega, g, gamma, t)
                .warn(format!("g={g} ratio={ratio} omega_t={}: no convergence up to n={n_max} ({previous} vs {last})", cfg.omega * t))
                .with_convergence(n_max, false)),
            Err(e) => Err(e),
        }
    })?
    .into_iter()
    .collect()
}

fn fig1_unconverged(row: ScanRow, omega: f64, g: f64, gamma: f64, t: f64) -> ScanRow {
    let d = derived(g, gamma, 1.0).ok();
    let an = |f: fn(&DerivedParams, f64, f64) -> Result<f64>| d.as_ref().and_then(|d| f(d, omega, t).ok());
    row.number("mean_x_analytic", an(mean_x_analytic))
        .number("mean_x_numeric", None)
        .number("var_x", None)
        .number("chi_analytic", an(susceptibility_analytic))
        .number("chi_numeric", None)
        .number("inv_var", None)
        .number("qfi", None)
}
