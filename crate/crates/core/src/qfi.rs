//! Generator algebra, exact local generator and QFI (analytic and oracle).
//!
//! For H_α = H₀ + αH₁ with A = −i[H₀,H₁] and B = −[H_α,[H₀,H₁]] closing as
//! [H_α, A] = iB, [H_α, B] = −iΔA, the transformed local generator is
//! h_α = H₁t + (cos√Δt − 1)/Δ · A − (sin√Δt − √Δt)/Δ^{3/2} · B.
//! In the quadrature realization α = −g², H₀ = ω(X²+P²)/2, H₁ = ω(X²+γ²P²)/2.

use ndarray::Array1;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{
    converge, converge_many, hamiltonian_np_down, quad_p2, quad_x2, quad_xp_sym, variance, FieldState, Ket, Operator,
    Propagator, Truncation, GUARD_BAND,
};
use crate::model::{derived, DerivedParams};
use crate::numdiff::{relative_step, Derivative};
use crate::scan::{par_map, ScanRow};

/// Tolerance of the build-time commutator checks, relative to the operator scale.
pub const ALGEBRA_TOL: f64 = 1e-10;

/// The operator algebra (H₀, H₁, A, B, Δ) of the QFI framework.
#[derive(Debug, Clone)]
pub struct GeneratorSet {
    pub h0: Operator,
    pub h1: Operator,
    pub a_op: Operator,
    pub b_op: Operator,
    /// Δ = ω²Δ_g.
    pub delta: f64,
    /// α = −g².
    pub alpha: f64,
    pub omega: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QfiMethod {
    AnalyticEq7,
    ExactGenerator,
    FiniteDifference,
}

/// Parameter the Fisher information refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parameter {
    Alpha,
    G,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QfiResult {
    pub value: f64,
    pub t: f64,
    pub method: QfiMethod,
    pub parameter: Parameter,
    /// Fock cutoff behind the value (0 for closed forms).
    pub n_used: usize,
    /// True when the finite-difference value is Richardson-extrapolated.
    pub richardson: bool,
}

impl QfiResult {
    /// Reparameterizes α = −g² → g: F_g = (∂α/∂g)² F_α = 4g² F_α.
    pub fn in_g(self, g: f64) -> QfiResult {
        match self.parameter {
            Parameter::G => self,
            Parameter::Alpha => QfiResult { value: 4.0 * g * g * self.value, parameter: Parameter::G, ..self },
        }
    }

    /// Reparameterizes g → α: F_α = F_g / (4g²).
    pub fn in_alpha(self, g: f64) -> Result<QfiResult> {
        match self.parameter {
            Parameter::Alpha => Ok(self),
            Parameter::G if g > 0.0 => {
                Ok(QfiResult { value: self.value / (4.0 * g * g), parameter: Parameter::Alpha, ..self })
            }
            Parameter::G => Err(Error::Domain { param: "g", value: g, reason: "dα/dg vanishes at g = 0" }),
        }
    }
}

impl GeneratorSet {
    /// H_α = H₀ + αH₁.
    pub fn h_alpha(&self) -> Operator {
        &self.h0 + &self.h1.scale(self.alpha)
    }

    /// Γ = i√Δ·A − B.
    pub fn gamma_op(&self) -> Result<Operator> {
        let sd = positive_sqrt(self.delta)?;
        Ok(&self.a_op.scale_c(C64::new(0.0, sd)) - &self.b_op)
    }

    /// max |[H_α, Γ] − √Δ Γ| on the interior block, relative to max(1, |Γ|).
    pub fn eigen_relation_residual(&self) -> Result<f64> {
        let sd = positive_sqrt(self.delta)?;
        let gam = self.gamma_op()?;
        let lhs = self.h_alpha().commutator(&gam)?;
        Ok(lhs.interior_distance(&gam.scale(sd), GUARD_BAND)? / gam.max_abs().max(1.0))
    }

    /// Residuals of A = −i[H₀,H₁] and B = −[H_α,[H₀,H₁]] on the interior block.
    pub fn algebra_residuals(&self) -> Result<(f64, f64)> {
        let c = self.h0.commutator(&self.h1)?;
        let a = c.scale_c(C64::new(0.0, -1.0));
        let b = self.h_alpha().commutator(&c)?.scale(-1.0);
        let ra = self.a_op.interior_distance(&a, GUARD_BAND)? / a.max_abs().max(1.0);
        let rb = self.b_op.interior_distance(&b, GUARD_BAND)? / b.max_abs().max(1.0);
        Ok((ra, rb))
    }
}

fn positive_sqrt(delta: f64) -> Result<f64> {
    if delta > 0.0 {
        Ok(delta.sqrt())
    } else {
        Err(Error::Domain { param: "delta", value: delta, reason: "requires the oscillatory regime delta > 0" })
    }
}

/// Closed-form generator algebra for the quadrature realization; the
/// commutator identities are verified before returning.
pub fn build_generators(d: &DerivedParams, omega: f64, n: usize) -> Result<GeneratorSet> {
    if n < 2 * GUARD_BAND {
        return Err(Error::Domain { param: "n", value: n as f64, reason: "cutoff must be >= 8" });
    }
    let (x2, p2, xp) = (quad_x2(n), quad_p2(n), quad_xp_sym(n));
    let g2 = d.g * d.g;
    let gam2 = d.gamma * d.gamma;
    let gs = GeneratorSet {
        h0: (&x2 + &p2).scale(omega / 2.0),
        h1: (&x2 + &p2.scale(gam2)).scale(omega / 2.0),
        a_op: xp.scale(omega * omega / 2.0 * d.xi),
        b_op: (&x2.scale(1.0 - g2) - &p2.scale(d.mu)).scale(omega.powi(3) * d.xi),
        delta: omega * omega * d.delta_g,
        alpha: -g2,
        omega,
    };
    let (ra, rb) = gs.algebra_residuals()?;
    for (check, r) in [("A = -i[H0, H1]", ra), ("B = -[H_alpha, [H0, H1]]", rb)] {
        if r > ALGEBRA_TOL {
            return Err(Error::VerificationFailed { check, residual: r, tolerance: ALGEBRA_TOL });
        }
    }
    Ok(gs)
}

/// Coefficients (t, (cos√Δt − 1)/Δ, −(sin√Δt − √Δt)/Δ^{3/2}) of H₁, A, B in h_α.
pub fn generator_coefficients(delta: f64, t: f64) -> Result<(f64, f64, f64)> {
    let sd = positive_sqrt(delta)?;
    let x = sd * t;
    Ok((t, (x.cos() - 1.0) / delta, -(x.sin() - x) / (delta * sd)))
}

/// h_α = H₁t + [(cos√Δt − 1)/Δ]A − [(sin√Δt − √Δt)/Δ^{3/2}]B.
pub fn local_generator_exact(gs: &GeneratorSet, t: f64) -> Result<Operator> {
    let (c1, ca, cb) = generator_coefficients(gs.delta, t)?;
    Ok(&(&gs.h1.scale(c1) + &gs.a_op.scale(ca)) + &gs.b_op.scale(cb))
}

/// 4·Var[h_α] in the given state (Fisher information for α).
pub fn qfi_exact_generator(gs: &GeneratorSet, t: f64, psi: &Ket) -> Result<QfiResult> {
    let h = local_generator_exact(gs, t)?;
    let value = 4.0 * variance(&h, psi)?.max(0.0);
    Ok(QfiResult {
        value,
        t,
        method: QfiMethod::ExactGenerator,
        parameter: Parameter::Alpha,
        n_used: psi.cutoff(),
        richardson: false,
    })
}

/// 16g²ξ²μ²[sin(√Δ_g ωt) − √Δ_g ωt]²/Δ_g³ · Var[P²]  (Fisher information for g).
pub fn qfi_analytic(d: &DerivedParams, omega: f64, t: f64, var_p2: f64) -> Result<QfiResult> {
    d.require_normal_phase()?;
    if !(var_p2 >= 0.0) {
        return Err(Error::Domain { param: "var_p2", value: var_p2, reason: "must be >= 0" });
    }
    let sd = d.delta_g.sqrt();
    let x = sd * omega * t;
    let value = 16.0 * d.g.powi(2) * d.xi.powi(2) * d.mu.powi(2) * (x.sin() - x).powi(2) / d.delta_g.powi(3) * var_p2;
    Ok(QfiResult { value, t, method: QfiMethod::AnalyticEq7, parameter: Parameter::G, n_used: 0, richardson: false })
}

/// Closed form at τ_k: 64π²g²ξ²μ²Δ_g⁻³k²·Var[P²].
pub fn qfi_analytic_tau_k(d: &DerivedParams, k: u32, var_p2: f64) -> Result<f64> {
    d.require_normal_phase()?;
    let pi2 = std::f64::consts::PI.powi(2);
    Ok(64.0 * pi2 * (d.g * d.xi * d.mu).powi(2) * (k as f64).powi(2) / d.delta_g.powi(3) * var_p2)
}

/// Fisher information for α from central differences of the evolution:
/// hψ ≈ iU(α)†[U(α+δ) − U(α−δ)]ψ/(2δ), F = 4Var[h], with steps {δ, δ/2}.
pub fn qfi_finite_difference<F>(h_of_alpha: F, alpha: f64, t: f64, psi: &Ket, step: f64) -> Result<QfiResult>
where
    F: Fn(f64) -> Result<Operator>,
{
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::Domain { param: "step", value: step, reason: "must be finite and > 0" });
    }
    let centre = Propagator::new(&h_of_alpha(alpha)?)?;
    let estimate = |delta: f64| -> Result<f64> {
        let up = Propagator::new(&h_of_alpha(alpha + delta)?)?.evolve(t, psi)?;
        let down = Propagator::new(&h_of_alpha(alpha - delta)?)?.evolve(t, psi)?;
        let diff: Array1<C64> = (up.amplitudes() - down.amplitudes()) * C64::new(0.0, 1.0 / (2.0 * delta));
        let h_psi = centre.evolve_raw(-t, &diff);
        Ok(4.0 * crate::fock::state_variance_of_image(psi.amplitudes(), &h_psi))
    };
    let d = Derivative::combine(estimate(step)?, estimate(step / 2.0)?)?;
    Ok(QfiResult {
        value: d.value.max(0.0),
        t,
        method: QfiMethod::FiniteDifference,
        parameter: Parameter::Alpha,
        n_used: psi.cutoff(),
        richardson: d.richardson,
    })
}

/// Pure-state Fisher information 4(‖∂ψ‖² − |⟨ψ|∂ψ⟩|²) of a state family
/// ψ(x), with ∂ψ from central differences at steps {h, h/2}.
pub fn qfi_state_family<F>(mut psi_of: F, x: f64, h: f64) -> Result<(f64, bool)>
where
    F: FnMut(f64) -> Result<Array1<C64>>,
{
    let psi = psi_of(x)?;
    let mut estimate = |delta: f64| -> Result<f64> {
        let dpsi = (psi_of(x + delta)? - psi_of(x - delta)?) / C64::new(2.0 * delta, 0.0);
        Ok(4.0 * crate::fock::state_variance_of_image(&psi, &dpsi.mapv(|z| z * C64::new(0.0, 1.0))))
    };
    let d = Derivative::combine(estimate(h)?, estimate(h / 2.0)?)?;
    Ok((d.value.max(0.0), d.richardson))
}

/// One point of the QFI comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct QfiPoint {
    pub var_p2: f64,
    /// Fisher information for g from the closed-form approximation.
    pub analytic: f64,
    /// 4g²·4Var[h_α].
    pub exact_generator: f64,
    /// 4g²·(finite-difference F_α) on H_np^↓.
    pub finite_difference: f64,
    pub richardson: bool,
    pub n_used: usize,
}

/// Noise floor of the finite-difference QFI from eigensolver round-off,
/// relative; its cutoff convergence is not tested below this.
pub const FD_NOISE: f64 = 1e-7;

/// Analytic, exact-generator and finite-difference QFI for g at time t.  The
/// exact-generator QFI and Var[P²] are converged at `tr.rel_tol`; the finite
/// difference separately at no less than [`FD_NOISE`], and both are reported
/// at the larger accepted cutoff.
pub fn qfi_point(g: f64, gamma: f64, omega: f64, t: f64, state: &FieldState, tr: &Truncation) -> Result<QfiPoint> {
    let d = derived(g, gamma, 1.0)?;
    d.require_normal_phase()?;
    let exact_at = |n: usize| -> Result<Vec<f64>> {
        let psi = state.ket(n)?;
        let gs = build_generators(&d, omega, n)?;
        Ok(vec![qfi_exact_generator(&gs, t, &psi)?.in_g(g).value, variance(&quad_p2(n), &psi)?])
    };
    let mut richardson = false;
    let fd_at = |n: usize, richardson: &mut bool| -> Result<f64> {
        let psi = state.ket(n)?;
        let alpha = -g * g;
        let fd = qfi_finite_difference(|a| hamiltonian_for_alpha(a, gamma, omega, n), alpha, t, &psi, relative_step(alpha, 1e-5))?;
        *richardson = fd.richardson;
        Ok(fd.in_g(g).value)
    };
    let conv = converge_many(tr, exact_at)?;
    let fd_tr = Truncation { rel_tol: tr.rel_tol.max(FD_NOISE), ..*tr };
    let fd = converge(&fd_tr, |n| fd_at(n, &mut richardson))?;
    let n = conv.n_used.max(fd.n_used);
    let (exact, var_p2) = if n == conv.n_used { (conv.value[0], conv.value[1]) } else { exact_at(n).map(|v| (v[0], v[1]))? };
    let finite_difference = if n == fd.n_used { fd.value } else { fd_at(n, &mut richardson)? };
    let analytic = qfi_analytic(&d, omega, t, var_p2)?.value;
    Ok(QfiPoint { var_p2, analytic, exact_generator: exact, finite_difference, richardson, n_used: n })
}

/// H_np^↓ (constants dropped) as a function of α = −g².
pub fn hamiltonian_for_alpha(alpha: f64, gamma: f64, omega: f64, n: usize) -> Result<Operator> {
    if alpha > 0.0 {
        return Err(Error::Domain { param: "alpha", value: alpha, reason: "alpha = -g^2 must be <= 0" });
    }
    let d = derived((-alpha).sqrt().max(1e-300), gamma, 1.0)?;
    Ok(hamiltonian_np_down(&d, omega, n)?.op)
}

/// Grid for the QFI comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QfiConfig {
    pub g: Vec<f64>,
    pub gamma: Vec<f64>,
    pub omega: f64,
    /// Evolution times as multiples of τ₁ = 2π/(√Δ_g ω).
    pub tau_multiples: Vec<f64>,
    /// Absolute ωt values; when present they replace `tau_multiples`.
    pub omega_t: Option<Vec<f64>>,
    pub initial_state: FieldState,
}

impl Default for QfiConfig {
    fn default() -> Self {
        QfiConfig {
            g: vec![0.3, 0.5, 0.8, 0.95],
            gamma: vec![0.0, 1.0 / 3.0, 0.6],
            omega: 1.0,
            tau_multiples: vec![1.0],
            omega_t: Some(vec![1.0]),
            initial_state: FieldState::PlusI01,
        }
    }
}

/// One row per (g, γ, t): closed form, exact generator and finite difference.
pub fn scan_qfi(cfg: &QfiConfig, tr: &Truncation, workers: usize) -> Result<Vec<ScanRow>> {
    let mut cells = Vec::new();
    for &g in &cfg.g {
        for &gamma in &cfg.gamma {
            let d = derived(g, gamma, 1.0)?;
            d.require_normal_phase()?;
            let times: Vec<f64> = match &cfg.omega_t {
                Some(wt) => wt.iter().map(|x| x / cfg.omega).collect(),
                None => {
                    let tau = d.tau_k(cfg.omega, 1)?;
                    cfg.tau_multiples.iter().map(|m| m * tau).collect()
                }
            };
            cells.extend(times.into_iter().map(|t| (g, gamma, t)));
        }
    }
    par_map(&cells, workers, |&(g, gamma, t)| {
        let row = ScanRow::new().input("g", g).input("gamma", gamma).input("omega_t", cfg.omega * t);
        match qfi_point(g, gamma, cfg.omega, t, &cfg.initial_state, tr) {
            Ok(p) => Ok(row
                .number("var_p2", Some(p.var_p2))
                .number("qfi_analytic", Some(p.analytic))
                .number("qfi_exact", Some(p.exact_generator))
                .number("qfi_fd", Some(p.finite_difference))
                .output("richardson", p.richardson)
                .with_convergence(p.n_used, true)),
            Err(Error::NonConvergence { n_max, previous, last }) => Ok(row
                .number("var_p2", None)
                .number("qfi_analytic", None)
                .number("qfi_exact", None)
                .number("qfi_fd", None)
                .output("richardson", false)
                .warn(format!("g={g} gamma={gamma} omega_t={}: no convergence up to n={n_max} ({previous} vs {last})", cfg.omega * t))
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
    use crate::fock::{quad_x, Ket};
    use std::f64::consts::PI;

    fn plus_i(n: usize) -> Ket {
        FieldState::PlusI01.ket(n).unwrap()
    }

    #[test]
    fn xi_zero_kills_a_and_b() {
        for gamma in [1.0, -1.0] {
            let d = derived(0.6, gamma, 1.0).unwrap();
            let gs = build_generators(&d, 1.0, 16).unwrap();
            assert_eq!(gs.a_op.max_abs(), 0.0);
            assert_eq!(gs.b_op.max_abs(), 0.0);
            let h = local_generator_exact(&gs, 2.0).unwrap();
            assert!(h.interior_distance(&gs.h1.scale(2.0), 0).unwrap() < 1e-15);
        }
    }

    #[test]
    fn eigen_relation_holds() {
        let d = derived(0.5, 1.0 / 3.0, 1.0).unwrap();
        let gs = build_generators(&d, 1.0, 40).unwrap();
        assert!(gs.eigen_relation_residual().unwrap() < 1e-8);
    }

    #[test]
    fn flipped_b_breaks_eigen_relation() {
        let d = derived(0.5, 1.0 / 3.0, 1.0).unwrap();
        let mut gs = build_generators(&d, 1.0, 40).unwrap();
        gs.b_op = gs.b_op.scale(-1.0);
        assert!(gs.eigen_relation_residual().unwrap() > 1e-3);
    }

    #[test]
    fn delta_closed_form() {
        let mut s = 0x2545F4914F6CDD1Du64;
        let mut next = || {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..20 {
            let (g, gamma, omega) = (0.01 + 0.98 * next(), -1.0 + 2.0 * next(), 0.5 + next());
            let d = derived(g, gamma, 1.0).unwrap();
            let gs = build_generators(&d, omega, 12).unwrap();
            let expect = 4.0 * omega * omega * (1.0 - g * g) * (1.0 - gamma * gamma * g * g);
            assert!((gs.delta - expect).abs() <= 1e-13 * expect);
        }
    }

    #[test]
    fn generator_vanishes_at_zero_time() {
        let d = derived(0.7, 0.2, 1.0).unwrap();
        let gs = build_generators(&d, 1.0, 16).unwrap();
        assert_eq!(local_generator_exact(&gs, 0.0).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn exact_generator_matches_finite_difference() {
        let (g, gamma, t, n) = (0.5, 0.0, 5.0, 48);
        let d = derived(g, gamma, 1.0).unwrap();
        let gs = build_generators(&d, 1.0, n).unwrap();
        let psi = plus_i(n);
        let exact = qfi_exact_generator(&gs, t, &psi).unwrap().value;
        let fd = qfi_finite_difference(
            |a| hamiltonian_for_alpha(a, gamma, 1.0, n),
            gs.alpha,
            t,
            &psi,
            relative_step(gs.alpha, 1e-5),
        )
        .unwrap()
        .value;
        assert!((exact - fd).abs() < 1e-6 * exact, "{exact} vs {fd}");
    }

    #[test]
    fn alpha_independent_family_has_zero_qfi() {
        let n = 12;
        let h = quad_x2(n);
        let r = qfi_finite_difference(|_| Ok(h.clone()), 0.3, 1.0, &Ket::fock(n, 0).unwrap(), 1e-4).unwrap();
        assert!(r.value.abs() < 1e-10);
    }

    #[test]
    fn commuting_family_gives_textbook_value() {
        // H(α) = αX on a 3-level space: h = Xt, F = 4t²Var[X]_{|0⟩} = 2.
        let n = 3;
        let x = quad_x(n);
        let r = qfi_finite_difference(|a| Ok(x.scale(a)), 0.4, 1.0, &Ket::fock(n, 0).unwrap(), 1e-4).unwrap();
        assert!((r.value - 2.0).abs() < 1e-8, "{}", r.value);
    }

    #[test]
    fn analytic_zero_for_extreme_anisotropy() {
        let d = derived(0.7, 1.0, 1.0).unwrap();
        assert_eq!(qfi_analytic(&d, 1.0, 3.0, 1.25).unwrap().value, 0.0);
    }

    #[test]
    fn analytic_at_tau_k_is_quadratic_in_k() {
        let d = derived(0.8, 1.0 / 3.0, 1.0).unwrap();
        let base = qfi_analytic(&d, 1.0, d.tau_k(1.0, 1).unwrap(), 1.25).unwrap().value;
        assert!((qfi_analytic_tau_k(&d, 1, 1.25).unwrap() - base).abs() < 1e-12 * base);
        for k in 2..6 {
            let v = qfi_analytic(&d, 1.0, d.tau_k(1.0, k).unwrap(), 1.25).unwrap().value;
            let closed = qfi_analytic_tau_k(&d, k, 1.25).unwrap();
            assert!((v / (k * k) as f64 - base).abs() < 1e-9 * base);
            assert!((closed / (k * k) as f64 - base).abs() < 1e-12 * base);
        }
    }

    #[test]
    fn analytic_grows_towards_criticality_and_peaks_isotropic() {
        let mut last = 0.0;
        for g in [0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99] {
            let d = derived(g, 0.3, 1.0).unwrap();
            let v = qfi_analytic(&d, 1.0, d.tau_k(1.0, 1).unwrap(), 1.25).unwrap().value;
            assert!(v > last);
            last = v;
        }
        let at = |gamma: f64| {
            let d = derived(0.9, gamma, 1.0).unwrap();
            qfi_analytic(&d, 1.0, d.tau_k(1.0, 1).unwrap(), 1.25).unwrap().value
        };
        let peak = at(0.0);
        for k in -9..=9 {
            assert!(at(k as f64 / 10.0) <= peak * (1.0 + 1e-12));
        }
    }

    #[test]
    fn reparameterization_roundtrip() {
        let r = QfiResult {
            value: 3.0,
            t: 1.0,
            method: QfiMethod::ExactGenerator,
            parameter: Parameter::Alpha,
            n_used: 8,
            richardson: false,
        };
        let g = r.in_g(0.7);
        assert!((g.value - 3.0 * 4.0 * 0.49).abs() < 1e-14);
        assert!((g.in_alpha(0.7).unwrap().value - 3.0).abs() < 1e-14);
        assert!(g.in_alpha(0.0).is_err());
    }

    #[test]
    fn state_family_qfi_of_phase_rotation() {
        // ψ(x) = (|0⟩ + e^{ix}|1⟩)/√2 has F = 1.
        let (f, _) = qfi_state_family(
            |x| {
                let h = std::f64::consts::FRAC_1_SQRT_2;
                Ok(Array1::from(vec![C64::new(h, 0.0), C64::from_polar(h, x)]))
            },
            0.4,
            1e-4,
        )
        .unwrap();
        assert!((f - 1.0).abs() < 1e-8);
        let _ = PI;
    }
}
