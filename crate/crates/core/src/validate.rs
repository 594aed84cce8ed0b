//! Cross-module oracle suite: each check measures a residual against a
//! tolerance and reports it, failing checks included.

use std::time::Instant;

use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{
    annihilation, converge, creation, hamiltonian_full, hamiltonian_np_down, hamiltonian_np_finite, hamiltonian_np_up,
    lowest_gap_full, squeeze, FieldState, Ket, Propagator, Truncation, GUARD_BAND,
};
use crate::homodyne::{reconcile_variance_form, VarianceForm};
use crate::model::{derive, derived, from_g_gamma};
use crate::qfi::{build_generators, hamiltonian_for_alpha, qfi_exact_generator, qfi_finite_difference};
use crate::numdiff::relative_step;
use crate::qubitprobe::squeeze_parameters_g;

/// Deliberate defects for checking that the suite notices them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mutation {
    /// Sign of B flipped after the generator algebra is built.
    FlipB,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidateOptions {
    /// Only the sub-second checks.
    pub quick: bool,
    pub mutation: Option<Mutation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CheckOutcome {
    fn new(name: &str, residual: f64, tolerance: f64, detail: String, seconds: f64) -> Self {
        CheckOutcome {
            name: name.to_string(),
            residual,
            tolerance,
            passed: residual.is_finite() && residual <= tolerance,
            detail,
            seconds,
        }
    }

    fn failed(name: &str, tolerance: f64, err: &Error, seconds: f64) -> Self {
        CheckOutcome {
            name: name.to_string(),
            residual: f64::NAN,
            tolerance,
            passed: false,
            detail: format!("error: {err}"),
            seconds,
        }
    }
}

type Check = fn(&ValidateOptions) -> Result<(f64, String)>;

fn canonical_commutator(_: &ValidateOptions) -> Result<(f64, String)> {
    let n = 64;
    let c = annihilation(n).commutator(&creation(n))?;
    let k = n - GUARD_BAND;
    let block = c.leading_block(k);
    let r = (&block - &Array2::<C64>::eye(k)).iter().fold(0.0f64, |m, z| m.max(z.norm()));
    Ok((r, format!("max |[a, a†] - 1| on the leading {k}x{k} block, n = {n}")))
}

fn unitarity(_: &ValidateOptions) -> Result<(f64, String)> {
    let n = 96;
    let d = derived(0.8, 1.0 / 3.0, 1.0)?;
    let prop = Propagator::new(&hamiltonian_np_down(&d, 1.0, n)?.op)?;
    let u = prop.operator(7.3);
    let uu = u.dagger().try_mul(&u)?;
    let r = (uu.matrix() - &Array2::<C64>::eye(n)).iter().fold(0.0f64, |m, z| m.max(z.norm()));
    Ok((r, format!("max |U†U - 1|, g = 0.8, gamma = 1/3, omega t = 7.3, n = {n}")))
}

fn hermiticity(_: &ValidateOptions) -> Result<(f64, String)> {
    let n = 48;
    let p = from_g_gamma(0.7, 0.3, 1.0, 20.0)?;
    let d = derive(&p)?;
    let r = [
        hamiltonian_full(&p, n)?.hermiticity_residual(),
        hamiltonian_np_down(&d, 1.0, n)?.op.hermiticity_residual(),
        hamiltonian_np_up(&d, 1.0, n)?.op.hermiticity_residual(),
        hamiltonian_np_finite(&p, n)?.op.hermiticity_residual(),
    ]
    .into_iter()
    .fold(0.0f64, f64::max);
    Ok((r, "max |H - H†| over full, lower, upper and finite-frequency Hamiltonians".into()))
}

fn generator_eigen_relation(o: &ValidateOptions) -> Result<(f64, String)> {
    let d = derived(0.5, 1.0 / 3.0, 1.0)?;
    let mut gs = build_generators(&d, 1.0, 48)?;
    if o.mutation == Some(Mutation::FlipB) {
        gs.b_op = gs.b_op.scale(-1.0);
    }
    Ok((gs.eigen_relation_residual()?, "|[H_alpha, Gamma] - sqrt(Delta) Gamma| / |Gamma|, g = 0.5, gamma = 1/3".into()))
}

fn generator_vs_finite_difference(o: &ValidateOptions) -> Result<(f64, String)> {
    let (g, gamma, t, n) = (0.5, 0.0, 5.0, 96);
    let d = derived(g, gamma, 1.0)?;
    let mut gs = build_generators(&d, 1.0, n)?;
    if o.mutation == Some(Mutation::FlipB) {
        gs.b_op = gs.b_op.scale(-1.0);
    }
    let psi = FieldState::PlusI01.ket(n)?;
    let exact = qfi_exact_generator(&gs, t, &psi)?.value;
    let fd = qfi_finite_difference(
        |a| hamiltonian_for_alpha(a, gamma, 1.0, n),
        gs.alpha,
        t,
        &psi,
        relative_step(gs.alpha, 1e-5),
    )?
    .value;
    Ok(((exact - fd).abs() / fd, format!("4Var[h] = {exact}, finite difference = {fd}; g = 0.5, gamma = 0, omega t = 5")))
}

fn squeezed_eigenstates(_: &ValidateOptions) -> Result<(f64, String)> {
    let n = 128;
    let d = derived(0.7, 0.3, 1.0)?;
    let (r_down, _) = squeeze_parameters_g(&d)?;
    let h = hamiltonian_np_down(&d, 1.0, n)?.op;
    let s = squeeze(r_down, n)?;
    let mut worst = 0.0f64;
    for m in 0..4 {
        let v = Ket::fock(n, m)?.apply(&s)?;
        let hv = h.matrix().dot(&v);
        let e: C64 = v.iter().zip(&hv).map(|(a, b)| a.conj() * b).sum();
        let r = hv.iter().zip(&v).map(|(a, b)| (a - e * b).norm_sqr()).sum::<f64>().sqrt();
        worst = worst.max(r);
    }
    Ok((worst, "max ||H S(r)|m> - E S(r)|m>|| for m <= 3, g = 0.7, gamma = 0.3".into()))
}

fn finite_form_cross_check(_: &ValidateOptions) -> Result<(f64, String)> {
    // construction verifies the ladder form against the quadrature form
    for (g, gamma, eta) in [(0.5, 0.2, 20.0), (0.9, -0.4, 50.0)] {
        hamiltonian_np_finite(&from_g_gamma(g, gamma, 1.0, eta)?, 64)?;
    }
    Ok((0.0, "ladder and quadrature forms of the finite-frequency Hamiltonian agree on the interior block".into()))
}

fn variance_reconciliation(_: &ValidateOptions) -> Result<(f64, String)> {
    let tr = Truncation::new(16, 512, 1e-10)?;
    let r = reconcile_variance_form(0.8, 1.0 / 3.0, 1.0, 1e-6, &tr)?;
    let residual = if r.selected == Some(VarianceForm::ADOPTED) { r.residual_appendix } else { f64::INFINITY };
    Ok((
        residual,
        format!(
            "selected {:?}; residuals main-text {:e}, appendix {:e}; g = 0.8, gamma = 1/3",
            r.selected, r.residual_main_text, r.residual_appendix
        ),
    ))
}

/// |E₁ − E₀ − ε_np| of the full model at g = 0.5 for each η, converged in the cutoff.
pub fn effective_gap_errors(g: f64, gamma: f64, etas: &[f64], tr: &Truncation) -> Result<Vec<(f64, f64, usize)>> {
    etas.iter()
        .map(|&eta| {
            let p = from_g_gamma(g, gamma, 1.0, eta)?;
            let eps = derive(&p)?.eps_np.ok_or(Error::NotNormalPhase { g, gamma, delta_g: f64::NAN })?;
            let c = converge(tr, |n| lowest_gap_full(&p, n))?;
            Ok((eta, (c.value - eps).abs(), c.n_used))
        })
        .collect()
}

fn effective_gap(_: &ValidateOptions) -> Result<(f64, String)> {
    let tr = Truncation::new(16, 256, 1e-10)?;
    let mut detail = Vec::new();
    let mut violations = 0usize;
    for gamma in [0.0, 1.0 / 3.0] {
        let e = effective_gap_errors(0.5, gamma, &[10.0, 100.0, 1000.0], &tr)?;
        violations += e.windows(2).filter(|w| w[1].1 >= w[0].1).count();
        detail.push(format!("gamma = {gamma}: {:?}", e.iter().map(|x| x.1).collect::<Vec<_>>()));
    }
    Ok((violations as f64, format!("non-decreasing steps in |gap - eps_np| over eta = 10, 100, 1000; {}", detail.join("; "))))
}

fn checks(quick: bool) -> Vec<(&'static str, f64, Check)> {
    let mut v: Vec<(&'static str, f64, Check)> = vec![
        ("canonical commutator", 1e-12, canonical_commutator),
        ("unitarity", 1e-10, unitarity),
        ("hermiticity", 1e-12, hermiticity),
        ("generator eigen-relation", 1e-8, generator_eigen_relation),
        ("generator vs finite-difference QFI", 1e-6, generator_vs_finite_difference),
        ("squeezed eigenstates", 1e-6, squeezed_eigenstates),
        ("finite-frequency form cross-check", 0.0, finite_form_cross_check),
    ];
    if !quick {
        v.push(("variance-form reconciliation", 1e-6, variance_reconciliation));
        v.push(("full vs effective gap", 0.0, effective_gap));
    }
    v
}

/// Runs the suite; errors inside a check become failed outcomes.
pub fn run_validation(o: &ValidateOptions) -> Vec<CheckOutcome> {
    checks(o.quick)
        .into_iter()
        .map(|(name, tol, f)| {
            let start = Instant::now();
            let r = f(o);
            let secs = start.elapsed().as_secs_f64();
            match r {
                Ok((residual, detail)) => CheckOutcome::new(name, residual, tol, detail, secs),
                Err(e) => CheckOutcome::failed(name, tol, &e, secs),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_suite_passes() {
        let out = run_validation(&ValidateOptions { quick: true, mutation: None });
        for c in &out {
            assert!(c.passed, "{c:?}");
        }
    }

    #[test]
    fn flipped_b_is_caught() {
        let out = run_validation(&ValidateOptions { quick: true, mutation: Some(Mutation::FlipB) });
        let eq = out.iter().find(|c| c.name == "generator eigen-relation").unwrap();
        assert!(!eq.passed);
    }

    #[test]
    fn full_suite_passes() {
        let out = run_validation(&ValidateOptions::default());
        for c in &out {
            assert!(c.passed, "{c:?}");
        }
    }
}
