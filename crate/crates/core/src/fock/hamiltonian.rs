use num_complex::Complex64 as C64;

use super::operator::{
    annihilation, creation, number, qubit_sigma_minus, qubit_sigma_plus, qubit_sigma_z, quad_p2, quad_x2,
    BasisTag, Operator, GUARD_BAND,
};
use crate::error::{Error, Result};
use crate::model::{derive, DerivedParams, ModelParams};

/// Projected field Hamiltonian with its constant terms kept apart.
///
/// The full operator is `op + lamb_shift + qubit_offset`.  `lamb_shift` is
/// the second-order coupling constant (−λ₂²/Ω on the lower branch, +λ₁²/Ω on
/// the upper one) and `qubit_offset` the bare ∓Ω/2.
#[derive(Debug, Clone)]
pub struct EffectiveHamiltonian {
    pub op: Operator,
    pub lamb_shift: f64,
    pub qubit_offset: f64,
}

impl EffectiveHamiltonian {
    /// Operator including every constant.
    pub fn full(&self) -> Operator {
        self.op.shift(self.lamb_shift + self.qubit_offset)
    }

    /// Operator with the coupling constant but without ∓Ω/2; the phase
    /// convention used for Loschmidt amplitudes.
    pub fn without_qubit_offset(&self) -> Operator {
        self.op.shift(self.lamb_shift)
    }

    pub fn constant(&self) -> f64 {
        self.lamb_shift + self.qubit_offset
    }
}

/// ω a†a + (Ω/2)σ_z + λ₁(aσ₊ + a†σ₋) + λ₂(aσ₋ + a†σ₊) on qubit ⊗ field.
pub fn hamiltonian_full(p: &ModelParams, n: usize) -> Result<Operator> {
    p.validate()?;
    let (a, ad) = (annihilation(n), creation(n));
    let id2 = ndarray::Array2::<C64>::eye(2);
    let field = Operator::qubit_field(&id2, &number(n).scale(p.omega))?;
    let qubit = Operator::qubit_field(&qubit_sigma_z(), &Operator::identity(BasisTag::FieldOnly, n))?
        .scale(p.big_omega / 2.0);
    let sp_part = &a.scale(p.lambda1) + &ad.scale(p.lambda2);
    let sm_part = &ad.scale(p.lambda1) + &a.scale(p.lambda2);
    let coupling = &Operator::qubit_field(&qubit_sigma_plus(), &sp_part)?
        + &Operator::qubit_field(&qubit_sigma_minus(), &sm_part)?;
    Ok(&(&field + &qubit) + &coupling)
}

/// E₁ − E₀ of the full model at field cutoff n.
pub fn lowest_gap_full(p: &ModelParams, n: usize) -> Result<f64> {
    let e = hamiltonian_full(p, n)?.eigenvalues()?;
    if e.len() < 2 {
        return Err(Error::Domain { param: "n", value: n as f64, reason: "need at least two levels" });
    }
    Ok(e[1] - e[0])
}

fn check_field_cutoff(n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(Error::Domain { param: "n", value: n as f64, reason: "Fock cutoff too small" });
    }
    Ok(())
}

fn two_photon_sum(n: usize) -> Operator {
    // a² + a†² = X² − P²
    &quad_x2(n) - &quad_p2(n)
}

/// Lower-branch effective Hamiltonian
/// (ω − (λ₁²+λ₂²)/Ω)a†a − (λ₁λ₂/Ω)(a†² + a²) − λ₂²/Ω − Ω/2.
pub fn hamiltonian_np_down(d: &DerivedParams, omega: f64, n: usize) -> Result<EffectiveHamiltonian> {
    check_field_cutoff(n, 4)?;
    let g2 = d.g * d.g;
    let sum_sq = omega * g2 * (1.0 + d.gamma * d.gamma) / 2.0;
    let prod = omega * g2 * (1.0 - d.gamma * d.gamma) / 4.0;
    let op = &number(n).scale(omega - sum_sq) - &two_photon_sum(n).scale(prod);
    Ok(EffectiveHamiltonian {
        op,
        lamb_shift: -omega * g2 * (1.0 - d.gamma).powi(2) / 4.0,
        qubit_offset: -d.eta * omega / 2.0,
    })
}

/// Upper-branch effective Hamiltonian
/// (ω + (λ₁²+λ₂²)/Ω)a†a + (λ₁λ₂/Ω)(a†² + a²) + λ₁²/Ω + Ω/2.
pub fn hamiltonian_np_up(d: &DerivedParams, omega: f64, n: usize) -> Result<EffectiveHamiltonian> {
    check_field_cutoff(n, 4)?;
    let g2 = d.g * d.g;
    let sum_sq = omega * g2 * (1.0 + d.gamma * d.gamma) / 2.0;
    let prod = omega * g2 * (1.0 - d.gamma * d.gamma) / 4.0;
    let op = &number(n).scale(omega + sum_sq) + &two_photon_sum(n).scale(prod);
    Ok(EffectiveHamiltonian {
        op,
        lamb_shift: omega * g2 * (1.0 + d.gamma).powi(2) / 4.0,
        qubit_offset: d.eta * omega / 2.0,
    })
}

/// Absolute tolerance (relative to the largest entry) for the two
/// constructions of the finite-frequency Hamiltonian.
const FINITE_FORM_TOL: f64 = 1e-9;

/// Finite-frequency lower-branch Hamiltonian
/// H_np^↓ + (DC)²/Ω³ − (ω/Ω²)(λ₁²a†a − λ₂²aa†), C = λ₁a + λ₂a†, D = C†.
///
/// Built from ladder operators and cross-checked against the quadrature form
/// H_np^↓ + (g⁴ω/4η)(X² + γ²P² − γ)² − (g²ωγ/2η)(X² + P²), which differs from
/// it by the constant ωλ₂²/Ω² + g²ωγ/2η.
pub fn hamiltonian_np_finite(p: &ModelParams, n: usize) -> Result<EffectiveHamiltonian> {
    check_field_cutoff(n, 8)?;
    let d = derive(p)?;
    let down = hamiltonian_np_down(&d, p.omega, n)?;
    let (a, ad) = (annihilation(n), creation(n));
    let big = p.big_omega;
    let c = &a.scale(p.lambda1) + &ad.scale(p.lambda2);
    let dc = &c.dagger() * &c;
    let quartic = (&dc * &dc).scale(1.0 / big.powi(3));
    let ladder = &(&ad * &a).scale(p.lambda1 * p.lambda1) - &(&a * &ad).scale(p.lambda2 * p.lambda2);
    let op = &(&down.op + &quartic) - &ladder.scale(p.omega / (big * big));

    let quad = finite_quadrature_form(&d, p.omega, n, &down.op);
    let offset = p.omega * p.lambda2 * p.lambda2 / (big * big) + d.g * d.g * p.omega * d.gamma / (2.0 * d.eta);
    let residual = op.interior_distance(&quad.shift(offset), GUARD_BAND)?;
    let scale = op.max_abs().max(1.0);
    if residual > FINITE_FORM_TOL * scale {
        return Err(Error::VerificationFailed {
            check: "finite-frequency operator form vs quadrature form",
            residual: residual / scale,
            tolerance: FINITE_FORM_TOL,
        });
    }
    Ok(EffectiveHamiltonian { op, lamb_shift: down.lamb_shift, qubit_offset: down.qubit_offset })
}

fn finite_quadrature_form(d: &DerivedParams, omega: f64, n: usize, down_op: &Operator) -> Operator {
    let (x2, p2) = (quad_x2(n), quad_p2(n));
    let g2 = d.g * d.g;
    let q = (&x2 + &p2.scale(d.gamma * d.gamma)).shift(-d.gamma);
    let quartic = (&q * &q).scale(g2 * g2 * omega / (4.0 * d.eta));
    let linear = (&x2 + &p2).scale(g2 * omega * d.gamma / (2.0 * d.eta));
    &(down_op + &quartic) - &linear
}

/// Finite-frequency Hamiltonian with every quartic quadrature term dropped:
/// (ω/2)[A X² + B P²] up to constants, A = 1 − g² − g²γ(1+g²)/η,
/// B = 1 − γ²g² − g²γ(1+g²γ²)/η.  Diagnostic model for the small-γ series.
pub fn hamiltonian_np_finite_quadratic(p: &ModelParams, n: usize) -> Result<EffectiveHamiltonian> {
    check_field_cutoff(n, 4)?;
    let d = derive(p)?;
    let g2 = d.g * d.g;
    let ge = g2 * d.gamma / d.eta;
    let ax = 1.0 - g2 - ge * (1.0 + g2);
    let bp = d.mu - ge * (1.0 + g2 * d.gamma * d.gamma);
    let op = (&quad_x2(n).scale(ax) + &quad_p2(n).scale(bp)).scale(p.omega / 2.0);
    let down = hamiltonian_np_down(&d, p.omega, n)?;
    Ok(EffectiveHamiltonian { op, lamb_shift: down.lamb_shift, qubit_offset: down.qubit_offset })
}
