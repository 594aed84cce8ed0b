use std::ops::{Add, Mul, Neg, Sub};

use ndarray::{s, Array2};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Spectrum};

/// Rows/columns at the top of the field ladder excluded from identity checks.
pub const GUARD_BAND: usize = 4;

/// Default population allowed beyond the guard band for squeezed/displaced states.
pub const LEAK_TOL: f64 = 1e-10;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Hilbert space an operator or state lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisTag {
    /// Truncated Fock space of the field, dimension N.
    FieldOnly,
    /// Qubit ⊗ field, dimension 2N, index = q·N + m with q = 0 for |↑⟩.
    QubitField,
}

impl BasisTag {
    pub fn name(self) -> &'static str {
        match self {
            BasisTag::FieldOnly => "field_only",
            BasisTag::QubitField => "qubit_field",
        }
    }

    pub fn dim(self, cutoff: usize) -> usize {
        match self {
            BasisTag::FieldOnly => cutoff,
            BasisTag::QubitField => 2 * cutoff,
        }
    }
}

/// Dense complex matrix over a truncated basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    basis: BasisTag,
    cutoff: usize,
    m: Array2<C64>,
}

impl Operator {
    pub fn new(basis: BasisTag, cutoff: usize, m: Array2<C64>) -> Result<Self> {
        let dim = basis.dim(cutoff);
        if m.nrows() != dim || m.ncols() != dim {
            return Err(Error::DimensionMismatch { left: dim, right: m.nrows().max(m.ncols()) });
        }
        Ok(Operator { basis, cutoff, m })
    }

    pub(crate) fn field(m: Array2<C64>) -> Self {
        let n = m.nrows();
        Operator { basis: BasisTag::FieldOnly, cutoff: n, m }
    }

    fn field_real<F: Fn(usize, usize) -> f64>(n: usize, f: F) -> Self {
        Operator::field(Array2::from_shape_fn((n, n), |(i, j)| C64::new(f(i, j), 0.0)))
    }

    pub fn zeros(basis: BasisTag, cutoff: usize) -> Self {
        let d = basis.dim(cutoff);
        Operator { basis, cutoff, m: Array2::zeros((d, d)) }
    }

    pub fn identity(basis: BasisTag, cutoff: usize) -> Self {
        let d = basis.dim(cutoff);
        Operator { basis, cutoff, m: Array2::eye(d) }
    }

    pub fn basis(&self) -> BasisTag {
        self.basis
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.m
    }

    pub fn into_matrix(self) -> Array2<C64> {
        self.m
    }

    pub(crate) fn check_compatible(&self, other: &Operator) -> Result<()> {
        if self.basis != other.basis {
            return Err(Error::BasisMismatch { left: self.basis.name(), right: other.basis.name() });
        }
        if self.cutoff != other.cutoff {
            return Err(Error::DimensionMismatch { left: self.cutoff, right: other.cutoff });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Operator) -> Result<Operator> {
        self.check_compatible(other)?;
        Ok(Operator { m: &self.m + &other.m, ..*self })
    }

    pub fn try_sub(&self, other: &Operator) -> Result<Operator> {
        self.check_compatible(other)?;
        Ok(Operator { m: &self.m - &other.m, ..*self })
    }

    /// Matrix product self·other.
    pub fn try_mul(&self, other: &Operator) -> Result<Operator> {
        self.check_compatible(other)?;
        Ok(Operator { m: product(&self.m, &other.m), ..*self })
    }

    /// [self, other].
    pub fn commutator(&self, other: &Operator) -> Result<Operator> {
        self.check_compatible(other)?;
        Ok(Operator { m: product(&self.m, &other.m) - product(&other.m, &self.m), ..*self })
    }

    pub fn scale(&self, c: f64) -> Operator {
        Operator { m: &self.m * C64::new(c, 0.0), ..*self }
    }

    pub fn scale_c(&self, c: C64) -> Operator {
        Operator { m: &self.m * c, ..*self }
    }

    /// self + c·I.
    pub fn shift(&self, c: f64) -> Operator {
        let mut m = self.m.clone();
        m.diag_mut().mapv_inplace(|z| z + c);
        Operator { m, ..*self }
    }

    pub fn dagger(&self) -> Operator {
        Operator { m: self.m.t().mapv(|z| z.conj()), ..*self }
    }

    pub fn max_abs(&self) -> f64 {
        linalg::max_abs(&self.m)
    }

    /// max |M − M†| relative to max(1, max |M|).
    pub fn hermiticity_residual(&self) -> f64 {
        linalg::hermiticity_residual(&self.m)
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_residual() <= linalg::HERMITIAN_TOL
    }

    /// Field indices kept by the guard band: m < N − guard.
    fn interior_indices(&self, guard: usize) -> Vec<usize> {
        let keep = self.cutoff.saturating_sub(guard);
        match self.basis {
            BasisTag::FieldOnly => (0..keep).collect(),
            BasisTag::QubitField => (0..keep).chain(self.cutoff..self.cutoff + keep).collect(),
        }
    }

    /// max |self − other| over the interior block (field levels below N − guard).
    pub fn interior_distance(&self, other: &Operator, guard: usize) -> Result<f64> {
        self.check_compatible(other)?;
        let idx = self.interior_indices(guard);
        let mut r: f64 = 0.0;
        for &i in &idx {
            for &j in &idx {
                r = r.max((self.m[[i, j]] - other.m[[i, j]]).norm());
            }
        }
        Ok(r)
    }

    /// Leading k×k block of a field operator.
    pub fn leading_block(&self, k: usize) -> Array2<C64> {
        self.m.slice(s![..k, ..k]).to_owned()
    }

    /// Embeds q ⊗ f for a 2×2 qubit matrix q and a field operator f.
    pub fn qubit_field(q: &Array2<C64>, f: &Operator) -> Result<Operator> {
        if f.basis != BasisTag::FieldOnly {
            return Err(Error::BasisMismatch { left: BasisTag::FieldOnly.name(), right: f.basis.name() });
        }
        if q.dim() != (2, 2) {
            return Err(Error::DimensionMismatch { left: 2, right: q.nrows() });
        }
        let n = f.cutoff;
        let mut m = Array2::<C64>::zeros((2 * n, 2 * n));
        for a in 0..2 {
            for b in 0..2 {
                if q[[a, b]] != ZERO {
                    m.slice_mut(s![a * n..(a + 1) * n, b * n..(b + 1) * n]).assign(&(&f.m * q[[a, b]]));
                }
            }
        }
        Ok(Operator { basis: BasisTag::QubitField, cutoff: n, m })
    }

    /// Spectral decomposition (requires Hermiticity).
    pub fn spectrum(&self) -> Result<Spectrum> {
        Spectrum::new(&self.m)
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        linalg::eigenvalues(&self.m)
    }
}

/// Largest |i − j| over the nonzero entries.
fn bandwidth(m: &Array2<C64>) -> usize {
    m.indexed_iter().filter(|(_, z)| **z != C64::new(0.0, 0.0)).map(|((i, j), _)| i.abs_diff(j)).max().unwrap_or(0)
}

/// Matrix product; ladder-operator polynomials are banded, so narrow
/// operands skip the dense O(n³) product.
fn product(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    let n = a.nrows();
    let (wa, wb) = (bandwidth(a), bandwidth(b));
    if 4 * (wa + wb) >= n {
        return a.dot(b);
    }
    let mut c = Array2::zeros((n, b.ncols()));
    for i in 0..n {
        for k in i.saturating_sub(wa)..(i + wa + 1).min(n) {
            let aik = a[[i, k]];
            if aik == C64::new(0.0, 0.0) {
                continue;
            }
            for j in k.saturating_sub(wb)..(k + wb + 1).min(n) {
                c[[i, j]] += aik * b[[k, j]];
            }
        }
    }
    c
}

macro_rules! binop {
    ($trait:ident, $method:ident, $try:ident) => {
        impl $trait<&Operator> for &Operator {
            type Output = Operator;
            fn $method(self, rhs: &Operator) -> Operator {
                self.$try(rhs).unwrap_or_else(|e| panic!("operator {}: {e}", stringify!($method)))
            }
        }
        impl $trait<Operator> for Operator {
            type Output = Operator;
            fn $method(self, rhs: Operator) -> Operator {
                (&self).$method(&rhs)
            }
        }
    };
}

binop!(Add, add, try_add);
binop!(Sub, sub, try_sub);
binop!(Mul, mul, try_mul);

impl Mul<&Operator> for f64 {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        rhs.scale(self)
    }
}

impl Mul<Operator> for f64 {
    type Output = Operator;
    fn mul(self, rhs: Operator) -> Operator {
        rhs.scale(self)
    }
}

impl Neg for Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        self.scale(-1.0)
    }
}

fn check_cutoff(n: usize, min: usize) {
    assert!(n >= min, "Fock cutoff {n} below minimum {min}");
}

/// a with ⟨m−1|a|m⟩ = √m.
pub fn annihilation(n: usize) -> Operator {
    check_cutoff(n, 2);
    Operator::field_real(n, |i, j| if j == i + 1 { (j as f64).sqrt() } else { 0.0 })
}

pub fn creation(n: usize) -> Operator {
    check_cutoff(n, 2);
    Operator::field_real(n, |i, j| if i == j + 1 { (i as f64).sqrt() } else { 0.0 })
}

/// a†a.
pub fn number(n: usize) -> Operator {
    check_cutoff(n, 2);
    Operator::field_real(n, |i, j| if i == j { i as f64 } else { 0.0 })
}

/// X = (a + a†)/√2.
pub fn quad_x(n: usize) -> Operator {
    (&annihilation(n) + &creation(n)).scale(std::f64::consts::FRAC_1_SQRT_2)
}

/// P = i(a† − a)/√2.
pub fn quad_p(n: usize) -> Operator {
    (&creation(n) - &annihilation(n)).scale_c(C64::new(0.0, std::f64::consts::FRAC_1_SQRT_2))
}

// ⟨m+2|a†²|m⟩ = √((m+1)(m+2)).
fn two_photon(i: usize, j: usize) -> f64 {
    if i == j + 2 {
        ((j + 1) as f64 * (j + 2) as f64).sqrt()
    } else if j == i + 2 {
        ((i + 1) as f64 * (i + 2) as f64).sqrt()
    } else {
        0.0
    }
}

/// X² = (a² + a†² + 2a†a + 1)/2, projected exactly (no boundary defect).
pub fn quad_x2(n: usize) -> Operator {
    check_cutoff(n, 2);
    Operator::field_real(n, |i, j| 0.5 * two_photon(i, j) + if i == j { i as f64 + 0.5 } else { 0.0 })
}

/// P² = (2a†a + 1 − a² − a†²)/2, projected exactly.
pub fn quad_p2(n: usize) -> Operator {
    check_cutoff(n, 2);
    Operator::field_real(n, |i, j| -0.5 * two_photon(i, j) + if i == j { i as f64 + 0.5 } else { 0.0 })
}

/// XP + PX = i(a†² − a²), projected exactly.
pub fn quad_xp_sym(n: usize) -> Operator {
    check_cutoff(n, 2);
    let m = Array2::from_shape_fn((n, n), |(i, j)| {
        let v = two_photon(i, j);
        if i > j {
            C64::new(0.0, v)
        } else {
            C64::new(0.0, -v)
        }
    });
    Operator::field(m)
}

pub fn qubit_sigma_z() -> Array2<C64> {
    ndarray::arr2(&[[ONE, ZERO], [ZERO, -ONE]])
}

/// σ₊ = |↑⟩⟨↓|.
pub fn qubit_sigma_plus() -> Array2<C64> {
    ndarray::arr2(&[[ZERO, ONE], [ZERO, ZERO]])
}

pub fn qubit_sigma_minus() -> Array2<C64> {
    ndarray::arr2(&[[ZERO, ZERO], [ONE, ZERO]])
}

pub fn qubit_sigma_x() -> Array2<C64> {
    ndarray::arr2(&[[ZERO, ONE], [ONE, ZERO]])
}

/// exp(K) for anti-Hermitian K via the Hermitian iK.
fn exp_anti_hermitian(k: &Operator) -> Result<Operator> {
    let h = k.scale_c(C64::new(0.0, 1.0));
    let spec = h.spectrum()?;
    Ok(Operator::field(spec.matrix(|e| C64::from_polar(1.0, -e))))
}

/// Exact squeezed-vacuum population at levels ≥ from.
fn squeezed_vacuum_tail(r: f64, from: usize) -> f64 {
    let t2 = r.tanh().powi(2);
    let mut p = 1.0 / r.cosh();
    let mut k = 0usize;
    let mut tail = 0.0;
    loop {
        if 2 * k >= from {
            tail += p;
            if p < 1e-18 * tail.max(1e-300) || p == 0.0 {
                return tail;
            }
        }
        p *= t2 * (2 * k + 1) as f64 / (2 * k + 2) as f64;
        k += 1;
        if k > 1_000_000 {
            return tail;
        }
    }
}

/// S(r) = exp[(r/2)(a†² − a²)] with the default leak tolerance.
pub fn squeeze(r: f64, n: usize) -> Result<Operator> {
    squeeze_with_tol(r, n, LEAK_TOL)
}

pub fn squeeze_with_tol(r: f64, n: usize, tol: f64) -> Result<Operator> {
    if !(r.is_finite() && r.abs() <= 3.0) {
        return Err(Error::Domain { param: "r", value: r, reason: "|r| <= 3 required" });
    }
    check_cutoff(n, GUARD_BAND + 2);
    let leak = squeezed_vacuum_tail(r, n - GUARD_BAND);
    if leak > tol {
        return Err(Error::TruncationInsufficient { n, leak, tol });
    }
    if r == 0.0 {
        return Ok(Operator::identity(BasisTag::FieldOnly, n));
    }
    let k = Operator::field_real(n, |i, j| {
        let v = 0.5 * r * two_photon(i, j);
        if i > j {
            v
        } else {
            -v
        }
    });
    exp_anti_hermitian(&k)
}

/// D(α) = exp(αa† − α*a); guarded by the Poisson tail of the coherent state.
pub fn displacement(alpha: C64, n: usize, tol: f64) -> Result<Operator> {
    check_cutoff(n, GUARD_BAND + 2);
    let nbar = alpha.norm_sqr();
    let mut p = (-nbar).exp();
    let mut leak = 0.0;
    for m in 0..(n + 400) {
        if m >= n - GUARD_BAND {
            leak += p;
        }
        p *= nbar / (m + 1) as f64;
    }
    if leak > tol {
        return Err(Error::TruncationInsufficient { n, leak, tol });
    }
    let k = &creation(n).scale_c(alpha) - &annihilation(n).scale_c(alpha.conj());
    exp_anti_hermitian(&k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
        a.iter().zip(b.iter()).fold(0.0, |r, (x, y)| r.max((x - y).norm()))
    }

    #[test]
    fn canonical_commutators_on_interior() {
        for n in [4, 9, 32] {
            let id = Operator::identity(BasisTag::FieldOnly, n);
            let c = annihilation(n).commutator(&creation(n)).unwrap();
            assert!(close(&c.leading_block(n - 1), &id.leading_block(n - 1)) < 1e-12);
            let xp = quad_x(n).commutator(&quad_p(n)).unwrap();
            let i_id = id.scale_c(C64::new(0.0, 1.0));
            assert!(close(&xp.leading_block(n - 1), &i_id.leading_block(n - 1)) < 1e-12);
        }
    }

    #[test]
    fn projected_quadratics_match_products_on_interior() {
        let n = 20;
        let (x, p) = (quad_x(n), quad_p(n));
        assert!((&x * &x).interior_distance(&quad_x2(n), 1).unwrap() < 1e-13);
        assert!((&p * &p).interior_distance(&quad_p2(n), 1).unwrap() < 1e-13);
        let sym = &(&x * &p) + &(&p * &x);
        assert!(sym.interior_distance(&quad_xp_sym(n), 1).unwrap() < 1e-13);
        for op in [quad_x(n), quad_p(n), quad_x2(n), quad_p2(n), quad_xp_sym(n)] {
            assert!(op.is_hermitian());
        }
    }

    #[test]
    fn vacuum_number_is_zero() {
        assert_eq!(number(8).matrix()[[0, 0]], ZERO);
    }

    #[test]
    fn basis_mismatch_is_error() {
        let f = number(4);
        let q = Operator::qubit_field(&qubit_sigma_z(), &f).unwrap();
        assert!(matches!(f.try_add(&q), Err(Error::BasisMismatch { .. })));
        assert!(matches!(f.try_mul(&number(5)), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn squeeze_identity_and_inverse() {
        let n = 64;
        let s0 = squeeze(0.0, n).unwrap();
        assert_eq!(s0, Operator::identity(BasisTag::FieldOnly, n));
        let (s, si) = (squeeze(0.5, n).unwrap(), squeeze(-0.5, n).unwrap());
        let id = Operator::identity(BasisTag::FieldOnly, n);
        assert!((&s * &si).interior_distance(&id, GUARD_BAND).unwrap() < 1e-9);
        assert!((&s.dagger() * &s).interior_distance(&id, GUARD_BAND).unwrap() < 1e-9);
    }

    #[test]
    fn squeezed_vacuum_photon_number() {
        let n = 64;
        let s = squeeze(0.5, n).unwrap();
        let col = s.matrix().column(0).to_owned();
        let nbar: f64 = col.iter().enumerate().map(|(m, c)| m as f64 * c.norm_sqr()).sum();
        assert!((nbar - 0.5f64.sinh().powi(2)).abs() < 1e-10);
        assert!((nbar - 0.27154031).abs() < 1e-7);
    }

    #[test]
    fn squeeze_guard_band() {
        assert!(matches!(squeeze(2.0, 16), Err(Error::TruncationInsufficient { .. })));
        assert!(squeeze(3.5, 512).is_err());
    }

    #[test]
    fn displacement_builds_coherent_state() {
        let n = 40;
        let d = displacement(C64::new(1.0, 0.0), n, LEAK_TOL).unwrap();
        let col = d.matrix().column(0).to_owned();
        let mean_a: C64 = (1..n).map(|m| col[m - 1].conj() * col[m] * (m as f64).sqrt()).sum();
        assert!((mean_a - ONE).norm() < 1e-10);
        assert!(displacement(C64::new(4.0, 0.0), 10, LEAK_TOL).is_err());
    }

    #[test]
    fn banded_product_matches_dense() {
        let n = 40;
        let (x2, p2) = (quad_x2(n), quad_p2(n));
        let a = &(&x2 * &p2) * &x2;
        let dense = x2.matrix().dot(p2.matrix()).dot(x2.matrix());
        assert_eq!(bandwidth(a.matrix()), 6);
        let scale = dense.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        assert!((a.matrix() - &dense).iter().all(|z| z.norm() < 1e-13 * scale));
        let full = Array2::from_shape_fn((n, n), |(i, j)| C64::new((i * j) as f64 % 7.0, 0.0));
        let prod = product(&full, x2.matrix());
        assert!((prod - full.dot(x2.matrix())).iter().all(|z| z.norm() < 1e-12));
    }
}
