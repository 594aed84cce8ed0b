use ndarray::Array1;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::operator::{displacement, BasisTag, Operator, LEAK_TOL};
use crate::error::{Error, Result};
use crate::linalg::Spectrum;

/// Norm drift tolerated after construction or evolution.
pub const NORM_TOL: f64 = 1e-10;

/// Normalized state vector over a truncated basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Ket {
    basis: BasisTag,
    cutoff: usize,
    amps: Array1<C64>,
}

impl Ket {
    /// Normalizes the given amplitudes.
    pub fn new(basis: BasisTag, cutoff: usize, amps: Array1<C64>) -> Result<Self> {
        let dim = basis.dim(cutoff);
        if amps.len() != dim {
            return Err(Error::DimensionMismatch { left: dim, right: amps.len() });
        }
        let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::Numerical(format!("cannot normalize a state of norm {norm}")));
        }
        Ok(Ket { basis, cutoff, amps: amps / C64::new(norm, 0.0) })
    }

    /// Fock state |m⟩ in an n-level field.
    pub fn fock(n: usize, m: usize) -> Result<Self> {
        if m >= n {
            return Err(Error::Domain { param: "m", value: m as f64, reason: "Fock level beyond cutoff" });
        }
        let mut a = Array1::zeros(n);
        a[m] = C64::new(1.0, 0.0);
        Ok(Ket { basis: BasisTag::FieldOnly, cutoff: n, amps: a })
    }

    /// Σ_m c_m|m⟩, normalized.
    pub fn superposition(n: usize, coeffs: &[C64]) -> Result<Self> {
        if coeffs.len() > n {
            return Err(Error::DimensionMismatch { left: n, right: coeffs.len() });
        }
        let mut a = Array1::zeros(n);
        for (m, c) in coeffs.iter().enumerate() {
            a[m] = *c;
        }
        Ket::new(BasisTag::FieldOnly, n, a)
    }

    /// (c↑|↑⟩ ⊗ up) + (c↓|↓⟩ ⊗ down) for field states up, down.
    pub fn qubit_field(c_up: C64, up: &Ket, c_down: C64, down: &Ket) -> Result<Self> {
        up.check_field()?;
        down.check_field()?;
        if up.cutoff != down.cutoff {
            return Err(Error::DimensionMismatch { left: up.cutoff, right: down.cutoff });
        }
        let n = up.cutoff;
        let mut a = Array1::zeros(2 * n);
        for m in 0..n {
            a[m] = c_up * up.amps[m];
            a[n + m] = c_down * down.amps[m];
        }
        Ket::new(BasisTag::QubitField, n, a)
    }

    fn check_field(&self) -> Result<()> {
        if self.basis != BasisTag::FieldOnly {
            return Err(Error::BasisMismatch { left: BasisTag::FieldOnly.name(), right: self.basis.name() });
        }
        Ok(())
    }

    pub fn basis(&self) -> BasisTag {
        self.basis
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &Array1<C64> {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    fn check_compatible_op(&self, op: &Operator) -> Result<()> {
        if self.basis != op.basis() {
            return Err(Error::BasisMismatch { left: op.basis().name(), right: self.basis.name() });
        }
        if self.cutoff != op.cutoff() {
            return Err(Error::DimensionMismatch { left: op.cutoff(), right: self.cutoff });
        }
        Ok(())
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &Ket) -> Result<C64> {
        if self.basis != other.basis {
            return Err(Error::BasisMismatch { left: self.basis.name(), right: other.basis.name() });
        }
        if self.cutoff != other.cutoff {
            return Err(Error::DimensionMismatch { left: self.cutoff, right: other.cutoff });
        }
        Ok(inner(&self.amps, &other.amps))
    }

    /// op|self⟩ as a raw (unnormalized) vector.
    pub fn apply(&self, op: &Operator) -> Result<Array1<C64>> {
        self.check_compatible_op(op)?;
        Ok(op.matrix().dot(&self.amps))
    }

    /// Raw vector wrapped without normalization; for internal use on unitary images.
    pub(crate) fn from_unitary_image(&self, amps: Array1<C64>) -> Result<Ket> {
        let k = Ket { amps, ..*self };
        let drift = (k.norm() - 1.0).abs();
        if drift > NORM_TOL {
            return Err(Error::Numerical(format!("norm drifted by {drift:e} during evolution")));
        }
        Ok(k)
    }
}

pub(crate) fn inner(a: &Array1<C64>, b: &Array1<C64>) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Initial field states buildable at any cutoff; serialized as their tags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum FieldState {
    /// |m⟩.
    Fock(usize),
    /// (|0⟩ + |1⟩)/√2.
    Plus01,
    /// (|0⟩ + i|1⟩)/√2.
    PlusI01,
    /// Coherent state |α⟩ with real α.
    Coherent(f64),
}

impl FieldState {
    pub fn ket(&self, n: usize) -> Result<Ket> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            FieldState::Fock(m) => Ket::fock(n, *m),
            FieldState::Plus01 => Ket::superposition(n, &[C64::new(h, 0.0), C64::new(h, 0.0)]),
            FieldState::PlusI01 => Ket::superposition(n, &[C64::new(h, 0.0), C64::new(0.0, h)]),
            FieldState::Coherent(alpha) => {
                let d = displacement(C64::new(*alpha, 0.0), n, LEAK_TOL)?;
                let col = d.matrix().column(0).to_owned();
                Ket::new(BasisTag::FieldOnly, n, col)
            }
        }
    }

    /// Short identifier used in output tables.
    pub fn tag(&self) -> String {
        match self {
            FieldState::Fock(m) => format!("fock{m}"),
            FieldState::Plus01 => "plus01".into(),
            FieldState::PlusI01 => "plus_i01".into(),
            FieldState::Coherent(a) => format!("coherent{a}"),
        }
    }

    pub fn parse(tag: &str) -> Result<Self> {
        let bad = || Error::Domain { param: "initial_state", value: f64::NAN, reason: "unknown state tag" };
        match tag {
            "vacuum" => Ok(FieldState::Fock(0)),
            "plus01" => Ok(FieldState::Plus01),
            "plus_i01" => Ok(FieldState::PlusI01),
            _ => {
                if let Some(m) = tag.strip_prefix("fock") {
                    m.parse().map(FieldState::Fock).map_err(|_| bad())
                } else if let Some(a) = tag.strip_prefix("coherent") {
                    a.parse().map(FieldState::Coherent).map_err(|_| bad())
                } else {
                    Err(bad())
                }
            }
        }
    }
}

impl TryFrom<String> for FieldState {
    type Error = Error;

    fn try_from(tag: String) -> Result<Self> {
        FieldState::parse(&tag)
    }
}

impl From<FieldState> for String {
    fn from(s: FieldState) -> String {
        s.tag()
    }
}

/// Cached spectral decomposition of a Hamiltonian for repeated evolution.
#[derive(Debug, Clone)]
pub struct Propagator {
    basis: BasisTag,
    cutoff: usize,
    spectrum: Spectrum,
}

impl Propagator {
    pub fn new(h: &Operator) -> Result<Self> {
        Ok(Propagator { basis: h.basis(), cutoff: h.cutoff(), spectrum: h.spectrum()? })
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.spectrum.eigenvalues()
    }

    /// e^{−iHt}|ψ⟩.
    pub fn evolve(&self, t: f64, psi: &Ket) -> Result<Ket> {
        self.check(psi)?;
        psi.from_unitary_image(self.spectrum.apply(psi.amplitudes(), |e| C64::from_polar(1.0, -e * t)))
    }

    /// e^{−iHt} applied to an arbitrary vector (no normalization check).
    pub fn evolve_raw(&self, t: f64, v: &Array1<C64>) -> Array1<C64> {
        self.spectrum.apply(v, |e| C64::from_polar(1.0, -e * t))
    }

    /// Dense U = e^{−iHt}.
    pub fn operator(&self, t: f64) -> Operator {
        let m = self.spectrum.matrix(|e| C64::from_polar(1.0, -e * t));
        Operator::new(self.basis, self.cutoff, m).expect("spectrum dimension matches its operator")
    }

    fn check(&self, psi: &Ket) -> Result<()> {
        if psi.basis() != self.basis {
            return Err(Error::BasisMismatch { left: self.basis.name(), right: psi.basis().name() });
        }
        if psi.cutoff() != self.cutoff {
            return Err(Error::DimensionMismatch { left: self.cutoff, right: psi.cutoff() });
        }
        Ok(())
    }
}

/// e^{−iHt}|ψ⟩ via the eigendecomposition of H.
pub fn evolve(h: &Operator, t: f64, psi: &Ket) -> Result<Ket> {
    Propagator::new(h)?.evolve(t, psi)
}

/// U = e^{−iHt} via the eigendecomposition of H.
pub fn evolution_operator(h: &Operator, t: f64) -> Result<Operator> {
    Ok(Propagator::new(h)?.operator(t))
}

/// ⟨ψ|op|ψ⟩.
pub fn expectation(op: &Operator, psi: &Ket) -> Result<C64> {
    let v = psi.apply(op)?;
    Ok(inner(psi.amplitudes(), &v))
}

/// ‖op ψ‖² − |⟨ψ|op|ψ⟩|², which equals ⟨op²⟩ − ⟨op⟩² for Hermitian op.
pub fn variance(op: &Operator, psi: &Ket) -> Result<f64> {
    let v = psi.apply(op)?;
    Ok(variance_of_image(psi.amplitudes(), &v))
}

pub(crate) fn variance_of_image(psi: &Array1<C64>, v: &Array1<C64>) -> f64 {
    let second: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    second - inner(psi, v).norm_sqr()
}
