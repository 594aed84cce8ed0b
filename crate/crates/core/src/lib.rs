//! Criticality-enhanced quantum sensing in the anisotropic quantum Rabi model.
//!
//! Analytic quantum Fisher information, homodyne and qubit-probe estimation
//! schemes and finite-frequency corrections, each paired with an exact
//! truncated-Fock-space oracle.

pub mod error;
pub mod finitefreq;
pub mod fock;
pub mod homodyne;
pub mod linalg;
pub mod model;
pub mod numdiff;
pub mod qfi;
pub mod qubitprobe;
pub mod ramsey;
pub mod scan;
pub mod validate;

pub use error::{Error, Result};
pub use fock::{BasisTag, Ket, Operator, Truncation};
pub use model::{derive, from_g_gamma, DerivedParams, ModelParams};
pub use scan::{Cell, ScanRow};

/// Library version, recorded in run metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
