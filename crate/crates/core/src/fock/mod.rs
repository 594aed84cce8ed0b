//! Truncated Fock-space engine: operators, states, Hamiltonians, evolution
//! and truncation control.  This is the brute-force oracle every analytic
//! formula is checked against.

mod hamiltonian;
mod operator;
mod state;
mod truncation;

pub use hamiltonian::{
    hamiltonian_full, hamiltonian_np_down, hamiltonian_np_finite, hamiltonian_np_finite_quadratic,
    hamiltonian_np_up, lowest_gap_full, EffectiveHamiltonian,
};
pub use operator::{
    annihilation, creation, displacement, number, qubit_sigma_minus, qubit_sigma_plus, qubit_sigma_x,
    qubit_sigma_z, quad_p, quad_p2, quad_x, quad_x2, quad_xp_sym, squeeze, squeeze_with_tol, BasisTag,
    Operator, GUARD_BAND, LEAK_TOL,
};
pub use state::{evolution_operator, evolve, expectation, variance, FieldState, Ket, Propagator};
pub use truncation::{converge, converge_many, converge_traces, Converged, Truncation};
pub(crate) use state::{inner as state_inner, variance_of_image as state_variance_of_image};
