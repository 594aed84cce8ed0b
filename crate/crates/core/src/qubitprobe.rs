//! Qubit-measurement scheme: the qubit starts in c↑|↑⟩ + c↓|↓⟩, each branch
//! drives the field with its own effective Hamiltonian, and g is read out
//! from ⟨σ_x⟩ = 2Re[c↑*c↓𝒢(g,t)], 𝒢 = ⟨φ|u↑†u↓|φ⟩.
//!
//! Phase convention: both branch Hamiltonians keep their coupling constants
//! (−λ₂²/Ω on ↓, +λ₁²/Ω on ↑) and drop only the bare ∓Ω/2, which is
//! g-independent and only rotates the readout axis.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use ndarray::Array1;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{
    converge_traces, hamiltonian_np_down, hamiltonian_np_up, quad_p2, squeeze, BasisTag, FieldState, Ket, Operator,
    Propagator, Truncation,
};
use crate::model::{derive, derived, gamma_from_ratio, DerivedParams, ModelParams};
use crate::numdiff::{relative_step, Derivative};
use crate::scan::{par_map, ScanRow};

/// Below this Var[σ_x] the inverted variance is not reported.
pub const VARIANCE_FLOOR: f64 = 1e-12;

/// Relative step of the g-derivatives away from the critical point; it
/// shrinks as Δ_g^{3/2} near it, where the readout phase varies as Δ_g^{-3/2}.
pub const G_STEP: f64 = 1e-5;

/// Qubit amplitudes of the initial product state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitSuperposition {
    pub c_up: C64,
    pub c_down: C64,
}

impl Default for QubitSuperposition {
    fn default() -> Self {
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        QubitSuperposition { c_up: h, c_down: h }
    }
}

impl QubitSuperposition {
    pub fn new(c_up: C64, c_down: C64) -> Result<Self> {
        let norm = c_up.norm_sqr() + c_down.norm_sqr();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::Domain { param: "qubit", value: norm, reason: "|c_up|^2 + |c_down|^2 must be 1" });
        }
        Ok(QubitSuperposition { c_up, c_down })
    }

    /// 2c↑*c↓, the weight of 𝒢 in ⟨σ_x⟩.
    pub fn coherence(&self) -> C64 {
        2.0 * self.c_up.conj() * self.c_down
    }
}

/// Coupling where the fractional part of L equals ½.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorkingPoint {
    pub g_w: f64,
    /// m in L(g_w) = m + ½.
    pub branch: u32,
    /// 4π/(√Δ_g ω).
    pub tau: f64,
}

/// L(g) = √[(1+g²)(1+γ²g²)/((1−g²)(1−γ²g²))], the ratio of the branch
/// excitation energies.
pub fn l_ratio(g: f64, gamma: f64) -> Result<f64> {
    let d = derived(g, gamma, 1.0)?;
    d.require_normal_phase()?;
    let g2 = g * g;
    Ok(((1.0 + g2) * (1.0 + gamma * gamma * g2) / ((1.0 - g2) * d.mu)).sqrt())
}

/// 𝓛 = L − ⌊L⌋.
pub fn l_fraction(g: f64, gamma: f64) -> Result<f64> {
    let l = l_ratio(g, gamma)?;
    Ok(l - l.floor())
}

/// Solves L(g) = m + ½ for every m reachable in [g_lo, g_hi] by bisection
/// (L is strictly increasing in g); at most `count` points, ascending in g.
pub fn find_working_points(gamma: f64, g_lo: f64, g_hi: f64, count: usize, omega: f64) -> Result<Vec<WorkingPoint>> {
    if !(g_lo > 0.0 && g_hi < 1.0 && g_lo < g_hi) {
        return Err(Error::Domain { param: "g_range", value: g_lo, reason: "need 0 < g_lo < g_hi < 1" });
    }
    if !(gamma.abs() <= 1.0) {
        return Err(Error::Domain { param: "gamma", value: gamma, reason: "|gamma| <= 1 required" });
    }
    let (l_lo, l_hi) = (l_ratio(g_lo, gamma)?, l_ratio(g_hi, gamma)?);
    let mut out = Vec::new();
    let mut m = (l_lo - 0.5).ceil().max(1.0) as u32;
    while out.len() < count && m as f64 + 0.5 <= l_hi {
        let target = m as f64 + 0.5;
        let (mut a, mut b) = (g_lo, g_hi);
        while b - a > f64::EPSILON * b {
            let c = 0.5 * (a + b);
            if c <= a || c >= b {
                break;
            }
            if l_ratio(c, gamma)? < target {
                a = c;
            } else {
                b = c;
            }
        }
        let g_w = if (l_ratio(a, gamma)? - target).abs() <= (l_ratio(b, gamma)? - target).abs() { a } else { b };
        if g_w > g_lo || (l_ratio(g_w, gamma)? - target).abs() < 1e-10 {
            let tau = derived(g_w, gamma, 1.0)?.tau_k(omega, 2)?;
            out.push(WorkingPoint { g_w, branch: m, tau });
        }
        m += 1;
    }
    Ok(out)
}

/// (r↓, r↑): S(r↓)|m⟩ and S(r↑)|m⟩ are the eigenstates of the lower and
/// upper branch Hamiltonians, S(r) = exp[(r/2)(a†² − a²)].
pub fn squeeze_parameters(p: &ModelParams) -> Result<(f64, f64)> {
    p.validate()?;
    let wo = p.omega * p.big_omega;
    let prod = 4.0 * p.lambda1 * p.lambda2;
    let diff2 = (p.lambda1 - p.lambda2).powi(2);
    let arg_down = 1.0 - prod / (wo - diff2);
    let arg_up = 1.0 + prod / (wo + diff2);
    if !(wo - diff2 > 0.0 && arg_down > 0.0) {
        return Err(Error::Domain { param: "lambda", value: arg_down, reason: "lower-branch squeezing requires the normal phase" });
    }
    if !(arg_up > 0.0) {
        return Err(Error::Domain { param: "lambda", value: arg_up, reason: "upper-branch squeezing log argument <= 0" });
    }
    Ok((-0.25 * arg_down.ln(), -0.25 * arg_up.ln()))
}

/// Squeezing parameters in terms of (g, γ).
pub fn squeeze_parameters_g(d: &DerivedParams) -> Result<(f64, f64)> {
    d.require_normal_phase()?;
    let g2 = d.g * d.g;
    Ok((0.25 * (d.mu / (1.0 - g2)).ln(), 0.25 * ((1.0 + d.gamma * d.gamma * g2) / (1.0 + g2)).ln()))
}

/// Matrix of squeezed-Fock overlaps ⟨ψ_m^↑|ψ_n^↓⟩ = [S(r↑)†S(r↓)]_{mn}.
pub fn squeezed_overlaps(d: &DerivedParams, n: usize) -> Result<Operator> {
    let (r_down, r_up) = squeeze_parameters_g(d)?;
    squeeze(r_up, n)?.dagger().try_mul(&squeeze(r_down, n)?)
}

/// Weights |c_m^↑|² = |⟨ψ_m^↑|φ⟩|² of φ in the upper-branch eigenbasis.
pub fn eigenspace_weights(d: &DerivedParams, phi: &Ket) -> Result<Vec<f64>> {
    let (_, r_up) = squeeze_parameters_g(d)?;
    let s = squeeze(r_up, phi.cutoff())?.dagger();
    Ok(phi.apply(&s)?.iter().map(|z| z.norm_sqr()).collect())
}

/// Branch propagators at one coupling and cutoff.
#[derive(Debug, Clone)]
pub struct BranchEvolution {
    pub up: Propagator,
    pub down: Propagator,
    /// Mean of the two branch constants; a global phase of the joint state.
    pub common_shift: f64,
}

impl BranchEvolution {
    pub fn new(d: &DerivedParams, omega: f64, n: usize) -> Result<Self> {
        let (hu, hd) = (hamiltonian_np_up(d, omega, n)?, hamiltonian_np_down(d, omega, n)?);
        Ok(BranchEvolution {
            up: Propagator::new(&hu.without_qubit_offset())?,
            down: Propagator::new(&hd.without_qubit_offset())?,
            common_shift: (hu.lamb_shift + hd.lamb_shift) / 2.0,
        })
    }

    /// (u↑φ, u↓φ) at time t.
    pub fn evolve(&self, phi: &Ket, t: f64) -> (Array1<C64>, Array1<C64>) {
        (self.up.evolve_raw(t, phi.amplitudes()), self.down.evolve_raw(t, phi.amplitudes()))
    }
}

fn inner(a: &Array1<C64>, b: &Array1<C64>) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn check_field(phi: &Ket) -> Result<()> {
    if phi.basis() != BasisTag::FieldOnly {
        return Err(Error::BasisMismatch { left: BasisTag::FieldOnly.name(), right: phi.basis().name() });
    }
    Ok(())
}

/// 𝒢(g,t) = ⟨φ|e^{iH↑t}e^{−iH↓t}|φ⟩ at the cutoff of φ.
pub fn loschmidt_amplitude(p: &ModelParams, phi: &Ket, t: f64) -> Result<C64> {
    check_field(phi)?;
    let d = derive(p)?;
    let (up, down) = BranchEvolution::new(&d, p.omega, phi.cutoff())?.evolve(phi, t);
    Ok(inner(&up, &down))
}

/// ⟨σ_x⟩ and Var[σ_x] after time t.  σ_x² = 1 makes Var = 1 − ⟨σ_x⟩² exact
/// for any qubit superposition.
pub fn sigma_x_statistics(q: &QubitSuperposition, p: &ModelParams, phi: &Ket, t: f64) -> Result<(f64, f64)> {
    let mean = (q.coherence() * loschmidt_amplitude(p, phi, t)?).re;
    Ok((mean, 1.0 - mean * mean))
}

/// Closed-form near-critical approximation 64π²g²ξ²μ²Δ_g⁻³υ².
pub fn inverted_variance_appendix_c(d: &DerivedParams, upsilon: f64) -> Result<f64> {
    d.require_normal_phase()?;
    Ok(64.0 * PI * PI * (d.g * d.xi * d.mu * upsilon).powi(2) / d.delta_g.powi(3))
}

/// Everything the qubit scheme reports at one working point.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbePoint {
    pub loschmidt: C64,
    pub mean_sigma_x: f64,
    pub var_sigma_x: f64,
    /// ∂_g⟨σ_x⟩ at fixed evolution time.
    pub d_mean: f64,
    /// (∂_g⟨σ_x⟩)²/Var[σ_x]; `None` below [`VARIANCE_FLOOR`].
    pub inv_var_fd: Option<f64>,
    pub inv_var_appendix_c: f64,
    /// Im⟨φ|u↑†u↓P²|φ⟩.
    pub upsilon: f64,
    /// QFI for g of the joint qubit–field state.
    pub qfi: f64,
    pub richardson: bool,
    pub n_used: usize,
    pub warnings: Vec<String>,
}

fn joint(q: &QubitSuperposition, up: &Array1<C64>, down: &Array1<C64>) -> Array1<C64> {
    let n = up.len();
    let mut v = Array1::zeros(2 * n);
    for m in 0..n {
        v[m] = q.c_up * up[m];
        v[n + m] = q.c_down * down[m];
    }
    v
}

fn pure_state_qfi(psi: &Array1<C64>, dpsi: &Array1<C64>) -> f64 {
    let ov = inner(psi, dpsi);
    4.0 * (dpsi.iter().map(|z| z.norm_sqr()).sum::<f64>() - ov.norm_sqr())
}

/// Readout quantities at coupling g, evolution time t, with the g-derivatives
/// of ⟨σ_x⟩ and of the joint state taken at fixed t.  The cutoff is
/// converged on 𝒢 and υ; the derivatives use the accepted cutoff.
pub fn probe_point(
    q: &QubitSuperposition,
    g: f64,
    gamma: f64,
    omega: f64,
    state: &FieldState,
    t: f64,
    tr: &Truncation,
) -> Result<ProbePoint> {
    let d = derived(g, gamma, 1.0)?;
    d.require_normal_phase()?;
    // the amplitude is judged by its modulus, so a vanishing real part does not stall the ladder
    let conv = converge_traces(tr, |n| {
        let phi = state.ket(n)?;
        let (up, down) = BranchEvolution::new(&d, omega, n)?.evolve(&phi, t);
        let p2_down = quad_p2(n).matrix().dot(&down);
        let g_amp = inner(&up, &down);
        Ok(vec![vec![g_amp.re, g_amp.im], vec![inner(&up, &p2_down).im]])
    })?;
    let n = conv.n_used;
    let loschmidt = C64::new(conv.value[0][0], conv.value[0][1]);
    let upsilon = conv.value[1][0];
    let phi = state.ket(n)?;
    let mean = (q.coherence() * loschmidt).re;
    let var = 1.0 - mean * mean;

    let h = relative_step(g, G_STEP * d.delta_g.powf(1.5).min(1.0));
    // the common branch constant is odd in γ and only a global phase; removing
    // it keeps the QFI from cancelling a large phase derivative
    let at = |gg: f64| -> Result<Array1<C64>> {
        let be = BranchEvolution::new(&derived(gg, gamma, 1.0)?, omega, n)?;
        let (up, down) = be.evolve(&phi, t);
        Ok(joint(q, &up, &down) * C64::from_polar(1.0, be.common_shift * t))
    };
    let psi = at(g)?;
    let (p1, m1, p2, m2) = (at(g + h)?, at(g - h)?, at(g + h / 2.0)?, at(g - h / 2.0)?);
    let sx_mean = |v: &Array1<C64>| -> f64 {
        let half = v.len() / 2;
        2.0 * v.iter().take(half).zip(v.iter().skip(half)).map(|(u, w)| (u.conj() * w).re).sum::<f64>()
    };
    let d_mean = Derivative::combine((sx_mean(&p1) - sx_mean(&m1)) / (2.0 * h), (sx_mean(&p2) - sx_mean(&m2)) / h)?;
    let dpsi_c = (&p1 - &m1) / C64::new(2.0 * h, 0.0);
    let dpsi_f = (&p2 - &m2) / C64::new(h, 0.0);
    let qfi = Derivative::combine(pure_state_qfi(&psi, &dpsi_c), pure_state_qfi(&psi, &dpsi_f))?;

    let mut warnings = Vec::new();
    let inv_var_fd = if var < VARIANCE_FLOOR {
        warnings.push(format!("g={g}: Var[sigma_x] = {var:e} below floor, inverted variance not reported"));
        None
    } else {
        Some(d_mean.value.powi(2) / var)
    };
    if d.xi == 0.0 {
        warnings.push(format!("g={g}: |gamma| = 1, closed-form approximation vanishes identically"));
    }
    Ok(ProbePoint {
        loschmidt,
        mean_sigma_x: mean,
        var_sigma_x: var,
        d_mean: d_mean.value,
        inv_var_fd,
        inv_var_appendix_c: inverted_variance_appendix_c(&d, upsilon)?,
        upsilon,
        qfi: qfi.value.max(0.0),
        richardson: d_mean.richardson || qfi.richardson,
        n_used: n,
        warnings,
    })
}

/// [`probe_point`] at a working point's evolution time.
pub fn inverted_variance_sigma(
    q: &QubitSuperposition,
    gamma: f64,
    omega: f64,
    state: &FieldState,
    wp: &WorkingPoint,
    tr: &Truncation,
) -> Result<ProbePoint> {
    probe_point(q, wp.g_w, gamma, omega, state, wp.tau, tr)
}

/// Working-point scan of the qubit scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig2Config {
    pub ratio_l1_l2: Vec<f64>,
    pub g_min: f64,
    pub g_max: f64,
    /// Maximum number of working points per ratio.
    pub max_points: usize,
    pub omega: f64,
    pub initial_states: Vec<FieldState>,
    pub qubit: QubitSuperposition,
    /// |⟨σ_x⟩| above this at a working point is reported as a warning.
    pub mean_tol: f64,
}

impl Default for Fig2Config {
    fn default() -> Self {
        Fig2Config {
            ratio_l1_l2: vec![1.0, 2.0, 4.0],
            g_min: 0.3,
            g_max: 0.99,
            max_points: 64,
            omega: 1.0,
            initial_states: vec![FieldState::Fock(0)],
            qubit: QubitSuperposition::default(),
            mean_tol: 0.05,
        }
    }
}

/// One row per (ratio, initial state, working point).
pub fn scan_fig2(cfg: &Fig2Config, tr: &Truncation, workers: usize) -> Result<Vec<ScanRow>> {
    QubitSuperposition::new(cfg.qubit.c_up, cfg.qubit.c_down)?;
    let mut cells = Vec::new();
    for &ratio in &cfg.ratio_l1_l2 {
        let gamma = gamma_from_ratio(ratio)?;
        let wps = find_working_points(gamma, cfg.g_min, cfg.g_max, cfg.max_points, cfg.omega)?;
        for state in &cfg.initial_states {
            for wp in &wps {
                cells.push((ratio, gamma, state.clone(), *wp));
            }
        }
    }
    par_map(&cells, workers, |(ratio, gamma, state, wp)| {
        let d = derived(wp.g_w, *gamma, 1.0)?;
        let row = ScanRow::new()
            .input("ratio_l1_l2", *ratio)
            .input("branch", wp.branch as usize)
            .input("g_w", wp.g_w)
            .input("delta_g", d.delta_g)
            .input("tau_omega", wp.tau * cfg.omega);
        match inverted_variance_sigma(&cfg.qubit, *gamma, cfg.omega, state, wp, tr) {
            Ok(p) => {
                let mut row = row
                    .number("mean_sigma_x", Some(p.mean_sigma_x))
                    .number("inv_var_fd", p.inv_var_fd)
                    .number("inv_var_appendix_c", Some(p.inv_var_appendix_c))
                    .number("upsilon", Some(p.upsilon))
                    .output("initial_state_tag", state.tag())
                    .number("qfi", Some(p.qfi))
                    .with_convergence(p.n_used, true);
                if p.mean_sigma_x.abs() >= cfg.mean_tol {
                    row = row.warn(format!("g_w={}: |<sigma_x>| = {} exceeds {}", wp.g_w, p.mean_sigma_x.abs(), cfg.mean_tol));
                }
                for w in p.warnings {
                    row = row.warn(w);
                }
                Ok(row)
            }
            Err(Error::NonConvergence { n_max, previous, last }) => Ok(row
                .number("mean_sigma_x", None)
                .number("inv_var_fd", None)
                .number("inv_var_appendix_c", None)
                .number("upsilon", None)
                .output("initial_state_tag", state.tag())
                .number("qfi", None)
                .warn(format!("g_w={}: no convergence up to n={n_max} ({previous} vs {last})", wp.g_w))
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
    use crate::fock::squeeze;
    use crate::model::from_g_gamma;

    fn tr(n_max: usize) -> Truncation {
        Truncation::new(16, n_max, 1e-9).unwrap()
    }

    #[test]
    fn isotropic_and_symmetric_working_points() {
        let wp = find_working_points(0.0, 0.3, 0.99, 1, 1.0).unwrap();
        assert!((wp[0].g_w - (1.25f64 / 3.25).sqrt()).abs() < 1e-12);
        assert_eq!(wp[0].branch, 1);
        let wp = find_working_points(1.0, 0.3, 0.99, 1, 1.0).unwrap();
        assert!((wp[0].g_w - 0.2f64.sqrt()).abs() < 1e-12);
        let all = find_working_points(0.3, 0.3, 0.99, 100, 1.0).unwrap();
        for w in all.windows(2) {
            assert!(w[1].g_w > w[0].g_w);
        }
        for w in &all {
            assert!((l_fraction(w.g_w, 0.3).unwrap() - 0.5).abs() < 1e-10);
        }
    }

    #[test]
    fn more_anisotropy_more_working_points() {
        let count = |r: f64| find_working_points(gamma_from_ratio(r).unwrap(), 0.3, 0.99, 1000, 1.0).unwrap().len();
        assert!(count(1.0) <= count(2.0) && count(2.0) <= count(4.0));
    }

    #[test]
    fn squeeze_parameters_agree_and_diagonalize() {
        let p = from_g_gamma(0.7, 0.3, 1.0, 1.0).unwrap();
        let d = derive(&p).unwrap();
        let (a, b) = squeeze_parameters(&p).unwrap();
        let (c, e) = squeeze_parameters_g(&d).unwrap();
        assert!((a - c).abs() < 1e-12 && (b - e).abs() < 1e-12);
        assert!(a >= 0.0 && b <= 0.0);
        let n = 128;
        let h = hamiltonian_np_down(&d, 1.0, n).unwrap().op;
        let s = squeeze(a, n).unwrap();
        let eps = (d.delta_g).sqrt() / 2.0;
        for m in 0..4 {
            let psi = Ket::fock(n, m).unwrap();
            let v: Array1<C64> = psi.apply(&s).unwrap();
            let hv = h.matrix().dot(&v);
            let e0 = inner(&v, &hv).re;
            let shift = (1.0 - 0.49 * (1.0 + 0.09) / 2.0) / 2.0;
            assert!((e0 - (eps * (m as f64 + 0.5) - shift)).abs() < 1e-8, "m={m}: {e0}");
            let res: f64 = hv.iter().zip(&v).map(|(x, y)| (x - e0 * y).norm_sqr()).sum::<f64>().sqrt();
            assert!(res < 1e-6, "m={m}: {res}");
        }
        let zero = ModelParams::new(1.0, 1.0, 0.5, 0.0).unwrap();
        assert_eq!(squeeze_parameters(&zero).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn loschmidt_trivial_limits() {
        let p = from_g_gamma(0.6, 0.2, 1.0, 1.0).unwrap();
        let phi = Ket::fock(64, 0).unwrap();
        assert!((loschmidt_amplitude(&p, &phi, 0.0).unwrap() - 1.0).norm() < 1e-12);
        let free = from_g_gamma(1e-9, 0.0, 1.0, 1.0).unwrap();
        assert!((loschmidt_amplitude(&free, &phi, 3.7).unwrap() - 1.0).norm() < 1e-12);
        let (mean, var) = sigma_x_statistics(&QubitSuperposition::default(), &p, &phi, 0.0).unwrap();
        assert!((mean - 1.0).abs() < 1e-12 && var.abs() < 1e-12);
    }

    #[test]
    fn working_point_readout_is_balanced() {
        let q = QubitSuperposition::default();
        for gamma in [0.0, 0.6] {
            let wp = find_working_points(gamma, 0.3, 0.9, 3, 1.0).unwrap();
            for w in &wp {
                let p = inverted_variance_sigma(&q, gamma, 1.0, &FieldState::Fock(0), w, &tr(1024)).unwrap();
                assert!(p.mean_sigma_x.abs() < 0.05, "{w:?}: {}", p.mean_sigma_x);
                assert!((p.var_sigma_x - 1.0).abs() < 0.01);
                assert!(p.loschmidt.norm() <= 1.0 + 1e-9);
                assert!(p.inv_var_fd.unwrap() <= p.qfi * (1.0 + 1e-6), "{p:?}");
            }
        }
    }

    #[test]
    fn lower_branch_returns_after_one_period() {
        let d = derived(0.8, 0.4, 1.0).unwrap();
        let n = 256;
        let phi = Ket::fock(n, 0).unwrap();
        let down = BranchEvolution::new(&d, 1.0, n).unwrap().down;
        let t = d.tau_k(1.0, 1).unwrap();
        let back = down.evolve_raw(t, phi.amplitudes());
        assert!((inner(phi.amplitudes(), &back).norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn vacuum_weights_decrease_over_even_levels() {
        let d = derived(0.9, 0.2, 1.0).unwrap();
        let w = eigenspace_weights(&d, &Ket::fock(128, 0).unwrap()).unwrap();
        for m in (0..40).step_by(2).take_while(|&m| w[m + 2] > 1e-25) {
            assert!(w[m + 2] < w[m]);
            assert!(w[m + 1] < 1e-20);
        }
    }

    #[test]
    fn overlap_matrix_is_unitary() {
        let d = derived(0.7, 0.1, 1.0).unwrap();
        let o = squeezed_overlaps(&d, 96).unwrap();
        let k = o.dagger().try_mul(&o).unwrap();
        let block = k.leading_block(40);
        for i in 0..40 {
            for j in 0..40 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((block[[i, j]] - e).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn readout_invariant_under_anisotropy_sign() {
        let q = QubitSuperposition::default();
        let t = derived(0.8, 0.3, 1.0).unwrap().tau_k(1.0, 1).unwrap();
        let a = probe_point(&q, 0.8, 0.3, 1.0, &FieldState::Fock(0), t, &tr(512)).unwrap();
        let b = probe_point(&q, 0.8, -0.3, 1.0, &FieldState::Fock(0), t, &tr(512)).unwrap();
        for (x, y) in [(a.mean_sigma_x, b.mean_sigma_x), (a.d_mean, b.d_mean), (a.qfi, b.qfi), (a.upsilon, b.upsilon)] {
            assert!((x - y).abs() < 1e-10 * x.abs().max(1.0), "{x} vs {y}");
        }
    }
}
