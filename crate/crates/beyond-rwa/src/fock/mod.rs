//! First-principles oracle on a truncated two-mode Fock space.
//!
//! Everything here is built directly from the master equation: truncated
//! ladder operators for the cavity mode c and the collective atomic mode S⁻,
//! the closed Hamiltonians (full and rotating-wave), and the non-Hermitian
//! conditional Hamiltonian
//!
//! ```text
//! H_cond = H − (i/2)(κ c†c + NΓ S⁺S⁻)
//! ```
//!
//! governing no-jump evolution. The decay channels enter in the standard
//! trace-preserving Lindblad form κ D\[c\] + NΓ D\[S⁻\] (jump operators c and S⁻;
//! photons are emitted into, never absorbed from, the zero-temperature
//! environment), so
//!
//! ```text
//! dρ/dt = −i (H_cond ρ − ρ H_cond†) + κ c ρ c† + NΓ S⁻ ρ S⁺.
//! ```
//!
//! The basis is |n_c⟩⊗|n_a⟩, row-major in n_c then n_a: index = n_c·dim_a + n_a.
//!
//! None of this shares physics code with the moment-equation route; agreement
//! between the two (see [`crate::validation`]) is the core correctness check
//! of the crate.

mod ground;
mod lindblad;
mod mcwf;
pub(crate) mod sparse;

pub use ground::{ground_state, GroundState};
pub use lindblad::{
    certify_truncation, lindblad_evolve, lindblad_evolve_at, ConvergenceCertificate,
    LindbladOptions,
};
pub use mcwf::{mcwf_trajectories, Click, ClickStatistics, JumpChannel, McwfOptions, McwfRun};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::moments::MomentVector;
use crate::ode::OdeError;
use crate::params::SystemParams;

/// Which truncated mode a diagnostic refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Cavity,
    Atomic,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Mode::Cavity => write!(f, "cavity"),
            Mode::Atomic => write!(f, "atomic"),
        }
    }
}

#[derive(Debug, Clone, Error)]
pub enum FockError {
    #[error("Fock truncation dimensions must be at least 2, got {dim_c} x {dim_a}")]
    DimensionTooSmall { dim_c: usize, dim_a: usize },
    #[error("total Fock dimension {total} exceeds the configured cap {cap}")]
    DimensionOverflow { total: usize, cap: usize },
    #[error("density matrix invariant violated: {0}")]
    InvalidDensityMatrix(String),
    #[error("trace drifted by {drift:.3e} at t = {t:.6e} (bound {bound:.3e})")]
    TraceDrift { t: f64, drift: f64, bound: f64 },
    #[error("truncation leakage in the {mode} mode: top-level population {population:.3e} exceeds {bound:.3e} at t = {t:.6e}")]
    TruncationLeak { mode: Mode, population: f64, bound: f64, t: f64 },
    #[error("moment {name} has imaginary residue {residue:.3e} above 1e-10; operator transcription suspect")]
    ImaginaryResidue { name: &'static str, residue: f64 },
    #[error("eigensolver did not converge")]
    EigenFailure,
    #[error("wavefunction norm collapsed to zero during jump handling")]
    ZeroNormCollapse,
    #[error("invalid request: {0}")]
    BadRequest(String),
    #[error(transparent)]
    Ode(#[from] OdeError),
}

/// Truncation dimensions of the two bosonic modes (Fock levels 0..dim−1).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockConfig {
    pub dim_c: usize,
    pub dim_a: usize,
    /// Guard against accidentally huge dense operators.
    pub max_total_dim: usize,
}

impl FockConfig {
    pub const DEFAULT_MAX_TOTAL_DIM: usize = 10_000;

    pub fn new(dim_c: usize, dim_a: usize) -> Result<Self, FockError> {
        Self { dim_c, dim_a, max_total_dim: Self::DEFAULT_MAX_TOTAL_DIM }.validated()
    }

    pub fn with_cap(mut self, cap: usize) -> Result<Self, FockError> {
        self.max_total_dim = cap;
        self.validated()
    }

    fn validated(self) -> Result<Self, FockError> {
        if self.dim_c < 2 || self.dim_a < 2 {
            return Err(FockError::DimensionTooSmall { dim_c: self.dim_c, dim_a: self.dim_a });
        }
        let total = self.dim_c.saturating_mul(self.dim_a);
        if total > self.max_total_dim {
            return Err(FockError::DimensionOverflow { total, cap: self.max_total_dim });
        }
        Ok(self)
    }

    /// Joint Hilbert-space dimension.
    pub fn dim(&self) -> usize {
        self.dim_c * self.dim_a
    }

    /// Basis index of |n_c⟩⊗|n_a⟩.
    pub fn index(&self, n_c: usize, n_a: usize) -> usize {
        debug_assert!(n_c < self.dim_c && n_a < self.dim_a);
        n_c * self.dim_a + n_a
    }

    /// Same truncation with both dimensions increased by `extra`, for
    /// convergence re-runs.
    pub fn enlarged(&self, extra: usize) -> Result<Self, FockError> {
        Self { dim_c: self.dim_c + extra, dim_a: self.dim_a + extra, ..*self }.validated()
    }
}

/// Truncated single-mode annihilation operator.
fn lowering(dim: usize) -> DMatrix<C64> {
    DMatrix::from_fn(dim, dim, |r, c| {
        if c == r + 1 {
            C64::new((c as f64).sqrt(), 0.0)
        } else {
            C64::ZERO
        }
    })
}

fn identity(dim: usize) -> DMatrix<C64> {
    DMatrix::identity(dim, dim)
}

/// Dense operator set on the truncated joint space.
#[derive(Debug, Clone)]
pub struct OperatorSet {
    cfg: FockConfig,
    /// Cavity annihilation c.
    pub c: DMatrix<C64>,
    /// Cavity creation c†.
    pub c_dag: DMatrix<C64>,
    /// Collective atomic annihilation S⁻.
    pub s: DMatrix<C64>,
    /// Collective atomic creation S⁺.
    pub s_dag: DMatrix<C64>,
    /// Closed Hamiltonian with counter-rotating terms.
    pub h_full: DMatrix<C64>,
    /// Closed Hamiltonian in the rotating-wave approximation.
    pub h_rwa: DMatrix<C64>,
    /// Conditional Hamiltonian (full or RWA interaction per the parameter
    /// flag) with the anti-Hermitian decay part.
    pub h_cond: DMatrix<C64>,
    observables: [DMatrix<C64>; 10],
    kappa: f64,
    n_gamma: f64,
    rotating_wave: bool,
}

/// Build all operators for one parameter set and truncation.
pub fn build_operators(params: &SystemParams, cfg: &FockConfig) -> Result<OperatorSet, FockError> {
    let cfg = cfg.validated()?;
    let c = lowering(cfg.dim_c).kronecker(&identity(cfg.dim_a));
    let s = identity(cfg.dim_c).kronecker(&lowering(cfg.dim_a));
    let c_dag = c.adjoint();
    let s_dag = s.adjoint();

    let g = C64::new(params.collective_coupling(), 0.0);
    let num_c = &c_dag * &c;
    let num_a = &s_dag * &s;
    let free = &num_c * C64::new(params.omega_c(), 0.0) + &num_a * C64::new(params.omega_a(), 0.0);

    let x_c = &c + &c_dag;
    let x_a = &s + &s_dag;
    let h_full = &free + (&x_c * &x_a) * g;
    let h_rwa = &free + (&c * &s_dag + &c_dag * &s) * g;

    let decay = &num_c * C64::new(0.0, -0.5 * params.kappa())
        + &num_a * C64::new(0.0, -0.5 * params.n_gamma());
    let h_closed = if params.rotating_wave() { &h_rwa } else { &h_full };
    let h_cond = h_closed + &decay;

    let i = C64::new(0.0, 1.0);
    let p_c = &c - &c_dag;
    let p_a = &s - &s_dag;
    let c2 = &c * &c;
    let c_dag2 = &c_dag * &c_dag;
    let s2 = &s * &s;
    let s_dag2 = &s_dag * &s_dag;
    let observables = [
        num_c.clone(),
        num_a.clone(),
        (&x_a * &p_c) * i,
        (&p_a * &x_c) * i,
        &p_a * &p_c,
        &x_a * &x_c,
        (&c2 - &c_dag2) * i,
        &c2 + &c_dag2,
        (&s2 - &s_dag2) * i,
        &s2 + &s_dag2,
    ];

    Ok(OperatorSet {
        cfg,
        c,
        c_dag,
        s,
        s_dag,
        h_full,
        h_rwa,
        h_cond,
        observables,
        kappa: params.kappa(),
        n_gamma: params.n_gamma(),
        rotating_wave: params.rotating_wave(),
    })
}

impl OperatorSet {
    pub fn config(&self) -> &FockConfig {
        &self.cfg
    }

    /// The closed Hamiltonian selected by the parameter flag.
    pub fn hamiltonian(&self) -> &DMatrix<C64> {
        if self.rotating_wave {
            &self.h_rwa
        } else {
            &self.h_full
        }
    }

    pub(crate) fn kappa(&self) -> f64 {
        self.kappa
    }

    pub(crate) fn n_gamma(&self) -> f64 {
        self.n_gamma
    }

    pub(crate) fn observables(&self) -> &[DMatrix<C64>; 10] {
        &self.observables
    }
}

/// Two-mode density operator with its truncation bookkeeping.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    mat: DMatrix<C64>,
    cfg: FockConfig,
}

impl DensityMatrix {
    pub const HERMITICITY_TOL: f64 = 1e-12;
    pub const TRACE_TOL: f64 = 1e-10;
    pub const POSITIVITY_TOL: f64 = -1e-8;

    /// |0_c 0_a⟩⟨0_c 0_a|.
    pub fn vacuum(cfg: &FockConfig) -> Self {
        let mut mat = DMatrix::zeros(cfg.dim(), cfg.dim());
        mat[(0, 0)] = C64::ONE;
        Self { mat, cfg: *cfg }
    }

    /// Projector onto a normalized pure state.
    pub fn from_pure(psi: &WaveFunction) -> Result<Self, FockError> {
        let n = psi.norm();
        if n == 0.0 {
            return Err(FockError::InvalidDensityMatrix("pure state has zero norm".into()));
        }
        let v = psi.vec.clone() / C64::new(n, 0.0);
        Ok(Self { mat: &v * v.adjoint(), cfg: psi.cfg })
    }

    /// Maximally mixed state on the truncated space.
    pub fn maximally_mixed(cfg: &FockConfig) -> Self {
        let d = cfg.dim();
        let mat = DMatrix::from_diagonal_element(d, d, C64::new(1.0 / d as f64, 0.0));
        Self { mat, cfg: *cfg }
    }

    /// Validate Hermiticity, unit trace and positivity (up to numerical
    /// noise) and wrap the matrix.
    pub fn try_new(mat: DMatrix<C64>, cfg: &FockConfig) -> Result<Self, FockError> {
        Self::try_new_with(mat, cfg, Self::TRACE_TOL)
    }

    /// As [`try_new`](Self::try_new) with a caller-supplied trace tolerance
    /// (master-equation output is held to the integration drift bound, which
    /// can sit above the construction default).
    pub fn try_new_with(
        mat: DMatrix<C64>,
        cfg: &FockConfig,
        trace_tol: f64,
    ) -> Result<Self, FockError> {
        let d = cfg.dim();
        if mat.shape() != (d, d) {
            return Err(FockError::InvalidDensityMatrix(format!(
                "shape {:?} does not match truncation {d}",
                mat.shape()
            )));
        }
        let mut herm: f64 = 0.0;
        for r in 0..d {
            for c in r..d {
                herm = herm.max((mat[(r, c)] - mat[(c, r)].conj()).norm());
            }
        }
        if herm > Self::HERMITICITY_TOL {
            return Err(FockError::InvalidDensityMatrix(format!(
                "Hermiticity defect {herm:.3e} exceeds {:.0e}",
                Self::HERMITICITY_TOL
            )));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > trace_tol || tr.im.abs() > trace_tol {
            return Err(FockError::InvalidDensityMatrix(format!(
                "trace {tr} deviates from 1 beyond {trace_tol:.3e}"
            )));
        }
        let min_eig = mat
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .fold(f64::INFINITY, |m, &v| m.min(v));
        if min_eig < Self::POSITIVITY_TOL {
            return Err(FockError::InvalidDensityMatrix(format!(
                "smallest eigenvalue {min_eig:.3e} below {:.0e}",
                Self::POSITIVITY_TOL
            )));
        }
        Ok(Self { mat, cfg: *cfg })
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn config(&self) -> &FockConfig {
        &self.cfg
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    /// Population of the joint Fock state |n_c, n_a⟩.
    pub fn population(&self, n_c: usize, n_a: usize) -> f64 {
        let k = self.cfg.index(n_c, n_a);
        self.mat[(k, k)].re
    }

    /// Trace distance ½‖ρ − σ‖₁ (sum of absolute eigenvalues of the
    /// Hermitian difference).
    pub fn trace_distance(&self, other: &Self) -> f64 {
        let diff = &self.mat - &other.mat;
        0.5 * diff.symmetric_eigen().eigenvalues.iter().map(|v| v.abs()).sum::<f64>()
    }
}

/// Pure state on the truncated joint space. Between quantum jumps the norm
/// decays below one under the conditional evolution; it is restored to one
/// after each jump.
#[derive(Debug, Clone)]
pub struct WaveFunction {
    pub(crate) vec: DVector<C64>,
    pub(crate) cfg: FockConfig,
}

impl WaveFunction {
    /// |0_c 0_a⟩.
    pub fn vacuum(cfg: &FockConfig) -> Self {
        let mut vec = DVector::zeros(cfg.dim());
        vec[0] = C64::ONE;
        Self { vec, cfg: *cfg }
    }

    /// Joint Fock state |n_c, n_a⟩.
    pub fn fock(cfg: &FockConfig, n_c: usize, n_a: usize) -> Result<Self, FockError> {
        if n_c >= cfg.dim_c || n_a >= cfg.dim_a {
            return Err(FockError::BadRequest(format!(
                "Fock state ({n_c}, {n_a}) outside truncation {} x {}",
                cfg.dim_c, cfg.dim_a
            )));
        }
        let mut vec = DVector::zeros(cfg.dim());
        vec[cfg.index(n_c, n_a)] = C64::ONE;
        Ok(Self { vec, cfg: *cfg })
    }

    /// Build from amplitudes on joint Fock states; the result is normalized.
    pub fn from_amplitudes(
        cfg: &FockConfig,
        amplitudes: &[((usize, usize), C64)],
    ) -> Result<Self, FockError> {
        let mut vec = DVector::zeros(cfg.dim());
        for &((n_c, n_a), amp) in amplitudes {
            if n_c >= cfg.dim_c || n_a >= cfg.dim_a {
                return Err(FockError::BadRequest(format!(
                    "amplitude on ({n_c}, {n_a}) outside truncation"
                )));
            }
            vec[cfg.index(n_c, n_a)] += amp;
        }
        let mut wf = Self { vec, cfg: *cfg };
        let n = wf.norm();
        if n == 0.0 {
            return Err(FockError::BadRequest("zero-norm amplitude set".into()));
        }
        wf.vec /= C64::new(n, 0.0);
        Ok(wf)
    }

    pub fn norm(&self) -> f64 {
        self.vec.norm()
    }

    pub fn amplitude(&self, n_c: usize, n_a: usize) -> C64 {
        self.vec[self.cfg.index(n_c, n_a)]
    }

    pub fn config(&self) -> &FockConfig {
        &self.cfg
    }

    pub fn as_slice(&self) -> &[C64] {
        self.vec.as_slice()
    }
}

/// Extract the ten tracked moments from a density matrix as operator traces.
///
/// Every observable is Hermitian, so the traces must be real; an imaginary
/// residue above 1e-10 signals an operator transcription bug and is reported
/// rather than discarded.
pub fn extract_moments(rho: &DensityMatrix, ops: &OperatorSet) -> Result<MomentVector, FockError> {
    const IMAG_BOUND: f64 = 1e-10;
    let d = ops.cfg.dim();
    let mut values = [0.0; 10];
    for (k, obs) in ops.observables().iter().enumerate() {
        let mut tr = C64::ZERO;
        for r in 0..d {
            for c in 0..d {
                let o = obs[(r, c)];
                if o != C64::ZERO {
                    tr += o * rho.mat[(c, r)];
                }
            }
        }
        if tr.im.abs() > IMAG_BOUND {
            return Err(FockError::ImaginaryResidue {
                name: crate::moments::MOMENT_NAMES[k],
                residue: tr.im.abs(),
            });
        }
        values[k] = tr.re;
    }
    Ok(MomentVector::from_array(values))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params_scaled() -> SystemParams {
        SystemParams::new(10.0, 10.0, 1.0, 1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn free_hamiltonian_spectrum_on_2x2() {
        let p = SystemParams::new(10.0, 7.0, 0.0, 1.0, 1.0, 1.0).unwrap();
        let cfg = FockConfig::new(2, 2).unwrap();
        let ops = build_operators(&p, &cfg).unwrap();
        // basis order (0,0), (0,1), (1,0), (1,1)
        let expected = [0.0, 7.0, 10.0, 17.0];
        for (k, &e) in expected.iter().enumerate() {
            assert!((ops.h_full[(k, k)] - C64::new(e, 0.0)).norm() < 1e-14);
        }
        for r in 0..4 {
            for c in 0..4 {
                if r != c {
                    assert_eq!(ops.h_full[(r, c)], C64::ZERO);
                }
            }
        }
    }

    #[test]
    fn commutator_is_identity_below_top_level() {
        let cfg = FockConfig::new(6, 4).unwrap();
        let ops = build_operators(&params_scaled(), &cfg).unwrap();
        let comm = &ops.c * &ops.c_dag - &ops.c_dag * &ops.c;
        for n_c in 0..cfg.dim_c - 1 {
            for n_a in 0..cfg.dim_a {
                let k = cfg.index(n_c, n_a);
                assert!((comm[(k, k)] - C64::ONE).norm() < 1e-14, "diag at ({n_c},{n_a})");
                for j in 0..cfg.dim() {
                    if j != k {
                        assert_eq!(comm[(k, j)], C64::ZERO);
                    }
                }
            }
        }
        // the top level absorbs the truncation defect
        let top = cfg.index(cfg.dim_c - 1, 0);
        assert!((comm[(top, top)] - C64::new(1.0 - cfg.dim_c as f64, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn conditional_hamiltonian_carries_decay_widths() {
        let p = SystemParams::new(10.0, 10.0, 0.5, 2.0, 0.25, 4.0).unwrap();
        let cfg = FockConfig::new(3, 3).unwrap();
        let ops = build_operators(&p, &cfg).unwrap();
        // diagonal of H_cond: ω̃_c n_c + ω̃_a n_a − (i/2)(κ n_c + NΓ n_a)
        let k = cfg.index(2, 1);
        let expect = C64::new(2.0 * 10.0 + 10.0, -0.5 * (2.0 * 2.0 + 1.0 * 1.0));
        assert!((ops.h_cond[(k, k)] - expect).norm() < 1e-12);
    }

    #[test]
    fn rwa_hamiltonian_conserves_excitation_number() {
        let cfg = FockConfig::new(4, 4).unwrap();
        let ops = build_operators(&params_scaled(), &cfg).unwrap();
        for nc in 0..4 {
            for na in 0..4 {
                for mc in 0..4 {
                    for ma in 0..4 {
                        if nc + na != mc + ma {
                            let v = ops.h_rwa[(cfg.index(nc, na), cfg.index(mc, ma))];
                            assert_eq!(v, C64::ZERO, "block ({nc},{na})<-({mc},{ma})");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn moments_of_vacuum_and_single_photon() {
        let cfg = FockConfig::new(4, 4).unwrap();
        let ops = build_operators(&params_scaled(), &cfg).unwrap();
        let vac = DensityMatrix::vacuum(&cfg);
        let m = extract_moments(&vac, &ops).unwrap();
        assert_eq!(m.max_abs(), 0.0);

        let one = DensityMatrix::from_pure(&WaveFunction::fock(&cfg, 1, 0).unwrap()).unwrap();
        let m = extract_moments(&one, &ops).unwrap();
        assert!((m.mu1 - 1.0).abs() < 1e-14);
        let mut rest = m;
        rest.mu1 = 0.0;
        assert_eq!(rest.max_abs(), 0.0);
    }

    #[test]
    fn squeezed_superposition_has_xi2() {
        let cfg = FockConfig::new(4, 2).unwrap();
        let ops = build_operators(&params_scaled(), &cfg).unwrap();
        let amp = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let psi =
            WaveFunction::from_amplitudes(&cfg, &[((0, 0), amp), ((2, 0), amp)]).unwrap();
        let rho = DensityMatrix::from_pure(&psi).unwrap();
        let m = extract_moments(&rho, &ops).unwrap();
        // <c²> = <0|c²|2>/2 = sqrt(2)/2 on this superposition, so xi2 = sqrt(2)
        assert!((m.xi2 - std::f64::consts::SQRT_2).abs() < 1e-12, "xi2 = {}", m.xi2);
        assert!((m.mu1 - 1.0).abs() < 1e-12);
        assert_eq!(m.xi1, 0.0);
    }

    #[test]
    fn density_matrix_validation_catches_defects() {
        let cfg = FockConfig::new(2, 2).unwrap();
        // non-Hermitian
        let mut bad = DMatrix::zeros(4, 4);
        bad[(0, 0)] = C64::ONE;
        bad[(0, 1)] = C64::new(0.1, 0.0);
        assert!(DensityMatrix::try_new(bad, &cfg).is_err());
        // wrong trace
        let wrong = DMatrix::from_diagonal_element(4, 4, C64::new(0.5, 0.0));
        assert!(DensityMatrix::try_new(wrong, &cfg).is_err());
        // negative eigenvalue
        let mut neg = DMatrix::zeros(4, 4);
        neg[(0, 0)] = C64::new(1.5, 0.0);
        neg[(1, 1)] = C64::new(-0.5, 0.0);
        assert!(DensityMatrix::try_new(neg, &cfg).is_err());
        // valid
        let ok = DensityMatrix::vacuum(&cfg);
        assert!(DensityMatrix::try_new(ok.matrix().clone(), &cfg).is_ok());
    }

    #[test]
    fn config_guards_dimensions() {
        assert!(matches!(FockConfig::new(1, 4), Err(FockError::DimensionTooSmall { .. })));
        assert!(matches!(
            FockConfig::new(8, 8).unwrap().with_cap(10),
            Err(FockError::DimensionOverflow { total: 64, cap: 10 })
        ));
        let cfg = FockConfig::new(8, 8).unwrap();
        let big = cfg.enlarged(2).unwrap();
        assert_eq!((big.dim_c, big.dim_a), (10, 10));
    }
}
