//! Time evolution and stationary state of the moment rate equations.
//!
//! The dynamics d x/dt = A x + b is linear, so two complementary routes are
//! provided: adaptive integration for trajectories (Fig.-style time series)
//! and a direct dense solve A x = −b for the stationary state. The stationary
//! cavity photon emission rate is I_κ = κ·mu1 and the collective atomic
//! emission rate is I_Γ = NΓ·mu2; these are the photon fluxes of the two
//! decay channels.
//!
//! At optical-frequency parameters the trajectory oscillates near 2ω̃_c, so
//! time evolution is supported but expensive there (the accepted step is
//! capped at 0.1/‖A‖∞ to rule out silent under-resolution); stationary
//! questions should go through [`steady_state`].

use nalgebra::DVector;
use thiserror::Error;

use crate::generator::MomentGenerator;
use crate::moments::{MomentVector, MOMENT_COUNT};
use crate::ode::{Dopri5, OdeError, OdeSystem};
use crate::params::SystemParams;

/// Condition-number gate for the stationary solve.
const CONDITION_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, Error)]
pub enum DynamicsError {
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error("generator matrix is singular")]
    SingularGenerator,
    #[error("generator matrix is ill-conditioned: 1-norm condition estimate {estimate:.3e} exceeds {CONDITION_LIMIT:.0e}")]
    IllConditioned { estimate: f64 },
    #[error("invalid request: {0}")]
    BadRequest(String),
}

/// Integration tolerances for [`evolve`]. The moments are dimensionless and
/// O(1e-2) or smaller in every regime of interest, hence the tight absolute
/// floor.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub rel: f64,
    pub abs: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rel: 1e-10, abs: 1e-14 }
    }
}

/// Counters from one integration run.
#[derive(Debug, Clone, Copy, Default)]
pub struct IntegrationStats {
    pub n_accepted: usize,
    pub n_rejected: usize,
    pub n_rhs_evals: usize,
    pub max_accepted_step: f64,
}

/// Sampled moment trajectory, stamped with the fingerprint of the parameters
/// that generated it.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<MomentVector>,
    pub params_hash: u64,
    pub stats: IntegrationStats,
}

/// Stationary moments and the emission rates derived from them.
#[derive(Debug, Clone)]
pub struct EmissionReport {
    pub steady: MomentVector,
    /// Cavity photon emission rate κ·mu1, s⁻¹.
    pub i_kappa: f64,
    /// Collective atomic emission rate NΓ·mu2, s⁻¹.
    pub i_gamma: f64,
    /// ∞-norm of A·steady + b after refinement, s⁻¹.
    pub residual: f64,
    /// 1-norm condition estimate of A.
    pub condition: f64,
}

struct MomentOde<'a> {
    gen: &'a MomentGenerator,
}

impl OdeSystem for MomentOde<'_> {
    fn dim(&self) -> usize {
        MOMENT_COUNT
    }

    fn rhs(&self, _t: f64, y: &DVector<f64>, dydt: &mut DVector<f64>) {
        for i in 0..MOMENT_COUNT {
            let mut acc = self.gen.b[i];
            for j in 0..MOMENT_COUNT {
                acc += self.gen.a[(i, j)] * y[j];
            }
            dydt[i] = acc;
        }
    }
}

/// Integrate the moment equations over `times` (strictly increasing, starting
/// at 0, seconds). `states[0]` is the supplied initial condition.
pub fn evolve_at(
    gen: &MomentGenerator,
    x0: &MomentVector,
    times: &[f64],
    tol: Tolerances,
) -> Result<Trajectory, DynamicsError> {
    if times.first() != Some(&0.0) {
        return Err(DynamicsError::BadRequest("sample times must start at t = 0".into()));
    }
    if !(tol.rel > 0.0 && tol.abs > 0.0) {
        return Err(DynamicsError::BadRequest("tolerances must be positive".into()));
    }
    // Accepted steps may never out-pace the fastest scale of the generator.
    let norm = gen.infinity_norm();
    let max_step = if norm > 0.0 { 0.1 / norm } else { f64::INFINITY };
    let solver = Dopri5 { rel_tol: tol.rel, abs_tol: tol.abs, max_step, ..Dopri5::default() };
    let y0 = DVector::from_column_slice(&x0.to_array());
    let sol = solver.solve(&MomentOde { gen }, 0.0, &y0, times)?;
    let states = sol
        .states
        .iter()
        .map(|y| {
            let mut arr = [0.0; MOMENT_COUNT];
            arr.copy_from_slice(y.as_slice());
            MomentVector::from_array(arr)
        })
        .collect();
    Ok(Trajectory {
        times: times.to_vec(),
        states,
        params_hash: gen.params_hash(),
        stats: IntegrationStats {
            n_accepted: sol.n_accepted,
            n_rejected: sol.n_rejected,
            n_rhs_evals: sol.n_rhs_evals,
            max_accepted_step: sol.max_accepted_step,
        },
    })
}

/// Integrate from t = 0 to `t_end`, sampling on a uniform grid with
/// `n_samples` intervals (`n_samples + 1` rows including both endpoints).
pub fn evolve(
    gen: &MomentGenerator,
    x0: &MomentVector,
    t_end: f64,
    n_samples: usize,
    tol: Tolerances,
) -> Result<Trajectory, DynamicsError> {
    if !t_end.is_finite() || t_end <= 0.0 {
        return Err(DynamicsError::BadRequest(format!("t_end must be positive, got {t_end}")));
    }
    if n_samples == 0 {
        return Err(DynamicsError::BadRequest("sample count must be at least 1".into()));
    }
    let times: Vec<f64> =
        (0..=n_samples).map(|k| t_end * k as f64 / n_samples as f64).collect();
    evolve_at(gen, x0, &times, tol)
}

/// Stationary state by pivoted dense solve of A x = −b with one step of
/// iterative refinement, plus the emission rates and solve diagnostics.
///
/// Fails when A is singular or its 1-norm condition estimate exceeds 1e12
/// (the estimate is reported).
pub fn steady_state(gen: &MomentGenerator) -> Result<EmissionReport, DynamicsError> {
    let lu = gen.a.lu();
    let inv = lu.try_inverse().ok_or(DynamicsError::SingularGenerator)?;
    let condition = one_norm(&gen.a) * one_norm(&inv);
    if !condition.is_finite() || condition > CONDITION_LIMIT {
        return Err(DynamicsError::IllConditioned { estimate: condition });
    }

    let rhs = -gen.b;
    let mut x = lu.solve(&rhs).ok_or(DynamicsError::SingularGenerator)?;
    // One refinement pass guards the wide dynamic range of the entries
    // (rates at 1e7 s⁻¹ against optical frequencies at 1e14 s⁻¹).
    let r = gen.a * x + gen.b;
    if let Some(dx) = lu.solve(&(-r)) {
        x += dx;
    }
    let residual = (gen.a * x + gen.b).amax();

    let steady = MomentVector::from_svector(&x);
    Ok(EmissionReport {
        steady,
        i_kappa: gen.kappa() * steady.mu1,
        i_gamma: gen.n_gamma() * steady.mu2,
        residual,
        condition,
    })
}

/// The photon fluxes of the two decay channels: (κ·mu1, NΓ·mu2).
pub fn emission_rates(steady: &MomentVector, params: &SystemParams) -> (f64, f64) {
    (params.kappa() * steady.mu1, params.n_gamma() * steady.mu2)
}

fn one_norm(m: &crate::generator::GenMatrix) -> f64 {
    (0..MOMENT_COUNT)
        .map(|j| (0..MOMENT_COUNT).map(|i| m[(i, j)].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}
