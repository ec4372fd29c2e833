//! Master-equation integration on the truncated Fock space.
//!
//! The density matrix is flattened column-major and evolved with the same
//! adaptive stepper as the moment equations; the Liouvillian acts as a
//! sparse matrix on the flattened state,
//!
//! ```text
//! L = I ⊗ M + conj(M) ⊗ I + κ (c̄ ⊗ c) + NΓ (S̄ ⊗ S),   M = −i·H_cond,
//! ```
//!
//! using vec(AρB) = (Bᵀ ⊗ A)·vec(ρ). After every accepted step the state is
//! symmetrized back onto the Hermitian manifold (a roundoff-size correction;
//! the exact flow preserves Hermiticity), the trace drift is held to
//! 1e-8·t_end·ζ, and the population of the top Fock level of either mode is
//! watched so truncation artefacts abort the run instead of polluting it.

use std::cell::RefCell;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use super::sparse::CsrMatrix;
use super::{build_operators, DensityMatrix, FockConfig, FockError, Mode, OperatorSet};
use crate::moments::MomentVector;
use crate::ode::{Dopri5, OdeError, OdeSystem};
use crate::params::SystemParams;

#[derive(Debug, Clone, Copy)]
pub struct LindbladOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Abort bound on the top-Fock-level population of either mode.
    pub leak_bound: f64,
    /// Factor in the trace-drift bound factor·t_end·ζ.
    pub trace_drift_factor: f64,
}

impl Default for LindbladOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-9, abs_tol: 1e-13, leak_bound: 1e-6, trace_drift_factor: 1e-8 }
    }
}

/// Truncation re-run check: the same evolution at dimensions enlarged by two
/// must reproduce the reported moments.
#[derive(Debug, Clone)]
pub struct ConvergenceCertificate {
    pub base: MomentVector,
    pub enlarged: MomentVector,
    pub max_delta: f64,
    pub tolerance: f64,
}

impl ConvergenceCertificate {
    pub fn passed(&self) -> bool {
        self.max_delta <= self.tolerance
    }
}

/// Assemble the Liouvillian as a sparse matrix over the flattened density
/// matrix (column-major vec, interleaved re/im).
fn liouvillian(ops: &OperatorSet) -> CsrMatrix {
    let d = ops.config().dim();
    let m = {
        let minus_i = C64::new(0.0, -1.0);
        &ops.h_cond * minus_i
    };
    let mut triplets: Vec<(usize, usize, C64)> = Vec::new();

    // vec index of rho[r, c] is c*d + r.
    for r in 0..d {
        for c in 0..d {
            let v = m[(r, c)];
            if v != C64::ZERO {
                // I ⊗ M: (Mρ)
                for b in 0..d {
                    triplets.push((b * d + r, b * d + c, v));
                }
                // conj(M) ⊗ I: (ρ M†)
                let vc = v.conj();
                for q in 0..d {
                    triplets.push((r * d + q, c * d + q, vc));
                }
            }
        }
    }

    let mut jump = |op: &DMatrix<C64>, rate: f64| {
        let mut nz = Vec::new();
        for r in 0..d {
            for c in 0..d {
                let v = op[(r, c)];
                if v != C64::ZERO {
                    nz.push((r, c, v));
                }
            }
        }
        // rate · (conj(op) ⊗ op): rate · op ρ op†
        for &(xr, xc, xv) in &nz {
            for &(yr, yc, yv) in &nz {
                triplets.push((xr * d + yr, xc * d + yc, xv.conj() * yv * rate));
            }
        }
    };
    jump(&ops.c, ops.kappa());
    jump(&ops.s, ops.n_gamma());

    CsrMatrix::from_triplets(d * d, d * d, triplets)
}

struct LindbladSystem {
    liouvillian: CsrMatrix,
    dim_c: usize,
    dim_a: usize,
    trace_bound: f64,
    leak_bound: f64,
    violation: RefCell<Option<FockError>>,
}

impl LindbladSystem {
    fn dim_total(&self) -> usize {
        self.dim_c * self.dim_a
    }
}

impl OdeSystem for LindbladSystem {
    fn dim(&self) -> usize {
        2 * self.dim_total() * self.dim_total()
    }

    fn rhs(&self, _t: f64, y: &DVector<f64>, dydt: &mut DVector<f64>) {
        self.liouvillian.matvec_flat(y.as_slice(), dydt.as_mut_slice());
    }

    fn post_step(&self, t: f64, y: &mut DVector<f64>) -> Result<(), OdeError> {
        let d = self.dim_total();
        let flat = y.as_mut_slice();
        let idx = |r: usize, c: usize| 2 * (c * d + r);

        // Hermitian projection: rho <- (rho + rho†)/2.
        for r in 0..d {
            flat[idx(r, r) + 1] = 0.0;
            for c in r + 1..d {
                let rc = idx(r, c);
                let cr = idx(c, r);
                let re = 0.5 * (flat[rc] + flat[cr]);
                let im = 0.5 * (flat[rc + 1] - flat[cr + 1]);
                flat[rc] = re;
                flat[rc + 1] = im;
                flat[cr] = re;
                flat[cr + 1] = -im;
            }
        }

        let trace: f64 = (0..d).map(|k| flat[idx(k, k)]).sum();
        let drift = (trace - 1.0).abs();
        if drift > self.trace_bound {
            let err = FockError::TraceDrift { t, drift, bound: self.trace_bound };
            let reason = err.to_string();
            *self.violation.borrow_mut() = Some(err);
            return Err(OdeError::Rejected { t, reason });
        }

        let top_cavity: f64 =
            (0..self.dim_a).map(|na| flat[idx((self.dim_c - 1) * self.dim_a + na, (self.dim_c - 1) * self.dim_a + na)]).sum();
        let top_atomic: f64 =
            (0..self.dim_c).map(|nc| flat[idx(nc * self.dim_a + self.dim_a - 1, nc * self.dim_a + self.dim_a - 1)]).sum();
        for (mode, population) in [(Mode::Cavity, top_cavity), (Mode::Atomic, top_atomic)] {
            if population > self.leak_bound {
                let err =
                    FockError::TruncationLeak { mode, population, bound: self.leak_bound, t };
                let reason = err.to_string();
                *self.violation.borrow_mut() = Some(err);
                return Err(OdeError::Rejected { t, reason });
            }
        }
        Ok(())
    }
}

fn flatten(rho: &DMatrix<C64>) -> DVector<f64> {
    let d = rho.nrows();
    let mut v = DVector::zeros(2 * d * d);
    for c in 0..d {
        for r in 0..d {
            let k = 2 * (c * d + r);
            v[k] = rho[(r, c)].re;
            v[k + 1] = rho[(r, c)].im;
        }
    }
    v
}

fn unflatten(v: &DVector<f64>, d: usize) -> DMatrix<C64> {
    DMatrix::from_fn(d, d, |r, c| {
        let k = 2 * (c * d + r);
        C64::new(v[k], v[k + 1])
    })
}

/// Integrate the master equation, sampling at the given times (strictly
/// increasing, starting at 0, seconds).
pub fn lindblad_evolve_at(
    params: &SystemParams,
    cfg: &FockConfig,
    rho0: &DensityMatrix,
    times: &[f64],
    opts: &LindbladOptions,
) -> Result<Vec<(f64, DensityMatrix)>, FockError> {
    if times.first() != Some(&0.0) {
        return Err(FockError::BadRequest("sample times must start at t = 0".into()));
    }
    let ops = build_operators(params, cfg)?;
    if rho0.config().dim() != cfg.dim() {
        return Err(FockError::BadRequest("initial state truncation mismatch".into()));
    }
    let t_end = *times.last().unwrap();
    let liou = liouvillian(&ops);
    // Keep |h·λ| safely inside the explicit stability region even for
    // unpopulated high-frequency sectors the error control cannot see.
    let linf = liou.infinity_norm();
    let max_step = if linf > 0.0 { 2.0 / linf } else { f64::INFINITY };
    let trace_bound = (opts.trace_drift_factor * t_end * params.zeta()).max(1e-12);
    let system = LindbladSystem {
        liouvillian: liou,
        dim_c: cfg.dim_c,
        dim_a: cfg.dim_a,
        trace_bound,
        leak_bound: opts.leak_bound,
        violation: RefCell::new(None),
    };

    let solver = Dopri5 {
        rel_tol: opts.rel_tol,
        abs_tol: opts.abs_tol,
        max_step,
        ..Dopri5::default()
    };
    let y0 = flatten(rho0.matrix());
    let sol = match solver.solve(&system, 0.0, &y0, times) {
        Ok(sol) => sol,
        Err(e) => {
            // Surface the typed invariant violation when that is the cause.
            if let Some(v) = system.violation.borrow_mut().take() {
                return Err(v);
            }
            return Err(e.into());
        }
    };

    let trace_tol = trace_bound.max(DensityMatrix::TRACE_TOL);
    times
        .iter()
        .zip(sol.states.iter())
        .map(|(&t, y)| {
            let mat = unflatten(y, cfg.dim());
            DensityMatrix::try_new_with(mat, cfg, trace_tol).map(|rho| (t, rho))
        })
        .collect()
}

/// Integrate from vacuum-compatible `rho0` over a uniform grid with
/// `n_samples` intervals.
pub fn lindblad_evolve(
    params: &SystemParams,
    cfg: &FockConfig,
    rho0: &DensityMatrix,
    t_end: f64,
    n_samples: usize,
    opts: &LindbladOptions,
) -> Result<Vec<(f64, DensityMatrix)>, FockError> {
    if !t_end.is_finite() || t_end <= 0.0 {
        return Err(FockError::BadRequest(format!("t_end must be positive, got {t_end}")));
    }
    if n_samples == 0 {
        return Err(FockError::BadRequest("sample count must be at least 1".into()));
    }
    let times: Vec<f64> =
        (0..=n_samples).map(|k| t_end * k as f64 / n_samples as f64).collect();
    lindblad_evolve_at(params, cfg, rho0, &times, opts)
}

/// Run the vacuum evolution at `cfg` and at `cfg` enlarged by two in both
/// modes, comparing the final moments. Passing certifies that the reported
/// values are truncation-converged to within `tolerance`.
pub fn certify_truncation(
    params: &SystemParams,
    cfg: &FockConfig,
    t_end: f64,
    tolerance: f64,
    opts: &LindbladOptions,
) -> Result<ConvergenceCertificate, FockError> {
    let run = |cfg: &FockConfig| -> Result<MomentVector, FockError> {
        let ops = build_operators(params, cfg)?;
        let out =
            lindblad_evolve(params, cfg, &DensityMatrix::vacuum(cfg), t_end, 1, opts)?;
        super::extract_moments(&out.last().unwrap().1, &ops)
    };
    let base = run(cfg)?;
    let enlarged = run(&cfg.enlarged(2)?)?;
    Ok(ConvergenceCertificate {
        base,
        enlarged,
        max_delta: base.max_abs_diff(&enlarged),
        tolerance,
    })
}
