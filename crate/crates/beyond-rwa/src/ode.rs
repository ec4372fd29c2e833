//! Adaptive explicit Runge-Kutta integration (Dormand-Prince 5(4)).
//!
//! An embedded 5(4) pair with PI step-size control and the free 4th-order
//! continuous extension for dense output at arbitrary sample times. The
//! systems integrated here are small (the 10-moment vector, or a flattened
//! truncated density matrix), oscillatory and non-stiff, which is exactly the
//! regime this pair is made for.
//!
//! The stepper exposes a hard `max_step` cap so callers can bound the
//! accepted step by an operator-norm estimate of the generator and rule out
//! silent under-resolution of fast phases, and a `post_step` hook on the
//! system so constrained flows (Hermiticity, trace) can project the state and
//! veto unphysical solutions as integration proceeds.

use nalgebra::DVector;
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum OdeError {
    #[error("integration tolerances and time span must be positive: {0}")]
    BadInput(String),
    #[error("step size underflow at t = {t:.9e} (h = {h:.3e})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("non-finite value in state component {component} at t = {t:.9e}")]
    NonFinite { t: f64, component: usize },
    #[error("step budget of {max_steps} exhausted at t = {t:.9e}")]
    StepBudget { t: f64, max_steps: usize },
    #[error("state rejected at t = {t:.9e}: {reason}")]
    Rejected { t: f64, reason: String },
}

/// Right-hand side of an ODE plus an optional per-step projection.
pub trait OdeSystem {
    fn dim(&self) -> usize;

    /// Writes f(t, y) into `dydt`.
    fn rhs(&self, t: f64, y: &DVector<f64>, dydt: &mut DVector<f64>);

    /// Invoked once per accepted step with the new state. Implementations may
    /// project `y` back onto a constraint manifold (the correction must stay
    /// far below the integration tolerances) or return an error to abort.
    fn post_step(&self, _t: f64, _y: &mut DVector<f64>) -> Result<(), OdeError> {
        Ok(())
    }
}

/// Integration controls.
#[derive(Debug, Clone, Copy)]
pub struct Dopri5 {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Hard cap on the accepted step size.
    pub max_step: f64,
    /// Safety bound on the number of accepted + rejected steps.
    pub max_steps: usize,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Self { rel_tol: 1e-10, abs_tol: 1e-14, max_step: f64::INFINITY, max_steps: 20_000_000 }
    }
}

impl Dopri5 {
    pub fn with_tolerances(rel_tol: f64, abs_tol: f64) -> Self {
        Self { rel_tol, abs_tol, ..Self::default() }
    }
}

/// Dense-output samples of one integration run.
#[derive(Debug, Clone)]
pub struct OdeSolution {
    /// State at each requested sample time, in order.
    pub states: Vec<DVector<f64>>,
    pub n_accepted: usize,
    pub n_rejected: usize,
    pub n_rhs_evals: usize,
    /// Largest accepted step size.
    pub max_accepted_step: f64,
}

// Dormand-Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Error weights (difference between the 5th- and 4th-order solutions).
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// Coefficients of the 4th-order continuous extension.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

// PI controller constants (classic choices for this pair).
const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const EXPO1: f64 = 0.2 - BETA * 0.75;
const FAC_MIN: f64 = 0.2; // strongest allowed shrink per step
const FAC_MAX: f64 = 10.0; // strongest allowed growth per step

struct Workspace {
    k: [DVector<f64>; 7],
    y_stage: DVector<f64>,
    y_new: DVector<f64>,
    rcont: [DVector<f64>; 5],
}

impl Workspace {
    fn new(dim: usize) -> Self {
        let z = || DVector::zeros(dim);
        Self {
            k: [z(), z(), z(), z(), z(), z(), z()],
            y_stage: z(),
            y_new: z(),
            rcont: [z(), z(), z(), z(), z()],
        }
    }
}

impl Dopri5 {
    /// Integrate from `t0` (state `y0`) through every time in `sample_times`,
    /// which must be finite, strictly increasing and ≥ `t0`. The returned
    /// states correspond one-to-one to `sample_times`, interpolated with the
    /// method's dense output.
    pub fn solve<S: OdeSystem>(
        &self,
        sys: &S,
        t0: f64,
        y0: &DVector<f64>,
        sample_times: &[f64],
    ) -> Result<OdeSolution, OdeError> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(OdeError::BadInput("tolerances must be positive".into()));
        }
        if self.max_step.is_nan() || self.max_step <= 0.0 {
            return Err(OdeError::BadInput("max_step must be positive".into()));
        }
        if sample_times.is_empty() {
            return Err(OdeError::BadInput("no sample times requested".into()));
        }
        let mut prev = f64::NEG_INFINITY;
        for &s in sample_times {
            if !s.is_finite() || s < t0 || s <= prev {
                return Err(OdeError::BadInput(format!(
                    "sample times must be finite, strictly increasing and >= t0; got {s}"
                )));
            }
            prev = s;
        }
        let t_end = *sample_times.last().unwrap();
        if let Some(bad) = first_non_finite(y0) {
            return Err(OdeError::NonFinite { t: t0, component: bad });
        }

        let dim = sys.dim();
        let mut ws = Workspace::new(dim);
        let mut y = y0.clone();
        let mut t = t0;
        let mut states = Vec::with_capacity(sample_times.len());
        let mut next_sample = 0;

        // A sample exactly at t0 comes straight from the initial state.
        if sample_times[next_sample] == t0 {
            states.push(y.clone());
            next_sample += 1;
        }
        sys.rhs(t, &y, &mut ws.k[0]);
        let mut n_rhs = 1;
        if next_sample >= sample_times.len() {
            return Ok(OdeSolution {
                states,
                n_accepted: 0,
                n_rejected: 0,
                n_rhs_evals: n_rhs,
                max_accepted_step: 0.0,
            });
        }

        let f0 = ws.k[0].clone();
        let mut h = self.initial_step(sys, t, &y, &f0, t_end, &mut n_rhs, &mut ws);
        let mut facold: f64 = 1e-4;
        let mut n_accepted = 0usize;
        let mut n_rejected = 0usize;
        let mut max_accepted = 0.0f64;
        let mut last_rejected = false;

        while t < t_end {
            if n_accepted + n_rejected >= self.max_steps {
                return Err(OdeError::StepBudget { t, max_steps: self.max_steps });
            }
            h = h.min(self.max_step).min(t_end - t);
            // A step is unworkably small when it cannot advance t at its own
            // floating-point resolution (or is absurd in absolute terms).
            if h <= 4.0 * f64::EPSILON * t.abs() || h < 1e-290 {
                return Err(OdeError::StepUnderflow { t, h });
            }

            self.stages(sys, t, &y, h, &mut ws);
            n_rhs += 6;

            // Weighted RMS error of the embedded pair.
            let mut err_sq = 0.0;
            for i in 0..dim {
                let e = h
                    * (E1 * ws.k[0][i]
                        + E3 * ws.k[2][i]
                        + E4 * ws.k[3][i]
                        + E5 * ws.k[4][i]
                        + E6 * ws.k[5][i]
                        + E7 * ws.k[6][i]);
                let scale = self.abs_tol + self.rel_tol * y[i].abs().max(ws.y_new[i].abs());
                err_sq += (e / scale) * (e / scale);
            }
            let err = (err_sq / dim as f64).sqrt();

            if !err.is_finite() {
                // Blow-up inside the stages: shrink hard and retry.
                n_rejected += 1;
                last_rejected = true;
                h *= 0.1;
                continue;
            }

            let fac11 = err.powf(EXPO1);
            if err <= 1.0 {
                // Accept.
                if let Some(bad) = first_non_finite(&ws.y_new) {
                    return Err(OdeError::NonFinite { t: t + h, component: bad });
                }
                self.prepare_dense(&y, h, &mut ws);
                let t_new = t + h;
                sys.post_step(t_new, &mut ws.y_new)?;

                // Samples inside the step come from the dense interpolant; a
                // ulp of slack at the far end absorbs roundoff in t_new so
                // the final sample cannot strand the loop on a vanishing
                // remainder.
                let reach = t_new + 4.0 * f64::EPSILON * t_new.abs();
                while next_sample < sample_times.len() && sample_times[next_sample] <= reach {
                    let ts = sample_times[next_sample];
                    if ts >= t_new {
                        states.push(ws.y_new.clone());
                    } else {
                        states.push(dense_eval(&ws.rcont, (ts - t) / h));
                    }
                    next_sample += 1;
                }
                if next_sample >= sample_times.len() {
                    n_accepted += 1;
                    max_accepted = max_accepted.max(h);
                    break;
                }

                std::mem::swap(&mut y, &mut ws.y_new);
                // FSAL: the last stage derivative is f(t_new, y_new).
                ws.k.swap(0, 6);
                t = t_new;
                n_accepted += 1;
                max_accepted = max_accepted.max(h);

                let mut fac = fac11 / facold.powf(BETA);
                fac = (fac / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
                facold = err.max(1e-4);
                let mut h_new = h / fac;
                if last_rejected {
                    h_new = h_new.min(h);
                }
                last_rejected = false;
                h = h_new;
            } else {
                n_rejected += 1;
                last_rejected = true;
                h /= (fac11 / SAFETY).min(1.0 / FAC_MIN);
            }
        }

        debug_assert_eq!(next_sample, sample_times.len());
        Ok(OdeSolution {
            states,
            n_accepted,
            n_rejected,
            n_rhs_evals: n_rhs,
            max_accepted_step: max_accepted,
        })
    }

    /// All seven stages of one trial step; leaves the 5th-order solution in
    /// `ws.y_new` and f(t+h, y_new) in `ws.k[6]`.
    fn stages<S: OdeSystem>(&self, sys: &S, t: f64, y: &DVector<f64>, h: f64, ws: &mut Workspace) {
        let dim = y.len();
        macro_rules! stage {
            ($c:expr, $ki:expr, [$(($a:expr, $j:expr)),+]) => {{
                for i in 0..dim {
                    let mut acc = 0.0;
                    $(acc += $a * ws.k[$j][i];)+
                    ws.y_stage[i] = y[i] + h * acc;
                }
                sys.rhs(t + $c * h, &ws.y_stage, &mut ws.k[$ki]);
            }};
        }
        stage!(C2, 1, [(A21, 0)]);
        stage!(C3, 2, [(A31, 0), (A32, 1)]);
        stage!(C4, 3, [(A41, 0), (A42, 1), (A43, 2)]);
        stage!(C5, 4, [(A51, 0), (A52, 1), (A53, 2), (A54, 3)]);
        stage!(1.0, 5, [(A61, 0), (A62, 1), (A63, 2), (A64, 3), (A65, 4)]);
        for i in 0..dim {
            let acc = B1 * ws.k[0][i]
                + B3 * ws.k[2][i]
                + B4 * ws.k[3][i]
                + B5 * ws.k[4][i]
                + B6 * ws.k[5][i];
            ws.y_new[i] = y[i] + h * acc;
        }
        sys.rhs(t + h, &ws.y_new, &mut ws.k[6]);
    }

    /// Coefficients of the quartic interpolant over the accepted step.
    fn prepare_dense(&self, y: &DVector<f64>, h: f64, ws: &mut Workspace) {
        let dim = y.len();
        for i in 0..dim {
            let ydiff = ws.y_new[i] - y[i];
            let bspl = h * ws.k[0][i] - ydiff;
            ws.rcont[0][i] = y[i];
            ws.rcont[1][i] = ydiff;
            ws.rcont[2][i] = bspl;
            ws.rcont[3][i] = ydiff - h * ws.k[6][i] - bspl;
            ws.rcont[4][i] = h
                * (D1 * ws.k[0][i]
                    + D3 * ws.k[2][i]
                    + D4 * ws.k[3][i]
                    + D5 * ws.k[4][i]
                    + D6 * ws.k[5][i]
                    + D7 * ws.k[6][i]);
        }
    }

    /// Classic two-evaluation starting-step heuristic.
    #[allow(clippy::too_many_arguments)]
    fn initial_step<S: OdeSystem>(
        &self,
        sys: &S,
        t0: f64,
        y0: &DVector<f64>,
        f0: &DVector<f64>,
        t_end: f64,
        n_rhs: &mut usize,
        ws: &mut Workspace,
    ) -> f64 {
        let dim = y0.len();
        let mut d0 = 0.0;
        let mut d1 = 0.0;
        for i in 0..dim {
            let sk = self.abs_tol + self.rel_tol * y0[i].abs();
            d0 += (y0[i] / sk) * (y0[i] / sk);
            d1 += (f0[i] / sk) * (f0[i] / sk);
        }
        d0 = (d0 / dim as f64).sqrt();
        d1 = (d1 / dim as f64).sqrt();
        let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        h0 = h0.min(t_end - t0).min(self.max_step);

        for i in 0..dim {
            ws.y_stage[i] = y0[i] + h0 * f0[i];
        }
        sys.rhs(t0 + h0, &ws.y_stage, &mut ws.y_new);
        *n_rhs += 1;
        let mut d2 = 0.0;
        for i in 0..dim {
            let sk = self.abs_tol + self.rel_tol * y0[i].abs();
            let df = (ws.y_new[i] - f0[i]) / sk;
            d2 += df * df;
        }
        d2 = (d2 / dim as f64).sqrt() / h0;

        let d_max = d1.max(d2);
        let h1 = if d_max <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d_max).powf(0.2)
        };
        (100.0 * h0).min(h1).min(t_end - t0).min(self.max_step)
    }
}

fn dense_eval(rcont: &[DVector<f64>; 5], theta: f64) -> DVector<f64> {
    let theta1 = 1.0 - theta;
    let dim = rcont[0].len();
    DVector::from_fn(dim, |i, _| {
        rcont[0][i]
            + theta
                * (rcont[1][i]
                    + theta1 * (rcont[2][i] + theta * (rcont[3][i] + theta1 * rcont[4][i])))
    })
}

fn first_non_finite(y: &DVector<f64>) -> Option<usize> {
    y.iter().position(|v| !v.is_finite())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::cell::Cell;

    struct Decay;
    impl OdeSystem for Decay {
        fn dim(&self) -> usize {
            1
        }
        fn rhs(&self, _t: f64, y: &DVector<f64>, dydt: &mut DVector<f64>) {
            dydt[0] = -y[0];
        }
    }

    struct Oscillator {
        omega: f64,
    }
    impl OdeSystem for Oscillator {
        fn dim(&self) -> usize {
            2
        }
        fn rhs(&self, _t: f64, y: &DVector<f64>, dydt: &mut DVector<f64>) {
            dydt[0] = y[1];
            dydt[1] = -self.omega * self.omega * y[0];
        }
    }

    /// y' = y², blows up at t = 1 from y(0) = 1.
    struct Blowup;
    impl OdeSystem for Blowup {
        fn dim(&self) -> usize {
            1
        }
        fn rhs(&self, _t: f64, y: &DVector<f64>, dydt: &mut DVector<f64>) {
            dydt[0] = y[0] * y[0];
        }
    }

    #[test]
    fn exponential_decay_matches_closed_form() {
        let solver = Dopri5::with_tolerances(1e-10, 1e-14);
        let y0 = DVector::from_column_slice(&[1.0]);
        let times: Vec<f64> = (0..=20).map(|k| k as f64 * 0.5).collect();
        let sol = solver.solve(&Decay, 0.0, &y0, &times).unwrap();
        for (t, y) in times.iter().zip(&sol.states) {
            assert!((y[0] - (-t).exp()).abs() < 1e-10, "t = {t}");
        }
    }

    #[test]
    fn oscillator_phase_accurate_over_many_periods() {
        let omega = 3.0;
        let solver = Dopri5::with_tolerances(1e-11, 1e-14);
        let y0 = DVector::from_column_slice(&[1.0, 0.0]);
        let t_end = 40.0 * std::f64::consts::PI / omega; // 20 periods
        let times = vec![t_end / 3.0, t_end];
        let sol = solver.solve(&Oscillator { omega }, 0.0, &y0, &times).unwrap();
        for (t, y) in times.iter().zip(&sol.states) {
            assert!((y[0] - (omega * t).cos()).abs() < 1e-8, "t = {t}");
            assert!((y[1] + omega * (omega * t).sin()).abs() < 1e-7, "t = {t}");
        }
    }

    #[test]
    fn dense_output_hits_interior_samples() {
        let solver = Dopri5::with_tolerances(1e-10, 1e-14);
        let y0 = DVector::from_column_slice(&[1.0]);
        // Irregular samples force interpolation inside accepted steps.
        let times = [0.0, 0.013, 0.21, 0.214, 0.99, 1.7, 2.0];
        let sol = solver.solve(&Decay, 0.0, &y0, &times).unwrap();
        for (t, y) in times.iter().zip(&sol.states) {
            assert!((y[0] - (-t).exp()).abs() < 1e-9, "t = {t}");
        }
        assert_eq!(sol.states.len(), times.len());
    }

    #[test]
    fn max_step_cap_is_respected() {
        let solver = Dopri5 { max_step: 1e-3, ..Dopri5::with_tolerances(1e-6, 1e-9) };
        let y0 = DVector::from_column_slice(&[1.0]);
        let sol = solver.solve(&Decay, 0.0, &y0, &[1.0]).unwrap();
        assert!(sol.max_accepted_step <= 1e-3 + 1e-15);
        assert!(sol.n_accepted >= 1000);
    }

    #[test]
    fn blowup_is_reported_not_hung() {
        let solver = Dopri5 { max_steps: 200_000, ..Dopri5::with_tolerances(1e-8, 1e-12) };
        let y0 = DVector::from_column_slice(&[1.0]);
        let err = solver.solve(&Blowup, 0.0, &y0, &[2.0]).unwrap_err();
        match err {
            OdeError::StepUnderflow { t, .. } | OdeError::NonFinite { t, .. } => {
                assert!((t - 1.0).abs() < 0.05, "reported t = {t}");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn post_step_rejection_surfaces() {
        struct Guarded(Cell<usize>);
        impl OdeSystem for Guarded {
            fn dim(&self) -> usize {
                1
            }
            fn rhs(&self, _t: f64, y: &DVector<f64>, dydt: &mut DVector<f64>) {
                dydt[0] = y[0];
            }
            fn post_step(&self, t: f64, _y: &mut DVector<f64>) -> Result<(), OdeError> {
                self.0.set(self.0.get() + 1);
                if self.0.get() > 3 {
                    Err(OdeError::Rejected { t, reason: "guard tripped".into() })
                } else {
                    Ok(())
                }
            }
        }
        let solver = Dopri5::with_tolerances(1e-9, 1e-12);
        let y0 = DVector::from_column_slice(&[1.0]);
        let err = solver.solve(&Guarded(Cell::new(0)), 0.0, &y0, &[5.0]).unwrap_err();
        assert!(matches!(err, OdeError::Rejected { .. }));
    }

    #[test]
    fn rejects_bad_sample_grids() {
        let solver = Dopri5::default();
        let y0 = DVector::from_column_slice(&[1.0]);
        assert!(matches!(solver.solve(&Decay, 0.0, &y0, &[]), Err(OdeError::BadInput(_))));
        assert!(matches!(
            solver.solve(&Decay, 0.0, &y0, &[1.0, 0.5]),
            Err(OdeError::BadInput(_))
        ));
        assert!(matches!(
            solver.solve(&Decay, 1.0, &y0, &[0.5]),
            Err(OdeError::BadInput(_))
        ));
    }

    #[test]
    fn sample_at_t0_only_returns_initial_state() {
        let solver = Dopri5::default();
        let y0 = DVector::from_column_slice(&[2.5]);
        let sol = solver.solve(&Decay, 0.0, &y0, &[0.0]).unwrap();
        assert_eq!(sol.states.len(), 1);
        assert_eq!(sol.states[0][0], 2.5);
        assert_eq!(sol.n_accepted, 0);
    }
}
