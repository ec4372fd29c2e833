//! Quantum-jump (Monte-Carlo wavefunction) unravelling of the master
//! equation.
//!
//! Each trajectory evolves a pure state with the non-Hermitian conditional
//! Hamiltonian; the squared norm is the no-jump survival probability. A
//! uniform threshold r is drawn, the crossing ‖ψ‖² = r is located, and a jump
//! is applied there: √κ·c (a photon leaves through the cavity mirrors — a
//! cavity click) or √(NΓ)·S⁻ (collective atomic emission), with probabilities
//! proportional to the respective rates. Averaging the renormalized
//! expectation values over trajectories reproduces the density-matrix
//! solution at O(1/√n_traj); the cavity click rate over the stationary window
//! estimates I_κ.
//!
//! Because H_cond is time independent, no-jump evolution is applied *exactly*
//! through precomputed propagators exp(−i·H_cond·Δt/2^k), k = 0..K: one
//! matrix-vector product per sample step, and jump times located by binary
//! subdivision down to Δt/2^K with no integration error at any step size.
//! Per-trajectory randomness comes from one seedable counter-based stream per
//! trajectory index, so results are independent of thread scheduling;
//! ensemble sums are accumulated in fixed chunks for bit-stable reduction.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use super::sparse::CsrMatrix;
use super::{build_operators, FockConfig, FockError, WaveFunction};
use crate::moments::{MomentVector, MOMENT_COUNT};
use crate::params::SystemParams;

/// Which reservoir absorbed the emitted quantum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JumpChannel {
    /// Photon through the cavity mirrors (rate κ).
    Cavity,
    /// Collective atomic emission (rate NΓ).
    Atomic,
}

/// One detected emission event.
#[derive(Debug, Clone, Copy)]
pub struct Click {
    pub time: f64,
    pub channel: JumpChannel,
}

/// Click-rate estimates over the stationary window, with standard errors
/// from the trajectory-to-trajectory spread.
#[derive(Debug, Clone, Copy)]
pub struct ClickStatistics {
    pub window: (f64, f64),
    pub n_traj: usize,
    pub cavity_clicks: u64,
    pub atomic_clicks: u64,
    pub cavity_rate: f64,
    pub cavity_se: f64,
    pub atomic_rate: f64,
    pub atomic_se: f64,
    pub total_rate: f64,
    pub total_se: f64,
}

/// Controls for one ensemble run. `seed` is mandatory: every trajectory
/// derives its own random stream from (seed, trajectory index).
#[derive(Debug, Clone, Copy)]
pub struct McwfOptions {
    pub t_end: f64,
    /// Sampling grid resolution; jump detection is exact regardless.
    pub sample_dt: f64,
    pub n_traj: usize,
    pub seed: u64,
    /// Start of the stationary window used for click-rate estimation.
    pub window_start: f64,
}

/// Ensemble output: averaged moments on the sample grid, per-trajectory
/// click records, and stationary click statistics.
#[derive(Debug, Clone)]
pub struct McwfRun {
    pub times: Vec<f64>,
    pub mean_moments: Vec<MomentVector>,
    pub clicks: Vec<Vec<Click>>,
    pub stats: ClickStatistics,
}

/// Trajectories per reduction chunk; fixed so ensemble sums are identical
/// regardless of how rayon schedules the chunks.
const CHUNK: usize = 32;

struct Propagators {
    /// levels[k] = exp(−i·H_cond·Δt/2^k), k = 0..=k_max
    levels: Vec<DMatrix<C64>>,
    k_max: u32,
}

fn build_propagators(
    h_cond: &DMatrix<C64>,
    dt: f64,
    k_max_floor: u32,
) -> Result<Propagators, FockError> {
    let d = h_cond.nrows();
    let norm_h = (0..d)
        .map(|r| (0..d).map(|c| h_cond[(r, c)].norm()).sum::<f64>())
        .fold(0.0f64, f64::max);
    // Scale until a 4-term Taylor series is exact to double precision.
    let mut k = k_max_floor;
    while norm_h * dt / (1u64 << k) as f64 > 1e-6 {
        k += 1;
        if k > 62 {
            return Err(FockError::BadRequest(
                "sample_dt far too large for these parameters".into(),
            ));
        }
    }
    let delta = dt / (1u64 << k) as f64;
    let m = h_cond * C64::new(0.0, -delta);
    let m2 = &m * &m;
    let m3 = &m2 * &m;
    let m4 = &m3 * &m;
    let mut finest = DMatrix::identity(d, d)
        + &m
        + &m2 * C64::new(0.5, 0.0)
        + &m3 * C64::new(1.0 / 6.0, 0.0)
        + &m4 * C64::new(1.0 / 24.0, 0.0);
    let mut levels = vec![DMatrix::zeros(d, d); k as usize + 1];
    levels[k as usize] = finest.clone();
    for kk in (0..k as usize).rev() {
        finest = &finest * &finest;
        levels[kk] = finest.clone();
    }
    Ok(Propagators { levels, k_max: k })
}

fn norm2(v: &DVector<C64>) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

struct TrajectoryScratch {
    candidate: DVector<C64>,
    jump_buf: Vec<C64>,
}

/// Advance `psi` by the propagator at `level`, locating the first survival
/// threshold crossing by recursive halving. Returns the finest-unit count
/// consumed and whether a crossing was reached. Propagators at equal total
/// duration commute, so the crossing time depends only on the cumulative
/// units, never on how pieces were split.
fn advance_piece(
    props: &Propagators,
    psi: &mut DVector<C64>,
    scratch: &mut TrajectoryScratch,
    level: u32,
    r: f64,
) -> (u64, bool) {
    props.levels[level as usize].mul_to(psi, &mut scratch.candidate);
    if norm2(&scratch.candidate) >= r {
        std::mem::swap(psi, &mut scratch.candidate);
        (1u64 << (props.k_max - level), false)
    } else if level == props.k_max {
        // crossing inside the finest slice: take the post-state
        std::mem::swap(psi, &mut scratch.candidate);
        (1, true)
    } else {
        let (u1, crossed) = advance_piece(props, psi, scratch, level + 1, r);
        if crossed {
            return (u1, true);
        }
        let (u2, crossed) = advance_piece(props, psi, scratch, level + 1, r);
        (u1 + u2, crossed)
    }
}

fn draw_threshold(rng: &mut ChaCha12Rng) -> f64 {
    loop {
        let r: f64 = rng.random();
        if r > 0.0 {
            return r;
        }
    }
}

struct JumpOps {
    c: CsrMatrix,
    s: CsrMatrix,
    kappa: f64,
    n_gamma: f64,
}

fn apply_jump(
    ops: &JumpOps,
    psi: &mut DVector<C64>,
    scratch: &mut TrajectoryScratch,
    rng: &mut ChaCha12Rng,
) -> Result<JumpChannel, FockError> {
    let d = psi.len();
    scratch.jump_buf.resize(d, C64::ZERO);

    ops.c.matvec(psi.as_slice(), &mut scratch.jump_buf);
    let wc = ops.kappa * scratch.jump_buf.iter().map(|z| z.norm_sqr()).sum::<f64>();
    ops.s.matvec(psi.as_slice(), &mut scratch.jump_buf);
    let wa = ops.n_gamma * scratch.jump_buf.iter().map(|z| z.norm_sqr()).sum::<f64>();
    let total = wc + wa;
    if !total.is_finite() || total <= 0.0 {
        return Err(FockError::ZeroNormCollapse);
    }

    let channel = if rng.random::<f64>() * total < wc {
        JumpChannel::Cavity
    } else {
        JumpChannel::Atomic
    };
    let op = match channel {
        JumpChannel::Cavity => &ops.c,
        JumpChannel::Atomic => &ops.s,
    };
    op.matvec(psi.as_slice(), &mut scratch.jump_buf);
    let n = scratch.jump_buf.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if n == 0.0 {
        return Err(FockError::ZeroNormCollapse);
    }
    for (dst, src) in psi.iter_mut().zip(&scratch.jump_buf) {
        *dst = src / C64::new(n, 0.0);
    }
    Ok(channel)
}

struct ChunkOutput {
    moment_sums: Vec<[f64; MOMENT_COUNT]>,
    clicks: Vec<Vec<Click>>,
}

/// Run the quantum-jump ensemble.
pub fn mcwf_trajectories(
    params: &SystemParams,
    cfg: &FockConfig,
    psi0: &WaveFunction,
    opts: &McwfOptions,
) -> Result<McwfRun, FockError> {
    if opts.n_traj == 0 {
        return Err(FockError::BadRequest("n_traj must be at least 1".into()));
    }
    if !opts.t_end.is_finite() || opts.t_end <= 0.0 {
        return Err(FockError::BadRequest("t_end must be positive".into()));
    }
    if !opts.sample_dt.is_finite() || opts.sample_dt <= 0.0 || opts.sample_dt > opts.t_end {
        return Err(FockError::BadRequest("sample_dt must lie in (0, t_end]".into()));
    }
    if !(0.0..opts.t_end).contains(&opts.window_start) {
        return Err(FockError::BadRequest("window_start must lie in [0, t_end)".into()));
    }
    if psi0.config().dim() != cfg.dim() {
        return Err(FockError::BadRequest("initial state truncation mismatch".into()));
    }
    let norm0 = psi0.norm();
    if norm0 == 0.0 {
        return Err(FockError::ZeroNormCollapse);
    }

    let ops = build_operators(params, cfg)?;
    let n_steps = (opts.t_end / opts.sample_dt).round().max(1.0) as usize;
    let dt = opts.t_end / n_steps as f64;
    let times: Vec<f64> = (0..=n_steps).map(|k| dt * k as f64).collect();

    // 2^30 finest units per step: jump times resolved to dt·1e-9 before the
    // Taylor scaling tightens it further.
    let props = build_propagators(&ops.h_cond, dt, 30)?;
    let observables: Vec<CsrMatrix> =
        ops.observables().iter().map(CsrMatrix::from_dense).collect();
    let jump_ops = JumpOps {
        c: CsrMatrix::from_dense(&ops.c),
        s: CsrMatrix::from_dense(&ops.s),
        kappa: ops.kappa(),
        n_gamma: ops.n_gamma(),
    };
    let psi_init = psi0.vec.clone() / C64::new(norm0, 0.0);

    let n_chunks = opts.n_traj.div_ceil(CHUNK);
    let chunk_results: Result<Vec<ChunkOutput>, FockError> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let lo = chunk * CHUNK;
            let hi = ((chunk + 1) * CHUNK).min(opts.n_traj);
            let mut out = ChunkOutput {
                moment_sums: vec![[0.0; MOMENT_COUNT]; times.len()],
                clicks: Vec::with_capacity(hi - lo),
            };
            let mut scratch = TrajectoryScratch {
                candidate: DVector::zeros(cfg.dim()),
                jump_buf: vec![C64::ZERO; cfg.dim()],
            };
            let mut obs_buf = vec![C64::ZERO; cfg.dim()];
            for traj in lo..hi {
                let clicks = run_trajectory(
                    &props,
                    &jump_ops,
                    &observables,
                    &psi_init,
                    opts,
                    traj as u64,
                    dt,
                    n_steps,
                    &mut scratch,
                    &mut obs_buf,
                    &mut out.moment_sums,
                )?;
                out.clicks.push(clicks);
            }
            Ok(out)
        })
        .collect();
    let chunk_results = chunk_results?;

    let mut mean_moments = vec![[0.0; MOMENT_COUNT]; times.len()];
    let mut clicks: Vec<Vec<Click>> = Vec::with_capacity(opts.n_traj);
    for c in chunk_results {
        for (acc, partial) in mean_moments.iter_mut().zip(&c.moment_sums) {
            for i in 0..MOMENT_COUNT {
                acc[i] += partial[i];
            }
        }
        clicks.extend(c.clicks);
    }
    let scale = 1.0 / opts.n_traj as f64;
    let mean_moments: Vec<MomentVector> = mean_moments
        .into_iter()
        .map(|mut arr| {
            for v in &mut arr {
                *v *= scale;
            }
            MomentVector::from_array(arr)
        })
        .collect();

    let stats = click_statistics(&clicks, (opts.window_start, opts.t_end));
    Ok(McwfRun { times, mean_moments, clicks, stats })
}

#[allow(clippy::too_many_arguments)]
fn run_trajectory(
    props: &Propagators,
    jump_ops: &JumpOps,
    observables: &[CsrMatrix],
    psi_init: &DVector<C64>,
    opts: &McwfOptions,
    traj_index: u64,
    dt: f64,
    n_steps: usize,
    scratch: &mut TrajectoryScratch,
    obs_buf: &mut [C64],
    moment_sums: &mut [[f64; MOMENT_COUNT]],
) -> Result<Vec<Click>, FockError> {
    let mut rng = ChaCha12Rng::seed_from_u64(opts.seed);
    rng.set_stream(traj_index + 1);

    let mut psi = psi_init.clone();
    let mut clicks = Vec::new();
    let mut r = draw_threshold(&mut rng);

    accumulate_moments(observables, &psi, obs_buf, &mut moment_sums[0])?;

    let step_units = 1u64 << props.k_max;
    for step in 0..n_steps {
        let t0 = dt * step as f64;
        let mut used = 0u64;
        while used < step_units {
            let remaining = step_units - used;
            // largest binary piece fitting the remaining duration
            let level = props.k_max - (63 - remaining.leading_zeros());
            let (consumed, crossed) = advance_piece(props, &mut psi, scratch, level, r);
            used += consumed;
            if crossed {
                let t_jump = t0 + dt * (used as f64 / step_units as f64);
                let channel = apply_jump(jump_ops, &mut psi, scratch, &mut rng)?;
                clicks.push(Click { time: t_jump, channel });
                r = draw_threshold(&mut rng);
            }
        }
        accumulate_moments(observables, &psi, obs_buf, &mut moment_sums[step + 1])?;
    }
    Ok(clicks)
}

fn accumulate_moments(
    observables: &[CsrMatrix],
    psi: &DVector<C64>,
    obs_buf: &mut [C64],
    acc: &mut [f64; MOMENT_COUNT],
) -> Result<(), FockError> {
    let n2 = norm2(psi);
    if !n2.is_finite() || n2 <= 0.0 {
        return Err(FockError::ZeroNormCollapse);
    }
    for (k, obs) in observables.iter().enumerate() {
        obs.matvec(psi.as_slice(), obs_buf);
        let ev: C64 =
            psi.iter().zip(obs_buf.iter()).map(|(p, o)| p.conj() * o).sum();
        acc[k] += ev.re / n2;
    }
    Ok(())
}

fn click_statistics(clicks: &[Vec<Click>], window: (f64, f64)) -> ClickStatistics {
    let (w0, w1) = window;
    let span = w1 - w0;
    let n = clicks.len();
    let mut cavity_counts = Vec::with_capacity(n);
    let mut atomic_counts = Vec::with_capacity(n);
    for traj in clicks {
        let mut c = 0u64;
        let mut a = 0u64;
        for click in traj {
            if click.time >= w0 && click.time <= w1 {
                match click.channel {
                    JumpChannel::Cavity => c += 1,
                    JumpChannel::Atomic => a += 1,
                }
            }
        }
        cavity_counts.push(c);
        atomic_counts.push(a);
    }
    let rate_se = |counts: &[u64]| -> (f64, f64, u64) {
        let total: u64 = counts.iter().sum();
        let mean = total as f64 / n as f64;
        let var = if n > 1 {
            counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        ((mean / span), (var / n as f64).sqrt() / span, total)
    };
    let (cavity_rate, cavity_se, cavity_clicks) = rate_se(&cavity_counts);
    let (atomic_rate, atomic_se, atomic_clicks) = rate_se(&atomic_counts);
    let totals: Vec<u64> =
        cavity_counts.iter().zip(&atomic_counts).map(|(c, a)| c + a).collect();
    let (total_rate, total_se, _) = rate_se(&totals);
    ClickStatistics {
        window,
        n_traj: n,
        cavity_clicks,
        atomic_clicks,
        cavity_rate,
        cavity_se,
        atomic_rate,
        atomic_se,
        total_rate,
        total_se,
    }
}
