//! Bundled cross-validation suite.
//!
//! Six criteria exercise every route through the crate against an
//! independent one:
//!
//! * **A1** — closed-form rate vs exact linear solve across random draws in
//!   the weak-damping regime.
//! * **A2** — both rates at the reference microcavity parameters against the
//!   published rounded value.
//! * **A3** — moment trajectories vs the truncated-Fock master equation, the
//!   core correctness check.
//! * **A4** — the rotating-wave null result (no vacuum-induced emission).
//! * **A5** — quantum-jump click rates vs the stationary moments.
//! * **A6** — ground-state admixture scaling and entanglement.
//!
//! Each criterion returns a [`CriterionResult`] with one machine-readable
//! line; the `validate` subcommand prints them and exits nonzero on any
//! failure. The acceptance test suite runs the same functions.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::analytic;
use crate::dynamics::{evolve_at, steady_state, Tolerances};
use crate::fock::{
    build_operators, extract_moments, ground_state, lindblad_evolve_at, mcwf_trajectories,
    DensityMatrix, FockConfig, LindbladOptions, McwfOptions, WaveFunction,
};
use crate::generator::{build_generator, MomentGenerator};
use crate::moments::MomentVector;
use crate::params::SystemParams;

/// Reference parameter set: a fiber-based chip microcavity with rubidium
/// atoms on the D2 line and a collectively enhanced ensemble of N = 10⁴.
/// Angular frequencies, s⁻¹.
pub fn reference_params() -> SystemParams {
    SystemParams::new(384.2e12, 384.2e12, 6.1e8, 1.3e10, 1.9e7, 1e4)
        .expect("reference parameters are valid")
}

/// Dimensionless benchmark regime used for oracle comparisons: units of the
/// collective coupling (√N·g_c = 1), with ω̃_c = ω̃_a = 10 and κ = NΓ = 1.
/// Large enough frequency separation to sit qualitatively in the
/// weak-damping regime, small enough for fast dense simulation.
pub fn scaled_benchmark_params() -> SystemParams {
    SystemParams::new(10.0, 10.0, 1.0, 1.0, 1.0, 1.0).expect("benchmark parameters are valid")
}

/// Fock truncation used by the benchmark-regime criteria.
pub fn benchmark_truncation() -> FockConfig {
    FockConfig::new(8, 8).expect("benchmark truncation is valid")
}

/// Test hook: perturb one generator entry before the oracle-equivalence run.
/// A corrupted transcription must make criterion A3 fail.
#[derive(Debug, Clone, Copy)]
pub struct GeneratorCorruption {
    pub row: usize,
    pub col: usize,
    pub delta: f64,
}

/// Outcome of one criterion.
#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: &'static str,
    pub summary: &'static str,
    /// Worst measured value, in the units of `bound`.
    pub measured: f64,
    pub bound: f64,
    pub pass: bool,
    pub detail: String,
}

impl CriterionResult {
    /// One machine-readable line: id, pass/fail, measured, bound, detail.
    pub fn line(&self) -> String {
        format!(
            "{} {} measured={:.6e} bound={:.6e} [{}] {}",
            self.id,
            if self.pass { "PASS" } else { "FAIL" },
            self.measured,
            self.bound,
            self.summary,
            self.detail,
        )
    }
}

/// Criterion selector, used by the CLI to run subsets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CriterionId {
    A1,
    A2,
    A3,
    A4,
    A5,
    A6,
}

impl CriterionId {
    pub const ALL: [CriterionId; 6] = [
        CriterionId::A1,
        CriterionId::A2,
        CriterionId::A3,
        CriterionId::A4,
        CriterionId::A5,
        CriterionId::A6,
    ];

    /// Whether the criterion consumes randomness and therefore needs a seed.
    pub fn stochastic(&self) -> bool {
        matches!(self, CriterionId::A1 | CriterionId::A5)
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "a1" => Some(Self::A1),
            "a2" => Some(Self::A2),
            "a3" => Some(Self::A3),
            "a4" => Some(Self::A4),
            "a5" => Some(Self::A5),
            "a6" => Some(Self::A6),
            _ => None,
        }
    }
}

/// Suite controls. `seed` feeds every stochastic criterion (sub-seeds are
/// derived per criterion); `n_traj` sizes the quantum-jump ensemble.
#[derive(Debug, Clone, Copy)]
pub struct SuiteOptions {
    pub seed: u64,
    pub n_traj: usize,
    pub corrupt: Option<GeneratorCorruption>,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self { seed: 0x2026_0810, n_traj: 10_000, corrupt: None }
    }
}

/// A1: |I_κ(closed form) − I_κ(linear solve)| / I_κ(linear solve) ≤ 1e-2 over
/// ≥ 100 random draws with max(NΓ, √N·g_c, κ) ≤ 1e-3·min(ω̃_a, ω̃_c).
pub fn criterion_a1_analytic_agreement(seed: u64) -> CriterionResult {
    let mut rng = StdRng::seed_from_u64(seed ^ 0xa1);
    let mut worst: f64 = 0.0;
    let mut worst_detail = String::new();
    for _ in 0..120 {
        let wc = 10f64.powf(rng.random_range(0.0..2.0));
        let wa = 10f64.powf(rng.random_range(0.0..2.0));
        let bound = 1e-3 * wc.min(wa);
        let n: f64 = 10f64.powf(rng.random_range(0.0..4.0));
        let n_gamma = bound * 10f64.powf(rng.random_range(-2.0..0.0));
        let coupling = bound * 10f64.powf(rng.random_range(-2.0..0.0));
        let kappa = bound * 10f64.powf(rng.random_range(-2.0..0.0));
        let p = SystemParams::new(wc, wa, coupling / n.sqrt(), kappa, n_gamma / n, n)
            .expect("draw is valid");
        let exact = match steady_state(&build_generator(&p)) {
            Ok(rep) => rep.i_kappa,
            Err(e) => {
                return CriterionResult {
                    id: "A1",
                    summary: "closed form vs exact solve, weak-damping draws",
                    measured: f64::INFINITY,
                    bound: 1e-2,
                    pass: false,
                    detail: format!("linear solve failed: {e}"),
                }
            }
        };
        let formula = analytic::analytic_emission_rate(&p).expect("valid draw").value;
        let rel = (exact - formula).abs() / exact;
        if rel > worst {
            worst = rel;
            worst_detail = format!(
                "worst draw: omega_c={wc:.3e} omega_a={wa:.3e} kappa={kappa:.3e} n_gamma={n_gamma:.3e} coupling={coupling:.3e}"
            );
        }
    }
    CriterionResult {
        id: "A1",
        summary: "closed form vs exact solve, weak-damping draws",
        measured: worst,
        bound: 1e-2,
        pass: worst <= 1e-2,
        detail: format!("120 draws; {worst_detail}"),
    }
}

/// A2: at the reference parameters both the closed form and the exact solve
/// land within 10% of the published rounded 301 s⁻¹; the exact values are
/// recorded in the detail line.
pub fn criterion_a2_headline_rate() -> CriterionResult {
    let p = reference_params();
    let exact = steady_state(&build_generator(&p)).map(|r| r.i_kappa);
    let formula = analytic::analytic_emission_rate(&p).map(|r| r.value);
    let published = 301.0;
    match (exact, formula) {
        (Ok(exact), Ok(formula)) => {
            let dev_exact = (exact - published).abs() / published;
            let dev_formula = (formula - published).abs() / published;
            let measured = dev_exact.max(dev_formula);
            CriterionResult {
                id: "A2",
                summary: "stationary emission rate at reference parameters",
                measured,
                bound: 0.10,
                pass: measured <= 0.10,
                detail: format!(
                    "exact solve I_k = {exact:.7} s^-1, closed form I_k = {formula:.7} s^-1, published {published} s^-1 (rounded; deviation is a documentation note, not a solver defect)"
                ),
            }
        }
        (e, f) => CriterionResult {
            id: "A2",
            summary: "stationary emission rate at reference parameters",
            measured: f64::INFINITY,
            bound: 0.10,
            pass: false,
            detail: format!("evaluation failed: exact {e:?}, formula {f:?}"),
        },
    }
}

/// A3: in the benchmark regime, moment-equation trajectories and the
/// truncated-Fock master equation agree on all ten moments within 1e-6
/// absolute over t ∈ [0, 20] from vacuum.
pub fn criterion_a3_oracle_equivalence(corrupt: Option<GeneratorCorruption>) -> CriterionResult {
    let p = scaled_benchmark_params();
    let cfg = benchmark_truncation();
    let times: Vec<f64> = (0..=200).map(|k| 0.1 * k as f64).collect();

    let mut gen = build_generator(&p);
    let mut detail_prefix = String::new();
    if let Some(c) = corrupt {
        gen.a[(c.row, c.col)] += c.delta;
        detail_prefix = format!("corrupted A[{},{}] by {:+e}; ", c.row, c.col, c.delta);
    }

    let run = || -> Result<f64, String> {
        let traj = evolve_at(&gen, &MomentVector::zero(), &times, Tolerances::default())
            .map_err(|e| e.to_string())?;
        let ops = build_operators(&p, &cfg).map_err(|e| e.to_string())?;
        let rho = lindblad_evolve_at(
            &p,
            &cfg,
            &DensityMatrix::vacuum(&cfg),
            &times,
            &LindbladOptions::default(),
        )
        .map_err(|e| e.to_string())?;
        let mut worst: f64 = 0.0;
        for ((_, r), m) in rho.iter().zip(&traj.states) {
            let oracle = extract_moments(r, &ops).map_err(|e| e.to_string())?;
            worst = worst.max(oracle.max_abs_diff(m));
        }
        Ok(worst)
    };
    match run() {
        Ok(worst) => CriterionResult {
            id: "A3",
            summary: "moment equations vs Fock-space master equation",
            measured: worst,
            bound: 1e-6,
            pass: worst <= 1e-6,
            detail: format!(
                "{detail_prefix}benchmark regime, truncation 8x8, 201 samples on [0, 20]"
            ),
        },
        Err(e) => CriterionResult {
            id: "A3",
            summary: "moment equations vs Fock-space master equation",
            measured: f64::INFINITY,
            bound: 1e-6,
            pass: false,
            detail: format!("{detail_prefix}run failed: {e}"),
        },
    }
}

/// A4: with the rotating-wave interaction, from vacuum: the moment trajectory
/// stays at zero (≤ 1e-12), the oracle density matrix stays at the vacuum
/// projector (trace distance ≤ 1e-10), and the stationary emission rate is
/// exactly zero. `measured` is the worst bound-normalized ratio.
pub fn criterion_a4_rwa_null() -> CriterionResult {
    let p = scaled_benchmark_params().with_rotating_wave(true);
    let cfg = benchmark_truncation();
    let times: Vec<f64> = (0..=80).map(|k| 0.25 * k as f64).collect();

    let run = || -> Result<(f64, String), String> {
        let gen = MomentGenerator::from_params(&p);
        let traj = evolve_at(&gen, &MomentVector::zero(), &times, Tolerances::default())
            .map_err(|e| e.to_string())?;
        let moment_sup = traj
            .states
            .iter()
            .map(MomentVector::max_abs)
            .fold(0.0, f64::max);

        let vac = DensityMatrix::vacuum(&cfg);
        let rho = lindblad_evolve_at(&p, &cfg, &vac, &times, &LindbladOptions::default())
            .map_err(|e| e.to_string())?;
        let dist_sup = rho
            .iter()
            .map(|(_, r)| r.trace_distance(&vac))
            .fold(0.0, f64::max);

        let i_kappa = steady_state(&gen).map_err(|e| e.to_string())?.i_kappa;

        let ratio_moment = moment_sup / 1e-12;
        let ratio_dist = dist_sup / 1e-10;
        let ratio_rate = if i_kappa == 0.0 { 0.0 } else { f64::INFINITY };
        let measured = ratio_moment.max(ratio_dist).max(ratio_rate);
        Ok((
            measured,
            format!(
                "moment sup {moment_sup:.3e} (bound 1e-12), trace distance sup {dist_sup:.3e} (bound 1e-10), I_k = {i_kappa:e} (must be exactly 0)"
            ),
        ))
    };
    match run() {
        Ok((measured, detail)) => CriterionResult {
            id: "A4",
            summary: "rotating-wave null result from vacuum",
            measured,
            bound: 1.0,
            pass: measured <= 1.0,
            detail,
        },
        Err(e) => CriterionResult {
            id: "A4",
            summary: "rotating-wave null result from vacuum",
            measured: f64::INFINITY,
            bound: 1.0,
            pass: false,
            detail: format!("run failed: {e}"),
        },
    }
}

/// A5: the quantum-jump cavity click rate over the stationary window
/// reproduces κ·mu1 within three standard errors, and the total click rate
/// reproduces κ·mu1 + NΓ·mu2 within three standard errors. `measured` is the
/// worst |deviation|/(3·SE).
pub fn criterion_a5_click_consistency(seed: u64, n_traj: usize) -> CriterionResult {
    let p = scaled_benchmark_params();
    let cfg = benchmark_truncation();
    let run = || -> Result<(f64, String), String> {
        let report = steady_state(&build_generator(&p)).map_err(|e| e.to_string())?;
        let expected_cavity = report.i_kappa;
        let expected_total = report.i_kappa + report.i_gamma;

        let opts = McwfOptions {
            t_end: 60.0,
            sample_dt: 0.25,
            n_traj,
            seed: seed ^ 0xa5,
            window_start: 10.0,
        };
        let run = mcwf_trajectories(&p, &cfg, &WaveFunction::vacuum(&cfg), &opts)
            .map_err(|e| e.to_string())?;
        let s = run.stats;
        let ratio_cavity = (s.cavity_rate - expected_cavity).abs() / (3.0 * s.cavity_se);
        let ratio_total = (s.total_rate - expected_total).abs() / (3.0 * s.total_se);
        Ok((
            ratio_cavity.max(ratio_total),
            format!(
                "{n_traj} trajectories, window [10, 60]: cavity {:.4e} +/- {:.1e} vs kappa*mu1 {:.4e}; total {:.4e} +/- {:.1e} vs kappa*mu1 + n_gamma*mu2 {:.4e} ({} cavity / {} atomic clicks)",
                s.cavity_rate,
                s.cavity_se,
                expected_cavity,
                s.total_rate,
                s.total_se,
                expected_total,
                s.cavity_clicks,
                s.atomic_clicks,
            ),
        ))
    };
    match run() {
        Ok((measured, detail)) => CriterionResult {
            id: "A5",
            summary: "quantum-jump click rates vs stationary moments",
            measured,
            bound: 1.0,
            pass: measured <= 1.0,
            detail,
        },
        Err(e) => CriterionResult {
            id: "A5",
            summary: "quantum-jump click rates vs stationary moments",
            measured: f64::INFINITY,
            bound: 1.0,
            pass: false,
            detail: format!("run failed: {e}"),
        },
    }
}

/// A6: the vacuum-overlap deficit of the ground state scales as the square of
/// √N·g_c/ω̃ (log-log slope 2 ± 0.1 over a decade of couplings), and the
/// ground state is entangled (strictly positive entropy) whenever g_c > 0.
pub fn criterion_a6_ground_state_structure() -> CriterionResult {
    let cfg = benchmark_truncation();
    let couplings: Vec<f64> = (0..7)
        .map(|k| 0.02 * (10f64).powf(k as f64 / 6.0))
        .collect();
    let run = || -> Result<(f64, bool, String), String> {
        let mut log_x = Vec::new();
        let mut log_y = Vec::new();
        let mut entangled = true;
        for &g in &couplings {
            let p = SystemParams::new(10.0, 10.0, g, 1.0, 1.0, 1.0).map_err(|e| e.to_string())?;
            let gs = ground_state(&p, &cfg).map_err(|e| e.to_string())?;
            let deficit = 1.0 - gs.vacuum_overlap * gs.vacuum_overlap;
            if deficit <= 0.0 {
                return Err(format!("non-positive deficit {deficit:e} at g = {g}"));
            }
            log_x.push((analytic::ground_state_parameter(&p)).ln());
            log_y.push(deficit.ln());
            entangled &= gs.entanglement_entropy > 0.0;
        }
        let n = log_x.len() as f64;
        let mx = log_x.iter().sum::<f64>() / n;
        let my = log_y.iter().sum::<f64>() / n;
        let sxy: f64 = log_x.iter().zip(&log_y).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = log_x.iter().map(|x| (x - mx) * (x - mx)).sum();
        let slope = sxy / sxx;
        Ok((
            slope,
            entangled,
            format!(
                "couplings {:.3}..{:.3} (decade sweep), slope {slope:.4}, entanglement entropy positive: {entangled}",
                couplings[0],
                couplings[couplings.len() - 1]
            ),
        ))
    };
    match run() {
        Ok((slope, entangled, detail)) => CriterionResult {
            id: "A6",
            summary: "ground-state admixture scaling and entanglement",
            measured: (slope - 2.0).abs(),
            bound: 0.1,
            pass: (slope - 2.0).abs() <= 0.1 && entangled,
            detail,
        },
        Err(e) => CriterionResult {
            id: "A6",
            summary: "ground-state admixture scaling and entanglement",
            measured: f64::INFINITY,
            bound: 0.1,
            pass: false,
            detail: format!("run failed: {e}"),
        },
    }
}

/// Run the selected criteria in order.
pub fn run_suite(criteria: &[CriterionId], opts: &SuiteOptions) -> Vec<CriterionResult> {
    criteria
        .iter()
        .map(|c| match c {
            CriterionId::A1 => criterion_a1_analytic_agreement(opts.seed),
            CriterionId::A2 => criterion_a2_headline_rate(),
            CriterionId::A3 => criterion_a3_oracle_equivalence(opts.corrupt),
            CriterionId::A4 => criterion_a4_rwa_null(),
            CriterionId::A5 => criterion_a5_click_consistency(opts.seed, opts.n_traj),
            CriterionId::A6 => criterion_a6_ground_state_structure(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn criterion_ids_parse_and_classify() {
        assert_eq!(CriterionId::parse("A3"), Some(CriterionId::A3));
        assert_eq!(CriterionId::parse(" a6 "), Some(CriterionId::A6));
        assert_eq!(CriterionId::parse("a7"), None);
        assert!(CriterionId::A1.stochastic());
        assert!(CriterionId::A5.stochastic());
        assert!(!CriterionId::A2.stochastic());
    }

    #[test]
    fn result_line_is_machine_readable() {
        let r = CriterionResult {
            id: "A2",
            summary: "demo",
            measured: 0.07,
            bound: 0.1,
            pass: true,
            detail: "x".into(),
        };
        let line = r.line();
        assert!(line.starts_with("A2 PASS measured=7.0"));
        assert!(line.contains("bound=1.0"));
    }

    #[test]
    fn fast_criteria_pass() {
        assert!(criterion_a2_headline_rate().pass);
        let a4 = criterion_a4_rwa_null();
        assert!(a4.pass, "{}", a4.line());
        let a6 = criterion_a6_ground_state_structure();
        assert!(a6.pass, "{}", a6.line());
    }
}
