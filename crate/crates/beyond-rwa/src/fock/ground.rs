//! Ground-state structure of the closed atom-cavity Hamiltonian.
//!
//! With counter-rotating terms the joint vacuum is not an eigenstate: the
//! ground state acquires an admixture of excited pairs controlled by
//! √N·g_c/ω̃ and becomes entangled between the two modes. In the
//! rotating-wave approximation the vacuum is the exact ground state. Both
//! statements are checked here by dense symmetric eigensolve of the truncated
//! Hamiltonian (real symmetric in the Fock basis by construction).

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::{build_operators, FockConfig, FockError, WaveFunction};
use crate::params::SystemParams;

/// Lowest eigenpair of the closed Hamiltonian plus the two diagnostics the
/// counter-rotating admixture shows up in.
#[derive(Debug, Clone)]
pub struct GroundState {
    /// Lowest eigenvalue, in angular-frequency units (ħ = 1).
    pub energy: f64,
    pub wavefunction: WaveFunction,
    /// |⟨0_c 0_a|E0⟩|.
    pub vacuum_overlap: f64,
    /// Von Neumann entropy (nats) of the reduced cavity state.
    pub entanglement_entropy: f64,
    /// Set when the lowest eigenvalue is numerically degenerate; the lowest
    /// index is reported.
    pub degenerate: bool,
}

/// Dense eigensolve of the closed Hamiltonian selected by the parameter flag
/// (full interaction, or Jaynes-Cummings when `rotating_wave` is set).
/// Dissipation plays no role here.
pub fn ground_state(params: &SystemParams, cfg: &FockConfig) -> Result<GroundState, FockError> {
    let ops = build_operators(params, cfg)?;
    let d = cfg.dim();
    let h = ops.hamiltonian();
    // Real symmetric in this basis; the imaginary parts are identically zero.
    let h_re = DMatrix::from_fn(d, d, |r, c| h[(r, c)].re);

    let scale = h_re.amax().max(1.0);
    let eig = h_re.try_symmetric_eigen(1e-13, 10_000).ok_or(FockError::EigenFailure)?;
    let mut lowest = 0;
    for k in 1..d {
        if eig.eigenvalues[k] < eig.eigenvalues[lowest] {
            lowest = k;
        }
    }
    let energy = eig.eigenvalues[lowest];
    let degenerate = (0..d)
        .any(|k| k != lowest && (eig.eigenvalues[k] - energy).abs() <= 1e-12 * scale);

    let mut vec: Vec<f64> = eig.eigenvectors.column(lowest).iter().copied().collect();
    // canonical sign: largest-magnitude amplitude positive
    let pivot = vec
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .map(|(k, _)| k)
        .unwrap_or(0);
    if vec[pivot] < 0.0 {
        for v in &mut vec {
            *v = -*v;
        }
    }

    let vacuum_overlap = vec[0].abs();
    let entanglement_entropy = cavity_entropy(&vec, cfg);
    let wavefunction = WaveFunction {
        vec: nalgebra::DVector::from_iterator(d, vec.iter().map(|&v| C64::new(v, 0.0))),
        cfg: *cfg,
    };
    Ok(GroundState { energy, wavefunction, vacuum_overlap, entanglement_entropy, degenerate })
}

/// Von Neumann entropy of the reduced cavity state of a pure real state.
fn cavity_entropy(psi: &[f64], cfg: &FockConfig) -> f64 {
    let mut reduced = DMatrix::zeros(cfg.dim_c, cfg.dim_c);
    for m in 0..cfg.dim_c {
        for mp in 0..cfg.dim_c {
            let mut acc = 0.0;
            for n in 0..cfg.dim_a {
                acc += psi[cfg.index(m, n)] * psi[cfg.index(mp, n)];
            }
            reduced[(m, mp)] = acc;
        }
    }
    reduced
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .filter(|&&p| p > 1e-16)
        .map(|&p| -p * p.ln())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decoupled_ground_state_is_vacuum() {
        let p = SystemParams::new(10.0, 7.0, 0.0, 1.0, 1.0, 1.0).unwrap();
        let cfg = FockConfig::new(5, 5).unwrap();
        let gs = ground_state(&p, &cfg).unwrap();
        assert!(gs.energy.abs() < 1e-12);
        assert!((gs.vacuum_overlap - 1.0).abs() < 1e-12);
        assert!(gs.entanglement_entropy.abs() < 1e-12);
    }

    #[test]
    fn rwa_ground_state_is_exactly_vacuum() {
        let p = SystemParams::new(10.0, 10.0, 1.0, 1.0, 1.0, 1.0)
            .unwrap()
            .with_rotating_wave(true);
        let cfg = FockConfig::new(8, 8).unwrap();
        let gs = ground_state(&p, &cfg).unwrap();
        assert!(gs.energy.abs() < 1e-10);
        assert!((gs.vacuum_overlap - 1.0).abs() < 1e-10, "overlap {}", gs.vacuum_overlap);
        assert!(gs.entanglement_entropy < 1e-10);
    }

    #[test]
    fn counter_rotating_terms_entangle_and_lower_the_ground_state() {
        let p = SystemParams::new(10.0, 10.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        let cfg = FockConfig::new(8, 8).unwrap();
        let gs = ground_state(&p, &cfg).unwrap();
        assert!(gs.energy < -1e-4, "energy {}", gs.energy);
        assert!(gs.vacuum_overlap < 1.0);
        assert!(gs.entanglement_entropy > 1e-5, "entropy {}", gs.entanglement_entropy);
        assert!(!gs.degenerate);
    }

    #[test]
    fn overlap_deficit_matches_perturbation_theory() {
        // leading admixture |11> with amplitude √N g_c/(ω̃_a + ω̃_c)
        let g = 0.05;
        let p = SystemParams::new(10.0, 10.0, g, 1.0, 1.0, 1.0).unwrap();
        let cfg = FockConfig::new(8, 8).unwrap();
        let gs = ground_state(&p, &cfg).unwrap();
        let deficit = 1.0 - gs.vacuum_overlap * gs.vacuum_overlap;
        let eps = g / 20.0;
        assert!(
            (deficit - eps * eps).abs() < 0.1 * eps * eps,
            "deficit {deficit:e} vs {:.3e}",
            eps * eps
        );
        let pair = gs.wavefunction.amplitude(1, 1).re;
        assert!((pair.abs() - eps).abs() < 0.1 * eps, "pair amplitude {pair:e}");
    }
}
