//! Linear generator of the closed moment rate equations.
//!
//! For the full interaction √N·g_c (c + c†)(S⁺ + S⁻) the ten moments of
//! [`MomentVector`] obey d x/dt = A x + b with, writing
//! G = √N g_c and ζ = κ + NΓ,
//!
//! ```text
//! mu1'  =  G eta1 − κ mu1
//! mu2'  =  G eta2 − NΓ mu2
//! eta1' =  2G (1 + 2 mu2 + xi4) + ω̃_a eta3 + ω̃_c eta4 − ζ/2 eta1
//! eta2' =  2G (1 + 2 mu1 + xi2) + ω̃_a eta4 + ω̃_c eta3 − ζ/2 eta2
//! eta3' = −2G (xi1 + xi3) − ω̃_a eta1 − ω̃_c eta2 − ζ/2 eta3
//! eta4' = −ω̃_a eta2 − ω̃_c eta1 − ζ/2 eta4
//! xi1'  =  2G eta4 + 2ω̃_c xi2 − κ xi1
//! xi2'  = −2G eta1 − 2ω̃_c xi1 − κ xi2
//! xi3'  =  2G eta4 + 2ω̃_a xi4 − NΓ xi3
//! xi4'  = −2G eta2 − 2ω̃_a xi3 − NΓ xi4
//! ```
//!
//! The constant source b (nonzero only in the eta1/eta2 rows) comes from the
//! counter-rotating part of the interaction: it is what drives the system out
//! of the joint vacuum without external pumping.
//!
//! [`build_rwa_generator`] holds the rotating-wave variant, derived from the
//! same master equation with the Jaynes-Cummings interaction
//! √N·g_c (c S⁺ + c† S⁻). There the source vanishes identically and the
//! closed sectors are {mu1, mu2, eta1−eta2, eta4−eta3} and
//! {eta1+eta2, eta3+eta4, xi1..xi4}, so from the vacuum nothing ever moves.

use nalgebra::{SMatrix, SVector};

use crate::moments::{MomentVector, MOMENT_COUNT};
use crate::params::SystemParams;

/// 10×10 real generator matrix, entries in s⁻¹.
pub type GenMatrix = SMatrix<f64, MOMENT_COUNT, MOMENT_COUNT>;
/// 10-entry real source vector, entries in s⁻¹.
pub type GenVector = SVector<f64, MOMENT_COUNT>;

// Canonical component indices.
const MU1: usize = 0;
const MU2: usize = 1;
const ETA1: usize = 2;
const ETA2: usize = 3;
const ETA3: usize = 4;
const ETA4: usize = 5;
const XI1: usize = 6;
const XI2: usize = 7;
const XI3: usize = 8;
const XI4: usize = 9;

/// The affine generator d x/dt = A x + b of the moment dynamics, together
/// with the two decay rates needed to turn stationary moments into emission
/// rates and the fingerprint of the parameters it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentGenerator {
    pub a: GenMatrix,
    pub b: GenVector,
    kappa: f64,
    n_gamma: f64,
    params_hash: u64,
}

impl MomentGenerator {
    /// Build the generator matching `params.rotating_wave()`.
    pub fn from_params(params: &SystemParams) -> Self {
        if params.rotating_wave() {
            build_rwa_generator(params)
        } else {
            build_generator(params)
        }
    }

    /// Cavity decay rate κ carried over from the parameters.
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Collective atomic decay rate NΓ carried over from the parameters.
    pub fn n_gamma(&self) -> f64 {
        self.n_gamma
    }

    /// Fingerprint of the generating [`SystemParams`].
    pub fn params_hash(&self) -> u64 {
        self.params_hash
    }

    /// Right-hand side A x + b.
    pub fn rhs(&self, x: &GenVector) -> GenVector {
        self.a * x + self.b
    }

    /// ∞-norm of A (max absolute row sum), a cheap bound on the spectral
    /// radius used to cap integrator steps.
    pub fn infinity_norm(&self) -> f64 {
        (0..MOMENT_COUNT)
            .map(|i| (0..MOMENT_COUNT).map(|j| self.a[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Eigenvalue real parts of A, for stability diagnostics.
    pub fn eigenvalue_real_parts(&self) -> Vec<f64> {
        let dm = nalgebra::DMatrix::from_fn(MOMENT_COUNT, MOMENT_COUNT, |i, j| self.a[(i, j)]);
        dm.complex_eigenvalues().iter().map(|l| l.re).collect()
    }
}

/// Generator of the full model (counter-rotating terms retained).
pub fn build_generator(params: &SystemParams) -> MomentGenerator {
    let g = params.collective_coupling();
    let (wc, wa) = (params.omega_c(), params.omega_a());
    let (kappa, n_gamma) = (params.kappa(), params.n_gamma());
    let half_zeta = 0.5 * params.zeta();

    let mut a = GenMatrix::zeros();
    let mut b = GenVector::zeros();

    a[(MU1, ETA1)] = g;
    a[(MU1, MU1)] = -kappa;

    a[(MU2, ETA2)] = g;
    a[(MU2, MU2)] = -n_gamma;

    b[ETA1] = 2.0 * g;
    a[(ETA1, MU2)] = 4.0 * g;
    a[(ETA1, XI4)] = 2.0 * g;
    a[(ETA1, ETA3)] = wa;
    a[(ETA1, ETA4)] = wc;
    a[(ETA1, ETA1)] = -half_zeta;

    b[ETA2] = 2.0 * g;
    a[(ETA2, MU1)] = 4.0 * g;
    a[(ETA2, XI2)] = 2.0 * g;
    a[(ETA2, ETA4)] = wa;
    a[(ETA2, ETA3)] = wc;
    a[(ETA2, ETA2)] = -half_zeta;

    a[(ETA3, XI1)] = -2.0 * g;
    a[(ETA3, XI3)] = -2.0 * g;
    a[(ETA3, ETA1)] = -wa;
    a[(ETA3, ETA2)] = -wc;
    a[(ETA3, ETA3)] = -half_zeta;

    a[(ETA4, ETA2)] = -wa;
    a[(ETA4, ETA1)] = -wc;
    a[(ETA4, ETA4)] = -half_zeta;

    a[(XI1, ETA4)] = 2.0 * g;
    a[(XI1, XI2)] = 2.0 * wc;
    a[(XI1, XI1)] = -kappa;

    a[(XI2, ETA1)] = -2.0 * g;
    a[(XI2, XI1)] = -2.0 * wc;
    a[(XI2, XI2)] = -kappa;

    a[(XI3, ETA4)] = 2.0 * g;
    a[(XI3, XI4)] = 2.0 * wa;
    a[(XI3, XI3)] = -n_gamma;

    a[(XI4, ETA2)] = -2.0 * g;
    a[(XI4, XI3)] = -2.0 * wa;
    a[(XI4, XI4)] = -n_gamma;

    MomentGenerator { a, b, kappa, n_gamma, params_hash: params.fingerprint() }
}

/// Generator of the rotating-wave variant (Jaynes-Cummings interaction).
///
/// Derived from the master equation with interaction √N g_c (c S⁺ + c† S⁻),
/// not by deleting terms from the full generator. The source vector is
/// identically zero, so the joint vacuum is an exact fixed point and the
/// stationary emission rate vanishes.
pub fn build_rwa_generator(params: &SystemParams) -> MomentGenerator {
    let g = params.collective_coupling();
    let (wc, wa) = (params.omega_c(), params.omega_a());
    let (kappa, n_gamma) = (params.kappa(), params.n_gamma());
    let half_zeta = 0.5 * params.zeta();

    let mut a = GenMatrix::zeros();
    let b = GenVector::zeros();

    a[(MU1, ETA1)] = 0.5 * g;
    a[(MU1, ETA2)] = -0.5 * g;
    a[(MU1, MU1)] = -kappa;

    a[(MU2, ETA1)] = -0.5 * g;
    a[(MU2, ETA2)] = 0.5 * g;
    a[(MU2, MU2)] = -n_gamma;

    a[(ETA1, MU2)] = 2.0 * g;
    a[(ETA1, MU1)] = -2.0 * g;
    a[(ETA1, XI2)] = g;
    a[(ETA1, XI4)] = g;
    a[(ETA1, ETA3)] = wa;
    a[(ETA1, ETA4)] = wc;
    a[(ETA1, ETA1)] = -half_zeta;

    a[(ETA2, MU2)] = -2.0 * g;
    a[(ETA2, MU1)] = 2.0 * g;
    a[(ETA2, XI2)] = g;
    a[(ETA2, XI4)] = g;
    a[(ETA2, ETA4)] = wa;
    a[(ETA2, ETA3)] = wc;
    a[(ETA2, ETA2)] = -half_zeta;

    a[(ETA3, XI1)] = -g;
    a[(ETA3, XI3)] = -g;
    a[(ETA3, ETA1)] = -wa;
    a[(ETA3, ETA2)] = -wc;
    a[(ETA3, ETA3)] = -half_zeta;

    a[(ETA4, XI1)] = -g;
    a[(ETA4, XI3)] = -g;
    a[(ETA4, ETA2)] = -wa;
    a[(ETA4, ETA1)] = -wc;
    a[(ETA4, ETA4)] = -half_zeta;

    a[(XI1, ETA3)] = g;
    a[(XI1, ETA4)] = g;
    a[(XI1, XI2)] = 2.0 * wc;
    a[(XI1, XI1)] = -kappa;

    a[(XI2, ETA1)] = -g;
    a[(XI2, ETA2)] = -g;
    a[(XI2, XI1)] = -2.0 * wc;
    a[(XI2, XI2)] = -kappa;

    a[(XI3, ETA3)] = g;
    a[(XI3, ETA4)] = g;
    a[(XI3, XI4)] = 2.0 * wa;
    a[(XI3, XI3)] = -n_gamma;

    a[(XI4, ETA1)] = -g;
    a[(XI4, ETA2)] = -g;
    a[(XI4, XI3)] = -2.0 * wa;
    a[(XI4, XI4)] = -n_gamma;

    MomentGenerator { a, b, kappa, n_gamma, params_hash: params.fingerprint() }
}

/// Apply the moment map of the generator to a [`MomentVector`]:
/// returns A x + b as a `MomentVector`.
pub fn moment_rhs(gen: &MomentGenerator, x: &MomentVector) -> MomentVector {
    MomentVector::from_svector(&gen.rhs(&x.to_svector()))
}
