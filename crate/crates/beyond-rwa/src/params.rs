//! Physical parameters of the dissipative atom-cavity system.
//!
//! The model is a collective bosonic atomic mode (N tightly confined atoms,
//! coupling enhanced by √N) interacting with a single cavity mode. Both modes
//! leak into the surrounding radiation field: the cavity at rate κ, the
//! collective atomic excitation at rate NΓ. All frequencies and rates are
//! *angular* and carried in s⁻¹.

use thiserror::Error;

/// Rejection reasons for [`SystemParams`] construction. Each variant names the
/// offending field.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("{field} must be finite, got {value}")]
    NonFinite { field: &'static str, value: f64 },
    #[error("{field} must be strictly positive, got {value}")]
    NonPositive { field: &'static str, value: f64 },
    #[error("{field} must be non-negative, got {value}")]
    Negative { field: &'static str, value: f64 },
    #[error("n_atoms must be at least 1, got {value}")]
    AtomCount { value: f64 },
}

/// Validated parameter set of the atom-cavity system.
///
/// Instances can only be built through [`SystemParams::new`], so holding a
/// `SystemParams` is proof that all sign/finiteness invariants hold and that
/// the combined decay scale ζ = κ + NΓ has been computed. The struct is `Copy`
/// and immutable; every operation downstream is a pure function of it.
///
/// `n_atoms` is kept as a positive real ≥ 1: the collective-mode equations
/// only ever see √N·g_c and N·Γ, which are well defined for non-integer N,
/// and parameter sweeps over N on logarithmic grids stay exact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    omega_c: f64,
    omega_a: f64,
    g_c: f64,
    kappa: f64,
    gamma: f64,
    n_atoms: f64,
    rotating_wave: bool,
    zeta: f64,
}

fn require_finite(field: &'static str, value: f64) -> Result<f64, ParamError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(ParamError::NonFinite { field, value })
    }
}

impl SystemParams {
    /// Validate and construct a parameter set. The rotating-wave flag defaults
    /// to `false` (full interaction including counter-rotating terms); use
    /// [`with_rotating_wave`](Self::with_rotating_wave) to flip it.
    ///
    /// Rejects non-finite values, non-positive frequencies, negative rates and
    /// `n_atoms < 1`, naming the offending field.
    pub fn new(
        omega_c: f64,
        omega_a: f64,
        g_c: f64,
        kappa: f64,
        gamma: f64,
        n_atoms: f64,
    ) -> Result<Self, ParamError> {
        for (field, value) in [
            ("omega_c", omega_c),
            ("omega_a", omega_a),
            ("g_c", g_c),
            ("kappa", kappa),
            ("gamma", gamma),
            ("n_atoms", n_atoms),
        ] {
            require_finite(field, value)?;
        }
        if omega_c <= 0.0 {
            return Err(ParamError::NonPositive { field: "omega_c", value: omega_c });
        }
        if omega_a <= 0.0 {
            return Err(ParamError::NonPositive { field: "omega_a", value: omega_a });
        }
        if g_c < 0.0 {
            return Err(ParamError::Negative { field: "g_c", value: g_c });
        }
        if kappa < 0.0 {
            return Err(ParamError::Negative { field: "kappa", value: kappa });
        }
        if gamma < 0.0 {
            return Err(ParamError::Negative { field: "gamma", value: gamma });
        }
        if n_atoms < 1.0 {
            return Err(ParamError::AtomCount { value: n_atoms });
        }
        Ok(Self {
            omega_c,
            omega_a,
            g_c,
            kappa,
            gamma,
            n_atoms,
            rotating_wave: false,
            zeta: kappa + n_atoms * gamma,
        })
    }

    /// Select the rotating-wave-approximation variant of the model.
    pub fn with_rotating_wave(mut self, rwa: bool) -> Self {
        self.rotating_wave = rwa;
        self
    }

    /// Bare cavity angular frequency ω̃_c, s⁻¹.
    pub fn omega_c(&self) -> f64 {
        self.omega_c
    }

    /// Bare atomic angular frequency ω̃_a, s⁻¹.
    pub fn omega_a(&self) -> f64 {
        self.omega_a
    }

    /// Single-atom atom-cavity coupling g_c, s⁻¹.
    pub fn g_c(&self) -> f64 {
        self.g_c
    }

    /// Cavity decay rate κ, s⁻¹.
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Single-atom spontaneous decay rate Γ, s⁻¹.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Atom number N.
    pub fn n_atoms(&self) -> f64 {
        self.n_atoms
    }

    /// Whether the rotating-wave (Jaynes-Cummings) interaction is selected.
    pub fn rotating_wave(&self) -> bool {
        self.rotating_wave
    }

    /// Combined decay scale ζ = κ + NΓ, s⁻¹ (cached at validation).
    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    /// Collectively enhanced coupling √N·g_c, s⁻¹.
    pub fn collective_coupling(&self) -> f64 {
        self.n_atoms.sqrt() * self.g_c
    }

    /// Collective atomic decay rate NΓ, s⁻¹.
    pub fn n_gamma(&self) -> f64 {
        self.n_atoms * self.gamma
    }

    /// Atom-cavity detuning ω̃_a − ω̃_c, s⁻¹.
    pub fn detuning(&self) -> f64 {
        self.omega_a - self.omega_c
    }

    /// Rescale every rate and frequency by `s > 0` (N and the RWA flag are
    /// untouched). Useful for running the stiffly scaled optical-frequency
    /// regime in well-conditioned units.
    pub fn scaled_by(&self, s: f64) -> Result<Self, ParamError> {
        require_finite("scale", s)?;
        if s <= 0.0 {
            return Err(ParamError::NonPositive { field: "scale", value: s });
        }
        Ok(Self::new(
            self.omega_c * s,
            self.omega_a * s,
            self.g_c * s,
            self.kappa * s,
            self.gamma * s,
            self.n_atoms,
        )?
        .with_rotating_wave(self.rotating_wave))
    }

    /// Stable FNV-1a hash of the parameter values, used to stamp trajectories
    /// and output files with the parameter set that generated them.
    pub fn fingerprint(&self) -> u64 {
        const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
        const PRIME: u64 = 0x0000_0100_0000_01b3;
        let mut h = OFFSET;
        let mut eat = |bytes: &[u8]| {
            for &b in bytes {
                h ^= u64::from(b);
                h = h.wrapping_mul(PRIME);
            }
        };
        for v in [
            self.omega_c,
            self.omega_a,
            self.g_c,
            self.kappa,
            self.gamma,
            self.n_atoms,
        ] {
            eat(&v.to_le_bytes());
        }
        eat(&[u8::from(self.rotating_wave)]);
        h
    }
}
