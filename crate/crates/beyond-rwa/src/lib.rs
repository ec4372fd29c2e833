//! Dissipative dynamics of a collective atom-cavity system beyond the
//! rotating-wave approximation.
//!
//! N tightly confined atoms in an optical cavity behave as a bosonic
//! collective mode coupled to the cavity field with strength √N·g_c. Keeping
//! the counter-rotating interaction terms, the joint vacuum is no longer
//! stationary under photon-absorbing damping (cavity decay κ, collective
//! atomic decay NΓ): the system settles into a stationary state with a small
//! mean photon number and a nonzero photon emission rate through the cavity
//! mirrors, with no external driving. Dropping the counter-rotating terms
//! (rotating-wave approximation) removes the effect entirely.
//!
//! The crate computes this three independent ways and cross-checks them:
//!
//! * [`generator`] + [`dynamics`] — a closed linear system for ten
//!   second-moment expectation values; trajectories by adaptive integration,
//!   the stationary state by direct solve.
//! * [`analytic`] — the closed-form stationary emission rate valid for
//!   NΓ, √N·g_c, κ ≪ ω̃_a, ω̃_c, plus order-of-magnitude estimates.
//! * [`fock`] — a first-principles truncated Fock-space oracle: master
//!   equation integration, quantum-jump Monte-Carlo unravelling, and
//!   ground-state diagnostics.
//!
//! [`validation`] packages the cross-checks into a pass/fail suite; the `cli`
//! module and the `beyond-rwa` binary expose everything as subcommands. The
//! rendered guide lives in `book/`; its chapters are compiled as doc-tests
//! through [`guide`].
//!
//! All frequencies and rates are angular, in s⁻¹.

pub mod analytic;
pub mod cli;
pub mod dynamics;
pub mod fock;
pub mod generator;
pub mod guide;
pub mod moments;
pub mod ode;
pub mod params;
pub mod validation;

pub use analytic::{analytic_emission_rate, AnalyticPrediction};
pub use dynamics::{emission_rates, evolve, steady_state, EmissionReport, Trajectory};
pub use generator::{build_generator, build_rwa_generator, MomentGenerator};
pub use moments::{MomentVector, MOMENT_COUNT, MOMENT_NAMES};
pub use params::{ParamError, SystemParams};
