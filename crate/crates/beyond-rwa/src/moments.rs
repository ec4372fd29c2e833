//! The ten real second-moment expectation values that close under the
//! dissipative dynamics.
//!
//! With c the cavity and S⁻ the collective atomic annihilation operator, the
//! tracked quantities are
//!
//! ```text
//! mu1 = <c†c>                   mu2 = <S⁺S⁻>
//! eta1 = i<(S⁻ + S⁺)(c − c†)>   eta2 = i<(S⁻ − S⁺)(c + c†)>
//! eta3 = <(S⁻ − S⁺)(c − c†)>    eta4 = <(S⁻ + S⁺)(c + c†)>
//! xi1 = i<c² − c†²>             xi2 = <c² + c†²>
//! xi3 = i<S⁻² − S⁺²>            xi4 = <S⁻² + S⁺²>
//! ```
//!
//! All ten are expectation values of Hermitian operators, hence real. The
//! component order `(mu1, mu2, eta1..eta4, xi1..xi4)` is canonical: the
//! generator matrix, CSV columns and every conversion in this crate use it.

use nalgebra::SVector;

/// Number of tracked moments.
pub const MOMENT_COUNT: usize = 10;

/// Canonical component names, in state order.
pub const MOMENT_NAMES: [&str; MOMENT_COUNT] = [
    "mu1", "mu2", "eta1", "eta2", "eta3", "eta4", "xi1", "xi2", "xi3", "xi4",
];

/// State vector of the moment rate equations, in canonical order.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MomentVector {
    pub mu1: f64,
    pub mu2: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub eta3: f64,
    pub eta4: f64,
    pub xi1: f64,
    pub xi2: f64,
    pub xi3: f64,
    pub xi4: f64,
}

impl MomentVector {
    /// The all-zero vector: both modes in their lowest energy eigenstate.
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_array(values: [f64; MOMENT_COUNT]) -> Self {
        let [mu1, mu2, eta1, eta2, eta3, eta4, xi1, xi2, xi3, xi4] = values;
        Self { mu1, mu2, eta1, eta2, eta3, eta4, xi1, xi2, xi3, xi4 }
    }

    pub fn to_array(self) -> [f64; MOMENT_COUNT] {
        [
            self.mu1, self.mu2, self.eta1, self.eta2, self.eta3, self.eta4, self.xi1, self.xi2,
            self.xi3, self.xi4,
        ]
    }

    pub fn to_svector(self) -> SVector<f64, MOMENT_COUNT> {
        SVector::from(self.to_array())
    }

    pub fn from_svector(v: &SVector<f64, MOMENT_COUNT>) -> Self {
        Self::from_array((*v).into())
    }

    /// Largest absolute difference against another vector, component-wise.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.to_array()
            .iter()
            .zip(other.to_array())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Largest absolute component.
    pub fn max_abs(&self) -> f64 {
        self.to_array().iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// True when every component is finite.
    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

impl From<[f64; MOMENT_COUNT]> for MomentVector {
    fn from(values: [f64; MOMENT_COUNT]) -> Self {
        Self::from_array(values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn array_round_trip_preserves_order() {
        let m = MomentVector::from_array([1., 2., 3., 4., 5., 6., 7., 8., 9., 10.]);
        assert_eq!(m.mu1, 1.0);
        assert_eq!(m.eta1, 3.0);
        assert_eq!(m.xi4, 10.0);
        assert_eq!(m.to_array(), [1., 2., 3., 4., 5., 6., 7., 8., 9., 10.]);
        assert_eq!(MomentVector::from_svector(&m.to_svector()), m);
    }

    #[test]
    fn max_abs_diff_is_component_wise() {
        let a = MomentVector::from_array([0.0; 10]);
        let mut arr = [0.0; 10];
        arr[7] = -3.5;
        let b = MomentVector::from_array(arr);
        assert_eq!(a.max_abs_diff(&b), 3.5);
        assert_eq!(b.max_abs(), 3.5);
    }
}
