//! Scalar abstraction shared by every numerical module.
//!
//! The algebra is written once against [`Real`] and instantiated for `f64`
//! (the default used by the CLI and the JSON layer) and `f32`. Each precision
//! carries its own tolerances.

use nalgebra::RealField;
use num_traits::ToPrimitive;

pub trait Real: RealField + Copy + ToPrimitive {
    /// Relative unit of the eigenvalue zero cutoff `dim · unit · ‖H‖`.
    const CUTOFF_UNIT: f64;
    /// Slack for normalization and positivity checks on states.
    const STATE_TOL: f64;
    /// Slack used when comparing accumulated spectral mass against `1 − ε`.
    const MASS_SLACK: f64;

    #[inline]
    fn of(x: f64) -> Self {
        nalgebra::convert(x)
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn infinity() -> Self {
        Self::of(f64::INFINITY)
    }

    #[inline]
    fn neg_infinity() -> Self {
        Self::of(f64::NEG_INFINITY)
    }

    /// Scale-aware zero cutoff for an operator of dimension `dim` and norm `norm`.
    #[inline]
    fn cutoff(dim: usize, norm: Self) -> Self {
        Self::of(dim as f64 * Self::CUTOFF_UNIT) * norm
    }

    /// `x log₂ x` with the `0 log 0 = 0` convention; nonpositive input maps to zero.
    #[inline]
    fn xlog2x(self) -> Self {
        if self <= Self::zero() {
            Self::zero()
        } else {
            self * self.log2()
        }
    }
}

impl Real for f64 {
    const CUTOFF_UNIT: f64 = 1e-12;
    const STATE_TOL: f64 = 1e-10;
    const MASS_SLACK: f64 = 1e-12;
}

impl Real for f32 {
    const CUTOFF_UNIT: f64 = 2e-6;
    const STATE_TOL: f64 = 1e-4;
    const MASS_SLACK: f64 = 1e-5;
}
