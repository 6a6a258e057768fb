//! Scalar abstraction shared by the geometry, phase and Lorentz modules.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Real floating-point scalar: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal, panicking only for non-representable input
    /// (which cannot happen for `f32`/`f64`).
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn two() -> Self {
        Self::one() + Self::one()
    }

    #[inline]
    fn half() -> Self {
        Self::lit(0.5)
    }

    /// `log1p(u + sqrt(u (2 + u)))`, i.e. `arcosh(1 + u)` without the
    /// cancellation near `u = 0`.
    #[inline]
    fn arcosh1p(u: Self) -> Self {
        (u + (u * (Self::two() + u)).sqrt()).ln_1p()
    }
}

impl<T> Real for T where
    T: Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arcosh1p_matches_acosh_away_from_one() {
        for &u in &[0.1_f64, 0.5, 1.0, 3.0, 100.0, 1e6] {
            let a = f64::arcosh1p(u);
            assert!((a - (1.0 + u).acosh()).abs() < 1e-13 * a.max(1.0));
        }
    }

    #[test]
    fn arcosh1p_small_argument() {
        // arcosh(1+u) ~ sqrt(2u) for small u; acosh(1+u) loses all digits here.
        let u = 1e-20_f64;
        let a = f64::arcosh1p(u);
        assert!((a / (2.0 * u).sqrt() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn works_in_single_precision() {
        let a = f32::arcosh1p(0.5);
        assert!((a - 1.5f32.acosh()).abs() < 1e-6);
    }
}
