use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Real field underlying every computation: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Lossy for `f32`.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    /// Converts a count or index.
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("representable count")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Builds a complex number from `f64` parts.
pub fn cplx<T: Real>(re: f64, im: f64) -> Complex<T> {
    Complex::new(T::lit(re), T::lit(im))
}

/// Real-valued complex number.
pub fn re<T: Real>(x: f64) -> Complex<T> {
    Complex::new(T::lit(x), T::zero())
}

pub fn is_finite<T: Real>(z: Complex<T>) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// `|a − b| / max(|a|, |b|)`, or `|a − b|` when both are below `floor`.
pub fn rel_err<T: Real>(a: Complex<T>, b: Complex<T>, floor: T) -> T {
    let scale = a.norm().max(b.norm());
    let diff = (a - b).norm();
    if scale <= floor {
        diff
    } else {
        diff / scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn needs_real<T: Real>(x: T) -> T {
        x + T::one()
    }

    #[test]
    fn supports_both_widths() {
        assert_eq!(needs_real(1.0f32), 2.0);
        assert_eq!(needs_real(1.0f64), 2.0);
    }

    #[test]
    fn relative_error_uses_floor_for_tiny_values() {
        let a = cplx::<f64>(1e-20, 0.0);
        let b = cplx::<f64>(0.0, 0.0);
        assert_eq!(rel_err(a, b, 1e-15), 1e-20);
        assert!((rel_err(cplx::<f64>(2.0, 0.0), cplx(1.0, 0.0), 0.0) - 0.5).abs() < 1e-15);
    }
}
