//! Scalar abstraction shared by the geometry and lattice code.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Golden ratio (1 + sqrt 5) / 2.
    const GOLDEN: Self;
    /// Machine-precision aware tolerance for unit-length checks.
    const UNIT_TOLERANCE: Self;

    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable")
    }

    #[inline]
    fn from_index(v: u64) -> Self {
        Self::from_u64(v).expect("index representable")
    }
}

impl Real for f32 {
    const GOLDEN: Self = 1.618_034;
    const UNIT_TOLERANCE: Self = 1e-4;
}

impl Real for f64 {
    const GOLDEN: Self = 1.618_033_988_749_895;
    const UNIT_TOLERANCE: Self = 1e-6;
}
