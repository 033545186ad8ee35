use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Floating-point scalar accepted by every numerical routine in the crate.
///
/// Implemented for `f32` and `f64`. Special functions (normal CDF, erfc) are
/// evaluated in double precision and rounded back, so `f32` gives the same
/// answers to within its own epsilon.
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive {
    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }

    fn machine_epsilon() -> Self;

    fn neg_infinity() -> Self {
        Self::lit(f64::NEG_INFINITY)
    }

    /// Smallest gradient tolerance an iterative solver should ask for.
    fn solver_tol_floor() -> Self {
        Self::machine_epsilon() * Self::lit(100.0)
    }

    /// Clamp a requested tolerance to what the type can resolve.
    fn tol(requested: f64) -> Self {
        let t = Self::lit(requested);
        let floor = Self::solver_tol_floor();
        if t < floor {
            floor
        } else {
            t
        }
    }
}

impl Real for f32 {
    fn machine_epsilon() -> Self {
        f32::EPSILON
    }
}

impl Real for f64 {
    fn machine_epsilon() -> Self {
        f64::EPSILON
    }
}
