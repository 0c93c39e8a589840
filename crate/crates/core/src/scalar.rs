// SPDX-License-Identifier: Apache-2.0

//! Numeric traits shared by every module.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, Num, ToPrimitive};

/// Floating point scalar used for continuous environments: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` constant, panicking only for types that cannot hold it.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Absolute slack used when matching a requested time to a grid point.
    fn grid_slack(scale: Self) -> Self {
        Self::epsilon() * Self::lit(64.0) * scale.abs().max(Self::one())
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Entry type for discrete lattice arrays.
///
/// Anything with ring arithmetic and a partial order works, so the discrete
/// isometries can be checked exactly over `i64` or rationals.
pub trait Weight: Num + Copy + PartialOrd + Debug + Send + Sync {}

impl<T> Weight for T where T: Num + Copy + PartialOrd + Debug + Send + Sync {}
