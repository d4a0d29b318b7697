//! Scalar abstraction for probabilities and rewards.
//!
//! Every numerical engine in the crate is generic over [`Real`] so the same
//! code runs in `f64` (the default) or `f32`. Tolerances are associated
//! constants because a sensible slack for `f32` is far wider than for `f64`.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum<Self>
    + FromStr<Err = std::num::ParseFloatError>
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Slack allowed when checking that outgoing probabilities sum to one.
    const ROW_SUM_TOL: Self;
    /// Default convergence threshold for iterative solvers, applied to the
    /// max-norm of successive differences.
    const SOLVE_TOL: Self;

    /// Conversion from `f64`, for thresholds and parsed literals.
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 converts into any Real")
    }
}

impl Real for f64 {
    const ROW_SUM_TOL: Self = 1e-9;
    const SOLVE_TOL: Self = 1e-8;
}

impl Real for f32 {
    const ROW_SUM_TOL: Self = 1e-4;
    const SOLVE_TOL: Self = 1e-5;
}
