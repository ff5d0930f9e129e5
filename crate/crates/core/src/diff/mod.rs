//! Differentiable scalar objectives over flat parameter vectors.

mod objective;
mod params;
mod scalar;
mod tape;

pub use objective::{finite_diff_grad, FnObjective, Objective, ScalarFn, DEFAULT_FD_STEP};
pub use params::{Bounds, ParamGroup, ParamVector};
pub use scalar::Scalar;
pub use tape::{tape_len, value_and_grad, Var};
