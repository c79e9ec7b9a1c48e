#![allow(clippy::needless_range_loop)]

pub mod curvature;
pub mod defcomplex;
pub mod error;
pub mod expr;
pub mod formula;
pub mod jets;
pub mod metrics;
pub mod obstruction;
pub mod tensor;
pub mod tractor;
pub mod verify;

pub use error::{Error, Result};
