#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod cylinder;
pub mod error;
pub mod halfspace;
pub mod mortality;
mod overlap;
pub mod params;
pub mod quad;
pub mod roots;
pub mod simulate;
pub mod specfun;

pub use error::{Error, Result};
