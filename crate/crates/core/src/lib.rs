#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod laws;
pub mod seed;
pub mod sum;

pub use error::{Error, Result};
pub mod engine;
pub mod harness;
pub mod parallel;
pub mod rwalk;
pub mod spine;
pub mod stats;
pub mod thermo;
