// `!(x > 0.0)` is used on purpose so that NaN is rejected along with non-positive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod cli;
pub mod error;
pub mod inference;
pub mod mixture_weight;
pub mod models;
pub mod moments;
pub mod sampling;
pub mod specfun;
pub mod stats;

pub use error::{Error, Result};
