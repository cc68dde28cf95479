// `!(x > 0.0)` is used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod equilibrium;
pub mod error;
pub mod localstats;
pub mod potential;
pub mod sampler;
pub mod stats;
pub mod validate;
