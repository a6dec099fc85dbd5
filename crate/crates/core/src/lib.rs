//! Current statistics of the q-boson zero range process on a ring.

// `!(x > 0.0)` is deliberate: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod numerics;

pub use error::{Error, Result};
pub mod asymptotics;
pub mod cli;
pub mod cumulants;
pub mod oracle;
pub mod simulator;
pub mod stationary;
pub mod tq;
