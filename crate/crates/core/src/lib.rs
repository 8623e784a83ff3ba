//! Traveling waves of the Gatenby-Gawlinski acid-mediated tumor invasion model.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod compare;
pub mod error;
pub mod export;
pub mod fast_wave;
pub mod model;
pub mod numerics;
pub mod ode;
pub mod pde;
pub mod slow_wave;

pub use error::{Error, Result};
