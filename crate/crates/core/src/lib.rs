#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]
pub mod acceptance;
pub mod asymptotics;
pub mod darboux;
pub mod endsolver;
pub mod error;
pub mod fixtures;
pub mod functionals;
pub mod greens;
pub mod grid;
pub mod halfspace;
pub mod numerics;
pub mod steiner;

pub use error::{Error, Result};
