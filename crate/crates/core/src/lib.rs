//! Discrete-time dynamics of banded unitary operators.

// `!(x > 0.0)` style checks reject NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod banded;
pub mod cmv;
pub mod dynamics;
pub mod error;
pub mod fibonacci;
pub mod io;
pub mod lattice;
pub mod measure;
pub mod qwalk;
pub mod subordinacy;

pub use banded::{BandSource, BandedUnitary};
pub use error::{Error, Result};
pub use lattice::{LatticeVector, Window};
