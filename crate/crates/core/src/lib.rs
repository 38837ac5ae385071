//! Exact and perturbative readout statistics for finite-duration
//! nondemolition measurements with pre- and postselection.

// `!(x > 0.0)` is used on purpose throughout: it rejects NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod exact;
pub mod expansion;
pub mod grid;
pub mod probe;
pub mod spinhalf;
pub mod system;
pub mod verification;

pub use error::{Error, Result};
pub use grid::KGrid;

/// Library version, recorded in output metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
