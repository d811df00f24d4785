//! Finite p-group engine: collection, Artin transfer patterns, p-group generation,
//! covers and identification of 3-class field tower groups.

// Exponent-vector arithmetic reads best with explicit indices.
#![allow(clippy::needless_range_loop)]

pub mod artin;
pub mod error;
pub mod fields;
pub mod linalg;
pub mod pcgroup;
pub mod pgen;
pub mod snf;
pub mod tower;

pub use error::{Error, Result};
