#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fields;
pub mod gaussian;
pub mod geometry;
pub mod kac_rice;

pub use error::{Error, Result};
