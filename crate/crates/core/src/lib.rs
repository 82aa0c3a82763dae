#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod special;

pub use error::{Error, Result};
pub mod radial;
pub mod constants;
pub mod bubbles;
pub mod riesz;
pub mod system;
pub mod transforms;
pub mod linearization;
pub mod cli;
