//! Statics of 2-D block stacks: balance by LP feasibility, spinal and
//! parabolic constructions, conversion of loaded stacks, brick-wall search.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod balance;
pub mod error;
pub mod lp;
pub mod model;
pub mod parabolic;
pub mod scalar;
pub mod search;
pub mod shield;
pub mod spinal;

pub use error::{Error, Result};
pub use model::{Block, Contact, Lower, PointWeight, Stack};
pub use scalar::{Rational, Scalar};
