//! Exact bilinear forms, symplectic matrices and Koszul complexes over
//! commutative rings.
//!
//! Everything here is `no_std` with `alloc`; IO, file formats and the
//! command line live in the companion `formkit` crate.

#![no_std]

extern crate alloc;

pub mod error;
pub mod forms;
pub mod grassmann;
pub mod gw;
pub mod koszul;
pub mod matrix;
pub mod ring;
pub mod sp;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use ring::{Elem, Ring};
