#![cfg_attr(not(test), no_std)]
#![cfg_attr(test, allow(unused_imports))]
extern crate alloc;

pub mod check;
pub mod error;
pub mod fft;
pub mod gaussian;
pub mod lift;
pub mod measure;
pub mod poisson;
pub mod riesz;
pub mod rng;
pub mod special;

pub use error::{Error, Result};
