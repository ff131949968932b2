//! Local limit theorems driven by characteristic-function convergence.
//!
//! The crate is `no_std` with `alloc`. The optional `std` feature adds a
//! thread-backed executor for the Monte Carlo kernels.
#![no_std]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod arith;
pub mod engine;
pub mod error;
pub mod fourier;
pub mod limits;
pub mod linalg;
pub mod mc;
pub mod numerics;
pub mod scenarios_arithmetic;
pub mod scenarios_classical;
pub mod scenarios_matrix;
pub mod specfun;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Complex scalar used for characteristic-function values.
pub type ComplexValue = Complex64;

/// A point of the plane; one-dimensional laws use the first component.
pub type Point = [f64; 2];
