//! Open-boundary fractional Laplacian on a uniform lattice, its periodic
//! (QFT-diagonal) surrogate, and the zero-padded compressed block that
//! restores the open-boundary operator up to a controllable tail.
//!
//! The crate is `no_std` and only needs `alloc`. Everything here is a pure
//! function of its inputs; file formats and the command line live in the
//! `fraclap` crate.
//!
//! Module map:
//!
//! * [`kernel`]: the semi-discrete convolution kernel, its decay envelope and
//!   tail sums.
//! * [`kernel3d`]: the isotropic three-dimensional kernel and its tail bound.
//! * [`lattice`]: Toeplitz targets, circulant surrogates, padding and
//!   compression, residuals and the exact doubled embedding.
//! * [`block_encoding`]: dense simulation of the QFT block-encoding circuit.
//! * [`error_analysis`]: Schur bounds, the padding planner and slope fits.
//! * [`diagnostics`]: functional and Gaussian-state experiments.
#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]
// Guards like `!(x > 0.0)` are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod block_encoding;
pub mod diagnostics;
mod error;
pub mod error_analysis;
pub mod fft;
pub mod kernel;
pub mod kernel3d;
pub mod lattice;
pub mod linalg;
pub mod quadrature;

pub use error::{Error, Result};
pub use kernel::{KernelSpec, KernelTable};
pub use num_complex::Complex64;
pub use nalgebra::DMatrix;
