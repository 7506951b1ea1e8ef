//! Nonlocal biharmonic model on the unit interval and square.
//!
//! The nonlocal energy is discretized with piecewise multi-cubic finite
//! elements. The Gaussian kernel is separable, so every inner integral reduces
//! to products of 1D Gaussian–polynomial moments that are evaluated in closed
//! form; only the outer integrals use quadrature.

pub mod assembly;
pub mod error;
pub mod experiment;
pub mod kernel;
pub mod mesh;
pub mod problems;
pub mod quadrature;
pub mod solve;

pub use error::{Error, Result};
