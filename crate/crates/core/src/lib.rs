//! Multiscale inference on qualitative features of a density observed with additive
//! measurement error.
//!
//! Observations `Y = X + ε` are available and the law of `ε` is known through its
//! characteristic function. For a shape-constraint operator (for example `D`, so that
//! `op(p)f = f'`) the crate computes local test statistics over many scale-location
//! pairs `(t, h)`, calibrates their supremum by simulating a distribution-free Gaussian
//! approximation, and turns the result into simultaneous confidence rectangles for
//! `op(p)f` together with derived statements (increases, decreases, roots, modes).

pub mod cli;
pub mod error;
pub mod error_models;
pub mod experiments;
pub mod gaussian_sim;
pub mod inference;
pub mod kernels;
pub mod operators;
pub mod synth;
pub mod teststat;

pub use error::{Error, Result};
