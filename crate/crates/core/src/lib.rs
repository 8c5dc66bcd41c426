//! Sparse hyperspectral band reconstruction.
//!
//! Bands acquired on every `r`-th scan row are interpolated along the slow
//! axis in the Fourier domain and sharpened by substituting the fine curvelet
//! scales of a fully sampled reference band. The crate also provides the
//! phantom generator, acquisition-time model, quality metrics and a random
//! forest pixel classifier used to evaluate the reconstructions.

pub mod acquisition;
pub mod classifier;
pub mod error;
pub mod evaluation;
pub mod image;
pub mod pipeline;
pub mod reconstruction;

pub use error::{Error, Result};
