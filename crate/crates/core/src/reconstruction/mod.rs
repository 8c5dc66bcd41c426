//! Sparse-band reconstruction: vertical Fourier interpolation followed by
//! curvelet-domain fusion with the full-resolution reference band.

pub mod curvelet;
mod fft;
mod fusion;
mod interpolate;

pub use curvelet::{
    curvelet_forward, curvelet_inverse, orientation_count, scale_count, CurveletCoeffs,
    CurveletTransform, Wedge,
};
pub use fusion::{
    equalize_linear, fuse_bands, fuse_with, reconstruct_band, reconstruct_set,
    reconstruct_set_detailed, Cutoff, Equalized, FusionConfig, ReconstructedBand,
};
pub use interpolate::{fourier_interpolate, upsample_to_height, DEFAULT_SIGMA_FRAC};
