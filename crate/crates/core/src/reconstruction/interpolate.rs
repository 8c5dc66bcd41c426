use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use super::fft::signed_freq;
use crate::error::{Error, Result};
use crate::image::{crop, integer_ratio, BandImage};

/// Default Gaussian window width as a fraction of the low-resolution
/// vertical Nyquist frequency.
pub const DEFAULT_SIGMA_FRAC: f64 = 0.5;

/// Spectral zero-padding interpolation along the vertical axis.
///
/// The band's spectrum is zero-padded along the vertical frequency axis to
/// `target_height`, smoothed with `G(k) = exp(-k^2 / (2 sigma^2))` where
/// `sigma = sigma_frac * band.height / 2` (the low-resolution Nyquist in bin
/// units), rescaled by the upsampling factor and transformed back. Only the
/// vertical axis is resampled, so the horizontal transform of a full 2D
/// pipeline cancels and each column is processed independently.
///
/// `target_height` must be `r * band.height` where `r = dy / dx`. A factor of 1
/// returns the band unchanged. `sigma_frac = f64::INFINITY` disables the window.
pub fn fourier_interpolate(band: &BandImage, target_height: usize, sigma_frac: f64) -> Result<BandImage> {
    let h = band.height();
    if target_height < h {
        return Err(Error::InvalidParameter(format!(
            "target height {target_height} is smaller than source height {h}"
        )));
    }
    if !target_height.is_multiple_of(h) {
        return Err(Error::InvalidParameter(format!(
            "target height {target_height} is not an integer multiple of {h}"
        )));
    }
    let r = target_height / h;
    match integer_ratio(band.dy_um() / band.dx_um()) {
        Some(ratio) if ratio == r => {}
        _ => {
            return Err(Error::InvalidParameter(format!(
                "upsampling by {r} does not match the pixel aspect dy/dx = {}",
                band.dy_um() / band.dx_um()
            )))
        }
    }
    if !(sigma_frac > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "sigma_frac must be positive, got {sigma_frac}"
        )));
    }
    if r == 1 {
        return Ok(band.clone());
    }

    let w = band.width();
    let big = target_height;
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(h);
    let inv = planner.plan_fft_inverse(big);

    // Column-major copy so each column is one contiguous FFT chunk.
    let mut cols = vec![Complex64::new(0.0, 0.0); w * h];
    for y in 0..h {
        for (x, &v) in band.row(y).iter().enumerate() {
            cols[x * h + y] = Complex64::new(v as f64, 0.0);
        }
    }
    fwd.process(&mut cols);

    let sigma = sigma_frac * h as f64 / 2.0;
    let gain: Vec<f64> = (0..h)
        .map(|i| {
            let k = signed_freq(i, h) as f64;
            r as f64 * (-k * k / (2.0 * sigma * sigma)).exp()
        })
        .collect();

    let nyquist = h.is_multiple_of(2).then_some(h / 2);
    let mut padded = vec![Complex64::new(0.0, 0.0); w * big];
    for x in 0..w {
        let src = &cols[x * h..(x + 1) * h];
        let dst = &mut padded[x * big..(x + 1) * big];
        for i in 0..h {
            let k = signed_freq(i, h);
            let v = src[i] * gain[i];
            if Some(i) == nyquist {
                // The unpaired Nyquist bin is shared between +h/2 and -h/2.
                dst[h / 2] += v * 0.5;
                dst[big - h / 2] += v * 0.5;
            } else {
                dst[k.rem_euclid(big as isize) as usize] = v;
            }
        }
    }
    inv.process(&mut padded);

    let norm = 1.0 / big as f64;
    let mut pixels = vec![0f32; w * big];
    for x in 0..w {
        for y in 0..big {
            pixels[y * w + x] = (padded[x * big + y].re * norm) as f32;
        }
    }
    BandImage::new(
        w,
        big,
        band.dx_um(),
        band.dx_um(),
        band.wavenumber_cm1(),
        pixels,
    )
}

/// Interpolates a row-decimated band back onto a square grid of
/// `target_height` rows.
///
/// When `target_height` is not a multiple of the decimation factor the band is
/// interpolated to the next multiple and the trailing rows are dropped.
pub fn upsample_to_height(band: &BandImage, target_height: usize, sigma_frac: f64) -> Result<BandImage> {
    let r = integer_ratio(band.dy_um() / band.dx_um()).ok_or_else(|| {
        Error::InvalidParameter(format!(
            "dy/dx = {} is not an integer",
            band.dy_um() / band.dx_um()
        ))
    })?;
    let full = r * band.height();
    if full < target_height || band.height() != target_height.div_ceil(r) {
        return Err(Error::InvalidParameter(format!(
            "a {}-row band at factor {r} cannot cover {target_height} rows",
            band.height()
        )));
    }
    let up = fourier_interpolate(band, full, sigma_frac)?;
    if full == target_height {
        Ok(up)
    } else {
        crop(&up, 0, 0, up.width(), target_height)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sparse(w: usize, h: usize, r: usize, f: impl Fn(usize, usize) -> f32) -> BandImage {
        let px = (0..w * h).map(|i| f(i % w, i / w)).collect();
        BandImage::new(w, h, 0.5, 0.5 * r as f64, 1236.0, px).unwrap()
    }

    #[test]
    fn shape_contract() {
        let b = sparse(100, 20, 5, |x, y| (x + y) as f32);
        let up = fourier_interpolate(&b, 100, DEFAULT_SIGMA_FRAC).unwrap();
        assert_eq!(up.dims(), (100, 100));
        assert_eq!(up.dy_um(), up.dx_um());
    }

    #[test]
    fn constant_is_preserved() {
        for (h, r) in [(7, 3), (8, 5), (16, 10)] {
            let b = sparse(5, h, r, |_, _| 0.75);
            let up = fourier_interpolate(&b, h * r, DEFAULT_SIGMA_FRAC).unwrap();
            assert!(up.pixels().iter().all(|&v| (v - 0.75).abs() < 1e-6));
        }
    }

    #[test]
    fn rejects_bad_targets() {
        let b = sparse(4, 6, 3, |_, _| 1.0);
        assert!(fourier_interpolate(&b, 5, 0.5).is_err());
        assert!(fourier_interpolate(&b, 13, 0.5).is_err());
        // Factor 2 conflicts with the recorded 3x pixel aspect.
        assert!(fourier_interpolate(&b, 12, 0.5).is_err());
        assert!(fourier_interpolate(&b, 18, 0.0).is_err());
    }

    #[test]
    fn factor_one_is_identity() {
        let b = sparse(4, 6, 1, |x, y| (x * y) as f32);
        assert_eq!(fourier_interpolate(&b, 6, 0.5).unwrap(), b);
    }

    #[test]
    fn upsample_crops_to_target() {
        // 256 rows at factor 6 -> 43 sparse rows -> 258 interpolated rows.
        let b = sparse(8, 43, 6, |x, y| (x + 2 * y) as f32);
        let up = upsample_to_height(&b, 256, 0.5).unwrap();
        assert_eq!(up.height(), 256);
        assert!(upsample_to_height(&b, 300, 0.5).is_err());
    }
}
