//! Wrapping-based fast discrete curvelet transform.
//!
//! The unitary 2D spectrum of the image is split into dyadic scales by
//! separable smooth lowpass windows (`lowpass^2 + hipass^2 = 1` at every
//! split), and every intermediate scale is further split into orientation
//! wedges by a smooth angular partition of unity over the pseudo-polar
//! perimeter of the frequency box. The coarsest scale is the remaining lowpass
//! box and the finest scale is a single orientation-free (wavelet-style) band.
//!
//! Each windowed wedge is wrapped onto a small rectangle before the inverse
//! DFT. The rectangle is sized from the wedge's own support: along its primary
//! axis it spans the support, and across it spans the widest line of the
//! support, so the periodization maps support points injectively. Together
//! with the squared windows summing to one at every frequency this makes the
//! transform a tight frame, and the adjoint is the exact inverse.
//!
//! Scale count and orientations follow the usual defaults:
//! `J = max(2, ceil(log2(min(width, height))) - 3)` scales and 16 wedges at
//! the second coarsest scale, doubling every other scale towards the finest.

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use super::fft::{signed_freq, Fft2};
use crate::error::{Error, Result};
use crate::image::BandImage;

/// Minimum image side accepted by the transform.
pub const MIN_SIZE: usize = 32;

const COARSE_ANGLES: usize = 16;

/// Number of scales for an image of the given size.
pub fn scale_count(width: usize, height: usize) -> usize {
    let n = width.min(height).max(2);
    let ceil_log2 = (usize::BITS - (n - 1).leading_zeros()) as usize;
    ceil_log2.saturating_sub(3).max(2)
}

/// Number of orientation wedges at scale `j` of a `nscales` pyramid.
pub fn orientation_count(nscales: usize, j: usize) -> usize {
    if j == 0 || j + 1 >= nscales {
        1
    } else {
        COARSE_ANGLES << (j / 2)
    }
}

/// One wedge of coefficients: a row-major complex grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Wedge {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl Wedge {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::MalformedPyramid(format!(
                "{} coefficients for a {rows}x{cols} wedge",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn energy(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// Curvelet pyramid plus the raster metadata needed to invert it.
///
/// `scales()[0]` is the coarsest (isotropic lowpass) scale and the last scale
/// the finest; each holds its wedges in angular order.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveletCoeffs {
    width: usize,
    height: usize,
    dx_um: f64,
    dy_um: f64,
    wavenumber_cm1: f64,
    scales: Vec<Vec<Wedge>>,
}

impl CurveletCoeffs {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn nscales(&self) -> usize {
        self.scales.len()
    }

    pub fn scales(&self) -> &[Vec<Wedge>] {
        &self.scales
    }

    /// Direct access to the pyramid, e.g. to threshold or splice scales.
    /// [`CurveletTransform::inverse`] re-validates the structure.
    pub fn scales_mut(&mut self) -> &mut Vec<Vec<Wedge>> {
        &mut self.scales
    }

    pub fn energy(&self) -> f64 {
        self.scales.iter().flatten().map(Wedge::energy).sum()
    }

    pub fn scale(&mut self, factor: f64) {
        for c in self.scales.iter_mut().flatten().flat_map(|w| w.data.iter_mut()) {
            *c *= factor;
        }
    }

    /// Replaces scales `from..` with those of `other`.
    pub fn splice_fine_scales(&mut self, other: &CurveletCoeffs, from: usize) -> Result<()> {
        if other.scales.len() != self.scales.len()
            || (other.width, other.height) != (self.width, self.height)
        {
            return Err(Error::MalformedPyramid(
                "pyramids of different geometry cannot be spliced".into(),
            ));
        }
        for j in from..self.scales.len() {
            self.scales[j] = other.scales[j].clone();
        }
        Ok(())
    }
}

struct Tap {
    freq: usize,
    slot: usize,
    weight: f64,
}

struct WedgeLayout {
    rows: usize,
    cols: usize,
    fft: Fft2,
    taps: Vec<Tap>,
}

/// Precomputed windows and wrapping geometry for one image size.
///
/// Building the layout dominates the cost of a single transform, so callers
/// that transform many equally sized bands should build one `CurveletTransform`
/// and reuse it. The value is immutable and can be shared across threads.
pub struct CurveletTransform {
    width: usize,
    height: usize,
    full: Fft2,
    scales: Vec<Vec<WedgeLayout>>,
}

/// Smooth complementary pair on [0, 1]: returns `(rising, falling)` with
/// `rising^2 + falling^2 = 1`, `rising(0) = 0` and `rising(1) = 1`.
fn window_pair(x: f64) -> (f64, f64) {
    let bump = |t: f64| -> f64 {
        if t <= 0.0 {
            0.0
        } else if t >= 1.0 {
            1.0
        } else {
            (1.0 - 1.0 / (1.0 - (1.0 - 1.0 / t).exp())).exp()
        }
    };
    let rise = bump(x);
    let fall = bump(1.0 - x);
    let norm = (rise * rise + fall * fall).sqrt();
    (rise / norm, fall / norm)
}

/// 1D lowpass: flat up to `flat`, falling smoothly to zero at `edge`.
fn lowpass_1d(k: isize, flat: isize, edge: isize) -> f64 {
    let a = k.abs();
    if a <= flat {
        1.0
    } else if a >= edge {
        0.0
    } else {
        window_pair((a - flat) as f64 / (edge - flat) as f64).1
    }
}

/// Position on the perimeter of the unit pseudo-polar square, in [0, 8).
/// Antipodal frequencies sit exactly 4 apart.
fn perimeter_coordinate(u1: f64, u2: f64) -> f64 {
    if u1 > 0.0 && u1 >= u2.abs() {
        1.0 + u2 / u1
    } else if u2 > 0.0 && u2 >= u1.abs() {
        3.0 - u1 / u2
    } else if -u1 >= u2.abs() {
        5.0 + u2 / u1
    } else {
        7.0 - u1 / u2
    }
}

/// Frequencies of one wedge, in signed bin coordinates.
#[derive(Default)]
struct Support {
    points: Vec<(isize, isize, f64)>,
}

impl Support {
    /// Chooses a wrapping rectangle on which the support is injective and
    /// turns the points into taps.
    fn into_layout(self, planner: &mut FftPlanner<f64>, n1: usize, n2: usize) -> WedgeLayout {
        let (rows_a, cols_a) = wrap_extent(self.points.iter().map(|&(a, b, _)| (a, b)));
        let (cols_b, rows_b) = wrap_extent(self.points.iter().map(|&(a, b, _)| (b, a)));
        let (rows, cols) = if rows_b * cols_b < rows_a * cols_a {
            (rows_b, cols_b)
        } else {
            (rows_a, cols_a)
        };
        let taps = self
            .points
            .into_iter()
            .map(|(k1, k2, weight)| Tap {
                freq: k1.rem_euclid(n1 as isize) as usize * n2 + k2.rem_euclid(n2 as isize) as usize,
                slot: k1.rem_euclid(rows as isize) as usize * cols
                    + k2.rem_euclid(cols as isize) as usize,
                weight,
            })
            .collect();
        WedgeLayout {
            rows,
            cols,
            fft: Fft2::new(planner, rows, cols),
            taps,
        }
    }
}

/// Span of the primary coordinate and widest span of the secondary one over
/// lines of constant primary coordinate.
fn wrap_extent(points: impl Iterator<Item = (isize, isize)>) -> (usize, usize) {
    use std::collections::HashMap;
    let mut lines: HashMap<isize, (isize, isize)> = HashMap::new();
    let (mut lo, mut hi) = (isize::MAX, isize::MIN);
    for (p, s) in points {
        lo = lo.min(p);
        hi = hi.max(p);
        let e = lines.entry(p).or_insert((s, s));
        e.0 = e.0.min(s);
        e.1 = e.1.max(s);
    }
    let across = lines.values().map(|&(a, b)| b - a + 1).max().unwrap_or(1);
    ((hi - lo + 1).max(1) as usize, across as usize)
}

impl CurveletTransform {
    pub fn new(width: usize, height: usize) -> Result<Self> {
        if width < MIN_SIZE || height < MIN_SIZE {
            return Err(Error::TooSmall {
                width,
                height,
                min: MIN_SIZE,
            });
        }
        let (n1, n2) = (height, width);
        let nscales = scale_count(width, height);
        let idx = |k1: isize, k2: isize| {
            k1.rem_euclid(n1 as isize) as usize * n2 + k2.rem_euclid(n2 as isize) as usize
        };
        let mut planner = FftPlanner::new();

        // Accumulated product of the lowpass windows applied so far.
        let mut carried = vec![1.0f64; n1 * n2];
        let mut m1 = n1 as f64 / 6.0;
        let mut m2 = n2 as f64 / 6.0;
        let lowpass = |k1: isize, k2: isize, m1: f64, m2: f64| {
            lowpass_1d(k1, m1.floor() as isize, (2.0 * m1).floor() as isize)
                * lowpass_1d(k2, m2.floor() as isize, (2.0 * m2).floor() as isize)
        };

        // Finest scale: everything outside the first lowpass box, plus the
        // complementary hipass inside it.
        let mut box1 = (2.0 * m1).floor() as isize;
        let mut box2 = (2.0 * m2).floor() as isize;
        let mut finest = Support::default();
        for i in 0..n1 {
            let k1 = signed_freq(i, n1);
            for j in 0..n2 {
                let k2 = signed_freq(j, n2);
                let inside = k1.abs() <= box1 && k2.abs() <= box2;
                let w = if inside {
                    let lp = lowpass(k1, k2, m1, m2);
                    carried[idx(k1, k2)] = lp;
                    (1.0 - lp * lp).max(0.0).sqrt()
                } else {
                    1.0
                };
                if w > 0.0 {
                    finest.points.push((k1, k2, w));
                }
            }
        }
        let finest = vec![finest.into_layout(&mut planner, n1, n2)];

        // Intermediate scales, finest first.
        let mut bands = Vec::with_capacity(nscales.saturating_sub(2));
        for j in (1..nscales - 1).rev() {
            m1 /= 2.0;
            m2 /= 2.0;
            let inner1 = (2.0 * m1).floor() as isize;
            let inner2 = (2.0 * m2).floor() as isize;
            let nangles = orientation_count(nscales, j);
            let delta = 8.0 / nangles as f64;
            let mut wedges: Vec<Support> = (0..nangles).map(|_| Support::default()).collect();
            for k1 in -box1..=box1 {
                for k2 in -box2..=box2 {
                    let c = carried[idx(k1, k2)];
                    let radial = if k1.abs() <= inner1 && k2.abs() <= inner2 {
                        let lp = lowpass(k1, k2, m1, m2);
                        carried[idx(k1, k2)] = c * lp;
                        c * (1.0 - lp * lp).max(0.0).sqrt()
                    } else {
                        c
                    };
                    if radial <= 0.0 {
                        continue;
                    }
                    let s = perimeter_coordinate(k1 as f64 / box1 as f64, k2 as f64 / box2 as f64);
                    let p = s / delta;
                    let boundary = (p + 0.5).floor();
                    let (rise, fall) = window_pair(p - boundary + 0.5);
                    let right = (boundary as usize) % nangles;
                    let left = (right + nangles - 1) % nangles;
                    if fall > 0.0 {
                        wedges[left].points.push((k1, k2, radial * fall));
                    }
                    if rise > 0.0 {
                        wedges[right].points.push((k1, k2, radial * rise));
                    }
                }
            }
            bands.push(
                wedges
                    .into_iter()
                    .map(|w| w.into_layout(&mut planner, n1, n2))
                    .collect::<Vec<_>>(),
            );
            box1 = inner1;
            box2 = inner2;
        }

        let mut coarse = Support::default();
        for k1 in -box1..=box1 {
            for k2 in -box2..=box2 {
                let w = carried[idx(k1, k2)];
                if w > 0.0 {
                    coarse.points.push((k1, k2, w));
                }
            }
        }

        let mut scales = Vec::with_capacity(nscales);
        scales.push(vec![coarse.into_layout(&mut planner, n1, n2)]);
        scales.extend(bands.into_iter().rev());
        scales.push(finest);
        debug_assert_eq!(scales.len(), nscales);

        Ok(Self {
            width,
            height,
            full: Fft2::new(&mut planner, n1, n2),
            scales,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn nscales(&self) -> usize {
        self.scales.len()
    }

    /// `(rows, cols)` of every wedge at scale `j`.
    pub fn wedge_shapes(&self, j: usize) -> Vec<(usize, usize)> {
        self.scales[j].iter().map(|w| (w.rows, w.cols)).collect()
    }

    /// Total number of complex coefficients in a pyramid.
    pub fn coefficient_count(&self) -> usize {
        self.scales.iter().flatten().map(|w| w.rows * w.cols).sum()
    }

    /// Sum over all wedges of the squared window at each frequency bin; equal
    /// to one everywhere for a tight frame.
    pub fn window_energy(&self) -> Vec<f64> {
        let mut acc = vec![0.0; self.width * self.height];
        for tap in self.scales.iter().flatten().flat_map(|w| &w.taps) {
            acc[tap.freq] += tap.weight * tap.weight;
        }
        acc
    }

    pub fn forward(&self, img: &BandImage) -> Result<CurveletCoeffs> {
        if img.dims() != (self.width, self.height) {
            return Err(Error::DimensionMismatch {
                expected: (self.width, self.height),
                actual: img.dims(),
            });
        }
        let mut spectrum: Vec<Complex64> = img
            .pixels()
            .iter()
            .map(|&v| Complex64::new(v as f64, 0.0))
            .collect();
        self.full.forward(&mut spectrum);

        let scales = self
            .scales
            .iter()
            .map(|layouts| {
                layouts
                    .par_iter()
                    .map(|w| {
                        let mut buf = vec![Complex64::new(0.0, 0.0); w.rows * w.cols];
                        for t in &w.taps {
                            buf[t.slot] = spectrum[t.freq] * t.weight;
                        }
                        w.fft.inverse(&mut buf);
                        Wedge {
                            rows: w.rows,
                            cols: w.cols,
                            data: buf,
                        }
                    })
                    .collect()
            })
            .collect();

        Ok(CurveletCoeffs {
            width: self.width,
            height: self.height,
            dx_um: img.dx_um(),
            dy_um: img.dy_um(),
            wavenumber_cm1: img.wavenumber_cm1(),
            scales,
        })
    }

    fn validate(&self, coeffs: &CurveletCoeffs) -> Result<()> {
        if (coeffs.width, coeffs.height) != (self.width, self.height) {
            return Err(Error::MalformedPyramid(format!(
                "pyramid for {}x{} given to a {}x{} transform",
                coeffs.width, coeffs.height, self.width, self.height
            )));
        }
        if coeffs.scales.len() != self.scales.len() {
            return Err(Error::MalformedPyramid(format!(
                "{} scales, expected {}",
                coeffs.scales.len(),
                self.scales.len()
            )));
        }
        for (j, (have, want)) in coeffs.scales.iter().zip(&self.scales).enumerate() {
            if have.len() != want.len() {
                return Err(Error::MalformedPyramid(format!(
                    "scale {j} has {} wedges, expected {}",
                    have.len(),
                    want.len()
                )));
            }
            for (l, (h, w)) in have.iter().zip(want).enumerate() {
                if (h.rows, h.cols) != (w.rows, w.cols) || h.data.len() != w.rows * w.cols {
                    return Err(Error::MalformedPyramid(format!(
                        "wedge ({j}, {l}) is {}x{} with {} values, expected {}x{}",
                        h.rows,
                        h.cols,
                        h.data.len(),
                        w.rows,
                        w.cols
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn inverse(&self, coeffs: &CurveletCoeffs) -> Result<BandImage> {
        self.validate(coeffs)?;
        let mut spectrum = vec![Complex64::new(0.0, 0.0); self.width * self.height];
        for (layouts, wedges) in self.scales.iter().zip(&coeffs.scales) {
            let spectra: Vec<Vec<Complex64>> = layouts
                .par_iter()
                .zip(wedges)
                .map(|(layout, wedge)| {
                    let mut buf = wedge.data.clone();
                    layout.fft.forward(&mut buf);
                    buf
                })
                .collect();
            for (layout, buf) in layouts.iter().zip(&spectra) {
                for t in &layout.taps {
                    spectrum[t.freq] += buf[t.slot] * t.weight;
                }
            }
        }
        self.full.inverse(&mut spectrum);
        let pixels = spectrum.iter().map(|c| c.re as f32).collect();
        BandImage::new(
            self.width,
            self.height,
            coeffs.dx_um,
            coeffs.dy_um,
            coeffs.wavenumber_cm1,
            pixels,
        )
    }
}

/// Forward transform with a freshly built layout.
pub fn curvelet_forward(img: &BandImage) -> Result<CurveletCoeffs> {
    CurveletTransform::new(img.width(), img.height())?.forward(img)
}

/// Inverse transform with a freshly built layout.
pub fn curvelet_inverse(coeffs: &CurveletCoeffs) -> Result<BandImage> {
    CurveletTransform::new(coeffs.width, coeffs.height)?.inverse(coeffs)
}
