//! Lifting grey images to orientation stacks and projecting back.
//!
//! Each good pixel's value is placed in the angle slot nearest to its level
//! line direction (gradient plus a quarter turn, modulo pi). Pixels without a
//! usable gradient spread their value evenly over all directions; corrupted
//! pixels lift to zero.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftDirection;

use crate::diffusion::dft::fft2;
use crate::error::{Error, Result};
use crate::image::{GreyImage, Mask};
use crate::params::DiffusionParams;
use crate::stack::LiftedStack;

fn signed_frequency(j: usize, m: usize) -> f64 {
    if 2 * j <= m {
        j as f64
    } else {
        j as f64 - m as f64
    }
}

fn to_spectrum(img: &GreyImage) -> Vec<Complex64> {
    let mut plane: Vec<Complex64> = img.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft2(&mut plane, img.size(), FftDirection::Forward);
    plane
}

fn from_spectrum(mut plane: Vec<Complex64>, m: usize) -> (Vec<f64>, f64) {
    fft2(&mut plane, m, FftDirection::Inverse);
    let residual = plane.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
    (plane.iter().map(|c| c.re).collect(), residual)
}

/// Periodic Gaussian smoothing: the spectrum is multiplied by
/// `exp(-2 pi^2 sigma^2 |xi|^2)` with `xi` the signed frequency over `M`.
pub fn smooth(img: &GreyImage, sigma: f64) -> Result<GreyImage> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!("sigma must be >= 0, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(img.clone());
    }
    let m = img.size();
    let mut spec = to_spectrum(img);
    for ky in 0..m {
        let fy = signed_frequency(ky, m) / m as f64;
        for kx in 0..m {
            let fx = signed_frequency(kx, m) / m as f64;
            spec[ky * m + kx] *= (-2.0 * PI * PI * sigma * sigma * (fx * fx + fy * fy)).exp();
        }
    }
    let (values, _) = from_spectrum(spec, m);
    // the smoothed field is a convex combination up to rounding
    let values = values.into_iter().map(|v| v.clamp(0.0, 1.0)).collect();
    let mut out = GreyImage::new(m, values)?;
    if let Some(mask) = img.mask() {
        out = out.with_mask(mask.clone())?;
    }
    Ok(out.with_provenance(img.provenance.clone()))
}

/// Per-pixel gradient `(g_x, g_y)`; `x` runs along columns, `y` along rows.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientField {
    size: usize,
    gx: Vec<f64>,
    gy: Vec<f64>,
}

impl GradientField {
    pub fn new(size: usize, gx: Vec<f64>, gy: Vec<f64>) -> Result<Self> {
        if gx.len() != size * size || gy.len() != size * size {
            return Err(Error::Dimension("gradient components must be M x M".into()));
        }
        if gx.iter().chain(&gy).any(|v| !v.is_finite()) {
            return Err(Error::Invariant("gradient contains non-finite values".into()));
        }
        Ok(Self { size, gx, gy })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn gx(&self) -> &[f64] {
        &self.gx
    }

    pub fn gy(&self) -> &[f64] {
        &self.gy
    }

    pub fn get(&self, row: usize, col: usize) -> (f64, f64) {
        let i = row * self.size + col;
        (self.gx[i], self.gy[i])
    }

    pub fn magnitude(&self) -> Vec<f64> {
        self.gx.iter().zip(&self.gy).map(|(x, y)| x.hypot(*y)).collect()
    }
}

/// Spectral derivative with the central-difference symbols `i sqrt(M) sin(2 pi k / M)`.
pub fn gradient(img: &GreyImage) -> Result<GradientField> {
    let m = img.size();
    let spec = to_spectrum(img);
    let root = (m as f64).sqrt();
    let sym: Vec<f64> = (0..m).map(|k| root * crate::diffusion::spectral_symbol(k, m)).collect();
    let mut dx = spec.clone();
    let mut dy = spec;
    for ky in 0..m {
        for kx in 0..m {
            let i = ky * m + kx;
            dx[i] *= Complex64::new(0.0, sym[kx]);
            dy[i] *= Complex64::new(0.0, sym[ky]);
        }
    }
    let (gx, rx) = from_spectrum(dx, m);
    let (gy, ry) = from_spectrum(dy, m);
    let scale = gx.iter().chain(&gy).fold(1.0f64, |a, v| a.max(v.abs()));
    if rx.max(ry) > 1e-10 * scale {
        return Err(Error::Invariant(format!("gradient has imaginary residue {}", rx.max(ry))));
    }
    GradientField::new(m, gx, gy)
}

/// Quantized level-line direction of one pixel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Flat,
    /// 0-based index `r` of `e_r = r pi / N`.
    Angle(usize),
}

/// Nearest projective angle index for a level-line angle, ties to the smaller index.
pub fn nearest_angle_index(theta: f64, n: usize) -> usize {
    let theta = theta.rem_euclid(PI);
    let u = theta * n as f64 / PI;
    let base = u.floor();
    let r = if u - base > 0.5 { base as usize + 1 } else { base as usize };
    r % n
}

/// Level-line direction `atan2(g_y, g_x) + pi/2 (mod pi)` on the projective grid.
pub fn quantize_direction(gf: &GradientField, n: usize, flat_threshold: f64) -> Result<Vec<Direction>> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("N must be >= 3, got {n}")));
    }
    Ok(gf
        .gx
        .iter()
        .zip(&gf.gy)
        .map(|(&gx, &gy)| {
            if gx.hypot(gy) > flat_threshold {
                Direction::Angle(nearest_angle_index(gy.atan2(gx) + PI / 2.0, n))
            } else {
                Direction::Flat
            }
        })
        .collect())
}

/// Default flat cutoff: `1e-4` of the value range.
pub fn default_flat_threshold(smoothed: &GreyImage) -> f64 {
    let (lo, hi) = smoothed.values().iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    1e-4 * (hi - lo)
}

/// Smooth, differentiate, quantize, then place each good value in its direction slot.
pub fn lift(img: &GreyImage, p: &DiffusionParams) -> Result<LiftedStack> {
    let m = img.size();
    let n = p.angles;
    if m != p.size {
        return Err(Error::Dimension(format!("image is {m}x{m} but M = {}", p.size)));
    }
    let smoothed = smooth(img, p.sigma_smooth)?;
    let threshold = p.flat_threshold.unwrap_or_else(|| default_flat_threshold(&smoothed));
    let dirs = quantize_direction(&gradient(&smoothed)?, n, threshold)?;
    let mask = img.good_mask();
    let mut values = vec![0.0; m * m * n];
    values.par_chunks_mut(n).enumerate().for_each(|(i, col)| {
        if !mask.as_slice()[i] {
            return;
        }
        let f = img.values()[i];
        match dirs[i] {
            Direction::Angle(r) => col[r] = f,
            Direction::Flat => col.iter_mut().for_each(|c| *c = f / n as f64),
        }
    });
    LiftedStack::new(m, n, values)
}

/// Linear interpolation percentile of an unsorted sample, `q` in `[0, 100]`.
pub fn percentile(values: &[f64], q: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let pos = q / 100.0 * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Some(v[lo] + (pos - lo as f64) * (v[hi] - v[lo]))
}

/// Reference grey levels for the post-projection rescale.
#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub good: Mask,
    pub low: f64,
    pub high: f64,
}

impl Calibration {
    /// 1st and 99th percentiles of `img` over its good pixels.
    pub fn from_image(img: &GreyImage) -> Option<Self> {
        let good = img.good_mask();
        let sample: Vec<f64> = img.values().iter().zip(good.as_slice()).filter_map(|(&v, &g)| g.then_some(v)).collect();
        Some(Self { low: percentile(&sample, 1.0)?, high: percentile(&sample, 99.0)?, good })
    }

    /// Maps the good-pixel 1st/99th percentiles of `values` onto the reference
    /// ones and clips to `[0, 1]`. A degenerate spread leaves values unscaled.
    pub fn apply(&self, values: &mut [f64]) {
        let sample: Vec<f64> = values.iter().zip(self.good.as_slice()).filter_map(|(&v, &g)| g.then_some(v)).collect();
        if let (Some(lo), Some(hi)) = (percentile(&sample, 1.0), percentile(&sample, 99.0)) {
            if hi - lo > 1e-12 {
                let gain = (self.high - self.low) / (hi - lo);
                values.iter_mut().for_each(|v| *v = self.low + gain * (*v - lo));
            }
        }
        values.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));
    }
}

fn finish(values: Vec<f64>, m: usize, calibration: Option<&Calibration>) -> Result<GreyImage> {
    let mut values: Vec<f64> = values.into_iter().map(|v| v.max(0.0)).collect();
    match calibration {
        Some(c) => c.apply(&mut values),
        None => values.iter_mut().for_each(|v| *v = v.min(1.0)),
    }
    GreyImage::new(m, values)
}

/// `max_r psi^r`, clipped below at 0, then optionally rescaled.
///
/// Without a calibration the result is only clipped to `[0, 1]`.
pub fn project_max(s: &LiftedStack, calibration: Option<&Calibration>) -> Result<GreyImage> {
    let values = s.columns().map(|c| c.iter().copied().fold(f64::NEG_INFINITY, f64::max)).collect();
    finish(values, s.size(), calibration)
}

/// Mean over `r`, with the same clipping and rescale as [`project_max`].
pub fn project_mean(s: &LiftedStack, calibration: Option<&Calibration>) -> Result<GreyImage> {
    let n = s.angles() as f64;
    let values = s.columns().map(|c| c.iter().sum::<f64>() / n).collect();
    finish(values, s.size(), calibration)
}

/// Unclipped `max_r psi^r` per pixel.
pub fn column_max(s: &LiftedStack) -> Vec<f64> {
    s.columns().map(|c| c.iter().copied().fold(f64::NEG_INFINITY, f64::max)).collect()
}
