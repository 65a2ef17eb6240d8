//! Seeded synthetic test data: smooth periodic images and grid corruption masks.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::image::{GreyImage, Mask};

/// Default frequency cutoff of [`smooth_field`].
pub const DEFAULT_BAND: usize = 4;

/// Band-limited periodic field: a sum of low-frequency cosines with random
/// phases, rescaled to `[0.15, 0.95]`.
pub fn smooth_field(size: usize, seed: u64) -> Result<GreyImage> {
    smooth_field_band(size, seed, DEFAULT_BAND)
}

/// [`smooth_field`] with integer frequencies up to radius `band`.
pub fn smooth_field_band(size: usize, seed: u64, band: usize) -> Result<GreyImage> {
    if size == 0 || band == 0 {
        return Err(Error::InvalidParameter("size and band must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_freq = (band as i32).min(size as i32 / 2);
    let mut waves = Vec::new();
    for kx in -max_freq..=max_freq {
        for ky in 0..=max_freq {
            if (ky == 0 && kx <= 0) || kx * kx + ky * ky > max_freq * max_freq {
                continue;
            }
            let amp = rng.gen_range(0.5..1.0) / ((kx * kx + ky * ky) as f64);
            waves.push((kx as f64, ky as f64, amp, rng.gen_range(0.0..2.0 * PI)));
        }
    }
    let m = size as f64;
    let mut raw = vec![0.0; size * size];
    for (i, v) in raw.iter_mut().enumerate() {
        let (y, x) = ((i / size) as f64, (i % size) as f64);
        *v = waves.iter().map(|&(kx, ky, a, ph)| a * (2.0 * PI * (kx * x + ky * y) / m + ph).cos()).sum();
    }
    let (lo, hi) = raw.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let span = if hi > lo { hi - lo } else { 1.0 };
    let values = raw.iter().map(|v| 0.15 + 0.8 * (v - lo) / span).collect();
    Ok(GreyImage::new(size, values)?.with_provenance(format!("synthetic smooth field, seed {seed}")))
}

/// Horizontal and vertical bad lines of `width` pixels, spaced so that the
/// bad fraction is close to `coverage`.
pub fn grid_mask(size: usize, width: usize, coverage: f64) -> Result<Mask> {
    if width == 0 || !(coverage > 0.0 && coverage < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "need width >= 1 and coverage in (0, 1), got {width}, {coverage}"
        )));
    }
    // 1 - (1 - w/s)^2 = coverage
    let spacing = width as f64 / (1.0 - (1.0 - coverage).sqrt());
    let mut on_line = vec![false; size];
    let mut start = 0.0;
    while (start as usize) < size {
        let s = start as usize;
        for v in on_line.iter_mut().skip(s).take(width) {
            *v = true;
        }
        start += spacing;
    }
    let good = (0..size * size).map(|i| !(on_line[i / size] || on_line[i % size])).collect();
    Mask::new(size, good)
}

/// Fraction of bad pixels.
pub fn coverage(mask: &Mask) -> f64 {
    let total = mask.as_slice().len();
    (total - mask.good_count()) as f64 / total as f64
}

/// Zeroes the bad pixels and attaches the mask.
pub fn corrupt(img: &GreyImage, mask: &Mask) -> Result<GreyImage> {
    let values = img.values().iter().zip(mask.as_slice()).map(|(&v, &g)| if g { v } else { 0.0 }).collect();
    Ok(GreyImage::new(img.size(), values)?
        .with_mask(mask.clone())?
        .with_provenance(format!("{} (corrupted)", img.provenance)))
}

/// Peak signal-to-noise ratio in dB with peak value 1.
pub fn psnr(a: &GreyImage, b: &GreyImage) -> Result<f64> {
    if a.size() != b.size() {
        return Err(Error::Dimension("images differ in size".into()));
    }
    let n = a.values().len() as f64;
    let mse = a.values().iter().zip(b.values()).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / n;
    Ok(if mse == 0.0 { f64::INFINITY } else { -10.0 * mse.log10() })
}
