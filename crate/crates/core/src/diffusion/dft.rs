use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{FftDirection, FftPlanner};

use crate::error::Result;
use crate::stack::{LiftedStack, SpectralStack};

/// Per-angle 2-D DFT with `1/M` normalization:
/// `hat(psi)[ky][kx] = (1/M) sum psi[y][x] exp(-2 pi i (ky y + kx x) / M)`.
pub fn forward_dft(s: &LiftedStack) -> SpectralStack {
    let (m, n) = (s.size(), s.angles());
    let input: Vec<Complex64> = s.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let out = transform(&input, m, n, FftDirection::Forward);
    SpectralStack::new(m, n, out).expect("shape preserved by the transform")
}

/// Inverse of [`forward_dft`], keeping the real part.
pub fn inverse_dft(s: &SpectralStack) -> LiftedStack {
    inverse_dft_with_residual(s).0
}

/// Inverse transform plus the largest discarded imaginary magnitude.
pub fn inverse_dft_with_residual(s: &SpectralStack) -> (LiftedStack, f64) {
    let (m, n) = (s.size(), s.angles());
    let out = transform(s.values(), m, n, FftDirection::Inverse);
    let residual = out.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
    let real = out.iter().map(|c| c.re).collect();
    (LiftedStack::new(m, n, real).expect("finite input gives finite output"), residual)
}

fn transform(input: &[Complex64], m: usize, n: usize, dir: FftDirection) -> Vec<Complex64> {
    let planes: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|r| {
            let mut plane: Vec<Complex64> = (0..m * m).map(|p| input[p * n + r]).collect();
            fft2(&mut plane, m, dir);
            plane
        })
        .collect();
    let mut out = vec![Complex64::new(0.0, 0.0); m * m * n];
    for (r, plane) in planes.iter().enumerate() {
        for (p, v) in plane.iter().enumerate() {
            out[p * n + r] = *v;
        }
    }
    out
}

/// In-place 2-D transform of one row-major `M x M` plane, scaled by `1/M`.
pub(crate) fn fft2(plane: &mut [Complex64], m: usize, dir: FftDirection) {
    let fft = FftPlanner::new().plan_fft(m, dir);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    fft.process_with_scratch(plane, &mut scratch);
    let mut t = transpose(plane, m);
    fft.process_with_scratch(&mut t, &mut scratch);
    let scale = 1.0 / m as f64;
    for i in 0..m {
        for j in 0..m {
            plane[j * m + i] = t[i * m + j] * scale;
        }
    }
}

fn transpose(a: &[Complex64], m: usize) -> Vec<Complex64> {
    let mut t = vec![Complex64::new(0.0, 0.0); m * m];
    for i in 0..m {
        for j in 0..m {
            t[j * m + i] = a[i * m + j];
        }
    }
    t
}

/// Direct `O(M^4 N)` transform, valid for any `M`.
pub fn forward_dft_reference(s: &LiftedStack) -> SpectralStack {
    let (m, n) = (s.size(), s.angles());
    let input: Vec<Complex64> = s.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    SpectralStack::new(m, n, naive(&input, m, n, -1.0)).expect("shape preserved")
}

pub fn inverse_dft_reference(s: &SpectralStack) -> Result<LiftedStack> {
    let (m, n) = (s.size(), s.angles());
    let out = naive(s.values(), m, n, 1.0);
    LiftedStack::new(m, n, out.iter().map(|c| c.re).collect())
}

fn naive(input: &[Complex64], m: usize, n: usize, sign: f64) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); m * m * n];
    for ky in 0..m {
        for kx in 0..m {
            for y in 0..m {
                for x in 0..m {
                    let phase = sign * 2.0 * PI * ((ky * y + kx * x) % m) as f64 / m as f64;
                    let w = Complex64::from_polar(1.0 / m as f64, phase);
                    for r in 0..n {
                        out[(ky * m + kx) * n + r] += w * input[(y * m + x) * n + r];
                    }
                }
            }
        }
    }
    out
}
