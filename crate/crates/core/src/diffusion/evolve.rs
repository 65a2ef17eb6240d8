use num_complex::Complex64;
use rayon::prelude::*;

use super::block::{block_signature, ExponentialBank};
use super::dft::{forward_dft, inverse_dft_with_residual};
use crate::error::{Error, Result};
use crate::linalg::{real_matvec, CyclicTridiagonal};
use crate::params::{DiffusionParams, Integrator};
use crate::segroup::AngleGrid;
use crate::stack::{stack_total_mass, LiftedStack, SpectralStack};

/// Number of whole steps of length `tau` in `t`, if it divides within `1e-12` relative.
fn whole_steps(t: f64, tau: f64) -> Option<usize> {
    if t == 0.0 {
        return Some(0);
    }
    if !(tau > 0.0) {
        return None;
    }
    let n = (t / tau).round();
    ((n * tau - t).abs() <= 1e-12 * t && n >= 1.0).then_some(n as usize)
}

fn check_shape(s: &SpectralStack, p: &DiffusionParams) -> Result<()> {
    if s.size() != p.size || s.angles() != p.angles {
        return Err(Error::Dimension(format!(
            "stack is {}x{}x{} but parameters describe {}x{}x{}",
            s.size(),
            s.size(),
            s.angles(),
            p.size,
            p.size,
            p.angles
        )));
    }
    Ok(())
}

/// `hat(psi)_{k,l}(t) = exp(t A_{k,l}) hat(psi)_{k,l}(0)` for every block.
///
/// With a bank of step `tau` the exponential is applied `t / tau` times.
pub fn evolve_exact(
    s: &SpectralStack,
    t: f64,
    p: &DiffusionParams,
    bank: Option<&ExponentialBank>,
) -> Result<SpectralStack> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("evolution time must be >= 0, got {t}")));
    }
    check_shape(s, p)?;
    if t == 0.0 {
        return Ok(s.clone());
    }
    let owned;
    let (bank, reps) = match bank {
        Some(b) => {
            if !b.matches(p) {
                return Err(Error::InvalidParameter("bank was built for other parameters".into()));
            }
            let reps = whole_steps(t, b.tau())
                .ok_or_else(|| Error::InvalidParameter(format!("bank step {} does not divide t = {t}", b.tau())))?;
            (b, reps)
        }
        None => {
            owned = ExponentialBank::new(p, t)?;
            (&owned, 1)
        }
    };
    let (m, n) = (p.size, p.angles);
    let mut out = s.clone();
    out.values_mut().par_chunks_mut(n).enumerate().for_each_init(
        || vec![Complex64::new(0.0, 0.0); n],
        |tmp, (b, block)| {
            let e = bank.block(b / m, b % m);
            for _ in 0..reps {
                real_matvec(e, block, tmp);
                block.copy_from_slice(tmp);
            }
        },
    );
    Ok(out)
}

/// Crank-Nicolson: `(I - tau/2 A) x_new = (I + tau/2 A) x_old`, repeated `t / tau` times.
pub fn evolve_cn(s: &SpectralStack, t: f64, tau: f64, p: &DiffusionParams) -> Result<SpectralStack> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("evolution time must be >= 0, got {t}")));
    }
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::InvalidParameter(format!("tau must be > 0, got {tau}")));
    }
    check_shape(s, p)?;
    let steps =
        whole_steps(t, tau).ok_or_else(|| Error::InvalidParameter(format!("tau = {tau} does not divide t = {t}")))?;
    let (m, n) = (p.size, p.angles);
    let beta = p.beta();
    let mut out = s.clone();
    if steps == 0 {
        return Ok(out);
    }
    // A = (Lambda - M diag(a^2)) / 2 has diagonal -(beta + M a_r^2) / 2 and
    // beta / 4 on both cyclic neighbours
    let cos_sin: Vec<(f64, f64)> = (0..n)
        .map(|r| {
            let (s, c) = AngleGrid::Projective.angle(r, n).sin_cos();
            (c, s)
        })
        .collect();
    out.values_mut().par_chunks_mut(n).enumerate().try_for_each_init(
        || vec![Complex64::new(0.0, 0.0); n],
        |rhs, (b, block)| {
            let (kx, ky) = (b % m, b / m);
            let sig = block_signature(kx, ky, m);
            let sx = super::block::spectral_symbol(sig.base_x as usize, m);
            let sy = super::block::spectral_symbol(sig.base_y as usize, m);
            let sy = if sig.same_sign { sy } else { -sy };
            let diag_a: Vec<f64> = cos_sin
                .iter()
                .map(|&(c, s)| {
                    let a = c * sx + s * sy;
                    0.5 * (-beta - m as f64 * a * a)
                })
                .collect();
            let off = 0.25 * beta;
            let h = 0.5 * tau;
            let explicit = CyclicTridiagonal {
                sub: vec![h * off; n],
                diag: diag_a.iter().map(|d| 1.0 + h * d).collect(),
                sup: vec![h * off; n],
            };
            let implicit = CyclicTridiagonal {
                sub: vec![-h * off; n],
                diag: diag_a.iter().map(|d| 1.0 - h * d).collect(),
                sup: vec![-h * off; n],
            };
            for _ in 0..steps {
                explicit.apply(block, rhs);
                implicit.solve(rhs, block)?;
            }
            Ok::<(), Error>(())
        },
    )?;
    Ok(out)
}

/// Diagnostics from one spectral round trip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionStats {
    pub mass_before: f64,
    pub mass_after: f64,
    /// Largest imaginary magnitude discarded by the inverse transform.
    pub imag_residual: f64,
}

impl EvolutionStats {
    /// `|mass_after - mass_before| / |mass_before|`, or the absolute drift for zero mass.
    pub fn relative_mass_drift(&self) -> f64 {
        let d = (self.mass_after - self.mass_before).abs();
        if self.mass_before.abs() > 0.0 {
            d / self.mass_before.abs()
        } else {
            d
        }
    }
}

/// Forward transform, evolve for `t` with the configured integrator, invert.
pub fn diffuse(
    s: &LiftedStack,
    t: f64,
    p: &DiffusionParams,
    bank: Option<&ExponentialBank>,
) -> Result<(LiftedStack, EvolutionStats)> {
    if t == 0.0 {
        // exact identity, no transform round-off
        let mass = stack_total_mass(s);
        let stats = EvolutionStats { mass_before: mass, mass_after: mass, imag_residual: 0.0 };
        return Ok((s.clone(), stats));
    }
    let spec = forward_dft(s);
    let evolved = match p.integrator {
        Integrator::Exact => evolve_exact(&spec, t, p, bank)?,
        Integrator::CrankNicolson => evolve_cn(&spec, t, p.tau.unwrap_or(t), p)?,
    };
    let (out, imag_residual) = inverse_dft_with_residual(&evolved);
    let stats = EvolutionStats { mass_before: stack_total_mass(s), mass_after: stack_total_mass(&out), imag_residual };
    Ok((out, stats))
}
