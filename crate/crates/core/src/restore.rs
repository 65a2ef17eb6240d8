//! Static and dynamic restoration.
//!
//! Diffusion runs in `n` intervals. After each one, every good column is
//! rescaled so its angular maximum moves toward its initial value by the
//! mixing strength `epsilon`. In dynamic mode the good set also grows: a bad
//! boundary point is promoted once its projected value exceeds the mean over
//! the bad points of its 3x3 neighbourhood.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;

use crate::diffusion::{diffuse, ExponentialBank};
use crate::error::{Error, Result};
use crate::image::{GreyImage, Mask};
use crate::lift::{column_max, project_max};
use crate::params::{DiffusionParams, Integrator, Mode};
use crate::stack::{stack_total_mass, LiftedStack};

#[derive(Debug, Clone, PartialEq)]
pub struct RestorationState {
    pub current: LiftedStack,
    pub initial: LiftedStack,
    pub good: Mask,
    /// Reference maxima `h0`; promoted points take their value at promotion.
    pub reference: Vec<f64>,
    pub interval: usize,
    /// `|G_i|` for `i = 0, 1, ...`.
    pub history: Vec<usize>,
}

impl RestorationState {
    pub fn new(lift0: LiftedStack, good: Mask) -> Result<Self> {
        if good.size() != lift0.size() {
            return Err(Error::Dimension("mask and stack differ in size".into()));
        }
        let reference = column_max(&lift0);
        let history = vec![good.good_count()];
        Ok(Self { current: lift0.clone(), initial: lift0, good, reference, interval: 0, history })
    }
}

/// Rescales good columns by `sigma = (eps h0 + (1 - eps) h) / h`.
///
/// Only non-negative entries are scaled; stencil undershoot is left as is,
/// so the column maximum lands on its target and nothing is amplified below
/// zero. Where `h <= 0` there is nothing to rescale and `sigma = 1`.
pub fn mix(current: &LiftedStack, reference: &[f64], good: &Mask, epsilon: f64) -> Result<LiftedStack> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::InvalidParameter(format!("epsilon must lie in [0, 1], got {epsilon}")));
    }
    let mut out = current.clone();
    out.columns_mut()
        .collect::<Vec<_>>()
        .into_par_iter()
        .zip(reference.par_iter())
        .zip(good.as_slice().par_iter())
        .for_each(|((col, &h0), &is_good)| {
            if !is_good {
                return;
            }
            let h = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if h > 0.0 {
                let sigma = (epsilon * h0 + (1.0 - epsilon) * h) / h;
                col.iter_mut().filter(|v| **v > 0.0).for_each(|v| *v *= sigma);
            }
        });
    Ok(out)
}

impl RestorationState {
    pub fn mix(&self, epsilon: f64) -> Result<LiftedStack> {
        mix(&self.current, &self.reference, &self.good, epsilon)
    }
}

/// Promotes bad boundary points whose value strictly exceeds the mean of `img`
/// over the bad points (centre included) of their periodic 3x3 neighbourhood.
pub fn grow_good_set(img: &GreyImage, prev: &Mask) -> Result<Mask> {
    let m = img.size();
    if prev.size() != m {
        return Err(Error::Dimension("mask and image differ in size".into()));
    }
    let wrap = |a: usize, d: isize| (a as isize + d).rem_euclid(m as isize) as usize;
    let promote: Vec<bool> = (0..m * m)
        .into_par_iter()
        .map(|i| {
            let (row, col) = (i / m, i % m);
            if prev.is_good(row, col) {
                return false;
            }
            let (mut has_good, mut sum, mut count) = (false, 0.0, 0usize);
            for dr in -1..=1 {
                for dc in -1..=1 {
                    let (r, c) = (wrap(row, dr), wrap(col, dc));
                    if prev.is_good(r, c) {
                        has_good = true;
                    } else {
                        sum += img.get(r, c);
                        count += 1;
                    }
                }
            }
            has_good && img.get(row, col) > sum / count as f64
        })
        .collect();
    let good = prev.as_slice().iter().zip(&promote).map(|(&g, &p)| g || p).collect();
    Mask::new(m, good)
}

/// One row of the per-interval log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalDiagnostics {
    pub interval: usize,
    pub good_count: usize,
    pub mass: f64,
    pub max_value: f64,
    /// Relative mass change across the diffusion part of the interval.
    pub mass_drift: f64,
    pub imag_residual: f64,
    pub wall_seconds: f64,
}

pub const DIAGNOSTICS_HEADER: &str = "i,good,mass,max,mass_drift,imag_residual,wall_seconds";

/// Diagnostics as CSV with [`DIAGNOSTICS_HEADER`].
pub fn diagnostics_csv(rows: &[IntervalDiagnostics]) -> String {
    let mut out = format!("{DIAGNOSTICS_HEADER}\n");
    for d in rows {
        writeln!(
            out,
            "{},{},{:.12e},{:.12e},{:.3e},{:.3e},{:.6}",
            d.interval, d.good_count, d.mass, d.max_value, d.mass_drift, d.imag_residual, d.wall_seconds
        )
        .unwrap();
    }
    out
}

/// Same rows without the timing column; identical across runs and thread counts.
pub fn diagnostics_csv_untimed(rows: &[IntervalDiagnostics]) -> String {
    let header = DIAGNOSTICS_HEADER.rsplit_once(',').map_or(DIAGNOSTICS_HEADER, |(h, _)| h);
    let mut out = format!("{header}\n");
    for d in rows {
        writeln!(
            out,
            "{},{},{:.12e},{:.12e},{:.3e},{:.3e}",
            d.interval, d.good_count, d.mass, d.max_value, d.mass_drift, d.imag_residual
        )
        .unwrap();
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct RestorationOutput {
    pub stack: LiftedStack,
    pub good: Mask,
    pub history: Vec<usize>,
    pub diagnostics: Vec<IntervalDiagnostics>,
}

fn make_bank(p: &DiffusionParams) -> Result<Option<ExponentialBank>> {
    let dt = p.interval();
    if p.integrator != Integrator::Exact || dt == 0.0 {
        return Ok(None);
    }
    Ok(Some(ExponentialBank::new(p, p.tau.unwrap_or(dt))?))
}

fn run(
    lift0: &LiftedStack,
    mask: &Mask,
    p: &DiffusionParams,
    mode: Mode,
    bank: Option<&ExponentialBank>,
) -> Result<RestorationOutput> {
    p.validate()?;
    if lift0.size() != p.size || lift0.angles() != p.angles {
        return Err(Error::Dimension("stack shape does not match the parameters".into()));
    }
    let owned;
    let bank = match bank {
        Some(b) => Some(b),
        None => {
            owned = make_bank(p)?;
            owned.as_ref()
        }
    };
    let mut state = RestorationState::new(lift0.clone(), mask.clone())?;
    let dt = p.interval();
    let mut diagnostics = Vec::with_capacity(p.steps);
    for i in 1..=p.steps {
        let start = Instant::now();
        let (evolved, stats) = diffuse(&state.current, dt, p, bank)?;
        state.current = evolved;
        if mode == Mode::Dynamic {
            let projected = project_max(&state.current, None)?;
            let grown = grow_good_set(&projected, &state.good)?;
            let h = column_max(&state.current);
            for (k, (&was, &is)) in state.good.as_slice().iter().zip(grown.as_slice()).enumerate() {
                if is && !was {
                    state.reference[k] = h[k];
                }
            }
            state.good = grown;
        }
        if mode != Mode::Plain {
            state.current = state.mix(p.epsilon)?;
        }
        state.interval = i;
        state.history.push(state.good.good_count());
        let max_value = state.current.values().iter().copied().fold(f64::NEG_INFINITY, f64::max);
        diagnostics.push(IntervalDiagnostics {
            interval: i,
            good_count: state.good.good_count(),
            mass: stack_total_mass(&state.current),
            max_value,
            mass_drift: stats.relative_mass_drift(),
            imag_residual: stats.imag_residual,
            wall_seconds: start.elapsed().as_secs_f64(),
        });
    }
    Ok(RestorationOutput { stack: state.current, good: state.good, history: state.history, diagnostics })
}

/// Diffusion for `T` in `n` intervals with no restoration.
pub fn plain_run(
    lift0: &LiftedStack,
    p: &DiffusionParams,
    bank: Option<&ExponentialBank>,
) -> Result<RestorationOutput> {
    run(lift0, &Mask::all_good(lift0.size()), p, Mode::Plain, bank)
}

/// Static restoration: alternate `evolve(T/n)` and [`mix`] on the fixed good set.
pub fn sr_run(
    lift0: &LiftedStack,
    mask: &Mask,
    p: &DiffusionParams,
    bank: Option<&ExponentialBank>,
) -> Result<RestorationOutput> {
    run(lift0, mask, p, Mode::Static, bank)
}

/// Dynamic restoration: evolve, project, grow the good set, mix.
pub fn dr_run(
    lift0: &LiftedStack,
    mask: &Mask,
    p: &DiffusionParams,
    bank: Option<&ExponentialBank>,
) -> Result<RestorationOutput> {
    run(lift0, mask, p, Mode::Dynamic, bank)
}

/// Dispatches on `p.mode`.
pub fn restore(
    lift0: &LiftedStack,
    mask: &Mask,
    p: &DiffusionParams,
    bank: Option<&ExponentialBank>,
) -> Result<RestorationOutput> {
    match p.mode {
        Mode::Plain => plain_run(lift0, p, bank),
        Mode::Static => sr_run(lift0, mask, p, bank),
        Mode::Dynamic => dr_run(lift0, mask, p, bank),
    }
}
