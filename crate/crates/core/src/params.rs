use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Restoration strategy applied between diffusion intervals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Plain,
    Static,
    Dynamic,
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plain" => Ok(Mode::Plain),
            "static" => Ok(Mode::Static),
            "dynamic" => Ok(Mode::Dynamic),
            _ => Err(Error::InvalidParameter(format!("unknown mode {s:?}"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Plain => "plain",
            Mode::Static => "static",
            Mode::Dynamic => "dynamic",
        })
    }
}

/// Block integrator used for each diffusion interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integrator {
    /// Matrix exponentials from a precomputed bank.
    Exact,
    /// Crank-Nicolson with a cyclic tridiagonal solve.
    CrankNicolson,
}

impl FromStr for Integrator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Integrator::Exact),
            "cn" => Ok(Integrator::CrankNicolson),
            _ => Err(Error::InvalidParameter(format!("unknown integrator {s:?}"))),
        }
    }
}

impl fmt::Display for Integrator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Integrator::Exact => "exact",
            Integrator::CrankNicolson => "cn",
        })
    }
}

/// Jump rate matching an angular weight: `beta = alpha * (N / 2pi)^2`.
pub fn beta_from_alpha(alpha: f64, angles: usize) -> f64 {
    let r = angles as f64 / (2.0 * PI);
    alpha * r * r
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionParams {
    /// Number of directions `N`.
    pub angles: usize,
    /// Grid size `M`.
    pub size: usize,
    alpha: f64,
    beta: f64,
    /// Total diffusion time `T`.
    pub time: f64,
    /// Number of restoration intervals `n`.
    pub steps: usize,
    pub epsilon: f64,
    /// Integrator step; defaults to `T / n`.
    pub tau: Option<f64>,
    pub mode: Mode,
    pub integrator: Integrator,
    pub sigma_smooth: f64,
    /// Absolute gradient cutoff; `None` selects `1e-4` times the smoothed value range.
    pub flat_threshold: Option<f64>,
}

impl DiffusionParams {
    pub fn new(size: usize, angles: usize, alpha: f64, time: f64) -> Self {
        Self {
            angles,
            size,
            alpha,
            beta: beta_from_alpha(alpha, angles),
            time,
            steps: 1,
            epsilon: 0.0,
            tau: None,
            mode: Mode::Plain,
            integrator: Integrator::Exact,
            sigma_smooth: 1.0,
            flat_threshold: None,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn set_alpha(&mut self, alpha: f64) {
        self.alpha = alpha;
        self.beta = beta_from_alpha(alpha, self.angles);
    }

    pub fn set_angles(&mut self, angles: usize) {
        self.angles = angles;
        self.beta = beta_from_alpha(self.alpha, angles);
    }

    /// Sets the jump rate directly and back-computes `alpha`.
    pub fn set_beta(&mut self, beta: f64) {
        let r = 2.0 * PI / self.angles as f64;
        self.alpha = beta * r * r;
        self.beta = beta;
    }

    pub fn with_restoration(mut self, mode: Mode, steps: usize, epsilon: f64) -> Self {
        self.mode = mode;
        self.steps = steps;
        self.epsilon = epsilon;
        self
    }

    /// Length of one restoration interval, `T / n`.
    pub fn interval(&self) -> f64 {
        self.time / self.steps as f64
    }

    /// Integrator step: explicit `tau` or the interval length.
    pub fn step(&self) -> f64 {
        self.tau.unwrap_or_else(|| self.interval())
    }

    pub fn validate(&self) -> Result<()> {
        if self.angles < 3 {
            return Err(Error::InvalidParameter(format!("N must be >= 3, got {}", self.angles)));
        }
        if self.size == 0 {
            return Err(Error::InvalidParameter("M must be positive".into()));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("alpha must be > 0, got {}", self.alpha)));
        }
        if !(self.time >= 0.0 && self.time.is_finite()) {
            return Err(Error::InvalidParameter(format!("T must be >= 0, got {}", self.time)));
        }
        if self.steps == 0 {
            return Err(Error::InvalidParameter("n must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::InvalidParameter(format!("epsilon must lie in [0, 1], got {}", self.epsilon)));
        }
        if let Some(tau) = self.tau {
            if !(tau > 0.0 && tau.is_finite()) {
                return Err(Error::InvalidParameter(format!("tau must be > 0, got {tau}")));
            }
        }
        if !(self.sigma_smooth >= 0.0) {
            return Err(Error::InvalidParameter("sigma_smooth must be >= 0".into()));
        }
        let expected = beta_from_alpha(self.alpha, self.angles);
        if (self.beta - expected).abs() > 1e-12 * expected.abs() {
            return Err(Error::Invariant(format!("beta {} does not match alpha (N/2pi)^2 = {expected}", self.beta)));
        }
        Ok(())
    }
}

/// A named parameter regime from the reconstruction table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub alpha: f64,
    pub time: f64,
    pub steps: usize,
    pub epsilon: f64,
    /// Corruption line width in pixels.
    pub line_width: usize,
    /// Corrupted fraction in percent.
    pub corruption_percent: f64,
    /// Static for the fig2 rows, dynamic for the others.
    pub mode: Mode,
}

impl Preset {
    /// Default `M = 256`, `N = 30`.
    pub fn params(&self) -> DiffusionParams {
        DiffusionParams::new(256, 30, self.alpha, self.time).with_restoration(self.mode, self.steps, self.epsilon)
    }
}

const fn preset(
    name: &'static str,
    mode: Mode,
    alpha: f64,
    time: f64,
    steps: usize,
    line_width: usize,
    corruption_percent: f64,
) -> Preset {
    Preset { name, alpha, time, steps, epsilon: 0.5, line_width, corruption_percent, mode }
}

pub const PRESETS: &[Preset] = &[
    preset("fig2-up", Mode::Static, 2.0, 0.8, 200, 3, 37.0),
    preset("fig2-down", Mode::Static, 3.0, 0.2, 200, 3, 37.0),
    preset("fig3-up", Mode::Dynamic, 4.0, 0.2, 200, 3, 37.0),
    preset("fig3-down", Mode::Dynamic, 0.30, 4.0, 160, 3, 37.0),
    preset("fig-e1", Mode::Dynamic, 0.30, 4.0, 160, 3, 67.0),
    preset("fig-e2", Mode::Dynamic, 0.30, 4.0, 160, 4, 58.0),
    preset("fig-e3", Mode::Dynamic, 0.30, 4.0, 160, 5, 65.0),
    preset("fig-e4", Mode::Dynamic, 0.40, 4.0, 120, 5, 69.0),
    preset("fig-e5", Mode::Dynamic, 0.35, 5.0, 160, 6, 67.0),
    preset("fig-e6", Mode::Dynamic, 0.33, 6.0, 180, 7, 68.0),
    preset("fig-e7", Mode::Dynamic, 0.33, 6.0, 250, 8, 43.0),
    preset("fig-e8", Mode::Dynamic, 0.33, 6.0, 250, 8, 53.0),
    preset("fig-e9", Mode::Dynamic, 0.33, 6.0, 250, 10, 41.0),
];

pub fn find_preset(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}
