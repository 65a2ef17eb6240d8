//! Run configuration: defaults, presets, `key=value` files and flag overrides.
//!
//! Layers apply in the order defaults, preset, config file, command line.
//! [`RunConfig::dump`] writes every key, so feeding the dump back through
//! `--config` reproduces the same configuration.

use std::fmt::Write as _;
use std::path::PathBuf;

use se2n_core::kernel::Quadrature;
use se2n_core::params::{find_preset, PRESETS};
use se2n_core::{DiffusionParams, Integrator, Mode};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub preset: Option<String>,
    pub size: usize,
    pub angles: usize,
    pub alpha: f64,
    pub time: f64,
    pub steps: usize,
    pub epsilon: f64,
    pub mode: Mode,
    pub integrator: Integrator,
    pub tau: Option<f64>,
    pub sigma_smooth: f64,
    pub flat_threshold: Option<f64>,
    pub threads: Option<usize>,
    pub seed: u64,
    pub input: Option<PathBuf>,
    pub mask: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub diagnostics: Option<PathBuf>,
    /// Kernel jump rate; derived from `alpha` when unset.
    pub beta: Option<f64>,
    pub quadrature: Quadrature,
    /// Side of the kernel evaluation grid.
    pub grid: usize,
    pub half_width: f64,
    pub line_width: usize,
    /// Corrupted fraction for synthetic masks, in `[0, 1)`.
    pub coverage: f64,
}

impl Default for RunConfig {
    /// The fig3-down regime at `M = 256`, `N = 30`.
    fn default() -> Self {
        let preset = find_preset("fig3-down").expect("fig3-down is in the preset table");
        let p = preset.params();
        Self {
            preset: None,
            size: p.size,
            angles: p.angles,
            alpha: p.alpha(),
            time: p.time,
            steps: p.steps,
            epsilon: p.epsilon,
            mode: p.mode,
            integrator: p.integrator,
            tau: p.tau,
            sigma_smooth: p.sigma_smooth,
            flat_threshold: p.flat_threshold,
            threads: None,
            seed: 2024,
            input: None,
            mask: None,
            output: None,
            diagnostics: None,
            beta: None,
            quadrature: Quadrature::default(),
            grid: 9,
            half_width: 1.0,
            line_width: preset.line_width,
            coverage: preset.corruption_percent / 100.0,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String> {
    value.trim().parse().map_err(|_| format!("invalid value {value:?} for {key}"))
}

fn optional<T: std::str::FromStr>(key: &str, value: &str) -> Result<Option<T>, String> {
    match value.trim() {
        "" | "auto" | "none" => Ok(None),
        v => parse(key, v).map(Some),
    }
}

fn path(value: &str) -> Option<PathBuf> {
    let v = value.trim();
    (!v.is_empty()).then(|| PathBuf::from(v))
}

fn show<T: ToString>(v: &Option<T>, none: &str) -> String {
    v.as_ref().map_or_else(|| none.to_string(), ToString::to_string)
}

fn show_path(v: &Option<PathBuf>) -> String {
    v.as_ref().map_or_else(String::new, |p| p.display().to_string())
}

/// Splits `key=value` lines; blank lines and `#` comments are skipped.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| format!("line {}: expected key=value", i + 1))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

impl RunConfig {
    /// Builds a configuration from ordered override layers.
    ///
    /// The last `preset` among all layers is applied first; every other key
    /// then applies in order, so later layers win.
    pub fn from_layers(layers: &[Vec<(String, String)>]) -> Result<Self, String> {
        let mut cfg = RunConfig::default();
        let preset = layers.iter().flatten().filter(|(k, _)| k == "preset").map(|(_, v)| v.as_str()).next_back();
        if let Some(name) = preset.filter(|v| !v.is_empty()) {
            cfg.apply_preset(name)?;
        }
        for (k, v) in layers.iter().flatten().filter(|(k, _)| k != "preset") {
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }

    pub fn apply_preset(&mut self, name: &str) -> Result<(), String> {
        let preset = find_preset(name).ok_or_else(|| {
            let names: Vec<&str> = PRESETS.iter().map(|p| p.name).collect();
            format!("unknown preset {name:?}; known: {}", names.join(", "))
        })?;
        let p = preset.params();
        self.preset = Some(name.to_string());
        self.size = p.size;
        self.angles = p.angles;
        self.alpha = p.alpha();
        self.time = p.time;
        self.steps = p.steps;
        self.epsilon = p.epsilon;
        self.mode = p.mode;
        self.line_width = preset.line_width;
        self.coverage = preset.corruption_percent / 100.0;
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        match key {
            "size" => self.size = parse(key, value)?,
            "angles" => self.angles = parse(key, value)?,
            "alpha" => self.alpha = parse(key, value)?,
            "time" => self.time = parse(key, value)?,
            "steps" => self.steps = parse(key, value)?,
            "epsilon" => self.epsilon = parse(key, value)?,
            "mode" => self.mode = value.trim().parse().map_err(|e| format!("{e}"))?,
            "integrator" => self.integrator = value.trim().parse().map_err(|e| format!("{e}"))?,
            "tau" => self.tau = optional(key, value)?,
            "sigma-smooth" => self.sigma_smooth = parse(key, value)?,
            "flat-threshold" => self.flat_threshold = optional(key, value)?,
            "threads" => self.threads = optional(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "input" => self.input = path(value),
            "mask" => self.mask = path(value),
            "output" => self.output = path(value),
            "diagnostics" => self.diagnostics = path(value),
            "beta" => self.beta = optional(key, value)?,
            "lambda-max" => self.quadrature.lambda_max = parse(key, value)?,
            "n-lambda" => self.quadrature.n_lambda = parse(key, value)?,
            "n-nu" => self.quadrature.n_nu = parse(key, value)?,
            "grid" => self.grid = parse(key, value)?,
            "half-width" => self.half_width = parse(key, value)?,
            "line-width" => self.line_width = parse(key, value)?,
            "coverage" => self.coverage = parse(key, value)?,
            "preset" => {
                if !value.trim().is_empty() {
                    self.apply_preset(value.trim())?;
                }
            }
            _ => return Err(format!("unknown configuration key {key:?}")),
        }
        Ok(())
    }

    /// Every key as `key=value`, one per line.
    pub fn dump(&self) -> String {
        let q = &self.quadrature;
        let rows: Vec<(&str, String)> = vec![
            ("preset", self.preset.clone().unwrap_or_default()),
            ("size", self.size.to_string()),
            ("angles", self.angles.to_string()),
            ("alpha", self.alpha.to_string()),
            ("time", self.time.to_string()),
            ("steps", self.steps.to_string()),
            ("epsilon", self.epsilon.to_string()),
            ("mode", self.mode.to_string()),
            ("integrator", self.integrator.to_string()),
            ("tau", show(&self.tau, "auto")),
            ("sigma-smooth", self.sigma_smooth.to_string()),
            ("flat-threshold", show(&self.flat_threshold, "auto")),
            ("threads", show(&self.threads, "auto")),
            ("seed", self.seed.to_string()),
            ("input", show_path(&self.input)),
            ("mask", show_path(&self.mask)),
            ("output", show_path(&self.output)),
            ("diagnostics", show_path(&self.diagnostics)),
            ("beta", show(&self.beta, "auto")),
            ("lambda-max", q.lambda_max.to_string()),
            ("n-lambda", q.n_lambda.to_string()),
            ("n-nu", q.n_nu.to_string()),
            ("grid", self.grid.to_string()),
            ("half-width", self.half_width.to_string()),
            ("line-width", self.line_width.to_string()),
            ("coverage", self.coverage.to_string()),
        ];
        let mut out = String::new();
        for (k, v) in rows {
            writeln!(out, "{k}={v}").unwrap();
        }
        out
    }

    /// Diffusion parameters for a grid of side `size`.
    pub fn params(&self, size: usize) -> DiffusionParams {
        let mut p = DiffusionParams::new(size, self.angles, self.alpha, self.time).with_restoration(
            self.mode,
            self.steps,
            self.epsilon,
        );
        p.integrator = self.integrator;
        p.tau = self.tau;
        p.sigma_smooth = self.sigma_smooth;
        p.flat_threshold = self.flat_threshold;
        p
    }

    /// Kernel jump rate: explicit `beta` or `alpha (N / 2pi)^2`.
    pub fn kernel_beta(&self) -> f64 {
        self.beta.unwrap_or_else(|| se2n_core::params::beta_from_alpha(self.alpha, self.angles))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(s: &[(&str, &str)]) -> Vec<(String, String)> {
        s.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn defaults_are_the_reference_regime() {
        let c = RunConfig::default();
        assert_eq!((c.size, c.angles, c.steps, c.mode), (256, 30, 160, Mode::Dynamic));
        assert_eq!((c.alpha, c.time, c.epsilon, c.sigma_smooth), (0.3, 4.0, 0.5, 1.0));
        assert_eq!(c.integrator, Integrator::Exact);
        c.params(c.size).validate().unwrap();
    }

    #[test]
    fn dump_round_trips() {
        let mut c = RunConfig::default();
        c.set("tau", "0.0125").unwrap();
        c.set("input", "/tmp/a b.pgm").unwrap();
        c.set("mode", "static").unwrap();
        c.set("alpha", "0.1").unwrap();
        let back = RunConfig::from_layers(&[parse_pairs(&c.dump()).unwrap()]).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.dump(), c.dump());
    }

    #[test]
    fn preset_then_overrides() {
        let c = RunConfig::from_layers(&[pairs(&[("alpha", "9"), ("preset", "fig2-up")]), pairs(&[("steps", "7")])])
            .unwrap();
        assert_eq!(c.preset.as_deref(), Some("fig2-up"));
        assert_eq!((c.alpha, c.time, c.steps), (9.0, 0.8, 7));
    }

    #[test]
    fn fig3_down_preset() {
        let c = RunConfig::from_layers(&[pairs(&[("preset", "fig3-down")])]).unwrap();
        assert_eq!((c.alpha, c.time, c.steps, c.epsilon), (0.30, 4.0, 160, 0.5));
        assert_eq!((c.angles, c.size, c.mode), (30, 256, Mode::Dynamic));
    }

    #[test]
    fn bad_input_is_reported() {
        assert!(parse_pairs("alpha").is_err());
        assert!(RunConfig::from_layers(&[pairs(&[("colour", "red")])]).is_err());
        assert!(RunConfig::from_layers(&[pairs(&[("steps", "many")])]).is_err());
        assert!(RunConfig::from_layers(&[pairs(&[("preset", "nope")])]).is_err());
        assert_eq!(parse_pairs("# note\n\n a = 1 \n").unwrap(), pairs(&[("a", "1")]));
    }
}
