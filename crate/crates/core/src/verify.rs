//! Numerical self-checks, run by `se2n verify` and the acceptance tests.
//!
//! Each measurement function returns the raw quantity (an error, an order, a
//! PSNR gain). [`run_suite`] evaluates one of them at desk scale and compares
//! it against its threshold.

use std::f64::consts::PI;
use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::apev::{orbit_reduce, propagator, rotate_frequency};
use crate::diffusion::{apply_generator_physical, evolve_cn, evolve_exact, forward_dft, frequency_block, inverse_dft};
use crate::error::{Error, Result};
use crate::image::Mask;
use crate::kernel::{square_grid, DirectKernel, GftKernel, Quadrature};
use crate::lift::{column_max, lift};
use crate::linalg::expm_symmetric;
use crate::params::{find_preset, DiffusionParams, Mode};
use crate::pipeline::inpaint;
use crate::pnm::{encode_pgm, image_to_graymap, PgmEncoding};
use crate::restore::{diagnostics_csv_untimed, dr_run, mix, plain_run, sr_run};
use crate::segroup::AngleGrid;
use crate::stack::{max_abs_diff, LiftedStack};
use crate::synth::{corrupt, grid_mask, psnr, smooth_field};

/// Seed shared by every suite so reports are reproducible.
pub const SEED: u64 = 2024;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Decoupling,
    KernelIdentity,
    Mass,
    CnOrder,
    AngularLimit,
    Orbit,
    Restoration,
    Inpaint,
    Determinism,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::Decoupling,
        Suite::KernelIdentity,
        Suite::Mass,
        Suite::CnOrder,
        Suite::AngularLimit,
        Suite::Orbit,
        Suite::Restoration,
        Suite::Inpaint,
        Suite::Determinism,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Decoupling => "decoupling",
            Suite::KernelIdentity => "kernel-identity",
            Suite::Mass => "mass",
            Suite::CnOrder => "cn-order",
            Suite::AngularLimit => "angular-limit",
            Suite::Orbit => "orbit",
            Suite::Restoration => "restoration",
            Suite::Inpaint => "inpaint",
            Suite::Determinism => "determinism",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown suite {s:?}")))
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    /// Direction counts for the kernel identity sweep.
    pub kernel_angles: Vec<usize>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { kernel_angles: vec![3, 4, 6] }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

fn random_stack(m: usize, n: usize, seed: u64) -> LiftedStack {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vals = (0..m * m * n).map(|_| rng.gen_range(0.0..1.0)).collect();
    LiftedStack::new(m, n, vals).expect("shape is consistent")
}

/// Least-squares slope of `log(err)` against `log(h)`.
pub fn fitted_order(h: &[f64], err: &[f64]) -> f64 {
    let xs: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = err.iter().map(|v| v.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    cov / var
}

/// Max-abs gap between spectral evolution and explicit Heun stepping of the
/// physical-space generator with step `dt`.
pub fn decoupling_error(m: usize, n: usize, t: f64, dt: f64, seed: u64) -> Result<f64> {
    let p = DiffusionParams::new(m, n, 0.3, t);
    let s = random_stack(m, n, seed);
    let exact = inverse_dft(&evolve_exact(&forward_dft(&s), t, &p, None)?);
    let mut psi = s;
    for _ in 0..(t / dt).round() as usize {
        let d1 = apply_generator_physical(&psi, &p)?;
        let predictor = d1.axpy(dt, &psi)?;
        let d2 = apply_generator_physical(&predictor, &p)?;
        psi = d1.axpy(1.0, &d2)?.axpy(0.5 * dt, &psi)?;
    }
    Ok(max_abs_diff(&psi, &exact))
}

/// Largest gap between the two kernel formulas over every `N`, `beta`, `t`,
/// direction and point of a `side x side` grid on `[-1, 1]^2`.
pub fn kernel_identity_error(
    angles: &[usize],
    betas: &[f64],
    times: &[f64],
    side: usize,
    q: &Quadrature,
) -> Result<f64> {
    let points = square_grid(side, 1.0);
    let mut worst = 0.0f64;
    for &n in angles {
        for &beta in betas {
            for &t in times {
                let g = GftKernel::new(t, n, beta, q)?;
                let d = DirectKernel::new(t, n, beta, q)?;
                for &z in &points {
                    for r in 0..n as i64 {
                        worst = worst.max((g.eval(z, r).value - d.eval(z, r).value).abs());
                    }
                }
            }
        }
    }
    Ok(worst)
}

/// Largest per-interval relative mass drift over a fig3-down run at the given scale.
pub fn preset_mass_drift(size: usize, angles: usize, seed: u64) -> Result<f64> {
    let case = InpaintCase::fig3_down(size, angles, Mode::Dynamic, seed)?;
    let out = case.run()?;
    Ok(out.diagnostics_max_drift)
}

/// Errors of Crank-Nicolson against the exact evolution for each `tau`, and the fitted order.
pub fn cn_errors(taus: &[f64], seed: u64) -> Result<(Vec<f64>, f64)> {
    let (m, n, t) = (8, 4, 0.5);
    let p = DiffusionParams::new(m, n, 0.3, t);
    let f = forward_dft(&random_stack(m, n, seed));
    let exact = evolve_exact(&f, t, &p, None)?;
    let errs =
        taus.iter().map(|&tau| Ok(evolve_cn(&f, t, tau, &p)?.max_abs_diff(&exact))).collect::<Result<Vec<_>>>()?;
    let order = fitted_order(taus, &errs);
    Ok((errs, order))
}

/// `exp(t/4 d^2)` on the circle for `cos(theta) + 0.5 cos(2 theta)`.
fn circle_heat(theta: f64, t: f64) -> f64 {
    (-t / 4.0).exp() * theta.cos() + 0.5 * (-t).exp() * (2.0 * theta).cos()
}

/// Errors of `exp(t Lambda_N / 2)` against the circle heat semigroup, and the order in `1/N`.
pub fn angular_limit_errors(sizes: &[usize], t: f64) -> Result<(Vec<f64>, f64)> {
    let mut errs = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let mut p = DiffusionParams::new(1, n, 1.0, t);
        p.set_beta((n as f64 / (2.0 * PI)).powi(2));
        let theta: Vec<f64> = (0..n).map(|r| 2.0 * PI * r as f64 / n as f64).collect();
        let v0 = DVector::from_iterator(n, theta.iter().map(|&th| circle_heat(th, 0.0)));
        let v = expm_symmetric(&frequency_block(1, 1, &p)?.matrix, t)? * v0;
        let err = theta.iter().enumerate().map(|(i, &th)| (v[i] - circle_heat(th, t)).abs()).fold(0.0, f64::max);
        errs.push(err);
    }
    let inv: Vec<f64> = sizes.iter().map(|&n| 1.0 / n as f64).collect();
    let order = fitted_order(&inv, &errs);
    Ok((errs, order))
}

/// Largest gap between the conjugated and the directly exponentiated rotated propagator.
pub fn orbit_error(angles: &[usize], samples: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for &n in angles {
        for _ in 0..samples {
            let w = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
            let t = rng.gen_range(0.0..2.0);
            let r = rng.gen_range(0..n as i64);
            let base = propagator(w, t, n, 1.0, AngleGrid::Projective)?;
            let direct =
                propagator(rotate_frequency(w, r, n, AngleGrid::Projective), t, n, 1.0, AngleGrid::Projective)?;
            let diff: DMatrix<f64> = orbit_reduce(&base, r) - direct;
            worst = worst.max(diff.amax());
        }
    }
    Ok(worst)
}

/// Measured restoration invariants.
#[derive(Debug, Clone, PartialEq)]
pub struct RestorationCheck {
    /// `epsilon = 0` static run against plain diffusion.
    pub zero_mix_error: f64,
    /// Good-point maxima against the initial maxima after an `epsilon = 1` static run.
    pub full_mix_error: f64,
    pub monotone_growth: bool,
    pub bad_points_untouched: bool,
}

impl RestorationCheck {
    pub fn passed(&self) -> bool {
        self.zero_mix_error <= 1e-10
            && self.full_mix_error <= 1e-12
            && self.monotone_growth
            && self.bad_points_untouched
    }
}

pub fn restoration_invariants(size: usize, angles: usize, seed: u64) -> Result<RestorationCheck> {
    let original = smooth_field(size, seed)?;
    let mask = grid_mask(size, 1, 0.3)?;
    let img = corrupt(&original, &mask)?;
    let base = DiffusionParams::new(size, angles, 0.3, 1.0);
    let lift0 = lift(&img, &base)?;

    let plain = plain_run(&lift0, &base.clone().with_restoration(Mode::Plain, 10, 0.0), None)?;
    let zero = sr_run(&lift0, &mask, &base.clone().with_restoration(Mode::Static, 10, 0.0), None)?;
    let zero_mix_error = max_abs_diff(&plain.stack, &zero.stack);

    let full = sr_run(&lift0, &mask, &base.clone().with_restoration(Mode::Static, 10, 1.0), None)?;
    let h0 = column_max(&lift0);
    let h = column_max(&full.stack);
    let full_mix_error =
        mask.as_slice().iter().enumerate().filter(|(_, g)| **g).map(|(k, _)| (h[k] - h0[k]).abs()).fold(0.0, f64::max);

    let dynamic = dr_run(&lift0, &mask, &base.clone().with_restoration(Mode::Dynamic, 10, 0.5), None)?;
    let monotone_growth = dynamic.history.windows(2).all(|w| w[0] <= w[1]) && dynamic.good.contains(&mask);

    let noisy = random_stack(size, angles, seed ^ 0x5eed);
    let mixed = mix(&noisy, &column_max(&lift0), &mask, 0.5)?;
    let bad_points_untouched = noisy
        .columns()
        .zip(mixed.columns())
        .zip(mask.as_slice())
        .filter(|(_, g)| !**g)
        .all(|((a, b), _)| a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits()));

    Ok(RestorationCheck { zero_mix_error, full_mix_error, monotone_growth, bad_points_untouched })
}

/// A synthetic corruption-and-restore experiment in the fig3-down regime.
#[derive(Debug, Clone)]
pub struct InpaintCase {
    pub params: DiffusionParams,
    pub line_width: usize,
    pub coverage: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct InpaintReport {
    pub psnr_corrupted: f64,
    pub psnr_restored: f64,
    /// Largest deviation from the original over originally good pixels.
    pub worst_good_error: f64,
    pub diagnostics_max_drift: f64,
    pub good_history: Vec<usize>,
    /// Binary PGM of the reconstruction.
    pub pgm: Vec<u8>,
    /// Diagnostics CSV without the timing column.
    pub csv: String,
}

impl InpaintReport {
    pub fn gain(&self) -> f64 {
        self.psnr_restored - self.psnr_corrupted
    }

    pub fn passed(&self) -> bool {
        self.gain() >= 5.0 && self.worst_good_error <= 0.05
    }
}

impl InpaintCase {
    pub fn fig3_down(size: usize, angles: usize, mode: Mode, seed: u64) -> Result<Self> {
        let preset = find_preset("fig3-down").ok_or_else(|| Error::InvalidParameter("missing preset".into()))?;
        let mut params = preset.params();
        params.size = size;
        params.set_angles(angles);
        params.mode = mode;
        Ok(Self { params, line_width: preset.line_width, coverage: preset.corruption_percent / 100.0, seed })
    }

    pub fn run(&self) -> Result<InpaintReport> {
        let m = self.params.size;
        let original = smooth_field(m, self.seed)?;
        let mask: Mask = grid_mask(m, self.line_width, self.coverage)?;
        let corrupted = corrupt(&original, &mask)?;
        let out = inpaint(&corrupted, &self.params)?;
        let worst_good_error = out
            .image
            .values()
            .iter()
            .zip(original.values())
            .zip(mask.as_slice())
            .filter(|(_, g)| **g)
            .map(|((a, b), _)| (a - b).abs())
            .fold(0.0, f64::max);
        let diagnostics_max_drift = out.restoration.diagnostics.iter().map(|d| d.mass_drift).fold(0.0, f64::max);
        Ok(InpaintReport {
            psnr_corrupted: psnr(&corrupted, &original)?,
            psnr_restored: psnr(&out.image, &original)?,
            worst_good_error,
            diagnostics_max_drift,
            good_history: out.restoration.history.clone(),
            pgm: encode_pgm(&image_to_graymap(&out.image), PgmEncoding::Binary),
            csv: diagnostics_csv_untimed(&out.restoration.diagnostics),
        })
    }
}

/// Runs `f` on a dedicated pool of `threads` workers.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Whether the case yields byte-identical PGM and CSV output on every thread count.
pub fn deterministic_across_threads(case: &InpaintCase, threads: &[usize]) -> Result<bool> {
    let mut first: Option<(Vec<u8>, String)> = None;
    for &k in threads {
        let report = with_threads(k, || case.run())??;
        let pair = (report.pgm, report.csv);
        match &first {
            None => first = Some(pair),
            Some(f) if *f != pair => return Ok(false),
            Some(_) => {}
        }
    }
    Ok(true)
}

const DESK_SIZE: usize = 64;
const DESK_ANGLES: usize = 16;

fn sci(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.2e}")).collect();
    format!("[{}]", parts.join(", "))
}

/// Evaluates one suite at desk scale.
pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> Result<SuiteReport> {
    let start = Instant::now();
    let (passed, detail) = match suite {
        Suite::Decoupling => {
            let e = decoupling_error(8, 4, 0.7, 1e-4, SEED)?;
            (e <= 1e-5, format!("max error {e:.2e} (<= 1e-5)"))
        }
        Suite::KernelIdentity => {
            let e =
                kernel_identity_error(&opts.kernel_angles, &[0.5, 1.0, 4.0], &[0.1, 0.5], 9, &Quadrature::default())?;
            (e <= 1e-6, format!("N {:?}: max gap {e:.2e} (<= 1e-6)", opts.kernel_angles))
        }
        Suite::Mass => {
            let e = preset_mass_drift(DESK_SIZE, DESK_ANGLES, SEED)?;
            (e <= 1e-8, format!("max relative drift {e:.2e} (<= 1e-8)"))
        }
        Suite::CnOrder => {
            let (errs, order) = cn_errors(&[0.1, 0.05, 0.025], SEED)?;
            (order >= 1.9, format!("order {order:.3} (>= 1.9), errors {}", sci(&errs)))
        }
        Suite::AngularLimit => {
            let (errs, order) = angular_limit_errors(&[8, 16, 32, 64], 0.6)?;
            (order >= 1.9, format!("order {order:.3} (>= 1.9), errors {}", sci(&errs)))
        }
        Suite::Orbit => {
            let e = orbit_error(&[4, 6], 20, SEED)?;
            (e <= 1e-12, format!("max gap {e:.2e} (<= 1e-12)"))
        }
        Suite::Restoration => {
            let c = restoration_invariants(16, 6, SEED)?;
            (
                c.passed(),
                format!(
                    "eps=0 gap {:.2e}, eps=1 gap {:.2e}, monotone {}, bad untouched {}",
                    c.zero_mix_error, c.full_mix_error, c.monotone_growth, c.bad_points_untouched
                ),
            )
        }
        Suite::Inpaint => {
            let r = InpaintCase::fig3_down(DESK_SIZE, DESK_ANGLES, Mode::Dynamic, SEED)?.run()?;
            (
                r.passed(),
                format!(
                    "{DESK_SIZE}x{DESK_SIZE} N={DESK_ANGLES}: gain {:.2} dB (>= 5), worst good error {:.4} (<= 0.05)",
                    r.gain(),
                    r.worst_good_error
                ),
            )
        }
        Suite::Determinism => {
            let case = InpaintCase::fig3_down(DESK_SIZE, DESK_ANGLES, Mode::Dynamic, SEED)?;
            let same = deterministic_across_threads(&case, &[1, 8])?;
            (same, format!("threads 1 vs 8 byte-identical: {same}"))
        }
    };
    Ok(SuiteReport { suite, passed, detail, seconds: start.elapsed().as_secs_f64() })
}

pub fn run_suites(suites: &[Suite], opts: &VerifyOptions) -> Result<Vec<SuiteReport>> {
    suites.iter().map(|&s| run_suite(s, opts)).collect()
}

/// One line per suite: status, name, seconds, detail.
pub fn report_table(reports: &[SuiteReport]) -> String {
    let mut out = String::new();
    for r in reports {
        let status = if r.passed { "PASS" } else { "FAIL" };
        writeln!(out, "{status}  {:<16} {:>7.2}s  {}", r.suite.name(), r.seconds, r.detail).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn fitted_order_of_exact_power_law() {
        let h = [0.1, 0.05, 0.025];
        let e: Vec<f64> = h.iter().map(|v| 3.0 * v * v).collect();
        assert!((fitted_order(&h, &e) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn cheap_suites_pass() {
        let opts = VerifyOptions::default();
        for s in [Suite::CnOrder, Suite::AngularLimit, Suite::Orbit, Suite::Restoration] {
            let r = run_suite(s, &opts).unwrap();
            assert!(r.passed, "{}: {}", s, r.detail);
        }
    }

    #[test]
    fn table_has_one_line_per_suite() {
        let r = SuiteReport { suite: Suite::Orbit, passed: true, detail: "ok".into(), seconds: 0.1 };
        let t = report_table(&[r.clone(), SuiteReport { passed: false, ..r }]);
        assert_eq!(t.lines().count(), 2);
        assert!(t.starts_with("PASS  orbit"));
        assert!(t.lines().nth(1).unwrap().starts_with("FAIL"));
    }
}
