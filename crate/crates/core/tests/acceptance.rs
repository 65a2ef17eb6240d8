//! Acceptance criteria, one line each. Exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use se2n_core::kernel::Quadrature;
use se2n_core::verify::{
    angular_limit_errors, cn_errors, decoupling_error, kernel_identity_error, orbit_error, preset_mass_drift,
    restoration_invariants, with_threads, InpaintCase, SEED,
};
use se2n_core::Mode;

struct Line {
    id: usize,
    name: &'static str,
    passed: bool,
    detail: String,
}

fn sci(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.2e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_secs_f64())
}

fn decoupling() -> Line {
    let (e, secs) = timed(|| decoupling_error(8, 4, 0.7, 1e-4, SEED).unwrap());
    Line {
        id: 1,
        name: "decoupling exactness",
        passed: e <= 1e-5 && secs < 5.0,
        detail: format!("max |spectral - explicit| = {e:.2e} (<= 1e-5), {secs:.2}s (< 5s)"),
    }
}

fn kernel_identity() -> Line {
    let q = Quadrature::default();
    let (e, secs) = timed(|| kernel_identity_error(&[3, 4, 6], &[0.5, 1.0, 4.0], &[0.1, 0.5], 9, &q).unwrap());
    Line {
        id: 2,
        name: "kernel identity",
        passed: e <= 1e-6 && secs < 60.0,
        detail: format!("max |gft - direct| = {e:.2e} (<= 1e-6), {secs:.1}s (< 60s)"),
    }
}

fn mass() -> Line {
    let (e, secs) = timed(|| preset_mass_drift(64, 16, SEED).unwrap());
    Line {
        id: 3,
        name: "mass conservation",
        passed: e <= 1e-8 && secs < 60.0,
        detail: format!("max relative drift {e:.2e} (<= 1e-8), {secs:.2}s (< 60s)"),
    }
}

fn cn_order() -> Line {
    let (errs, order) = cn_errors(&[0.1, 0.05, 0.025], SEED).unwrap();
    Line {
        id: 4,
        name: "Crank-Nicolson order",
        passed: order >= 1.9,
        detail: format!("fitted order {order:.3} (>= 1.9), errors {}", sci(&errs)),
    }
}

fn angular_limit() -> Line {
    let (errs, order) = angular_limit_errors(&[8, 16, 32, 64], 0.6).unwrap();
    Line {
        id: 5,
        name: "angular limit",
        passed: order >= 1.9,
        detail: format!("fitted order {order:.3} (>= 1.9), errors {}", sci(&errs)),
    }
}

fn orbit() -> Line {
    let e = orbit_error(&[4, 6], 20, SEED).unwrap();
    Line { id: 6, name: "orbit reduction", passed: e <= 1e-12, detail: format!("max gap {e:.2e} (<= 1e-12)") }
}

fn restoration() -> Line {
    let c = restoration_invariants(32, 8, SEED).unwrap();
    Line {
        id: 7,
        name: "restoration invariants",
        passed: c.passed(),
        detail: format!(
            "eps=0 vs plain {:.2e} (<= 1e-10), eps=1 maxima {:.2e} (<= 1e-12), monotone {}, bad untouched {}",
            c.zero_mix_error, c.full_mix_error, c.monotone_growth, c.bad_points_untouched
        ),
    }
}

/// Criteria 8 and 9 share the full-scale runs.
fn end_to_end() -> [Line; 2] {
    let case = InpaintCase::fig3_down(256, 30, Mode::Dynamic, SEED).unwrap();
    let (parallel, secs) = timed(|| with_threads(8, || case.run()).unwrap().unwrap());
    let serial = with_threads(1, || case.run()).unwrap().unwrap();
    let inpaint = Line {
        id: 8,
        name: "end-to-end inpainting",
        passed: parallel.passed() && secs <= 600.0,
        detail: format!(
            "PSNR {:.2} -> {:.2} dB, gain {:.2} dB (>= 5), worst good-pixel error {:.4} (<= 0.05), {secs:.0}s (<= 600s)",
            parallel.psnr_corrupted,
            parallel.psnr_restored,
            parallel.gain(),
            parallel.worst_good_error
        ),
    };
    let same = parallel.pgm == serial.pgm && parallel.csv == serial.csv;
    let determinism = Line {
        id: 9,
        name: "determinism",
        passed: same,
        detail: format!("threads 1 vs 8: PGM and diagnostics byte-identical = {same}"),
    };
    [inpaint, determinism]
}

fn main() -> ExitCode {
    // honour the libtest-style filter/list flags cargo may pass
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let mut lines = vec![decoupling(), kernel_identity(), mass(), cn_order(), angular_limit(), orbit(), restoration()];
    lines.extend(end_to_end());

    for l in &lines {
        let status = if l.passed { "PASS" } else { "FAIL" };
        println!("criterion {} {status}  {:<24} {}", l.id, l.name, l.detail);
    }

    // context for criterion 8: the same regime with static restoration
    let info = InpaintCase::fig3_down(256, 30, Mode::Static, SEED).unwrap().run().unwrap();
    println!(
        "info: static restoration in the same regime: PSNR {:.2} -> {:.2} dB, worst good-pixel error {:.4} (not a criterion)",
        info.psnr_corrupted, info.psnr_restored, info.worst_good_error
    );

    let failed: Vec<usize> = lines.iter().filter(|l| !l.passed).map(|l| l.id).collect();
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", lines.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}
