//! Python bindings. Images are flat row-major lists of floats in `[0, 1]`
//! with an explicit side length; masks are flat lists of bools (true = good).

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use se2n_core::kernel::{kernel_direct, kernel_gft, Quadrature};
use se2n_core::params::{find_preset, PRESETS};
use se2n_core::verify::{run_suite, Suite, VerifyOptions};
use se2n_core::{DiffusionParams, Error, GreyImage, Mask};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(_) | Error::Format(_) => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn image(values: Vec<f64>, size: usize, mask: Option<Vec<bool>>) -> PyResult<GreyImage> {
    let img = GreyImage::new(size, values).map_err(to_py)?;
    match mask {
        Some(m) => img.with_mask(Mask::new(size, m).map_err(to_py)?).map_err(to_py),
        None => Ok(img),
    }
}

/// Restores the bad pixels of `image` and returns the reconstruction.
///
/// Parameters start from `preset` (default fig3-down) and are overridden by
/// any keyword given. Without `mask`, zero pixels are treated as bad.
#[pyfunction]
#[pyo3(signature = (image, size, mask=None, *, preset=None, angles=None, alpha=None, time=None, steps=None,
    epsilon=None, mode=None, integrator=None, tau=None, sigma_smooth=None, flat_threshold=None))]
#[allow(clippy::too_many_arguments)]
fn inpaint(
    py: Python<'_>,
    image: Vec<f64>,
    size: usize,
    mask: Option<Vec<bool>>,
    preset: Option<&str>,
    angles: Option<usize>,
    alpha: Option<f64>,
    time: Option<f64>,
    steps: Option<usize>,
    epsilon: Option<f64>,
    mode: Option<&str>,
    integrator: Option<&str>,
    tau: Option<f64>,
    sigma_smooth: Option<f64>,
    flat_threshold: Option<f64>,
) -> PyResult<Vec<f64>> {
    let name = preset.unwrap_or("fig3-down");
    let preset = find_preset(name).ok_or_else(|| PyValueError::new_err(format!("unknown preset {name:?}")))?;
    let mut p: DiffusionParams = preset.params();
    p.size = size;
    if let Some(v) = angles {
        p.set_angles(v);
    }
    if let Some(v) = alpha {
        p.set_alpha(v);
    }
    p.time = time.unwrap_or(p.time);
    p.steps = steps.unwrap_or(p.steps);
    p.epsilon = epsilon.unwrap_or(p.epsilon);
    if let Some(v) = mode {
        p.mode = v.parse().map_err(to_py)?;
    }
    if let Some(v) = integrator {
        p.integrator = v.parse().map_err(to_py)?;
    }
    p.tau = tau.or(p.tau);
    p.sigma_smooth = sigma_smooth.unwrap_or(p.sigma_smooth);
    p.flat_threshold = flat_threshold.or(p.flat_threshold);

    let mask = mask.unwrap_or_else(|| image.iter().map(|&v| v != 0.0).collect());
    let img = self::image(image, size, Some(mask))?;
    let out = py.detach(|| se2n_core::pipeline::inpaint(&img, &p)).map_err(to_py)?;
    Ok(out.image.values().to_vec())
}

/// Seeded smooth test image in `[0.15, 0.95]`.
#[pyfunction]
fn smooth_field(size: usize, seed: u64) -> PyResult<Vec<f64>> {
    Ok(se2n_core::synth::smooth_field(size, seed).map_err(to_py)?.values().to_vec())
}

/// Grid of bad lines of `width` pixels covering about `coverage` of the image.
#[pyfunction]
fn grid_mask(size: usize, width: usize, coverage: f64) -> PyResult<Vec<bool>> {
    Ok(se2n_core::synth::grid_mask(size, width, coverage).map_err(to_py)?.as_slice().to_vec())
}

/// PSNR in dB with peak 1.
#[pyfunction]
fn psnr(a: Vec<f64>, b: Vec<f64>, size: usize) -> PyResult<f64> {
    se2n_core::synth::psnr(&image(a, size, None)?, &image(b, size, None)?).map_err(to_py)
}

/// Heat kernel value at `(x, y)`, direction `r`, by either formula.
#[pyfunction]
#[pyo3(signature = (t, x, y, r, angles, beta, formula="gft"))]
fn kernel(t: f64, x: f64, y: f64, r: i64, angles: usize, beta: f64, formula: &str) -> PyResult<f64> {
    let q = Quadrature::default();
    let v = match formula {
        "gft" => kernel_gft(t, [x, y], r, angles, beta, &q),
        "direct" => kernel_direct(t, [x, y], r, angles, beta, &q),
        other => return Err(PyValueError::new_err(format!("unknown formula {other:?}"))),
    };
    Ok(v.map_err(to_py)?.value)
}

/// Runs one self-check suite; returns `(passed, detail)`.
#[pyfunction]
fn verify(py: Python<'_>, suite: &str) -> PyResult<(bool, String)> {
    let suite: Suite = suite.parse().map_err(to_py)?;
    let r = py.detach(|| run_suite(suite, &VerifyOptions::default())).map_err(to_py)?;
    Ok((r.passed, r.detail))
}

/// Names of the parameter presets.
#[pyfunction]
fn presets() -> Vec<&'static str> {
    PRESETS.iter().map(|p| p.name).collect()
}

#[pymodule]
fn se2n(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(inpaint, m)?)?;
    m.add_function(wrap_pyfunction!(smooth_field, m)?)?;
    m.add_function(wrap_pyfunction!(grid_mask, m)?)?;
    m.add_function(wrap_pyfunction!(psnr, m)?)?;
    m.add_function(wrap_pyfunction!(kernel, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(presets, m)?)?;
    Ok(())
}
