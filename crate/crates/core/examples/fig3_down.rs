//! Synthetic inpainting run in the thin-grid regime.
//!
//! Usage: `fig3_down [size] [angles] [mode]`; prints PSNR before and after.

use std::time::Instant;

use se2n_core::params::find_preset;
use se2n_core::pipeline::inpaint;
use se2n_core::synth::{corrupt, coverage, grid_mask, psnr, smooth_field};

fn main() -> se2n_core::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let preset = find_preset("fig3-down").expect("preset table");
    let mut p = preset.params();
    if let Some(size) = args.get(1).and_then(|s| s.parse().ok()) {
        p.size = size;
    }
    if let Some(angles) = args.get(2).and_then(|s| s.parse().ok()) {
        p.set_angles(angles);
    }
    if let Some(mode) = args.get(3) {
        p.mode = mode.parse()?;
    }
    let original = smooth_field(p.size, 2024)?;
    let mask = grid_mask(p.size, preset.line_width, preset.corruption_percent / 100.0)?;
    let corrupted = corrupt(&original, &mask)?;
    let start = Instant::now();
    let out = inpaint(&corrupted, &p)?;
    let worst_good = out
        .image
        .values()
        .iter()
        .zip(original.values())
        .zip(mask.as_slice())
        .filter(|(_, g)| **g)
        .map(|((a, b), _)| (a - b).abs())
        .fold(0.0, f64::max);
    println!("{}x{} N={} mode={} coverage {:.3}", p.size, p.size, p.angles, p.mode, coverage(&mask));
    println!("psnr corrupted {:.2} dB", psnr(&corrupted, &original)?);
    println!("psnr restored  {:.2} dB", psnr(&out.image, &original)?);
    println!("worst good-pixel error {worst_good:.4}");
    println!("good set {:?} -> {:?}", out.restoration.history.first(), out.restoration.history.last());
    println!("elapsed {:.1} s", start.elapsed().as_secs_f64());
    Ok(())
}
