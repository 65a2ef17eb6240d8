//! Almost-periodic initial data on SE(2,N).
//!
//! A finite sum of plane waves in the angle-indexed coefficients stays in the
//! same span under the diffusion: each frequency evolves by its own `N x N`
//! linear system. Rotating a frequency by one angular step conjugates its
//! propagator by the shift, so one representative per rotation orbit suffices.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::SymmetricExp;
use crate::params::DiffusionParams;
use crate::segroup::{jump_generator, shift_matrix, AngleGrid};

/// `Q_r(x, y) = sum_s a^s_r exp(i (lambda_s x + mu_s y))`.
#[derive(Debug, Clone, PartialEq)]
pub struct APPolynomial {
    frequencies: Vec<[f64; 2]>,
    coefficients: Vec<Vec<Complex64>>,
}

impl APPolynomial {
    pub fn new(frequencies: Vec<[f64; 2]>, coefficients: Vec<Vec<Complex64>>) -> Result<Self> {
        if frequencies.len() != coefficients.len() {
            return Err(Error::Dimension("one coefficient vector per frequency".into()));
        }
        let n = coefficients.first().map_or(0, Vec::len);
        if coefficients.iter().any(|c| c.len() != n) {
            return Err(Error::Dimension("coefficient vectors differ in length".into()));
        }
        if frequencies.iter().flatten().any(|v| !v.is_finite())
            || coefficients.iter().flatten().any(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(Error::Invariant("non-finite frequency or coefficient".into()));
        }
        for (i, a) in frequencies.iter().enumerate() {
            if frequencies[..i].contains(a) {
                return Err(Error::Invariant(format!("repeated frequency {a:?}")));
            }
        }
        Ok(Self { frequencies, coefficients })
    }

    pub fn frequencies(&self) -> &[[f64; 2]] {
        &self.frequencies
    }

    pub fn coefficients(&self) -> &[Vec<Complex64>] {
        &self.coefficients
    }

    pub fn angles(&self) -> usize {
        self.coefficients.first().map_or(0, Vec::len)
    }

    /// Values `Q_r(x, y)` for every direction `r`.
    pub fn evaluate(&self, x: f64, y: f64) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.angles()];
        for (w, a) in self.frequencies.iter().zip(&self.coefficients) {
            let phase = Complex64::from_polar(1.0, w[0] * x + w[1] * y);
            for (o, c) in out.iter_mut().zip(a) {
                *o += c * phase;
            }
        }
        out
    }
}

/// Generator `(Lambda_N - diag_k((lambda cos th_k + mu sin th_k)^2)) / 2` of one frequency.
pub fn frequency_generator(omega: [f64; 2], n: usize, beta: f64, grid: AngleGrid) -> Result<DMatrix<f64>> {
    let mut g = jump_generator(n, beta)?.matrix;
    for k in 0..n {
        let (s, c) = grid.angle(k, n).sin_cos();
        let a = omega[0] * c + omega[1] * s;
        g[(k, k)] -= a * a;
    }
    Ok(g * 0.5)
}

/// `exp(t G_omega)`.
pub fn propagator(omega: [f64; 2], t: f64, n: usize, beta: f64, grid: AngleGrid) -> Result<DMatrix<f64>> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("t must be >= 0, got {t}")));
    }
    Ok(SymmetricExp::new(&frequency_generator(omega, n, beta, grid)?)?.exp(t))
}

/// Evolves every coefficient vector by its own propagator; frequencies are unchanged.
pub fn evolve_ap(q: &APPolynomial, t: f64, p: &DiffusionParams, grid: AngleGrid) -> Result<APPolynomial> {
    let n = q.angles();
    if n != p.angles {
        return Err(Error::Dimension(format!("polynomial has {n} directions, N = {}", p.angles)));
    }
    let coefficients = q
        .frequencies
        .par_iter()
        .zip(&q.coefficients)
        .map(|(&w, a)| {
            let e = propagator(w, t, n, p.beta(), grid)?.map(|v| Complex64::new(v, 0.0));
            Ok((e * DVector::from_column_slice(a)).as_slice().to_vec())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(APPolynomial { frequencies: q.frequencies.clone(), coefficients })
}

/// `omega` turned counter-clockwise by `r` angular steps of `grid`.
pub fn rotate_frequency(omega: [f64; 2], r: i64, n: usize, grid: AngleGrid) -> [f64; 2] {
    let (s, c) = (r as f64 * grid.step(n)).sin_cos();
    [c * omega[0] - s * omega[1], s * omega[0] + c * omega[1]]
}

/// `S^r R S^-r`: the propagator of [`rotate_frequency`]`(omega, r)` from that of `omega`.
pub fn orbit_reduce(resolvent: &DMatrix<f64>, r: i64) -> DMatrix<f64> {
    let n = resolvent.nrows();
    shift_matrix(n, r) * resolvent * shift_matrix(n, -r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::{evolve_exact, spectral_symbol};
    use crate::stack::SpectralStack;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_coeffs(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
        (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
    }

    #[test]
    fn zero_frequency_keeps_angle_constants() {
        let p = DiffusionParams::new(1, 5, 0.7, 1.0);
        let q = APPolynomial::new(vec![[0.0, 0.0]], vec![vec![Complex64::new(0.3, -0.1); 5]]).unwrap();
        let out = evolve_ap(&q, 2.0, &p, AngleGrid::Full).unwrap();
        for c in &out.coefficients()[0] {
            assert!((c - Complex64::new(0.3, -0.1)).norm() < 1e-13);
        }
    }

    #[test]
    fn zero_time_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = DiffusionParams::new(1, 4, 0.7, 1.0);
        let q = APPolynomial::new(vec![[1.3, -0.4]], vec![random_coeffs(&mut rng, 4)]).unwrap();
        let out = evolve_ap(&q, 0.0, &p, AngleGrid::Projective).unwrap();
        for (a, b) in out.coefficients()[0].iter().zip(&q.coefficients()[0]) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn rejects_repeated_frequencies() {
        let c = vec![Complex64::new(1.0, 0.0); 3];
        assert!(APPolynomial::new(vec![[1.0, 2.0], [1.0, 2.0]], vec![c.clone(), c]).is_err());
    }

    #[test]
    fn matches_spectral_evolution_on_dft_bins() {
        let (m, n, t) = (8usize, 5usize, 0.6);
        let p = DiffusionParams::new(m, n, 0.4, t);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let bins = [(0usize, 0usize), (1, 0), (2, 1), (1, 3), (3, 2)];
        let mut values = vec![Complex64::new(0.0, 0.0); m * m * n];
        let mut freqs = Vec::new();
        let mut coeffs = Vec::new();
        let root = (m as f64).sqrt();
        for &(kx, ky) in &bins {
            let a = random_coeffs(&mut rng, n);
            values[(ky * m + kx) * n..(ky * m + kx + 1) * n].copy_from_slice(&a);
            freqs.push([root * spectral_symbol(kx, m), root * spectral_symbol(ky, m)]);
            coeffs.push(a);
        }
        let spec = SpectralStack::new(m, n, values).unwrap();
        let evolved = evolve_exact(&spec, t, &p, None).unwrap();
        let q = evolve_ap(&APPolynomial::new(freqs, coeffs).unwrap(), t, &p, AngleGrid::Projective).unwrap();
        for (s, &(kx, ky)) in bins.iter().enumerate() {
            for r in 0..n {
                assert!((evolved.get(ky, kx, r) - q.coefficients()[s][r]).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn low_frequency_symbol_gap_is_cubic() {
        // replacing 2 pi k / sqrt(M) by the discrete symbol changes the propagator by O(omega^3)
        let (m, n, t) = (1024usize, 6usize, 0.5);
        let p = DiffusionParams::new(m, n, 1.0, t);
        let gaps: Vec<f64> = [8usize, 4, 2]
            .iter()
            .map(|&k| {
                let root = (m as f64).sqrt();
                let exact = 2.0 * std::f64::consts::PI * k as f64 / root;
                let symbol = root * spectral_symbol(k, m);
                let a = propagator([exact, 0.0], t, n, p.beta(), AngleGrid::Projective).unwrap();
                let b = propagator([symbol, 0.0], t, n, p.beta(), AngleGrid::Projective).unwrap();
                (a - b).amax() / exact.powi(3)
            })
            .collect();
        assert!(gaps.iter().all(|g| *g < 1.0), "{gaps:?}");
    }

    #[test]
    fn frequencies_evolve_independently() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = DiffusionParams::new(1, 6, 0.5, 1.0);
        let (w1, w2) = ([0.7, -1.1], [2.0, 0.3]);
        let (a1, a2) = (random_coeffs(&mut rng, 6), random_coeffs(&mut rng, 6));
        let both = APPolynomial::new(vec![w1, w2], vec![a1.clone(), a2.clone()]).unwrap();
        let e = evolve_ap(&both, 0.8, &p, AngleGrid::Full).unwrap();
        let e1 = evolve_ap(&APPolynomial::new(vec![w1], vec![a1]).unwrap(), 0.8, &p, AngleGrid::Full).unwrap();
        let e2 = evolve_ap(&APPolynomial::new(vec![w2], vec![a2]).unwrap(), 0.8, &p, AngleGrid::Full).unwrap();
        for (x, y) in [(0.0, 0.0), (0.3, -1.2), (2.5, 0.7)] {
            let sum: Vec<Complex64> = e1.evaluate(x, y).iter().zip(e2.evaluate(x, y)).map(|(a, b)| a + b).collect();
            for (a, b) in e.evaluate(x, y).iter().zip(&sum) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn coefficient_norms_never_grow() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = DiffusionParams::new(1, 7, 0.9, 1.0);
        for _ in 0..20 {
            let w = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
            let a = random_coeffs(&mut rng, 7);
            let q = APPolynomial::new(vec![w], vec![a.clone()]).unwrap();
            let norm0: f64 = a.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            for t in [0.1, 1.0, 5.0] {
                let out = evolve_ap(&q, t, &p, AngleGrid::Full).unwrap();
                let norm: f64 = out.coefficients()[0].iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                assert!(norm <= norm0 * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn orbit_reduce_trivial_shifts() {
        let r = propagator([1.0, 0.5], 0.3, 4, 1.0, AngleGrid::Full).unwrap();
        assert_eq!(orbit_reduce(&r, 0), r);
        assert!((orbit_reduce(&r, 4) - &r).amax() == 0.0);
    }

    #[test]
    fn orbit_reduce_example() {
        let (n, t) = (4, 0.5);
        let beta = 1.0;
        let base = propagator([1.0, 0.0], t, n, beta, AngleGrid::Full).unwrap();
        let rotated = rotate_frequency([1.0, 0.0], 1, n, AngleGrid::Full);
        let direct = propagator(rotated, t, n, beta, AngleGrid::Full).unwrap();
        assert!((orbit_reduce(&base, 1) - direct).amax() <= 1e-12);
    }

    #[test]
    fn orbit_identity_on_both_grids() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for grid in [AngleGrid::Full, AngleGrid::Projective] {
            for n in [3, 4, 5, 6, 8] {
                for _ in 0..10 {
                    let w = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
                    let t = rng.gen_range(0.0..2.0);
                    let r = rng.gen_range(-10..10);
                    let base = propagator(w, t, n, 1.3, grid).unwrap();
                    let direct = propagator(rotate_frequency(w, r, n, grid), t, n, 1.3, grid).unwrap();
                    assert!((orbit_reduce(&base, r) - direct).amax() <= 1e-12);
                }
            }
        }
    }
}
