//! The semi-discrete heat kernel on SE(2,N), computed two ways.
//!
//! * [`kernel_gft`] integrates `trace(exp(t A~) chi)` over the dual cone
//!   `[0, 2pi/N)` with the Plancherel weight `lambda dlambda dnu`.
//! * [`kernel_direct`] inverts the ordinary Fourier transform of the angular
//!   system started from `delta_N`, integrating over the full circle.
//!
//! Both use the same tensor trapezoid rule; the full-circle grid is `N`
//! rotated copies of the cone grid, so the two agree to rounding. Values are
//! unnormalized.

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::SymmetricExp;
use crate::segroup::{atilde, compose, rotate, AngleGrid, DualPoint, GroupElement};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub lambda_max: f64,
    pub n_lambda: usize,
    /// Nodes per cone sector `[0, 2pi/N)`.
    pub n_nu: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self { lambda_max: 20.0, n_lambda: 200, n_nu: 64 }
    }
}

impl Quadrature {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_max > 0.0) || self.n_lambda < 2 || self.n_nu < 2 {
            return Err(Error::InvalidParameter(format!("invalid quadrature {self:?}")));
        }
        Ok(())
    }

    /// Trapezoid nodes on `[0, lambda_max]` with the Plancherel factor folded in.
    fn lambda_nodes(&self) -> Vec<(f64, f64)> {
        let h = self.lambda_max / (self.n_lambda - 1) as f64;
        (0..self.n_lambda)
            .map(|i| {
                let lambda = i as f64 * h;
                let end = i == 0 || i == self.n_lambda - 1;
                (lambda, if end { 0.5 * h * lambda } else { h * lambda })
            })
            .collect()
    }

    /// `(nu, weight)` for `sectors` consecutive cone sectors.
    fn nu_nodes(&self, n: usize, sectors: usize) -> Vec<(f64, f64)> {
        let h = 2.0 * PI / n as f64 / self.n_nu as f64;
        (0..self.n_nu * sectors).map(|j| (j as f64 * h, h)).collect()
    }
}

/// One evaluated kernel value with the discarded imaginary part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue {
    pub value: f64,
    pub imag_residual: f64,
}

struct Node {
    vector: [f64; 2],
    weight: f64,
    propagator: Vec<f64>,
}

fn propagators(t: f64, n: usize, beta: f64, q: &Quadrature, sectors: usize) -> Result<Vec<Node>> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!("t must be >= 0, got {t}")));
    }
    q.validate()?;
    let lambdas = q.lambda_nodes();
    let nus = q.nu_nodes(n, sectors);
    let grid: Vec<(f64, f64, f64)> = lambdas
        .iter()
        .flat_map(|&(l, wl)| nus.iter().map(move |&(nu, wn)| (l, nu, wl * wn)))
        .filter(|&(_, _, w)| w != 0.0)
        .collect();
    grid.par_iter()
        .map(|&(lambda, nu, weight)| {
            let p = DualPoint::raw(lambda, nu);
            let a = atilde(&p, n, beta, AngleGrid::Full)?;
            let m = SymmetricExp::new(&a).map_err(|e| Error::Numerical { lambda, nu, reason: e.to_string() })?.exp(t);
            if m.iter().any(|v| !v.is_finite()) {
                return Err(Error::Numerical { lambda, nu, reason: "non-finite matrix exponential".into() });
            }
            Ok(Node { vector: p.vector(), weight, propagator: m.as_slice().to_vec() })
        })
        .collect()
}

/// Precomputed propagators on the dual cone for repeated [`kernel_gft`] calls.
pub struct GftKernel {
    n: usize,
    nodes: Vec<Node>,
}

impl GftKernel {
    pub fn new(t: f64, n: usize, beta: f64, q: &Quadrature) -> Result<Self> {
        Ok(Self { n, nodes: propagators(t, n, beta, q, 1)? })
    }

    /// `int trace(exp(t A~) chi(h)) lambda dlambda dnu` for a group element `h`.
    pub fn at_element(&self, h: &GroupElement) -> KernelValue {
        let n = self.n;
        let shift = h.rotation_index();
        let z = h.translation();
        let mut acc = Complex64::new(0.0, 0.0);
        let mut phases = vec![Complex64::new(0.0, 0.0); n];
        for node in &self.nodes {
            for (k, ph) in phases.iter_mut().enumerate() {
                let rv = rotate(AngleGrid::Full.angle(k, n), node.vector);
                *ph = Complex64::from_polar(1.0, rv[0] * z[0] + rv[1] * z[1]);
            }
            // trace(M D S^s) = sum_k M[k - s, k] d_k; storage is column-major
            let mut tr = Complex64::new(0.0, 0.0);
            for (k, ph) in phases.iter().enumerate() {
                let row = (k + n - shift) % n;
                tr += ph * node.propagator[k * n + row];
            }
            acc += tr * node.weight;
        }
        KernelValue { value: acc.re, imag_residual: acc.im }
    }

    /// Kernel at position `z` and direction index `r`.
    ///
    /// With the rotation convention of [`crate::segroup`], direction `e_r`
    /// corresponds to the group element of rotation index `-r`.
    pub fn eval(&self, z: [f64; 2], r: i64) -> KernelValue {
        self.at_element(&GroupElement::new(z[0], z[1], -r, self.n))
    }
}

/// Precomputed propagators on the full circle for repeated [`kernel_direct`] calls.
pub struct DirectKernel {
    n: usize,
    nodes: Vec<Node>,
}

impl DirectKernel {
    pub fn new(t: f64, n: usize, beta: f64, q: &Quadrature) -> Result<Self> {
        Ok(Self { n, nodes: propagators(t, n, beta, q, n)? })
    }

    /// `int (exp(t A~) delta_N)_r exp(i <V, z>) lambda dlambda dnu` over the plane.
    pub fn eval(&self, z: [f64; 2], r: i64) -> KernelValue {
        let n = self.n;
        let r = r.rem_euclid(n as i64) as usize;
        let mut acc = Complex64::new(0.0, 0.0);
        for node in &self.nodes {
            // delta_N is the basis vector of angle 0, column 0
            let m_r0 = node.propagator[r];
            let phase = node.vector[0] * z[0] + node.vector[1] * z[1];
            acc += Complex64::from_polar(node.weight * m_r0, phase);
        }
        KernelValue { value: acc.re, imag_residual: acc.im }
    }
}

pub fn kernel_gft(t: f64, z: [f64; 2], r: i64, n: usize, beta: f64, q: &Quadrature) -> Result<KernelValue> {
    Ok(GftKernel::new(t, n, beta, q)?.eval(z, r))
}

pub fn kernel_direct(t: f64, z: [f64; 2], r: i64, n: usize, beta: f64, q: &Quadrature) -> Result<KernelValue> {
    Ok(DirectKernel::new(t, n, beta, q)?.eval(z, r))
}

/// Kernel on the projectivized bundle: `P(gbar^-1 g) + P(gbar^-1 g_{+pi})`.
pub fn kernel_projective(t: f64, g: &GroupElement, gbar: &GroupElement, beta: f64, q: &Quadrature) -> Result<f64> {
    let n = g.order();
    if !n.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!("the projective kernel needs an even N, got {n}")));
    }
    let kernel = GftKernel::new(t, n, beta, q)?;
    projective_with(&kernel, g, gbar)
}

pub fn projective_with(kernel: &GftKernel, g: &GroupElement, gbar: &GroupElement) -> Result<f64> {
    let n = g.order();
    if !n.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!("the projective kernel needs an even N, got {n}")));
    }
    let inv = gbar.inverse();
    let a = compose(&inv, g)?;
    let b = compose(&inv, &g.shift_angle((n / 2) as i64))?;
    Ok(kernel.at_element(&a).value + kernel.at_element(&b).value)
}

/// Kernel values over a list of points and every direction index.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelTable {
    pub t: f64,
    pub angles: usize,
    pub beta: f64,
    pub quadrature: Quadrature,
    pub points: Vec<[f64; 2]>,
    /// `values[p * N + r]`
    pub values: Vec<KernelValue>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelFormula {
    Gft,
    Direct,
}

impl KernelTable {
    pub fn compute(
        formula: KernelFormula,
        t: f64,
        n: usize,
        beta: f64,
        q: &Quadrature,
        points: Vec<[f64; 2]>,
    ) -> Result<Self> {
        let values: Vec<KernelValue> = match formula {
            KernelFormula::Gft => {
                let k = GftKernel::new(t, n, beta, q)?;
                points
                    .par_iter()
                    .flat_map_iter(|&z| (0..n as i64).map(move |r| (z, r)).collect::<Vec<_>>())
                    .map(|(z, r)| k.eval(z, r))
                    .collect()
            }
            KernelFormula::Direct => {
                let k = DirectKernel::new(t, n, beta, q)?;
                points
                    .par_iter()
                    .flat_map_iter(|&z| (0..n as i64).map(move |r| (z, r)).collect::<Vec<_>>())
                    .map(|(z, r)| k.eval(z, r))
                    .collect()
            }
        };
        Ok(Self { t, angles: n, beta, quadrature: *q, points, values })
    }

    pub fn get(&self, point: usize, r: usize) -> KernelValue {
        self.values[point * self.angles + r]
    }

    pub fn max_magnitude(&self) -> f64 {
        self.values.iter().map(|v| v.value.abs()).fold(0.0, f64::max)
    }

    /// Largest `|imag| / max |value|` over the table.
    pub fn relative_imag_residual(&self) -> f64 {
        let scale = self.max_magnitude().max(f64::MIN_POSITIVE);
        self.values.iter().map(|v| v.imag_residual.abs()).fold(0.0, f64::max) / scale
    }

    /// CSV with header `x,y,r,value,imag_residual`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,r,value,imag_residual\n");
        for (p, z) in self.points.iter().enumerate() {
            for r in 0..self.angles {
                let v = self.get(p, r);
                writeln!(out, "{},{},{},{:e},{:e}", z[0], z[1], r, v.value, v.imag_residual).unwrap();
            }
        }
        out
    }
}

/// Square grid of `side x side` points spanning `[-half_width, half_width]^2`.
pub fn square_grid(side: usize, half_width: f64) -> Vec<[f64; 2]> {
    let step = if side > 1 { 2.0 * half_width / (side - 1) as f64 } else { 0.0 };
    let mut pts = Vec::with_capacity(side * side);
    for i in 0..side {
        for j in 0..side {
            let x = -half_width + j as f64 * step;
            let y = -half_width + i as f64 * step;
            pts.push([if side > 1 { x } else { 0.0 }, if side > 1 { y } else { 0.0 }]);
        }
    }
    pts
}

/// Gft and direct tables side by side with their pointwise difference.
pub fn comparison_csv(gft: &KernelTable, direct: &KernelTable) -> String {
    let mut out = String::from("x,y,r,value,imag_residual,direct_value,direct_imag_residual,difference\n");
    for (p, z) in gft.points.iter().enumerate() {
        for r in 0..gft.angles {
            let a = gft.get(p, r);
            let b = direct.get(p, r);
            writeln!(
                out,
                "{},{},{},{:e},{:e},{:e},{:e},{:e}",
                z[0],
                z[1],
                r,
                a.value,
                a.imag_residual,
                b.value,
                b.imag_residual,
                a.value - b.value
            )
            .unwrap();
        }
    }
    out
}

/// Literal `trace(exp(t A~) chi)` integrand at one dual point, for cross-checks.
pub fn trace_integrand(t: f64, p: &DualPoint, h: &GroupElement, beta: f64) -> Result<Complex64> {
    let n = h.order();
    let m = SymmetricExp::new(&atilde(p, n, beta, AngleGrid::Full)?)?.exp(t);
    let mc: DMatrix<Complex64> = m.map(|v| Complex64::new(v, 0.0));
    Ok((mc * crate::segroup::irrep(p, h)).trace())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> Quadrature {
        Quadrature { lambda_max: 6.0, n_lambda: 40, n_nu: 16 }
    }

    #[test]
    fn trace_shortcut_matches_literal_trace() {
        let q = Quadrature { lambda_max: 3.0, n_lambda: 4, n_nu: 3 };
        let n = 5;
        let k = GftKernel::new(0.4, n, 1.3, &q).unwrap();
        let h = GroupElement::new(0.3, -0.8, 2, n);
        let mut literal = Complex64::new(0.0, 0.0);
        for (l, wl) in q.lambda_nodes() {
            for (nu, wn) in q.nu_nodes(n, 1) {
                let p = DualPoint::raw(l, nu);
                literal += trace_integrand(0.4, &p, &h, 1.3).unwrap() * (wl * wn);
            }
        }
        let fast = k.at_element(&h);
        assert!((fast.value - literal.re).abs() < 1e-12);
        assert!((fast.imag_residual - literal.im).abs() < 1e-12);
    }

    #[test]
    fn shifted_trace_vanishes_at_time_zero() {
        let k = GftKernel::new(0.0, 4, 1.0, &small()).unwrap();
        for r in 1..4 {
            assert!(k.eval([0.2, -0.1], r).value.abs() < 1e-12);
        }
        let centre = k.eval([0.0, 0.0], 0).value;
        for z in [[0.5, 0.0], [1.0, 1.0], [-2.0, 0.3]] {
            assert!(k.eval(z, 0).value.abs() <= centre.abs());
        }
    }

    #[test]
    fn formulas_agree_on_matched_quadrature() {
        let q = small();
        for n in [3, 4, 6] {
            for beta in [0.5, 1.0, 4.0] {
                let g = GftKernel::new(0.5, n, beta, &q).unwrap();
                let d = DirectKernel::new(0.5, n, beta, &q).unwrap();
                for z in [[0.3, 0.1], [0.7, -0.25], [-1.0, 0.4]] {
                    for r in 0..n as i64 {
                        let a = g.eval(z, r).value;
                        let b = d.eval(z, r).value;
                        assert!((a - b).abs() < 1e-9, "N={n} beta={beta} z={z:?} r={r}: {a} vs {b}");
                    }
                }
            }
        }
    }

    #[test]
    fn example_point_agrees_at_default_quadrature() {
        let q = Quadrature::default();
        for r in 0..4 {
            let a = kernel_gft(0.5, [0.3, 0.1], r, 4, 1.0, &q).unwrap();
            let b = kernel_direct(0.5, [0.3, 0.1], r, 4, 1.0, &q).unwrap();
            assert!((a.value - b.value).abs() < 1e-8);
        }
    }

    #[test]
    fn without_jumps_only_the_source_direction_is_populated() {
        let d = DirectKernel::new(0.3, 4, 0.0, &small()).unwrap();
        assert!(d.eval([0.2, 0.1], 0).value.abs() > 1.0);
        for r in 1..4 {
            assert_eq!(d.eval([0.2, 0.1], r).value, 0.0);
        }
    }

    #[test]
    fn point_reflection_and_mirror_symmetries() {
        let q = small();
        let g = GftKernel::new(0.3, 6, 1.0, &q).unwrap();
        let scale = g.eval([0.0, 0.0], 0).value.abs();
        for z in [[0.4, 0.2], [-0.3, 0.9]] {
            for r in 0..6 {
                let v = g.eval(z, r).value;
                assert!((v - g.eval([-z[0], -z[1]], r).value).abs() < 1e-12 * scale);
                assert!((v - g.eval([z[0], -z[1]], -r).value).abs() < 1e-10 * scale);
            }
        }
    }

    #[test]
    fn imaginary_residue_is_negligible() {
        for n in [3, 4] {
            let table = KernelTable::compute(KernelFormula::Gft, 0.2, n, 1.0, &small(), square_grid(5, 1.0)).unwrap();
            assert!(table.relative_imag_residual() <= 1e-8);
            let table =
                KernelTable::compute(KernelFormula::Direct, 0.2, n, 1.0, &small(), square_grid(5, 1.0)).unwrap();
            assert!(table.relative_imag_residual() <= 1e-8);
        }
    }

    #[test]
    fn projective_kernel_examples() {
        let q = small();
        assert!(kernel_projective(0.1, &GroupElement::identity(3), &GroupElement::identity(3), 1.0, &q).is_err());

        let g = GroupElement::new(0.0, 0.0, 1, 4);
        let at_zero = kernel_projective(0.0, &g, &g, 1.0, &q).unwrap();
        let k0 = GftKernel::new(0.0, 4, 1.0, &q).unwrap();
        let expected = k0.eval([0.0, 0.0], 0).value + k0.eval([0.0, 0.0], 2).value;
        assert!((at_zero - expected).abs() < 1e-12 * expected.abs().max(1.0));

        let k = GftKernel::new(0.3, 4, 1.0, &q).unwrap();
        let g = GroupElement::new(0.4, -0.2, 1, 4);
        let gbar = GroupElement::new(-0.1, 0.3, 3, 4);
        let v = projective_with(&k, &g, &gbar).unwrap();
        let shifted = projective_with(&k, &g.shift_angle(2), &gbar.shift_angle(2)).unwrap();
        assert!((v - shifted).abs() <= 1e-12 * v.abs().max(1.0));
    }

    #[test]
    fn projective_kernel_matches_two_term_sum() {
        let q = small();
        let k = GftKernel::new(0.3, 4, 1.0, &q).unwrap();
        let g = GroupElement::new(0.25, 0.6, 3, 4);
        let gbar = GroupElement::new(-0.4, 0.1, 1, 4);
        // inverse and products by hand with the printed rotation
        let th = gbar.angle();
        let (s, c) = th.sin_cos();
        // R_th^{-1} = R_{-th} = [[c, -s], [s, c]]
        let inv_x = -(c * gbar.x - s * gbar.y);
        let inv_y = -(s * gbar.x + c * gbar.y);
        let inv_k = (4 - gbar.rotation_index()) % 4;
        let apply = |kk: usize, x: f64, y: f64| {
            let (s2, c2) = AngleGrid::Full.angle(inv_k, 4).sin_cos();
            let mx = inv_x + c2 * x + s2 * y;
            let my = inv_y - s2 * x + c2 * y;
            GroupElement::new(mx, my, (inv_k + kk) as i64, 4)
        };
        let first = apply(g.rotation_index(), g.x, g.y);
        let second = apply(g.rotation_index() + 2, g.x, g.y);
        let expected = k.at_element(&first).value + k.at_element(&second).value;
        let got = projective_with(&k, &g, &gbar).unwrap();
        assert!((got - expected).abs() < 1e-12 * expected.abs().max(1.0));
    }

    #[test]
    fn delta_sequence_against_gaussian_bump() {
        // int D_0(z, 0) phi(z) dz -> (2 pi)^2 phi(0) as lambda_max grows
        let sigma: f64 = 1.0;
        let pts = square_grid(49, 6.0);
        let dz = 12.0 / 48.0;
        let mut errors = Vec::new();
        for lambda_max in [1.0, 2.0, 4.0] {
            let q = Quadrature { lambda_max, n_lambda: 50, n_nu: 24 };
            let d = DirectKernel::new(0.0, 4, 1.0, &q).unwrap();
            let integral: f64 = pts
                .iter()
                .map(|&z| {
                    let phi = (-(z[0] * z[0] + z[1] * z[1]) / (2.0 * sigma * sigma)).exp();
                    d.eval(z, 0).value * phi * dz * dz
                })
                .sum();
            errors.push((integral - 4.0 * PI * PI).abs());
        }
        assert!(errors[0] > errors[1] && errors[1] > errors[2], "{errors:?}");
        assert!(errors[2] < 0.01 * 4.0 * PI * PI);
    }

    #[test]
    fn table_csv_layout() {
        let t = KernelTable::compute(KernelFormula::Gft, 0.1, 3, 1.0, &small(), square_grid(2, 1.0)).unwrap();
        let csv = t.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("x,y,r,value,imag_residual"));
        assert_eq!(csv.lines().count(), 1 + 4 * 3);
        assert!(lines.next().unwrap().starts_with("-1,-1,0,"));
    }
}
