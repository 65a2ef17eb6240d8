//! The discrete motion group SE(2,N): translations of the plane combined
//! with rotations by multiples of `2 pi / N`.
//!
//! The rotation matrix follows the convention
//! `R(theta) = [[cos, sin], [-sin, cos]]`, which turns vectors by `-theta` in
//! the usual orientation. Shifts act as `S e_k = e_{k+1}` with indices mod `N`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Which angle grid an operation works on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AngleGrid {
    /// `e_k = 2 pi k / N`, the group's own rotation angles.
    Full,
    /// `e_k = pi k / N`, undirected orientations.
    Projective,
}

impl AngleGrid {
    pub fn step(self, n: usize) -> f64 {
        match self {
            AngleGrid::Full => 2.0 * PI / n as f64,
            AngleGrid::Projective => PI / n as f64,
        }
    }

    pub fn angle(self, k: usize, n: usize) -> f64 {
        k as f64 * self.step(n)
    }

    pub fn angles(self, n: usize) -> Vec<f64> {
        (0..n).map(|k| self.angle(k, n)).collect()
    }
}

/// `R(theta) v` with the printed sign convention.
#[inline]
pub fn rotate(theta: f64, v: [f64; 2]) -> [f64; 2] {
    let (s, c) = theta.sin_cos();
    [c * v[0] + s * v[1], -s * v[0] + c * v[1]]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupElement {
    pub x: f64,
    pub y: f64,
    k: usize,
    n: usize,
}

impl GroupElement {
    pub fn new(x: f64, y: f64, k: i64, n: usize) -> Self {
        assert!(n > 0, "N must be positive");
        Self { x, y, k: k.rem_euclid(n as i64) as usize, n }
    }

    pub fn identity(n: usize) -> Self {
        Self::new(0.0, 0.0, 0, n)
    }

    pub fn rotation_index(&self) -> usize {
        self.k
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn translation(&self) -> [f64; 2] {
        [self.x, self.y]
    }

    pub fn angle(&self) -> f64 {
        AngleGrid::Full.angle(self.k, self.n)
    }

    /// `(X, k) -> (-R_k^{-1} X, -k)`.
    pub fn inverse(&self) -> Self {
        let back = rotate(-self.angle(), [self.x, self.y]);
        Self::new(-back[0], -back[1], -(self.k as i64), self.n)
    }

    /// Rotation index shifted by `dk`, translation unchanged.
    pub fn shift_angle(&self, dk: i64) -> Self {
        Self::new(self.x, self.y, self.k as i64 + dk, self.n)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.n == other.n && self.k == other.k && (self.x - other.x).abs() <= tol && (self.y - other.y).abs() <= tol
    }
}

/// `g2 . g1 = (X2 + R_{k2} X1, k1 + k2)`.
pub fn compose(g2: &GroupElement, g1: &GroupElement) -> Result<GroupElement> {
    if g2.n != g1.n {
        return Err(Error::Dimension(format!("cannot compose elements of SE(2,{}) and SE(2,{})", g2.n, g1.n)));
    }
    let moved = rotate(g2.angle(), [g1.x, g1.y]);
    Ok(GroupElement::new(g2.x + moved[0], g2.y + moved[1], (g1.k + g2.k) as i64, g2.n))
}

/// A point `(lambda, nu)` of the dual cone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualPoint {
    pub lambda: f64,
    pub nu: f64,
}

impl DualPoint {
    /// Checked constructor: `lambda > 0` and `0 <= nu < 2 pi / N`.
    pub fn new(lambda: f64, nu: f64, n: usize) -> Result<Self> {
        if !(lambda > 0.0) || !(0.0..2.0 * PI / n as f64).contains(&nu) {
            return Err(Error::InvalidParameter(format!("dual point ({lambda}, {nu}) outside the cone for N={n}")));
        }
        Ok(Self { lambda, nu })
    }

    /// Unchecked; used by quadrature nodes at `lambda = 0` and the full circle.
    pub fn raw(lambda: f64, nu: f64) -> Self {
        Self { lambda, nu }
    }

    pub fn vector(&self) -> [f64; 2] {
        let (s, c) = self.nu.sin_cos();
        [self.lambda * c, self.lambda * s]
    }
}

/// Permutation matrix of `S^r`.
pub fn shift_matrix(n: usize, r: i64) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for k in 0..n {
        let to = (k as i64 + r).rem_euclid(n as i64) as usize;
        m[(to, k)] = 1.0;
    }
    m
}

/// `(S^{-r} B S^r)_{a,b} = B_{a+r, b+r}`.
pub fn conjugate_by_shift(b: &DMatrix<f64>, r: i64) -> DMatrix<f64> {
    let n = b.nrows() as i64;
    DMatrix::from_fn(b.nrows(), b.ncols(), |a, c| {
        b[((a as i64 + r).rem_euclid(n) as usize, (c as i64 + r).rem_euclid(n) as usize)]
    })
}

/// Generator of the nearest-neighbour jump process on `N` directions.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpGenerator {
    pub beta: f64,
    pub matrix: DMatrix<f64>,
}

impl JumpGenerator {
    pub fn order(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Circulant matrix with `-beta` on the diagonal and `beta / 2` on both
/// cyclic neighbours.
pub fn jump_generator(n: usize, beta: f64) -> Result<JumpGenerator> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("the jump generator needs N >= 3, got {n}")));
    }
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::InvalidParameter(format!("beta must be >= 0, got {beta}")));
    }
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = -beta;
        m[(i, (i + 1) % n)] = beta / 2.0;
        m[(i, (i + n - 1) % n)] = beta / 2.0;
    }
    Ok(JumpGenerator { beta, matrix: m })
}

/// `chi_{lambda,nu}(X, r) = diag_k(exp(i <R_k V, X>)) S^r` on the full grid.
///
/// The phase uses the dual vector turned by `R_k`, which makes the map a
/// homomorphism for [`compose`].
pub fn irrep(p: &DualPoint, g: &GroupElement) -> DMatrix<Complex64> {
    let n = g.order();
    let v = p.vector();
    let mut m = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for k in 0..n {
        let rv = rotate(AngleGrid::Full.angle(k, n), v);
        let phase = rv[0] * g.x + rv[1] * g.y;
        let col = (k + n - g.rotation_index()) % n;
        // (D S^r)_{k, col} is non-zero only where S^r maps e_col to e_k
        m[(k, col)] = Complex64::from_polar(1.0, phase);
    }
    m
}

/// `Lambda_N - diag_k(lambda^2 cos^2(e_k - nu))`.
pub fn atilde(p: &DualPoint, n: usize, beta: f64, grid: AngleGrid) -> Result<DMatrix<f64>> {
    let mut m = jump_generator(n, beta)?.matrix;
    for k in 0..n {
        let c = (grid.angle(k, n) - p.nu).cos();
        m[(k, k)] -= p.lambda * p.lambda * c * c;
    }
    Ok(m)
}
