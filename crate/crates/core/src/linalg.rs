//! Small dense helpers: symmetric matrix exponentials and the cyclic
//! tridiagonal solve used by Crank-Nicolson.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Eigendecomposition of a real symmetric matrix, reusable across times.
#[derive(Debug, Clone)]
pub struct SymmetricExp {
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
}

impl SymmetricExp {
    pub fn new(a: &DMatrix<f64>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Dimension("matrix is not square".into()));
        }
        let eig = SymmetricEigen::new(a.clone());
        if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invariant("non-finite eigenvalue".into()));
        }
        Ok(Self { eigenvalues: eig.eigenvalues, eigenvectors: eig.eigenvectors })
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    /// `exp(t A) = V diag(exp(t lambda)) V^T`.
    pub fn exp(&self, t: f64) -> DMatrix<f64> {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= (t * self.eigenvalues[j]).exp();
        }
        let out = scaled * v.transpose();
        // symmetrize so row/column symmetry of the exponential holds exactly
        (&out + out.transpose()) * 0.5
    }
}

pub fn expm_symmetric(a: &DMatrix<f64>, t: f64) -> Result<DMatrix<f64>> {
    Ok(SymmetricExp::new(a)?.exp(t))
}

/// `y = m x` for a real row-major `n x n` matrix and complex vector.
#[inline]
pub fn real_matvec(m: &[f64], x: &[Complex64], y: &mut [Complex64]) {
    let n = x.len();
    for (i, yi) in y.iter_mut().enumerate() {
        let row = &m[i * n..(i + 1) * n];
        let (mut re, mut im) = (0.0, 0.0);
        for (a, xv) in row.iter().zip(x) {
            re += a * xv.re;
            im += a * xv.im;
        }
        *yi = Complex64::new(re, im);
    }
}

/// Row-major copy of a dense matrix.
pub fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    m.transpose().as_slice().to_vec()
}

/// Cyclic tridiagonal system with real coefficients.
///
/// Row `i` reads `sub[i] x[i-1] + diag[i] x[i] + sup[i] x[i+1]`, indices mod `n`,
/// so `sub[0]` is the top-right corner and `sup[n-1]` the bottom-left corner.
#[derive(Debug, Clone)]
pub struct CyclicTridiagonal {
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    pub sup: Vec<f64>,
}

impl CyclicTridiagonal {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        let n = self.len();
        for i in 0..n {
            let prev = x[(i + n - 1) % n];
            let next = x[(i + 1) % n];
            y[i] = prev * self.sub[i] + x[i] * self.diag[i] + next * self.sup[i];
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] += self.diag[i];
            m[(i, (i + n - 1) % n)] += self.sub[i];
            m[(i, (i + 1) % n)] += self.sup[i];
        }
        m
    }

    /// Solves `A x = rhs` by the Sherman-Morrison correction of two Thomas sweeps.
    ///
    /// Requires `n >= 3` and a matrix for which the modified tridiagonal part
    /// is non-singular (diagonal dominance suffices).
    pub fn solve(&self, rhs: &[Complex64], x: &mut [Complex64]) -> Result<()> {
        let n = self.len();
        if n < 3 || rhs.len() != n || x.len() != n {
            return Err(Error::Dimension(format!("cyclic solve needs n >= 3, got {n}")));
        }
        let top_right = self.sub[0];
        let bottom_left = self.sup[n - 1];
        let gamma = -self.diag[0];
        let mut diag = self.diag.clone();
        diag[0] -= gamma;
        diag[n - 1] -= top_right * bottom_left / gamma;

        thomas(&self.sub[1..], &diag, &self.sup[..n - 1], rhs, x)?;
        let mut u = vec![Complex64::new(0.0, 0.0); n];
        u[0] = Complex64::new(gamma, 0.0);
        u[n - 1] = Complex64::new(bottom_left, 0.0);
        let mut z = vec![Complex64::new(0.0, 0.0); n];
        thomas(&self.sub[1..], &diag, &self.sup[..n - 1], &u, &mut z)?;

        let denom = Complex64::new(1.0, 0.0) + z[0] + z[n - 1] * (top_right / gamma);
        let fact = (x[0] + x[n - 1] * (top_right / gamma)) / denom;
        for (xi, zi) in x.iter_mut().zip(&z) {
            *xi -= fact * zi;
        }
        Ok(())
    }
}

/// Thomas algorithm; `lower[i]` couples rows `i+1` and `i`, `upper[i]` rows `i` and `i+1`.
fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[Complex64], x: &mut [Complex64]) -> Result<()> {
    let n = diag.len();
    let mut gam = vec![0.0; n];
    let mut bet = diag[0];
    if bet == 0.0 {
        return Err(Error::Invariant("zero pivot in tridiagonal solve".into()));
    }
    x[0] = rhs[0] / bet;
    for j in 1..n {
        gam[j] = upper[j - 1] / bet;
        bet = diag[j] - lower[j - 1] * gam[j];
        if bet == 0.0 {
            return Err(Error::Invariant("zero pivot in tridiagonal solve".into()));
        }
        x[j] = (rhs[j] - x[j - 1] * lower[j - 1]) / bet;
    }
    for j in (0..n - 1).rev() {
        let next = x[j + 1];
        x[j] -= next * gam[j + 1];
    }
    Ok(())
}
