use num_complex::Complex64;

use crate::error::{Error, Result};

/// Orientation score on an `M x M` grid with `N` directions.
///
/// Layout is `(row, col, r)` row-major, so every angle column is contiguous.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedStack {
    size: usize,
    angles: usize,
    values: Vec<f64>,
}

impl LiftedStack {
    pub fn new(size: usize, angles: usize, values: Vec<f64>) -> Result<Self> {
        if angles < 3 {
            return Err(Error::InvalidParameter(format!("a lifted stack needs at least 3 directions, got {angles}")));
        }
        if size == 0 || values.len() != size * size * angles {
            return Err(Error::Dimension(format!(
                "stack has {} values, expected {size}x{size}x{angles}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invariant("stack contains non-finite values".into()));
        }
        Ok(Self { size, angles, values })
    }

    pub fn zeros(size: usize, angles: usize) -> Self {
        assert!(angles >= 3, "a lifted stack needs at least 3 directions");
        Self { size, angles, values: vec![0.0; size * size * angles] }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn angles(&self) -> usize {
        self.angles
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize, r: usize) -> f64 {
        self.values[(row * self.size + col) * self.angles + r]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, r: usize, v: f64) {
        self.values[(row * self.size + col) * self.angles + r] = v;
    }

    pub fn column(&self, row: usize, col: usize) -> &[f64] {
        let start = (row * self.size + col) * self.angles;
        &self.values[start..start + self.angles]
    }

    pub fn column_mut(&mut self, row: usize, col: usize) -> &mut [f64] {
        let start = (row * self.size + col) * self.angles;
        &mut self.values[start..start + self.angles]
    }

    /// Angle columns in pixel order.
    pub fn columns(&self) -> std::slice::ChunksExact<'_, f64> {
        self.values.chunks_exact(self.angles)
    }

    pub fn columns_mut(&mut self) -> std::slice::ChunksExactMut<'_, f64> {
        self.values.chunks_exact_mut(self.angles)
    }

    /// `a * self + other`, elementwise.
    pub fn axpy(&self, a: f64, other: &LiftedStack) -> Result<LiftedStack> {
        if self.size != other.size || self.angles != other.angles {
            return Err(Error::Dimension("stack shapes differ".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(x, y)| a * x + y).collect();
        Ok(LiftedStack { size: self.size, angles: self.angles, values })
    }
}

/// Per-angle 2-D DFT of a [`LiftedStack`], same `(row, col, r)` layout.
///
/// Row index is the `y` frequency, column index the `x` frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralStack {
    size: usize,
    angles: usize,
    values: Vec<Complex64>,
}

impl SpectralStack {
    pub fn new(size: usize, angles: usize, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != size * size * angles {
            return Err(Error::Dimension(format!(
                "spectral stack has {} values, expected {size}x{size}x{angles}",
                values.len()
            )));
        }
        Ok(Self { size, angles, values })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn angles(&self) -> usize {
        self.angles
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    #[inline]
    pub fn get(&self, ky: usize, kx: usize, r: usize) -> Complex64 {
        self.values[(ky * self.size + kx) * self.angles + r]
    }

    pub fn block(&self, ky: usize, kx: usize) -> &[Complex64] {
        let start = (ky * self.size + kx) * self.angles;
        &self.values[start..start + self.angles]
    }

    pub fn max_abs_diff(&self, other: &SpectralStack) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

/// Sum of every entry, accumulated in storage order.
pub fn stack_total_mass(s: &LiftedStack) -> f64 {
    s.values.iter().sum()
}

/// Largest absolute entrywise difference between two stacks of equal shape.
pub fn max_abs_diff(a: &LiftedStack, b: &LiftedStack) -> f64 {
    a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
