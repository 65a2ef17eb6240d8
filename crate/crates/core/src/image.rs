use crate::error::{Error, Result};

/// Boolean grid marking non-corrupted pixels (`true` = good).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    size: usize,
    good: Vec<bool>,
}

impl Mask {
    pub fn new(size: usize, good: Vec<bool>) -> Result<Self> {
        if good.len() != size * size {
            return Err(Error::Dimension(format!("mask has {} cells, expected {}x{}", good.len(), size, size)));
        }
        Ok(Self { size, good })
    }

    pub fn all_good(size: usize) -> Self {
        Self { size, good: vec![true; size * size] }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn is_good(&self, row: usize, col: usize) -> bool {
        self.good[row * self.size + col]
    }

    pub fn set(&mut self, row: usize, col: usize, good: bool) {
        self.good[row * self.size + col] = good;
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.good
    }

    pub fn good_count(&self) -> usize {
        self.good.iter().filter(|&&g| g).count()
    }

    /// `true` when every good pixel of `other` is also good here.
    pub fn contains(&self, other: &Mask) -> bool {
        self.size == other.size && self.good.iter().zip(&other.good).all(|(&a, &b)| a || !b)
    }
}

/// Square grey image with values in `[0, 1]`, stored row-major.
///
/// Rows run along `y` and columns along `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct GreyImage {
    size: usize,
    values: Vec<f64>,
    mask: Option<Mask>,
    pub provenance: String,
}

impl GreyImage {
    pub fn new(size: usize, values: Vec<f64>) -> Result<Self> {
        if size == 0 {
            return Err(Error::Dimension("image size must be positive".into()));
        }
        if values.len() != size * size {
            return Err(Error::Dimension(format!("image has {} values, expected {}x{}", values.len(), size, size)));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0 || **v > 1.0) {
            return Err(Error::Invariant(format!("grey value {v} outside [0, 1]")));
        }
        Ok(Self { size, values, mask: None, provenance: String::new() })
    }

    pub fn zeros(size: usize) -> Self {
        Self { size, values: vec![0.0; size * size], mask: None, provenance: String::new() }
    }

    pub fn with_mask(mut self, mask: Mask) -> Result<Self> {
        if mask.size() != self.size {
            return Err(Error::Dimension(format!(
                "mask is {}x{}, image is {}x{}",
                mask.size(),
                mask.size(),
                self.size,
                self.size
            )));
        }
        self.mask = Some(mask);
        Ok(self)
    }

    pub fn with_provenance(mut self, provenance: impl Into<String>) -> Self {
        self.provenance = provenance.into();
        self
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.size + col]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mask(&self) -> Option<&Mask> {
        self.mask.as_ref()
    }

    /// The explicit mask, or an all-good mask when none is attached.
    pub fn good_mask(&self) -> Mask {
        self.mask.clone().unwrap_or_else(|| Mask::all_good(self.size))
    }

    /// Values rescaled to `0..=255` with rounding.
    pub fn to_raw(&self) -> Vec<u8> {
        self.values.iter().map(|v| (v * 255.0).round().clamp(0.0, 255.0) as u8).collect()
    }
}

/// Scales an 8-bit grid to `[0, 1]`.
///
/// Without an explicit mask, pixels with raw value 0 are treated as corrupted.
pub fn normalize_image(size: usize, raw: &[u8], mask: Option<Mask>) -> Result<GreyImage> {
    if raw.len() != size * size {
        return Err(Error::Dimension(format!(
            "raw grid has {} values, which is not {}x{} (only square images are supported)",
            raw.len(),
            size,
            size
        )));
    }
    let values = raw.iter().map(|&v| f64::from(v) / 255.0).collect();
    let mask = match mask {
        Some(m) => m,
        None => Mask::new(size, raw.iter().map(|&v| v > 0).collect())?,
    };
    GreyImage::new(size, values)?.with_mask(mask)
}

/// Same as [`normalize_image`] for a nested grid, rejecting ragged or
/// non-square input.
pub fn normalize_rows(rows: &[Vec<u8>], mask: Option<Mask>) -> Result<GreyImage> {
    let size = rows.len();
    if rows.iter().any(|r| r.len() != size) {
        return Err(Error::Dimension("raw grid is not square".into()));
    }
    let flat: Vec<u8> = rows.iter().flatten().copied().collect();
    normalize_image(size, &flat, mask)
}
