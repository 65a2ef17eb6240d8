use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{row_major, SymmetricExp};
use crate::params::DiffusionParams;
use crate::segroup::{jump_generator, AngleGrid};

/// `sin(2 pi j / M)`, the symbol of the central difference up to `i sqrt(M)`.
pub fn spectral_symbol(j: usize, m: usize) -> f64 {
    let (base, sign) = canonical_index(j, m);
    sign as f64 * (2.0 * PI * base as f64 / m as f64).sin()
}

/// Smallest index with the same `|sin(2 pi j / M)|`, and the sign of the sine.
fn canonical_index(j: usize, m: usize) -> (usize, i8) {
    let j = j % m;
    let (mut base, sign) = if 2 * j <= m { (j, 1) } else { (m - j, -1) };
    if m.is_multiple_of(2) && 4 * base > m {
        base = m / 2 - base;
    }
    (base, if base == 0 { 1 } else { sign })
}

/// Key under which two frequency blocks have identical matrices.
///
/// The block depends on the symbols only through `(a^r)^2`, so flipping both
/// signs together changes nothing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlockSignature {
    pub base_x: u32,
    pub base_y: u32,
    pub same_sign: bool,
}

/// Signature for the 0-based frequency pair `(kx, ky)`.
pub fn block_signature(kx: usize, ky: usize, m: usize) -> BlockSignature {
    let (bx, sx) = canonical_index(kx, m);
    let (by, sy) = canonical_index(ky, m);
    let same_sign = bx == 0 || by == 0 || sx == sy;
    BlockSignature { base_x: bx as u32, base_y: by as u32, same_sign }
}

fn signature_matrix(sig: BlockSignature, m: usize, n: usize, beta: f64) -> Result<DMatrix<f64>> {
    let sx = (2.0 * PI * sig.base_x as f64 / m as f64).sin();
    let sy = (2.0 * PI * sig.base_y as f64 / m as f64).sin();
    let sy = if sig.same_sign { sy } else { -sy };
    let mut a = jump_generator(n, beta)?.matrix;
    for r in 0..n {
        let (sin_e, cos_e) = AngleGrid::Projective.angle(r, n).sin_cos();
        let ar = cos_e * sx + sin_e * sy;
        a[(r, r)] -= m as f64 * ar * ar;
    }
    Ok(a * 0.5)
}

/// One decoupled `N x N` system `A = (Lambda_N - M diag((a^r)^2)) / 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyBlock {
    /// 1-based x frequency.
    pub k: usize,
    /// 1-based y frequency.
    pub l: usize,
    pub matrix: DMatrix<f64>,
}

/// Block for the 1-based frequencies `k` (paired with `cos e_r`) and `l`.
pub fn frequency_block(k: usize, l: usize, p: &DiffusionParams) -> Result<FrequencyBlock> {
    let m = p.size;
    if k == 0 || l == 0 || k > m || l > m {
        return Err(Error::InvalidParameter(format!("frequency indices must lie in 1..={m}, got ({k}, {l})")));
    }
    let sig = block_signature(k - 1, l - 1, m);
    Ok(FrequencyBlock { k, l, matrix: signature_matrix(sig, m, p.angles, p.beta())? })
}

/// Precomputed `exp(tau A)` for every distinct block signature.
#[derive(Debug, Clone)]
pub struct ExponentialBank {
    tau: f64,
    size: usize,
    angles: usize,
    beta: f64,
    entries: HashMap<BlockSignature, usize>,
    matrices: Vec<Vec<f64>>,
    /// Matrix index for each block in `(ky, kx)` row-major order.
    block_index: Vec<u32>,
}

impl ExponentialBank {
    pub fn new(p: &DiffusionParams, tau: f64) -> Result<Self> {
        if !(tau >= 0.0 && tau.is_finite()) {
            return Err(Error::InvalidParameter(format!("bank step must be >= 0, got {tau}")));
        }
        let (m, n, beta) = (p.size, p.angles, p.beta());
        let mut signatures: Vec<BlockSignature> = (0..m * m).map(|b| block_signature(b % m, b / m, m)).collect();
        signatures.sort_unstable();
        signatures.dedup();
        let matrices = signatures
            .par_iter()
            .map(|&sig| {
                let e = SymmetricExp::new(&signature_matrix(sig, m, n, beta)?)?.exp(tau);
                if e.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Invariant(format!("non-finite exponential for {sig:?}")));
                }
                Ok(row_major(&e))
            })
            .collect::<Result<Vec<_>>>()?;
        let entries: HashMap<_, _> = signatures.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        let block_index = (0..m * m).map(|b| entries[&block_signature(b % m, b / m, m)] as u32).collect();
        Ok(Self { tau, size: m, angles: n, beta, entries, matrices, block_index })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    /// `M^2` divided by the number of distinct matrices.
    pub fn reuse_factor(&self) -> f64 {
        (self.size * self.size) as f64 / self.matrices.len() as f64
    }

    pub fn get(&self, sig: &BlockSignature) -> Option<&[f64]> {
        self.entries.get(sig).map(|&i| self.matrices[i].as_slice())
    }

    /// Row-major `exp(tau A)` for the 0-based block `(ky, kx)`.
    pub fn block(&self, ky: usize, kx: usize) -> &[f64] {
        &self.matrices[self.block_index[ky * self.size + kx] as usize]
    }

    pub fn matches(&self, p: &DiffusionParams) -> bool {
        self.size == p.size && self.angles == p.angles && self.beta == p.beta()
    }
}
