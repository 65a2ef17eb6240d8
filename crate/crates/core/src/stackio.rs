//! `SE2N` binary stack files: magic, `M`, `M`, `N` as little-endian `u32`,
//! then `M*M*N` little-endian `f64` in `(row, col, r)` order.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::stack::LiftedStack;

pub const MAGIC: &[u8; 4] = b"SE2N";

pub fn encode_stack(s: &LiftedStack) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + s.values().len() * 8);
    out.extend_from_slice(MAGIC);
    let m = s.size() as u32;
    for v in [m, m, s.angles() as u32] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for v in s.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_stack(bytes: &[u8]) -> Result<LiftedStack> {
    if bytes.len() < 16 || &bytes[..4] != MAGIC {
        return Err(Error::Format("missing SE2N header".into()));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[4 + 4 * i..8 + 4 * i].try_into().unwrap()) as usize;
    let (m1, m2, n) = (word(0), word(1), word(2));
    if m1 != m2 {
        return Err(Error::Dimension(format!("stack grid {m1}x{m2} is not square")));
    }
    let count = m1 * m2 * n;
    let body = &bytes[16..];
    if body.len() != count * 8 {
        return Err(Error::Format(format!("SE2N body has {} bytes, expected {}", body.len(), count * 8)));
    }
    let values = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    LiftedStack::new(m1, n, values)
}

pub fn write_stack(path: impl AsRef<Path>, s: &LiftedStack) -> Result<()> {
    fs::write(path, encode_stack(s))?;
    Ok(())
}

pub fn read_stack(path: impl AsRef<Path>) -> Result<LiftedStack> {
    decode_stack(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_layout() {
        let s = LiftedStack::new(2, 3, (0..12).map(f64::from).collect()).unwrap();
        let bytes = encode_stack(&s);
        assert_eq!(&bytes[..4], b"SE2N");
        assert_eq!(&bytes[4..16], &[2, 0, 0, 0, 2, 0, 0, 0, 3, 0, 0, 0]);
        assert_eq!(&bytes[16..24], &0.0f64.to_le_bytes());
        assert_eq!(&bytes[24..32], &1.0f64.to_le_bytes());
        assert_eq!(bytes.len(), 16 + 12 * 8);
    }

    #[test]
    fn malformed_files_rejected() {
        assert!(decode_stack(b"SE2X").is_err());
        let s = LiftedStack::zeros(2, 3);
        let mut bytes = encode_stack(&s);
        bytes.pop();
        assert!(decode_stack(&bytes).is_err());
    }

    proptest! {
        #[test]
        fn round_trip(size in 1usize..5, angles in 3usize..6, seed in proptest::collection::vec(-1e6f64..1e6, 0..1)) {
            let offset = seed.first().copied().unwrap_or(0.5);
            let vals: Vec<f64> = (0..size * size * angles).map(|i| offset * i as f64 - 3.25).collect();
            let s = LiftedStack::new(size, angles, vals).unwrap();
            prop_assert_eq!(decode_stack(&encode_stack(&s)).unwrap(), s);
        }
    }
}
