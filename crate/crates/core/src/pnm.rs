//! Portable graymap (PGM) reading and writing, `P2` and `P5`, maxval 255.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::{normalize_image, GreyImage, Mask};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgmEncoding {
    /// `P2`
    Ascii,
    /// `P5`
    Binary,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graymap {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
}

struct Tokens<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            let c = self.bytes[self.pos];
            if c == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else if c.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn next_token(&mut self) -> Result<&'a [u8]> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::Format("unexpected end of PGM data".into()));
        }
        Ok(&self.bytes[start..self.pos])
    }

    fn next_uint(&mut self) -> Result<usize> {
        let tok = self.next_token()?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Format(format!("bad integer {:?}", String::from_utf8_lossy(tok))))
    }
}

pub fn decode_pgm(bytes: &[u8]) -> Result<Graymap> {
    let mut t = Tokens { bytes, pos: 0 };
    let magic = t.next_token()?;
    let encoding = match magic {
        b"P2" => PgmEncoding::Ascii,
        b"P5" => PgmEncoding::Binary,
        _ => return Err(Error::Format(format!("not a PGM file (magic {:?})", String::from_utf8_lossy(magic)))),
    };
    let width = t.next_uint()?;
    let height = t.next_uint()?;
    let maxval = t.next_uint()?;
    if maxval != 255 {
        return Err(Error::Format(format!("unsupported maxval {maxval}, expected 255")));
    }
    let count = width * height;
    let data = match encoding {
        PgmEncoding::Ascii => {
            let mut data = Vec::with_capacity(count);
            for _ in 0..count {
                let v = t.next_uint()?;
                if v > 255 {
                    return Err(Error::Format(format!("sample {v} exceeds maxval")));
                }
                data.push(v as u8);
            }
            data
        }
        PgmEncoding::Binary => {
            // exactly one whitespace byte separates the header from the raster
            let start = t.pos + 1;
            let end = start + count;
            if end > bytes.len() {
                return Err(Error::Format("truncated P5 raster".into()));
            }
            bytes[start..end].to_vec()
        }
    };
    Ok(Graymap { width, height, data })
}

pub fn encode_pgm(map: &Graymap, encoding: PgmEncoding) -> Vec<u8> {
    let mut out = Vec::with_capacity(map.data.len() * 4 + 32);
    match encoding {
        PgmEncoding::Binary => {
            write!(out, "P5\n{} {}\n255\n", map.width, map.height).unwrap();
            out.extend_from_slice(&map.data);
        }
        PgmEncoding::Ascii => {
            write!(out, "P2\n{} {}\n255\n", map.width, map.height).unwrap();
            for row in map.data.chunks(map.width.max(1)) {
                let line: Vec<String> = row.iter().map(u8::to_string).collect();
                out.extend_from_slice(line.join(" ").as_bytes());
                out.push(b'\n');
            }
        }
    }
    out
}

pub fn read_graymap(path: impl AsRef<Path>) -> Result<Graymap> {
    decode_pgm(&fs::read(path)?)
}

/// Reads a grey image, attaching `mask` if given (otherwise zero pixels are bad).
pub fn read_image(path: impl AsRef<Path>, mask: Option<Mask>) -> Result<GreyImage> {
    let path = path.as_ref();
    let map = read_graymap(path)?;
    if map.width != map.height {
        return Err(Error::Dimension(format!(
            "{} is {}x{}; only square images are supported",
            path.display(),
            map.width,
            map.height
        )));
    }
    Ok(normalize_image(map.width, &map.data, mask)?.with_provenance(path.display().to_string()))
}

/// Reads a mask graymap: 0 is bad, anything else good.
pub fn read_mask(path: impl AsRef<Path>) -> Result<Mask> {
    let map = read_graymap(path)?;
    if map.width != map.height {
        return Err(Error::Dimension("mask is not square".into()));
    }
    Mask::new(map.width, map.data.iter().map(|&v| v != 0).collect())
}

pub fn image_to_graymap(img: &GreyImage) -> Graymap {
    Graymap { width: img.size(), height: img.size(), data: img.to_raw() }
}

pub fn mask_to_graymap(mask: &Mask) -> Graymap {
    Graymap {
        width: mask.size(),
        height: mask.size(),
        data: mask.as_slice().iter().map(|&g| if g { 255 } else { 0 }).collect(),
    }
}

pub fn write_image(path: impl AsRef<Path>, img: &GreyImage, encoding: PgmEncoding) -> Result<()> {
    fs::write(path, encode_pgm(&image_to_graymap(img), encoding))?;
    Ok(())
}

pub fn write_mask(path: impl AsRef<Path>, mask: &Mask, encoding: PgmEncoding) -> Result<()> {
    fs::write(path, encode_pgm(&mask_to_graymap(mask), encoding))?;
    Ok(())
}
