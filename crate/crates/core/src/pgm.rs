//! Reading and writing 8-bit portable graymaps (`P2` text and `P5` binary).

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graymap {
    pub width: usize,
    pub height: usize,
    /// Row-major luminance, rescaled to `0..=255`.
    pub pixels: Vec<u8>,
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Header<'a> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::UnsupportedFormat(format!("malformed {what}")))
    }
}

pub fn decode(bytes: &[u8]) -> Result<Graymap> {
    if bytes.len() < 2 || bytes[0] != b'P' {
        return Err(Error::UnsupportedFormat("not a portable graymap".into()));
    }
    let binary = match bytes[1] {
        b'5' => true,
        b'2' => false,
        other => {
            return Err(Error::UnsupportedFormat(format!(
                "magic P{} is not a graymap (expected P2 or P5)",
                other as char
            )))
        }
    };
    let mut header = Header { bytes, pos: 2 };
    let width = header.number("width")?;
    let height = header.number("height")?;
    let maxval = header.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::UnsupportedFormat("zero image dimension".into()));
    }
    if maxval == 0 || maxval > 255 {
        return Err(Error::UnsupportedFormat(format!(
            "maxval {maxval} is not an 8-bit graymap"
        )));
    }
    let count = width * height;
    let raw: Vec<usize> = if binary {
        // exactly one whitespace byte separates the header from the raster
        let start = header.pos + 1;
        let data = bytes
            .get(start..start + count)
            .ok_or_else(|| Error::UnsupportedFormat("truncated raster".into()))?;
        data.iter().map(|&b| b as usize).collect()
    } else {
        (0..count)
            .map(|_| header.number("pixel"))
            .collect::<Result<_>>()?
    };
    let pixels = raw
        .into_iter()
        .map(|v| {
            if v > maxval {
                Err(Error::UnsupportedFormat(format!("pixel {v} above maxval {maxval}")))
            } else {
                Ok(((v * 255 + maxval / 2) / maxval) as u8)
            }
        })
        .collect::<Result<_>>()?;
    Ok(Graymap {
        width,
        height,
        pixels,
    })
}

pub fn encode_p5(width: usize, height: usize, pixels: &[u8]) -> Vec<u8> {
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(pixels);
    out
}

pub fn read(path: &Path) -> Result<Graymap> {
    let bytes = fs::read(path).map_err(|source| Error::Read {
        path: path.to_path_buf(),
        source,
    })?;
    decode(&bytes)
}

pub fn write_p5(path: &Path, width: usize, height: usize, pixels: &[u8]) -> Result<()> {
    fs::write(path, encode_p5(width, height, pixels))?;
    Ok(())
}
