//! 8-bit PGM (Netpbm P5 binary and P2 ASCII) encode/decode.
//!
//! Only `maxval = 255` is accepted. Pixels are row-major, top-left first.
//! The writer always emits the canonical header `P<n>\n<w> <h>\n255\n`.

use cbx_core::GrayImage;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgmFormat {
    /// `P5`
    Binary,
    /// `P2`
    Ascii,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PgmError {
    #[error("not a PGM file (magic must be P5 or P2)")]
    BadMagic,
    #[error("malformed PGM header: {0}")]
    BadHeader(&'static str),
    #[error("unsupported maxval {0} (only 255 is supported)")]
    UnsupportedMaxval(u32),
    #[error("truncated pixel payload: expected {expected} pixels, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("invalid pixel value {0:?}")]
    BadPixel(String),
    #[error("invalid image dimensions {width}x{height}")]
    BadDimensions { width: usize, height: usize },
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    /// Skips whitespace and `#` comments running to end of line.
    fn skip_ws(&mut self) {
        while let Some(&b) = self.buf.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.buf.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn token(&mut self) -> Option<&'a [u8]> {
        self.skip_ws();
        let start = self.pos;
        while self.buf.get(self.pos).is_some_and(|b| !b.is_ascii_whitespace() && *b != b'#') {
            self.pos += 1;
        }
        (self.pos > start).then(|| &self.buf[start..self.pos])
    }

    fn number(&mut self, what: &'static str) -> Result<u32, PgmError> {
        let tok = self.token().ok_or(PgmError::BadHeader(what))?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or(PgmError::BadHeader(what))
    }
}

pub fn read_pgm(bytes: &[u8]) -> Result<GrayImage, PgmError> {
    let format = match bytes.get(..2) {
        Some(b"P5") => PgmFormat::Binary,
        Some(b"P2") => PgmFormat::Ascii,
        _ => return Err(PgmError::BadMagic),
    };
    let mut cur = Cursor { buf: bytes, pos: 2 };
    if !cur.buf.get(cur.pos).is_some_and(|b| b.is_ascii_whitespace() || *b == b'#') {
        return Err(PgmError::BadMagic);
    }
    let width = cur.number("width")? as usize;
    let height = cur.number("height")? as usize;
    let maxval = cur.number("maxval")?;
    if maxval != 255 {
        return Err(PgmError::UnsupportedMaxval(maxval));
    }
    let expected = width
        .checked_mul(height)
        .filter(|&n| n > 0)
        .ok_or(PgmError::BadDimensions { width, height })?;

    let pixels = match format {
        PgmFormat::Binary => {
            // exactly one whitespace byte separates maxval from the payload
            if !cur.buf.get(cur.pos).is_some_and(|b| b.is_ascii_whitespace()) {
                return Err(PgmError::BadHeader("missing whitespace after maxval"));
            }
            let start = cur.pos + 1;
            let found = bytes.len().saturating_sub(start);
            if found < expected {
                return Err(PgmError::Truncated { expected, found });
            }
            bytes[start..start + expected].to_vec()
        }
        PgmFormat::Ascii => {
            let mut pixels = Vec::with_capacity(expected);
            while pixels.len() < expected {
                let Some(tok) = cur.token() else {
                    return Err(PgmError::Truncated { expected, found: pixels.len() });
                };
                let value = std::str::from_utf8(tok)
                    .ok()
                    .and_then(|s| s.parse::<u8>().ok())
                    .ok_or_else(|| PgmError::BadPixel(String::from_utf8_lossy(tok).into_owned()))?;
                pixels.push(value);
            }
            pixels
        }
    };
    GrayImage::new(width, height, pixels).map_err(|_| PgmError::BadDimensions { width, height })
}

pub fn write_pgm(image: &GrayImage, format: PgmFormat) -> Vec<u8> {
    let (w, h) = (image.width(), image.height());
    match format {
        PgmFormat::Binary => {
            let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
            out.extend_from_slice(image.pixels());
            out
        }
        PgmFormat::Ascii => {
            let mut out = format!("P2\n{w} {h}\n255\n");
            for row in image.pixels().chunks(w) {
                let line: Vec<String> = row.iter().map(u8::to_string).collect();
                out.push_str(&line.join(" "));
                out.push('\n');
            }
            out.into_bytes()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_binary() {
        let img = read_pgm(b"P5 1 1 255 \x00").unwrap();
        assert_eq!((img.width(), img.height(), img.pixels()), (1, 1, &[0u8][..]));
    }

    #[test]
    fn minimal_ascii() {
        let img = read_pgm(b"P2 2 1 255\n0 255\n").unwrap();
        assert_eq!(img.pixels(), &[0, 255]);
    }

    #[test]
    fn comments_are_skipped() {
        let img = read_pgm(b"P5\n# made by hand\n2 # width\n1\n255\n\x07\x08").unwrap();
        assert_eq!(img.pixels(), &[7, 8]);
        let img = read_pgm(b"P2\n#c\n1 2\n255\n# pixels\n3\n4").unwrap();
        assert_eq!(img.pixels(), &[3, 4]);
    }

    #[test]
    fn canonical_writes() {
        let one = GrayImage::new(1, 1, vec![255]).unwrap();
        assert_eq!(write_pgm(&one, PgmFormat::Binary), b"P5\n1 1\n255\n\xff");
        let zeros = GrayImage::new(2, 2, vec![0; 4]).unwrap();
        let ascii = write_pgm(&zeros, PgmFormat::Ascii);
        assert_eq!(ascii, b"P2\n2 2\n255\n0 0\n0 0\n");
        assert_eq!(String::from_utf8(ascii).unwrap().split_whitespace().filter(|t| *t == "0").count(), 4);
    }

    #[test]
    fn binary_payload_may_start_with_whitespace_byte() {
        let img = GrayImage::new(2, 1, vec![b'\n', b' ']).unwrap();
        let bytes = write_pgm(&img, PgmFormat::Binary);
        assert_eq!(read_pgm(&bytes).unwrap(), img);
    }

    #[test]
    fn errors_are_distinct() {
        assert_eq!(read_pgm(b"P6 1 1 255 \x00").unwrap_err(), PgmError::BadMagic);
        assert_eq!(read_pgm(b"").unwrap_err(), PgmError::BadMagic);
        assert_eq!(read_pgm(b"P51 1 255 \x00").unwrap_err(), PgmError::BadMagic);
        assert_eq!(read_pgm(b"P5 1 1 65535 \x00\x00").unwrap_err(), PgmError::UnsupportedMaxval(65535));
        assert_eq!(
            read_pgm(b"P5 2 2 255 \x00\x01").unwrap_err(),
            PgmError::Truncated { expected: 4, found: 2 }
        );
        assert_eq!(
            read_pgm(b"P2 2 2 255 1 2 3").unwrap_err(),
            PgmError::Truncated { expected: 4, found: 3 }
        );
        assert!(matches!(read_pgm(b"P2 1 1 255 256").unwrap_err(), PgmError::BadPixel(_)));
        assert!(matches!(read_pgm(b"P5 x 1 255 \x00").unwrap_err(), PgmError::BadHeader(_)));
        assert!(matches!(read_pgm(b"P5 0 1 255 ").unwrap_err(), PgmError::BadDimensions { .. }));
    }
}
