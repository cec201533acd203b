//! XOR stream cipher over grayscale images.
//!
//! Encryption and decryption are the same operation:
//! `Image ⊕ Key = Encrypted` and `Encrypted ⊕ Key = Image`.

use alloc::vec::Vec;

use crate::keygen::KeyMatrix;
use crate::{Error, Result};

/// An 8-bit grayscale image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidDimensions { width, height });
        }
        let len = width
            .checked_mul(height)
            .ok_or(Error::InvalidDimensions { width, height })?;
        if pixels.len() != len {
            return Err(Error::LengthMismatch { left: len, right: pixels.len() });
        }
        Ok(GrayImage { width, height, pixels })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width.saturating_mul(height));
        for row in 0..height {
            for col in 0..width {
                pixels.push(f(row, col));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.pixels[row * self.width + col]
    }
}

fn check_shape(image: &GrayImage, key: &KeyMatrix) -> Result<()> {
    if image.width != key.width() || image.height != key.height() {
        return Err(Error::DimensionMismatch {
            expected: (image.width, image.height),
            found: (key.width(), key.height()),
        });
    }
    Ok(())
}

/// Pixel-wise XOR with the key.
pub fn xor_apply(image: &GrayImage, key: &KeyMatrix) -> Result<GrayImage> {
    check_shape(image, key)?;
    let pixels = image.pixels.iter().zip(key.as_bytes()).map(|(p, k)| p ^ k).collect();
    Ok(GrayImage { width: image.width, height: image.height, pixels })
}

/// True when applying the key twice gives back `image` bit for bit.
pub fn xor_involution_check(image: &GrayImage, key: &KeyMatrix) -> Result<bool> {
    let round_trip = xor_apply(&xor_apply(image, key)?, key)?;
    Ok(round_trip == *image)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::keygen::build_key_matrix;

    #[test]
    fn self_xor_is_zero() {
        let bytes = [3u8, 100, 254, 0, 17, 200];
        let image = GrayImage::new(3, 2, bytes.to_vec()).unwrap();
        // image is row-major, key is filled column-major
        let key = build_key_matrix(&[3, 0, 100, 17, 254, 200], 3, 2).unwrap();
        let out = xor_apply(&image, &key).unwrap();
        assert!(out.pixels().iter().all(|&p| p == 0));
    }

    #[test]
    fn zero_key_is_identity() {
        let image = GrayImage::from_fn(4, 3, |r, c| (r * 40 + c * 7) as u8).unwrap();
        let key = build_key_matrix(&[0; 12], 4, 3).unwrap();
        assert_eq!(xor_apply(&image, &key).unwrap(), image);
    }

    #[test]
    fn single_byte_truth_table() {
        let image = GrayImage::new(1, 1, alloc::vec![0x73]).unwrap();
        let key = build_key_matrix(&[0x4C], 1, 1).unwrap();
        assert_eq!(xor_apply(&image, &key).unwrap().pixels(), &[0x3F]);
    }

    #[test]
    fn worked_string_example_corrected() {
        // "sbai" ⊕ 0x4C repeated; bitwise XOR, not the printed result row
        let plain = b"sbai".to_vec();
        let image = GrayImage::new(4, 1, plain.clone()).unwrap();
        let key = build_key_matrix(&[0x4C; 4], 4, 1).unwrap();
        let cipher = xor_apply(&image, &key).unwrap();
        assert_eq!(cipher.pixels(), &[0b0011_1111, 0b0010_1110, 0b0010_1101, 0b0010_0101]);
        assert_eq!(xor_apply(&cipher, &key).unwrap().pixels(), plain.as_slice());
    }

    #[test]
    fn one_byte_key_change_is_local() {
        let image = GrayImage::from_fn(8, 8, |r, c| (r * 8 + c) as u8).unwrap();
        let stream: Vec<u8> = (0..64).map(|i| (i * 3 % 250) as u8).collect();
        let mut other = stream.clone();
        other[17] ^= 0x01;
        let k1 = build_key_matrix(&stream, 8, 8).unwrap();
        let k2 = build_key_matrix(&other, 8, 8).unwrap();
        assert!(xor_involution_check(&image, &k1).unwrap());
        let round = xor_apply(&xor_apply(&image, &k1).unwrap(), &k2).unwrap();
        let diffs = round.pixels().iter().zip(image.pixels()).filter(|(a, b)| a != b).count();
        assert_eq!(diffs, 1);
    }

    #[test]
    fn shape_errors() {
        let image = GrayImage::new(2, 2, alloc::vec![0; 4]).unwrap();
        let key = build_key_matrix(&[0; 4], 4, 1).unwrap();
        assert!(matches!(xor_apply(&image, &key), Err(Error::DimensionMismatch { .. })));
        assert!(xor_involution_check(&image, &key).is_err());
        assert!(GrayImage::new(2, 2, alloc::vec![0; 3]).is_err());
        assert!(GrayImage::new(0, 2, alloc::vec![]).is_err());
    }
}
