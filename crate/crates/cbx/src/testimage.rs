//! Deterministic synthetic test image.
//!
//! A diagonal gradient with a bright disc and a dark rectangle laid on top.
//! The histogram is strongly uneven: the two flat shapes produce tall spikes,
//! and the extreme gray levels are almost empty.

use cbx_core::GrayImage;

pub const DEFAULT_SIZE: usize = 256;

pub fn synthetic_image(width: usize, height: usize) -> Result<GrayImage, cbx_core::Error> {
    let (w, h) = (width as i64, height as i64);
    let (cx, cy) = (w / 2, h / 2);
    let radius = w.min(h) * 5 / 32;
    GrayImage::from_fn(width, height, |row, col| {
        let (x, y) = (col as i64, row as i64);
        let in_disc = (x - cx).pow(2) + (y - cy).pow(2) < radius * radius;
        let in_rect = x * 256 > 30 * w && x * 256 < 90 * w && y * 256 > 160 * h && y * 256 < 220 * h;
        if in_disc {
            230
        } else if in_rect {
            20
        } else {
            // (x + y) / 2 scaled to the full 0..=255 ramp
            (((x * 255) / (w - 1).max(1) + (y * 255) / (h - 1).max(1)) / 2) as u8
        }
    })
}

/// The 256×256 image used by the CLI and the acceptance suite.
pub fn default_image() -> GrayImage {
    synthetic_image(DEFAULT_SIZE, DEFAULT_SIZE).expect("non-zero dimensions")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_structured() {
        let a = default_image();
        assert_eq!(a, default_image());
        assert_eq!(a.get(0, 0), 0);
        assert_eq!(a.get(255, 255), 255);
        assert_eq!(a.get(128, 128), 230);
        let hist = cbx_core::histogram(a.pixels()).unwrap();
        assert!(hist.max_min_ratio() > 10.0);
    }

    #[test]
    fn tiny_sizes() {
        assert_eq!(synthetic_image(1, 1).unwrap().pixels().len(), 1);
        assert!(synthetic_image(0, 4).is_err());
    }
}
