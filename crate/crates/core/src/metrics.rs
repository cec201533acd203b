//! Byte histograms and Shannon entropy.

use crate::{Error, Result};

/// log2 of the byte alphabet size.
const MAX_BITS: f64 = 8.0;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    bins: [u64; 256],
    total: u64,
}

impl Histogram {
    /// Builds a histogram from raw counts. At least one count must be nonzero.
    pub fn from_counts(bins: [u64; 256]) -> Result<Self> {
        let total = bins.iter().sum();
        if total == 0 {
            return Err(Error::EmptyData);
        }
        Ok(Histogram { bins, total })
    }

    pub fn bins(&self) -> &[u64; 256] {
        &self.bins
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn probability(&self, value: u8) -> f64 {
        self.bins[value as usize] as f64 / self.total as f64
    }

    /// Largest bin count divided by the smallest, over all 256 bins.
    /// Infinite when some bin is empty.
    pub fn max_min_ratio(&self) -> f64 {
        let max = *self.bins.iter().max().unwrap_or(&0);
        let min = *self.bins.iter().min().unwrap_or(&0);
        if min == 0 {
            f64::INFINITY
        } else {
            max as f64 / min as f64
        }
    }
}

pub fn histogram(data: &[u8]) -> Result<Histogram> {
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    let mut bins = [0u64; 256];
    for &b in data {
        bins[b as usize] += 1;
    }
    Ok(Histogram { bins, total: data.len() as u64 })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyReport {
    /// Shannon entropy in bits, in `[0, 8]`.
    pub h_bits: f64,
    /// `h_bits / 8`, in `[0, 1]`.
    pub h_norm: f64,
}

/// `H = −Σ P_i log2 P_i` over nonempty bins, and `H / log2(256)`.
pub fn shannon_entropy(hist: &Histogram) -> EntropyReport {
    let total = hist.total as f64;
    let h_bits: f64 = hist
        .bins
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total;
            -p * libm::log2(p)
        })
        .sum();
    let h_bits = h_bits.clamp(0.0, MAX_BITS);
    EntropyReport { h_bits, h_norm: h_bits / MAX_BITS }
}
