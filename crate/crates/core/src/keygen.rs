//! Keystreams and key matrices.
//!
//! An orbit sample `x ∈ [-1, 1]` becomes a key byte as follows:
//!
//! ```text
//! y = x/2 + 1          ∈ [0.5, 1.5]
//! K = frac(1000·y)     ∈ [0, 1)      (drop the first three decimals)
//! byte = floor(255·K)  ∈ [0, 254]
//! ```
//!
//! 255 is never produced. Key matrices are filled column by column, top to
//! bottom, then left to right. Both parties must use this order; any other
//! order breaks decryption.

use alloc::vec::Vec;

use crate::map::{iterate_orbit, MapConfig, Scheme};
use crate::{Error, Result};

pub const DEFAULT_X0: f64 = 0.1;
pub const DEFAULT_R: f64 = 3.6;
pub const DEFAULT_ITERATIONS: usize = 70_000;

pub const MITIGATED_R: f64 = 3.61;
pub const MITIGATION_DAMPING: f64 = 0.89;
pub const DEFAULT_SEED_COUNT: usize = 70;
pub const DEFAULT_ITERATIONS_PER_SEED: usize = 1024;

/// Largest byte a key can contain.
pub const MAX_KEY_BYTE: u8 = 254;

/// Maps one orbit sample to a key byte.
pub fn normalize_sample(x: f64) -> Result<u8> {
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::OutOfRange { value: x });
    }
    let y = x / 2.0 + 1.0;
    let z = y * 1000.0;
    let k = z - libm::floor(z);
    Ok(libm::floor(255.0 * k) as u8)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "mode", rename_all = "kebab-case"))]
pub enum KeystreamConfig {
    /// One long orbit from `map.x0`.
    SingleOrbit { map: MapConfig, iterations: usize },
    /// `seed_count` short orbits from the equispaced seeds
    /// `i / (seed_count + 1)`, `i = 1..=seed_count`, concatenated in seed order.
    MultiSeed {
        r: f64,
        scheme: Scheme,
        damping: Option<f64>,
        seed_count: usize,
        iterations_per_seed: usize,
    },
}

impl KeystreamConfig {
    /// `x0 = 0.1`, `r = 3.6`, undamped, 70 000 iterations.
    pub fn single_orbit(scheme: Scheme) -> Self {
        KeystreamConfig::SingleOrbit {
            map: MapConfig::new(DEFAULT_R, DEFAULT_X0, scheme),
            iterations: DEFAULT_ITERATIONS,
        }
    }

    /// 70 seeds, 1024 iterations each, `r = 3.61`, damping 0.89.
    pub fn multi_seed(scheme: Scheme) -> Self {
        KeystreamConfig::MultiSeed {
            r: MITIGATED_R,
            scheme,
            damping: Some(MITIGATION_DAMPING),
            seed_count: DEFAULT_SEED_COUNT,
            iterations_per_seed: DEFAULT_ITERATIONS_PER_SEED,
        }
    }

    pub fn scheme(&self) -> Scheme {
        match self {
            KeystreamConfig::SingleOrbit { map, .. } => map.scheme,
            KeystreamConfig::MultiSeed { scheme, .. } => *scheme,
        }
    }

    pub fn with_scheme(self, scheme: Scheme) -> Self {
        match self {
            KeystreamConfig::SingleOrbit { map, iterations } => {
                KeystreamConfig::SingleOrbit { map: map.with_scheme(scheme), iterations }
            }
            KeystreamConfig::MultiSeed { r, damping, seed_count, iterations_per_seed, .. } => {
                KeystreamConfig::MultiSeed { r, scheme, damping, seed_count, iterations_per_seed }
            }
        }
    }

    /// Number of key bytes this configuration can supply.
    pub fn available_samples(&self) -> usize {
        match *self {
            KeystreamConfig::SingleOrbit { iterations, .. } => iterations,
            KeystreamConfig::MultiSeed { seed_count, iterations_per_seed, .. } => {
                seed_count.saturating_mul(iterations_per_seed)
            }
        }
    }

    /// The map configuration behind each orbit, in keystream order.
    pub fn orbit_configs(&self) -> Vec<MapConfig> {
        match *self {
            KeystreamConfig::SingleOrbit { map, .. } => alloc::vec![map],
            KeystreamConfig::MultiSeed { r, scheme, damping, seed_count, .. } => {
                let denom = (seed_count + 1) as f64;
                (1..=seed_count)
                    .map(|i| MapConfig { r, x0: i as f64 / denom, damping, scheme })
                    .collect()
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            KeystreamConfig::SingleOrbit { map, .. } => map.validate(),
            KeystreamConfig::MultiSeed { seed_count, iterations_per_seed, .. } => {
                if *seed_count == 0 || *iterations_per_seed == 0 {
                    return Err(Error::InvalidConfig(
                        "seed count and iterations per seed must be positive",
                    ));
                }
                self.orbit_configs()[0].validate()
            }
        }
    }
}

/// The first `count` key bytes of the configured keystream. Seeds are
/// never part of the stream.
pub fn generate_keystream(config: &KeystreamConfig, count: usize) -> Result<Vec<u8>> {
    config.validate()?;
    let available = config.available_samples();
    if count > available {
        return Err(Error::InsufficientSamples { required: count, available });
    }
    let mut stream = Vec::with_capacity(count);
    match *config {
        KeystreamConfig::SingleOrbit { map, .. } => {
            let orbit = iterate_orbit(&map, count)?;
            for &x in &orbit.samples()[1..] {
                stream.push(normalize_sample(x)?);
            }
        }
        KeystreamConfig::MultiSeed { iterations_per_seed, .. } => {
            for map in config.orbit_configs() {
                if stream.len() >= count {
                    break;
                }
                let orbit = iterate_orbit(&map, iterations_per_seed)?;
                for &x in &orbit.samples()[1..] {
                    stream.push(normalize_sample(x)?);
                }
            }
            stream.truncate(count);
        }
    }
    Ok(stream)
}

/// A `width × height` key, stored row-major like [`crate::GrayImage`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyMatrix {
    width: usize,
    height: usize,
    bytes: Vec<u8>,
}

impl KeyMatrix {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Row-major bytes.
    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.bytes[row * self.width + col]
    }

    /// Bytes in fill order (column-major).
    pub fn column_major(&self) -> impl Iterator<Item = u8> + '_ {
        (0..self.width).flat_map(move |c| (0..self.height).map(move |r| self.get(r, c)))
    }
}

/// Fills a key matrix down each column, left to right. Extra stream bytes
/// are ignored.
pub fn build_key_matrix(stream: &[u8], width: usize, height: usize) -> Result<KeyMatrix> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidDimensions { width, height });
    }
    let len = width
        .checked_mul(height)
        .ok_or(Error::InvalidDimensions { width, height })?;
    if stream.len() < len {
        return Err(Error::InsufficientSamples { required: len, available: stream.len() });
    }
    if let Some(index) = stream[..len].iter().position(|&b| b > MAX_KEY_BYTE) {
        return Err(Error::KeyByteOutOfRange { index });
    }
    let mut bytes = alloc::vec![0u8; len];
    for (i, &b) in stream[..len].iter().enumerate() {
        let (col, row) = (i / height, i % height);
        bytes[row * width + col] = b;
    }
    Ok(KeyMatrix { width, height, bytes })
}
