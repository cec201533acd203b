//! The cubic map and its pseudo-orbits.
//!
//! `f_r(x) = r·x³ + (1 − r)·x` can be written in several ways that are equal
//! over the reals. In IEEE 754 binary64 they are not always equal, because
//! each grouping rounds at different points. A [`Scheme`] fixes one grouping.
//! Two schemes iterated from the same seed play the part of two machines
//! that were given identical parameters.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::{Error, Result};

/// Samples outside `[-ESCAPE_BOUND, ESCAPE_BOUND]` abort an orbit.
pub const ESCAPE_BOUND: f64 = 1.5;

/// An explicit evaluation order for the cubic map.
///
/// Every product and sum is evaluated left to right as written here, and
/// `x³` is always `x·x·x`:
///
/// | scheme | expression                 |
/// |--------|----------------------------|
/// | `E1`   | `r·x·x·x + (1 − r)·x`      |
/// | `E2`   | `(r·x³ − r·x) + x`         |
/// | `E3`   | `x·(r·x·x + (1 − r))`      |
/// | `E4`   | `(r·x)·x·x + (1 − r)·x`    |
///
/// `E4` performs exactly the same operation sequence as `E1`, so the pair
/// always agrees bit for bit. Use it as a control that shares an interval
/// extension with `E1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Scheme {
    E1,
    E2,
    E3,
    E4,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::E1, Scheme::E2, Scheme::E3, Scheme::E4];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::E1 => "e1",
            Scheme::E2 => "e2",
            Scheme::E3 => "e3",
            Scheme::E4 => "e4",
        }
    }

    /// Raw evaluation, no input checks.
    #[inline]
    pub fn eval(self, x: f64, r: f64) -> f64 {
        let v = match self {
            Scheme::E1 => r * x * x * x + (1.0 - r) * x,
            Scheme::E2 => (r * (x * x * x) - r * x) + x,
            Scheme::E3 => x * (r * x * x + (1.0 - r)),
            Scheme::E4 => (r * x) * x * x + (1.0 - r) * x,
        };
        // -0.0 -> +0.0; leaves every other value untouched
        v + 0.0
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "e1" | "E1" => Ok(Scheme::E1),
            "e2" | "E2" => Ok(Scheme::E2),
            "e3" | "E3" => Ok(Scheme::E3),
            "e4" | "E4" => Ok(Scheme::E4),
            _ => Err(Error::InvalidConfig("scheme must be one of e1, e2, e3, e4")),
        }
    }
}

/// Parameters of one pseudo-orbit.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MapConfig {
    pub r: f64,
    pub x0: f64,
    /// Factor applied to every iterate before it is fed back. `None` means 1.
    pub damping: Option<f64>,
    pub scheme: Scheme,
}

impl MapConfig {
    pub fn new(r: f64, x0: f64, scheme: Scheme) -> Self {
        MapConfig { r, x0, damping: None, scheme }
    }

    pub fn with_damping(mut self, damping: f64) -> Self {
        self.damping = Some(damping);
        self
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.r.is_finite() || self.r <= 0.0 {
            return Err(Error::InvalidConfig("r must be finite and positive"));
        }
        if !self.x0.is_finite() || !(-1.0..=1.0).contains(&self.x0) {
            return Err(Error::InvalidConfig("x0 must lie in [-1, 1]"));
        }
        if let Some(d) = self.damping {
            if !(d > 0.0 && d <= 1.0) {
                return Err(Error::InvalidConfig("damping must lie in (0, 1]"));
            }
        }
        Ok(())
    }
}

/// A computed orbit: `samples[0] = x0`, then one sample per iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoOrbit {
    config: MapConfig,
    samples: Vec<f64>,
}

impl PseudoOrbit {
    pub fn config(&self) -> &MapConfig {
        &self.config
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    /// Number of iterations (one less than the sample count).
    pub fn iterations(&self) -> usize {
        self.samples.len() - 1
    }
}

/// One application of the cubic map in the given scheme.
pub fn cubic_step(x: f64, r: f64, scheme: Scheme) -> Result<f64> {
    if !x.is_finite() || !r.is_finite() {
        return Err(Error::NonFinite { x, r });
    }
    let y = scheme.eval(x, r);
    if !y.is_finite() {
        return Err(Error::NonFinite { x, r });
    }
    Ok(y)
}

/// Iterates `n` steps from `config.x0`.
///
/// With damping `d`, `samples[k + 1] = d · f(samples[k])`. The stored sample
/// is the damped value, i.e. the one that is fed back.
pub fn iterate_orbit(config: &MapConfig, n: usize) -> Result<PseudoOrbit> {
    config.validate()?;
    let mut samples = Vec::with_capacity(n + 1);
    samples.push(config.x0);
    let mut x = config.x0;
    for k in 1..=n {
        let mut next = cubic_step(x, config.r, config.scheme)?;
        if let Some(d) = config.damping {
            next *= d;
        }
        if !(-ESCAPE_BOUND..=ESCAPE_BOUND).contains(&next) {
            return Err(Error::Diverged { iteration: k, value: next });
        }
        samples.push(next);
        x = next;
    }
    Ok(PseudoOrbit { config: *config, samples })
}
