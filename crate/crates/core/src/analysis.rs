//! Lower bound error and Lyapunov exponent estimation.
//!
//! Two pseudo-orbits of the same map, computed in different evaluation
//! schemes, agree at first and then separate. Their absolute difference
//! `δ_n = |x̂_{a,n} − x̂_{b,n}|` is a lower bound on the error of either one.
//! While that error is far from saturation it grows like `e^{λn}`, so the
//! slope of a least-squares line through `(n, ln δ_n)` estimates the
//! largest Lyapunov exponent `λ` (in nats per iteration).

use alloc::vec::Vec;
use core::ops::Range;

use crate::map::{MapConfig, PseudoOrbit};
use crate::{Error, Result};

/// Deltas at or above this value count as saturated and end the default
/// fit window.
pub const SATURATION_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct LbeSeries {
    delta: Vec<f64>,
    configs: Option<(MapConfig, MapConfig)>,
}

impl LbeSeries {
    /// Wraps precomputed deltas, e.g. a synthetic series. Every entry must
    /// be finite and non-negative.
    pub fn from_deltas(delta: Vec<f64>) -> Result<Self> {
        if let Some(&bad) = delta.iter().find(|d| !(d.is_finite() && **d >= 0.0)) {
            return Err(Error::OutOfRange { value: bad });
        }
        Ok(LbeSeries { delta, configs: None })
    }

    pub fn delta(&self) -> &[f64] {
        &self.delta
    }

    pub fn len(&self) -> usize {
        self.delta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delta.is_empty()
    }

    /// The configurations of the two orbits, when built by
    /// [`lower_bound_error`].
    pub fn configs(&self) -> Option<&(MapConfig, MapConfig)> {
        self.configs.as_ref()
    }

    /// First index with a nonzero delta.
    pub fn first_divergence(&self) -> Option<usize> {
        self.delta.iter().position(|&d| d > 0.0)
    }

    /// First index with `delta >= threshold`.
    pub fn first_crossing(&self, threshold: f64) -> Option<usize> {
        self.delta.iter().position(|&d| d >= threshold)
    }
}

/// Element-wise `|a_n − b_n|`.
pub fn lower_bound_error(a: &PseudoOrbit, b: &PseudoOrbit) -> Result<LbeSeries> {
    let (sa, sb) = (a.samples(), b.samples());
    if sa.len() != sb.len() {
        return Err(Error::LengthMismatch { left: sa.len(), right: sb.len() });
    }
    let delta = sa.iter().zip(sb).map(|(x, y)| (x - y).abs()).collect();
    Ok(LbeSeries { delta, configs: Some((*a.config(), *b.config())) })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of determination, clamped to `[0, 1]`. A constant `y`
    /// is fitted perfectly and reports 1.
    pub r_squared: f64,
}

/// Ordinary least squares on `(x, y)` pairs.
pub fn linear_regression(points: &[(f64, f64)]) -> Result<LinearFit> {
    if points.len() < 2 {
        return Err(Error::DegenerateFit);
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;

    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in points {
        let (dx, dy) = (x - mean_x, y - mean_y);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 || !sxx.is_finite() {
        return Err(Error::DegenerateFit);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;

    let r_squared = if syy == 0.0 {
        1.0
    } else {
        let ss_res: f64 = points
            .iter()
            .map(|&(x, y)| {
                let e = y - (intercept + slope * x);
                e * e
            })
            .sum();
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    Ok(LinearFit { slope, intercept, r_squared })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovEstimate {
    /// Slope of `ln δ_n` against `n`.
    pub lambda: f64,
    pub intercept: f64,
    /// First and last iteration (inclusive) that entered the fit. Both have
    /// `δ > 0`.
    pub fit_range: (usize, usize),
    pub points_used: usize,
    pub r_squared: f64,
}

/// Fits `ln δ_n = intercept + λ·n`.
///
/// The default window starts at the first nonzero delta and stops before
/// the first delta at or above [`SATURATION_THRESHOLD`]. Zero deltas inside
/// the window are skipped. If more than half of the window is zero the fit is
/// refused.
pub fn lyapunov_from_lbe(series: &LbeSeries, window: Option<Range<usize>>) -> Result<LyapunovEstimate> {
    let delta = series.delta();
    let first = series.first_divergence().ok_or(Error::NoDivergence)?;

    let window = match window {
        Some(w) => w.start..w.end.min(delta.len()),
        None => {
            let end = delta[first..]
                .iter()
                .position(|&d| d >= SATURATION_THRESHOLD)
                .map_or(delta.len(), |p| first + p);
            first..end
        }
    };
    if window.start >= window.end {
        return Err(Error::DegenerateFit);
    }

    let points: Vec<(f64, f64)> = window
        .clone()
        .filter(|&n| delta[n] > 0.0)
        .map(|n| (n as f64, libm::log(delta[n])))
        .collect();
    let zeros = window.len() - points.len();
    if zeros * 2 > window.len() {
        return Err(Error::SparseWindow { zeros, window: window.len() });
    }

    let fit = linear_regression(&points)?;
    let fit_range = (points[0].0 as usize, points[points.len() - 1].0 as usize);
    Ok(LyapunovEstimate {
        lambda: fit.slope,
        intercept: fit.intercept,
        fit_range,
        points_used: points.len(),
        r_squared: fit.r_squared,
    })
}
