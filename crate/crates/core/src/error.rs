use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A map input or output was NaN or infinite.
    NonFinite { x: f64, r: f64 },
    /// A configuration field violated its invariant.
    InvalidConfig(&'static str),
    /// An orbit sample left the escape interval.
    Diverged { iteration: usize, value: f64 },
    LengthMismatch { left: usize, right: usize },
    /// Regression input had fewer than two points or no spread in x.
    DegenerateFit,
    /// Every delta in the series is zero, so there is no divergence to fit.
    NoDivergence,
    /// More than half of the fit window had zero deltas.
    SparseWindow { zeros: usize, window: usize },
    OutOfRange { value: f64 },
    InsufficientSamples { required: usize, available: usize },
    InvalidDimensions { width: usize, height: usize },
    DimensionMismatch { expected: (usize, usize), found: (usize, usize) },
    /// A key byte was 255, which the key derivation never produces.
    KeyByteOutOfRange { index: usize },
    EmptyData,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonFinite { x, r } => write!(f, "non-finite map state (x = {x}, r = {r})"),
            Error::InvalidConfig(what) => write!(f, "invalid configuration: {what}"),
            Error::Diverged { iteration, value } => {
                write!(f, "orbit diverged at iteration {iteration} (value {value})")
            }
            Error::LengthMismatch { left, right } => {
                write!(f, "length mismatch: {left} vs {right}")
            }
            Error::DegenerateFit => {
                f.write_str("regression needs at least two points with distinct x")
            }
            Error::NoDivergence => f.write_str("no divergence to fit"),
            Error::SparseWindow { zeros, window } => {
                write!(f, "{zeros} of {window} deltas in the fit window are zero")
            }
            Error::OutOfRange { value } => write!(f, "sample {value} outside [-1, 1]"),
            Error::InsufficientSamples { required, available } => write!(
                f,
                "insufficient samples: {required} required, {available} available"
            ),
            Error::InvalidDimensions { width, height } => {
                write!(f, "invalid dimensions {width}x{height}")
            }
            Error::DimensionMismatch { expected, found } => write!(
                f,
                "dimension mismatch: expected {}x{}, found {}x{}",
                expected.0, expected.1, found.0, found.1
            ),
            Error::KeyByteOutOfRange { index } => {
                write!(f, "key byte at index {index} is 255 (keys span 0..=254)")
            }
            Error::EmptyData => f.write_str("empty data"),
        }
    }
}

impl core::error::Error for Error {}
