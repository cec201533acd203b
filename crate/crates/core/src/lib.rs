//! Cubic-map XOR image encryption and a toolkit for measuring why it breaks
//! across machines.
//!
//! The crate is `no_std` (it needs `alloc`) and has no IO. It covers:
//!
//! * [`map`]: the cubic map `f_r(x) = r·x³ + (1 − r)·x`, evaluated in one of
//!   four algebraically equivalent [`Scheme`]s. Each scheme stands in for a
//!   "device" whose arithmetic happens to associate the terms differently.
//!   Damping is optional.
//! * [`analysis`]: the lower bound error between two pseudo-orbits, plus a
//!   largest-Lyapunov-exponent estimate taken from the slope of `ln δ_n`.
//! * [`keygen`]: maps orbit samples to key bytes and fills key matrices
//!   column by column. It supports single-orbit and damped multi-seed
//!   keystreams.
//! * [`cipher`]: XOR of grayscale images with key matrices.
//! * [`metrics`]: 256-bin histograms and Shannon entropy.
//!
//! Every floating-point result is a pure function of its inputs. Rust never
//! contracts `a * b + c` into a fused multiply-add or reassociates float
//! arithmetic unless asked to, so the operation order written in [`map`] is
//! the order executed.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod analysis;
pub mod cipher;
mod error;
pub mod keygen;
pub mod map;
pub mod metrics;

pub use analysis::{
    linear_regression, lower_bound_error, lyapunov_from_lbe, LbeSeries, LinearFit,
    LyapunovEstimate,
};
pub use cipher::{xor_apply, xor_involution_check, GrayImage};
pub use error::{Error, Result};
pub use keygen::{build_key_matrix, generate_keystream, normalize_sample, KeyMatrix, KeystreamConfig};
pub use map::{cubic_step, iterate_orbit, MapConfig, PseudoOrbit, Scheme};
pub use metrics::{histogram, shannon_entropy, EntropyReport, Histogram};
