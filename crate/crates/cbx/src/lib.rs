//! Files, wire protocol, exchange harness and command line for `cbx-core`.
//!
//! * [`pgm`]: 8-bit PGM (P5/P2) images.
//! * [`series`]: `n,value` CSVs of orbits and error series, plus histogram CSVs.
//! * [`exchange`]: device profiles, the `CBX1` frame format, transports and
//!   the sender/receiver experiment.
//! * [`manifest`]: replayable JSON run records.
//! * [`cli`]: the `cbx` binary.

pub mod cli;
pub mod exchange;
pub mod manifest;
pub mod pgm;
pub mod series;
pub mod testimage;

pub use cbx_core as core;
