//! One-bit symbol-level precoding and QAM constellation-range design for the
//! massive MIMO downlink.
//!
//! The library covers the full pipeline of a downlink study at desk scale:
//!
//! - [`constellation`]: square QAM grids with explicit range, minimum-distance
//!   quantization, and closed-form symbol power moments.
//! - [`channel`]: seeded i.i.d. Rayleigh channel draws and complex AWGN with
//!   reproducible, splittable random streams.
//! - [`range_design`]: constellation-range rules for infinite-resolution,
//!   one-bit, and multi-user zero-forcing transmitters.
//! - [`precoding`]: the transmitters themselves, from closed-form benchmarks to
//!   greedy one-bit symbol-level design and an exhaustive oracle.
//! - [`metrics`]: Q-function machinery, pairwise and union-bound symbol error
//!   rates, and the closed-form design constants (power gap, antenna factor).
//! - [`sim`]: reproducible Monte Carlo experiments (MSE sweeps, SER sweeps,
//!   single-shot precoding reports) with CSV / JSON emission.

pub mod channel;
pub mod constellation;
mod error;
pub mod metrics;
pub mod precoding;
pub mod range_design;
pub mod sim;

pub use error::{Error, Result};

/// Complex scalar used throughout the crate.
pub type Complex = num_complex::Complex<f64>;
