//! Numerical library for three rational-finance resolutions of classic
//! behavioral-finance "anomalies":
//!
//! * option pricing when asset prices are predictable, via an
//!   evaluation-point (alpha-Stratonovich) stochastic calculus and the
//!   resulting Black-Scholes-with-yield PDE ([`stratonovich`], [`pde`],
//!   [`hjm`]);
//! * the Mehra-Prescott equity premium under Normal-Inverse-Gaussian
//!   consumption growth ([`nig`], [`premium`]);
//! * the LeRoy-Lansing excess-volatility decomposition under log-NIG
//!   composite variables ([`excess_vol`]).
//!
//! All stochastic routines take explicit seeds and derive one independent
//! RNG stream per simulated path, so every result is bit-reproducible
//! regardless of execution order or parallelism.

pub mod error;
pub mod excess_vol;
pub mod hjm;
pub mod nig;
pub mod pde;
pub mod premium;
pub mod quad;
pub mod rng;
pub mod special;
pub mod stratonovich;

pub use error::{Error, Result};

/// Library version recorded in experiment manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
