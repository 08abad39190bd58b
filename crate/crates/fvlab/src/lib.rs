//! Simulation lab for exchangeable coalescents and measure-valued resampling
//! processes with jump-diffusion mutation.
//!
//! The crate is organized around a few layers:
//!
//! - [`lambda`]: finite measures on `[0,1]`, merger rates, the Laplace
//!   exponent `psi`, the coming-down-from-infinity test, the speed envelope
//!   `v(t)`, and the dust criterion.
//! - [`coalescent`] and [`partition`]: block-level simulation of the
//!   coalescent by subset rates.
//! - [`levy`]: jump-diffusion mutation (drift, Gaussian part, compound
//!   Poisson and stable jumps), increments and characteristic exponents.
//! - [`lookdown`]: the ordered particle construction whose empirical
//!   measures realize the measure-valued process, with ancestry read off by
//!   replaying the event log backwards.
//! - [`fv`]: moment identities, cluster lower bounds, and support
//!   propagation probes for the measure-valued process.
//! - [`experiments`]: preset experiment drivers shared by the examples and
//!   the thin CLI.

pub mod coalescent;
pub mod error;
pub mod experiments;
pub mod fv;
pub mod lambda;
pub mod levy;
pub mod lookdown;
pub mod measure;
pub mod partition;
pub mod quad;
pub mod stats;

pub use error::{FvError, Result};
pub use lambda::{parse_lambda, Classification, LambdaMeasure};
pub use levy::{parse_levy, LevySpec};
pub use lookdown::{simulate_lookdown, LookdownTrajectory};
pub use partition::Partition;
