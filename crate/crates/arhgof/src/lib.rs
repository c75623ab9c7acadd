//! Goodness-of-fit testing for autoregressive Hilbertian (ARH(1)) functional
//! time series.
//!
//! The crate simulates ARH(1) processes on a discretized interval, estimates
//! their second-order structure, and tests hypotheses about the
//! autocorrelation operator with a projected marked empirical process
//! calibrated by a fast multiplier bootstrap. A Monte Carlo harness
//! reproduces empirical size and power tables at configurable scale.
//!
//! Module layout:
//! - [`func`] — grid-discretized Hilbert-space primitives (functions,
//!   kernel operators, series).
//! - [`rng`] — deterministic, purpose-tagged random number streams.
//! - [`simulate`] — Gaussian samplers and the ARH(1) recursion.
//! - [`estimate`] — empirical covariance operators, eigendecomposition,
//!   and the projection estimator of the autocorrelation operator.
//! - [`meptest`] — the marked-empirical-process test engine: residual
//!   marks, supremum statistics, bootstrap p-values, FDR combination.
//! - [`mc`] — the repetition-parallel size/power study runner.

pub mod error;
pub mod estimate;
pub mod func;
pub mod io;
pub mod mc;
pub mod meptest;
pub mod rng;
pub mod simulate;

pub use error::{Error, Result};
