//! Hybrid spectro-temporal feature pipeline for vibration records.
//!
//! The stages, in pipeline order:
//!
//! - [`signal`]: time-series containers, resampling, trimming, windowing
//! - [`descriptors`]: seven per-signal descriptors, class centroids, overlap
//! - [`tau`]: PSD-guided selection of the resampling interval
//! - [`spectral`]: STFT, CWT and CEEMDAN window features `z1..z6`
//! - [`fusion`]: the Base, STA and HSTF representations
//! - [`classify`]: cross-validated classifiers and stability indices
//!
//! [`synth`] generates a labelled five-class beam dataset, [`io`] reads and
//! writes signal files, and [`pipeline`] ties the stages to on-disk
//! artifacts.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod classify;
pub mod config;
pub mod descriptors;
pub mod dsp;
pub mod error;
pub mod fusion;
pub mod io;
pub mod pipeline;
pub mod signal;
pub mod spectral;
pub mod synth;
pub mod tau;

pub use config::Config;
pub use error::{Error, Result};
