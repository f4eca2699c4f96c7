//! Achievable-rate analysis of asynchronous faster-than-Nyquist NOMA uplinks.
//!
//! The crate computes, for a root-raised-cosine signalling pulse:
//!
//! * the pulse spectrum and the three derived spectra (folded, twisted
//!   folded, interference-reducing) that govern how link delays and symbol
//!   rate interact with spectral aliasing ([`pulse`]);
//! * the Toeplitz multi-user-interference Gram matrices and the alias-sum
//!   form of their DTFTs ([`toeplitz`]);
//! * exact finite-block mutual information under SIC detection, evaluated
//!   as a difference of log-determinants ([`rates`]);
//! * the asymptotic (Szegő) upper and lower rate bounds, SINR and DoF gains
//!   ([`bounds`]);
//! * seeded Monte Carlo experiments over link delays, fading and cell
//!   geometry ([`mc`]).
//!
//! The crate is `no_std` and only needs `alloc`. Enabling the `std` feature
//! adds `std::error::Error` integration through `thiserror`.

#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod bounds;
mod error;
pub mod linalg;
mod math;
pub mod mc;
pub mod pulse;
pub mod quadrature;
pub mod rates;
pub mod toeplitz;

pub use error::{Error, Result};
pub use nalgebra::Complex;
pub use pulse::{FtnConfig, PulseParams};
pub use quadrature::Quadrature;
pub use rates::{RateEngine, RateReport, Scenario, UserLink};

/// log2(x) helper shared by rate formulas.
pub(crate) const LN_2: f64 = core::f64::consts::LN_2;
