//! Growth-rate bounds for spatial derivatives of stochastic flows.
//!
//! The crate is `no_std` (with `alloc`). It holds the pure numerics:
//!
//! * [`rate`]: the growth-rate bound `xi` over a set of given box dimension,
//!   in closed form and through two independent numeric routes;
//! * [`moment`] and [`split`]: Gronwall-type bounds, derivative moment bounds
//!   and the constant pipeline feeding [`rate`];
//! * [`ibf`]: isotropic Brownian flow models and their exact laws;
//! * [`sim`]: seeded, substream-per-path Monte Carlo engines and estimators;
//! * [`boxdim`]: point sets of known box dimension and a box-counting estimator.
//!
//! File formats, parallel drivers and the command line live in the
//! `flowgrowth` crate.

#![no_std]
#![deny(rust_2018_idioms)]
#![warn(missing_debug_implementations)]
// `!(x > 0.0)` style checks are how NaN gets rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod boxdim;
pub mod curve;
mod error;
pub mod ibf;
pub mod linalg;
pub mod math;
pub mod moment;
pub mod rate;
pub mod search;
pub mod sim;
pub mod split;

pub use crate::curve::MomentCurve;
pub use crate::error::{Error, Result};
pub use crate::ibf::IbfModel;
pub use crate::moment::{CharacteristicBounds, HoelderSplit};
pub use crate::rate::{CaseLabel, GrowthConstants, MomentRates, Variant, XiResult};
