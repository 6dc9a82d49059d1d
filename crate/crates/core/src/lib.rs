//! SIR epidemic dynamics observed through a beta-binomial reporting layer,
//! fitted to weekly event counts.
//!
//! The crate covers the full workflow: [`dataio`] turns event records into
//! weekly counts, [`sir`] solves the dynamics and locates the week the
//! expected count falls back below a baseline, [`obs`] scores a series,
//! [`inference`] fits and samples the parameters, and [`simulate`] draws
//! synthetic series and predictive envelopes.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dataio;
pub mod error;
pub mod inference;
pub mod obs;
pub mod parallel;
pub mod rng;
pub mod simulate;
pub mod sir;
pub mod special;

pub use error::{Error, Result};
pub use inference::{FullParams, PriorBox};
pub use obs::{ObservationParams, WeeklySeries};
pub use sir::{EpidemicCurve, EpidemicParams, RateVariant};
