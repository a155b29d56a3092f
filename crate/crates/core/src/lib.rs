//! Sequential source coding under cumulative rate and leakage constraints.
//!
//! A rate function `G` says how many bits per source symbol the encoder may
//! have emitted by normalized time `alpha`; a leakage function `L` caps how
//! much of that an eavesdropper may have seen. This crate decides whether a
//! given `G` is achievable, computes the minimum average distortion it
//! allows, and builds a block-by-block transmission plan that attains it.
//!
//! - [`cumfn`]: piecewise-linear cumulative functions and the effective rate.
//! - [`envelope`]: upper concave envelopes.
//! - [`ratedist`]: sources, distortion measures, `D(R)` curves.
//! - [`achieve`]: verdicts and minimum distortion.
//! - [`schedule`]: rate profiles, majorization, rate splitting, plans.
//! - [`oracle`]: brute-force cross-checks.

pub mod achieve;
pub mod cumfn;
pub mod envelope;
mod error;
pub mod oracle;
pub mod ratedist;
pub mod schedule;

pub use crate::cumfn::{CumulativeFunction, Knot, Mode, Side};
pub use crate::error::{Error, Result};
pub use crate::ratedist::{DistortionSpec, RdCurve, SourceModel};
