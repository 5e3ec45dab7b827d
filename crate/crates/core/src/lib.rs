//! Finite-volume laboratory for the plus phase of the two-dimensional Ising
//! model and its projection onto the horizontal line `Z x {0}`.
//!
//! The crate is organised bottom-up:
//!
//! * [`lattice`]: boxes, sites, spin configurations with boundary rings,
//!   clamps, the coordinatewise partial order and regions (segments, cones).
//! * [`ising`]: the finite-volume measure, exact oracles (full enumeration
//!   and a column transfer matrix), monotone heat-bath dynamics, and
//!   monotone coupling from the past.
//! * [`cluster`]: Edwards–Sokal coupling, Swendsen–Wang, cluster labels
//!   and planar duality.
//! * [`line`]: projection onto the line, decimation, one-sided
//!   conditional probabilities with plus/minus far-past tails, and the
//!   continuity coefficients `var_k`.
//! * [`mixing`]: run probabilities and their exponential rates, the
//!   Bernoulli domination threshold, one-sided and cone mixing curves, and
//!   the one-sided versus two-sided collar probe.
//!
//! Every Monte Carlo estimator returns an [`EstimateWithCI`] and is a pure
//! function of its inputs and a 64-bit seed.

pub mod cluster;
pub mod error;
pub mod ising;
pub mod lattice;
pub mod line;
pub mod mixing;
pub mod seed;
pub mod snapshot;
pub mod stats;

pub use error::{Error, Result};
pub use ising::{FieldSign, ModelParams, BETA_C};
pub use lattice::{PastWindow, Region, Site, Spin, SpinConfig, SquareBox, Tail};
pub use stats::EstimateWithCI;
