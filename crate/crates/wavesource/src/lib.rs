//! Source reconstruction for randomly driven wave models.
//!
//! The crate covers two related inverse problems in one spatial dimension:
//!
//! * **Helmholtz strength recovery** — the variance density μ of a white-noise
//!   source driving the Helmholtz equation is recovered from second-moment
//!   data observed outside the source region, via Tikhonov-regularized least
//!   squares over a multi-frequency stack of severely rank-deficient design
//!   matrices ([`helmholtz_forward`], [`tikhonov`]).
//! * **Lévy-forced wave sources** — the deterministic amplitude f and the
//!   stochastic amplitude g of a wave equation driven by a Lévy process are
//!   recovered from ensemble statistics of the terminal wavefield
//!   ([`levy_forward`], [`levy_inverse`]).
//!
//! Shared discretization lives in [`grid_basis`]; [`cli`] wires both pipelines
//! to JSON experiment configs, and the `wavesource` binary exposes them as a
//! batch tool.

// Guards are written `!(x > 0.0)` on purpose: unlike `x <= 0.0`, the negated
// form also rejects NaN, which must never pass a domain check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod grid_basis;
pub mod helmholtz_forward;
pub mod levy_forward;
pub mod levy_inverse;
pub mod tikhonov;

pub use error::{Error, Result};
