//! Affine term-structure models whose short rate is driven by a Lévy
//! martingale with positive jumps only.
//!
//! The crate covers two model families:
//!
//! * the stable CIR generalization
//!   `dR = (aR + b) dt + (cR)^{1/α} dZ^α` with `α ∈ (1, 2]`,
//!   including the two-noise variant with independent indices `α` and `β`;
//! * the constant-volatility jump model `dR = (aR + b) dt + σ dZ` with a
//!   compensated compound-Poisson `Z`.
//!
//! For each family it solves the curves `A`, `B` of the bond price
//! `P(t, T) = exp(-A(T - t) - B(T - t) R(t))`, simulates the short rate with a
//! positivity-preserving scheme, and checks the no-arbitrage property two
//! ways: through the functional equation linking the Laplace exponent to the
//! curves, and by Monte-Carlo on discounted bond prices.
//!
//! The crate is `no_std` (it needs `alloc`). The default `std` feature only
//! routes elementary functions to the platform math library, which is faster
//! than the portable `libm` fallback.
#![no_std]
#![warn(missing_debug_implementations)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(any(feature = "std", test))]
extern crate std;

pub mod curves;
mod error;
pub mod levy;
pub mod math;
pub mod ode;
pub mod pricing;
pub mod quad;
pub mod rng;
pub mod sde;
pub mod validate;

pub use curves::{CurvePair, CurvePoint, Dynamics, MaturityGrid};
pub use error::{Error, Result};
pub use levy::{JumpLaw, LevyKind, LevyModel};


pub use sde::{ClampReport, Diffusion, Noise, PathEnsemble, ShortRateModel};
pub use validate::{ValidationReport, Verdict};
