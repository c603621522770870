//! Reflected diffusions in planar wedges, killed Markov chains, and the
//! bridge between them.
//!
//! * [`kernel`]: substochastic kernel chains, their contraction certificate
//!   and reverse ergodic limits.
//! * [`wedge`]: the corner exponent, closed-form harmonic and auxiliary
//!   functions, and hitting constants.
//! * [`sim`]: Euler simulation with oblique pushback, and Monte Carlo
//!   estimators built on it.
//! * [`lab`]: JSON-configured experiments, verification suites and tables.
//!
//! The guide in `book/` walks through the concepts; its code samples run as
//! doctests of this crate.

// `!(x > 0.0)` is used on purpose: it rejects NaN along with the bad range.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod kernel;
pub mod lab;
pub mod rng;
pub mod sim;
pub mod wedge;

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
mod readme {}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/kernels.md")]
    mod kernels {}
    #[doc = include_str!("../../../book/src/wedges.md")]
    mod wedges {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/shells.md")]
    mod shells {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../book/src/reproducibility.md")]
    mod reproducibility {}
}
