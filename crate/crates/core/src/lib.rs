//! Entanglement entropy asymptotics for free Dirac fermions.
//!
//! The crate evaluates the coefficients of the `L^{d-1} log L` law for
//! `tr h(1_Lambda chi(D_L) 1_Lambda)` in closed form, discretises the
//! restricted Fermi projection to measure it numerically, and fits scaling
//! series against the prediction.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coefficients;
pub mod entropy;
pub mod error;
pub mod kernel;
pub mod quadrature;
pub mod region;
pub mod scaling;
pub mod spinor;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/spinors.md")]
    mod spinors {}
    #[doc = include_str!("../../../book/src/test-functions.md")]
    mod test_functions {}
    #[doc = include_str!("../../../book/src/coefficients.md")]
    mod coefficients {}
    #[doc = include_str!("../../../book/src/kernel.md")]
    mod kernel {}
    #[doc = include_str!("../../../book/src/scaling.md")]
    mod scaling {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
