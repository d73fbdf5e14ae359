//! Spin dynamics of an electron in a standing light wave made of two
//! counterpropagating, elliptically polarized beams, computed from the Dirac
//! equation and two Pauli equations in a plane-wave momentum basis.

// `!(x > 0.0)` is used on purpose so NaN lands in the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constants;
pub mod dirac;
pub mod fields;
pub mod integrator;
pub mod pauli;
pub mod perturbation;
pub mod analysis;
pub mod config;
pub mod cli;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/fields.md")]
    mod fields {}
    #[doc = include_str!("../../../book/src/units.md")]
    mod units {}
    #[doc = include_str!("../../../book/src/models.md")]
    mod models {}
    #[doc = include_str!("../../../book/src/propagation.md")]
    mod propagation {}
    #[doc = include_str!("../../../book/src/perturbation.md")]
    mod perturbation {}
    #[doc = include_str!("../../../book/src/analysis.md")]
    mod analysis {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
