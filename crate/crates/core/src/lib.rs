//! Contraction-mapping solvers.
//!
//! The crate is `no_std` (it needs `alloc`). It provides a generic fixed-point
//! iterator over any metric space, error bounds for contractions, and three
//! concrete problem families built on top of it:
//!
//! * [`scalar`]: self-maps of a closed interval,
//! * [`sparse`]: linear systems `Ax = b` iterated as `x = x - Ax + b`,
//! * [`fredholm`]: integral equations of the second kind via Nyström quadrature.
//!
//! [`oracle`] holds a small dense direct solver used to cross-check results.
#![no_std]
#![deny(missing_debug_implementations)]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod error;

pub mod fredholm;
pub mod metric;
pub mod oracle;
pub mod quadrature;
pub mod scalar;
pub mod sparse;

pub use error::{Error, Result};
pub use metric::{
    a_posteriori_error_bound, a_priori_error_bound, a_priori_iteration_count, banach_iterate,
    estimate_contraction_factor, FixedPointMap, FixedPointResult, IterationTrace, Status,
    StoppingRule,
};
