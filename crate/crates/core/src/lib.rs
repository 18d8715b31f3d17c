//! Differentially private release of approximate CDFs with level-uniform
//! tree mechanisms.
//!
//! The crate is `no_std` (it needs `alloc`) and covers the numerical side of
//! the problem:
//!
//! - [`tree`]: the rooted tree over `[a, b)`, node intervals, exact counts and
//!   left/right coverings of cumulative intervals.
//! - [`mechanisms`]: Laplace noise and the range-query, histogram and tree
//!   mechanisms producing a noisy [`CdfEstimate`](mechanisms::CdfEstimate).
//! - [`error_model`]: closed-form expected squared l2 errors.
//! - [`optimizer`]: branching factor / budget selection, both real-relaxed and
//!   integer-constrained.
//! - [`refinement`]: bottom-up variance-weighted refinement of a noisy tree plus
//!   left/right cumulative averaging.
//! - [`consistency`]: trellis dynamic program projecting noisy cumulative counts
//!   onto integer, non-decreasing vectors ending at `N`.
//!
//! IO, configuration, the CLI and Monte Carlo drivers live in the `dpcdf`
//! crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod consistency;
pub mod error;
pub mod error_model;
pub mod mechanisms;
pub mod optimizer;
pub mod refinement;
pub mod tree;

pub use error::{Error, Result};
