//! Finite-dimensional numerics for infinite-dimensional Nash systems.
//!
//! The crate is organized bottom-up:
//!
//! * [`weights`]: c-self-controlled weight sequences and multi-index weights.
//! * [`holder`]: grids, sampled fields, finite differences and weighted
//!   Hölder norms.
//! * [`pde`]: backward transport-diffusion solvers (grid and Monte Carlo),
//!   the forward Fokker–Planck solver and decay verification.
//! * [`nash`]: the Picard fixed-point map of the Nash system and its
//!   diagnostics (contraction, uniqueness, dimension stability).
//! * [`lq`]: coupled Riccati ODEs for linear-quadratic games, used as ground
//!   truth.
//!
//! The crate is `no_std` (with `alloc`) unless the `std` feature is enabled;
//! the `parallel` feature (default) pulls in rayon for node- and path-level
//! parallelism. Every reduction runs in a fixed index order, so results do not
//! depend on the number of worker threads.

#![cfg_attr(not(feature = "std"), no_std)]
// `!(a < b)` comparisons are deliberate: they reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

mod error;
mod exec;
pub mod holder;
pub mod lq;
pub mod nash;
pub mod pde;
pub mod stats;
pub mod weights;

pub use error::{Error, Result};

/// Largest state dimension handled with stack scratch buffers.
pub const MAX_DIM: usize = 16;
