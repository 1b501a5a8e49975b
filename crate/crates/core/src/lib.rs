//! Exact and Monte Carlo kernels for disordered pinning models at the
//! marginal point.
//!
//! The crate covers two families of models:
//!
//! * the hierarchical (diamond lattice) recursion, its Galton–Watson
//!   representation, the overlap statistic `Y_n` and the tilted-Gaussian
//!   certification pipeline ([`hierarchy`], [`gaussian`], [`hierarchy_mc`]);
//! * renewal pinning with polynomial tails: Green functions, homogeneous
//!   solutions, endpoint-pinned partition functions, the block
//!   coarse-graining and its limit theorems ([`renewal`], [`quenched`]).
//!
//! Everything is `no_std` + `alloc` compatible. The default `std` feature
//! only adds the FFT route for long Green tables and `std::error::Error`
//! integration. All randomness flows through [`rng::StreamSeed`], which
//! derives one independent stream per Monte Carlo sample.

#![cfg_attr(not(feature = "std"), no_std)]
#![deny(rustdoc::broken_intra_doc_links)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::too_many_arguments, clippy::needless_range_loop)]

extern crate alloc;

pub mod error;
pub mod estimate;
pub mod gaussian;
pub mod hierarchy;
pub mod hierarchy_mc;
pub mod quenched;
pub mod renewal;
pub mod rng;
pub mod special;
pub mod stats;

pub use error::{Error, Result};
pub use estimate::PoolEstimate;
