//! Max-cut on random regular graphs.
//!
//! Three solver families share one graph representation:
//!
//! - [`eo`]: τ-extremal optimization, a rank-based local search.
//! - [`sdp`]: the Goemans–Williamson vector relaxation, solved by low-rank
//!   block-coordinate ascent and rounded with random hyperplanes.
//! - [`gnn`]: a line-graph neural network trained without labels, either on a
//!   relaxed cut objective or with a REINFORCE estimator.
//!
//! Every cut is scored by [`eval::p_score`], which normalizes the cut size
//! against the known asymptotic of the max-cut of random d-regular graphs.
//!
//! The crate is `no_std` and only needs `alloc`; file formats, CLI and
//! thread pools live in the `regcut` crate.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod eo;
mod error;
pub mod eval;
pub mod gnn;
pub mod graph;
pub mod linalg;
mod math;
pub mod rng;
pub mod sdp;
mod spin;

pub use error::{Error, Result};
pub use graph::{cut_value, generate_regular, Graph};
pub use spin::SpinConfig;
