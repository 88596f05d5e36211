//! # sgnpoly-core
//!
//! Global testing for undirected networks under the degree-corrected
//! mixed-membership (DCMM) model, built around the Signed Polygon family
//! of statistics.
//!
//! The crate is `no_std` and needs only `alloc`. Everything here is a pure
//! function of its inputs and an explicit seed; file formats, the parallel
//! Monte-Carlo harness and the command-line front end live in the `sgnpoly`
//! companion crate.
//!
//! ## Layout
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`model`] | `(θ, Π, P)` parameters, random generators, `Ω`, degree-matched nulls |
//! | [`graph`] | sparse adjacency, keyed Bernoulli sampling |
//! | [`stats`] | `η̂`, SgnT / SgnQ in `O(n²·d̄)`, brute-force oracle, Signed Cycle |
//! | [`inference`] | `‖θ‖²` estimator, normalized statistics, level-α tests |
//! | [`spectral`] | `η*`, `Ω̃`, leading eigenpairs, trace formulas, phase diagram |
//! | [`scaling`] | `DADh = 1` matrix scaling, least-favorable pairs, χ² Monte Carlo |
//!
//! ## Example
//!
//! ```
//! use sgnpoly_core::graph::AdjacencyMatrix;
//! use sgnpoly_core::inference::sgn_t_test;
//!
//! let (k3, _) = AdjacencyMatrix::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
//! let report = sgn_t_test(&k3, 0.05).unwrap();
//! assert!((report.statistic - 2.0 / 9.0).abs() < 1e-12);
//! assert!(!report.reject);
//! ```

#![no_std]
// `!(x > 0.0)` is deliberate: NaN must fail the check. Index loops mirror the formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

mod error;
pub mod graph;
pub mod inference;
pub mod linalg;
pub mod model;
pub mod numeric;
pub mod rng;
pub mod scaling;
pub mod spectral;
pub mod stats;

pub use error::{Error, Result};
