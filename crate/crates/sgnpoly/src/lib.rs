//! # sgnpoly
//!
//! Everything around [`sgnpoly_core`] that needs `std`: edge-list and JSON
//! file formats, the parallel Monte-Carlo harness with its experiment
//! presets, a normality check for simulated statistics, and the `sgnpoly`
//! command-line tool.
//!
//! ```no_run
//! use sgnpoly::harness::{preset, run_experiment};
//!
//! let mut cfg = preset("exp1a", Some(500)).unwrap();
//! cfg.reps_null = 50;
//! cfg.reps_alt = 50;
//! for row in run_experiment(&cfg, None).unwrap() {
//!     println!("{} {} {:.3}", row.beta, row.test.name(), row.sum);
//! }
//! ```

pub mod cli;
mod error;
pub mod gof;
pub mod harness;
pub mod io;
pub mod oracle;

pub use error::{Error, Result};
pub use sgnpoly_core;
