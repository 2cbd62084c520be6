//! Sparse-grid sampling recovery for functions on `[0, 1]^d` with the tensor
//! Faber-Schauder (hierarchical hat) basis.
//!
//! The pipeline: sample `f` on the sparse grid of budget `n`
//! ([`dyadic::node_set`]), turn the samples into hierarchical surpluses
//! ([`faber::analyze`]), evaluate or integrate the truncated interpolant
//! `I_n f` ([`faber::FaberSeries`]), and measure `‖f - I_n f‖_q`
//! ([`measure::lq_error`]). [`experiments`] runs convergence studies on the
//! functions of [`testbed`] and fits the observed rates.

pub mod cli;
pub mod dyadic;
pub mod error;
pub mod experiments;
pub mod faber;
pub mod measure;
pub mod seqnorm;
pub mod testbed;

pub use error::{FaberError, Result};
