//! Quantum non-Gaussianity of phonon-number distributions: genuine n-phonon
//! thresholds, thermal depth, displacement sensing, Rabi population fits,
//! Wigner negativity and ladder preparation of Fock states.
//!
//! The `examples/` directory has one runnable program per capability; the
//! `qng` binary exposes the same pipeline on JSON/CSV files.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod criteria;
pub mod error;
pub mod fock;
pub mod nnls;
pub mod ode;
pub mod optimize;
pub mod prep;
pub mod rabi;
pub mod sensing;
pub mod special;
pub mod thermal;
pub mod units;
pub mod wigner;

pub use error::{Error, Result};
pub use fock::{GaussianParams, OperatorMatrix, PhononDistribution};
