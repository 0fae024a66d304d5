//! squeezekit: squeezed vacua on truncated Fock spaces.
//!
//! The crate constructs single-, two-, and N-mode squeezed vacuum states,
//! certifies the uniqueness and unitary-equivalence statements behind them,
//! scans cyclic N-mode coupling conditions for solutions (finding none for
//! N > 2 with nonzero couplings), and computes thermofield-double squeezing
//! spectra.
//!
//! Modules:
//! - [`fock`]: truncated Fock states, ladder operators, reduced densities;
//! - [`closed_form`]: direct coefficient constructors for squeezed vacua;
//! - [`unitary`]: squeezing unitaries, BCH and commutator checks;
//! - [`solver`]: stacked cyclic constraint matrices and kernel analysis;
//! - [`tfd`]: per-frequency thermofield-double spectra;
//! - [`io`]: JSON/CSV document schema used by the CLI.

pub mod closed_form;
pub mod error;
pub mod fock;
pub mod io;
mod linalg;
pub mod solver;
pub mod tfd;
pub mod unitary;

pub use error::{Error, Result};
