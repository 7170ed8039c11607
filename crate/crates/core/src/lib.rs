//! Discrete spectral theory for the q-Sturm–Liouville operator
//! `L f = -Δ_q f + u(x) f` on the geometric lattice `{q^n}`.
//!
//! The crate is organized bottom-up: [`lattice`] holds the grid and the
//! q-calculus primitives, [`potential`] tabulates `u`, [`solve`] builds the
//! fundamental solutions, [`weyl`] constructs Weyl circles and the
//! m-function, [`spectrum`] finds eigenvalues, and [`expand`] handles
//! eigenfunction expansions and the resolvent.

pub mod error;
pub mod expand;
pub mod lattice;
pub mod potential;
pub mod scaled;
pub mod solve;
pub mod spectrum;
pub mod weyl;
pub mod table;

pub use error::{QslError, Result};
pub use lattice::{GridFunction, LatticeSpec};
pub use potential::PotentialSpec;
pub use scaled::Scaled;
