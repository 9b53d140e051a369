//! Executable finite model theory around homomorphism counting.
//!
//! The crate constructs game comonads on finite relational structures,
//! computes tree-depth / tree-width certificates as forest covers, decides
//! equivalence in counting logics and graded modal logic, counts
//! homomorphisms exactly, builds canonical conjunctive queries with their
//! counting-threshold lifts, and verifies the classical homomorphism-counting
//! theorems (Lovász, Dvořák, Grohe, and their modal and depth-bounded
//! variants) at small scale.
//!
//! Start with the `examples/` directory for one runnable tour per
//! capability, or the `homlab` binary for the command-line surface.

pub mod comonad;
pub mod cover;
pub mod enumerate;
pub mod error;
pub mod formula;
pub mod game;
pub mod graphs;
pub mod harness;
pub mod homcount;
pub mod io;
pub mod query;
pub mod quotient;
pub mod structure;
pub mod wl;

pub use error::{Error, Result};
