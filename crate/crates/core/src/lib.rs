//! Exact equivalence checking and inference for discrete probabilistic
//! programs via a calculus of probabilistic Boolean circuits.
//!
//! * [`circuit`] — the typed circuit IR, derived gates and text format;
//! * [`semantics`] — exact evaluation to substochastic matrices;
//! * [`surface`] — a small first-order probabilistic language compiled to circuits;
//! * [`normalform`] — disintegration, normal forms, bending and conditioning elimination;
//! * [`axioms`] — the equational theory, soundness checks and derivation checking;
//! * [`random`] — seeded generators of random circuits, matrices and parameters.

pub mod circuit;
pub mod error;
pub mod rat;
pub mod semantics;
pub mod surface;
pub mod normalform;
pub mod axioms;
pub mod random;

pub use circuit::{CircType, Circuit, Generator};
pub use error::{Error, Result};
pub use rat::Rat;
