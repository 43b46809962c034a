//! Compiles succinctly represented NEXP-complete problems (circuit-encoded
//! graphs, set families, numbers, nondeterministic Turing machines and
//! bounded first-order satisfiability) into dependency quantified boolean
//! formulas, and checks every reduction against brute-force oracles.

pub mod circuit;
pub mod dqbf;
pub mod error;
pub mod fixtures;
pub mod folog;
pub mod oracle;
pub mod reductions;

pub use error::{Error, Result};
