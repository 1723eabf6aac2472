//! Decorated equational logic for global state: terms, decorations, a proof
//! kernel, a finite-store model, and a checked proof corpus.

pub mod cli;
pub mod corpus;
pub mod decorations;
pub mod derived;
pub mod kernel;
pub mod memory;
pub mod script;
pub mod semantics;
pub mod sweep;
pub mod syntax;
pub mod terms;
