//! A workbench for a call-by-value lambda language with mutable cells and
//! actors: reduction, equivalence oracles, a law catalog, a formula checker
//! and an actor simulator.

pub mod actors;
pub mod equivalence;
pub mod error;
pub mod logic;
pub mod memory;
pub mod reducer;
pub mod sexp;
pub mod syntax;

pub use error::{ParseError, Pos, SyntaxError};
