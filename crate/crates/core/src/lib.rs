//! Refactoring for a small functional language with an Erlang-like flavor
//! (MFE) and a Haskell-like flavor (MFH).
//!
//! A refactoring is a set of new definitions plus an adapter expression that
//! re-expresses the old function in terms of them. Applying it substitutes
//! the adapter for every reference to the old function and then tidies the
//! result with a small set of rewrite rules.

pub mod adapter_file;
pub mod equiv;
pub mod error;
pub mod interp;
pub mod migrate;
pub mod random;
pub mod resolve;
pub mod rewrite;
pub mod schemes;
pub mod subst;
pub mod syntax;
pub mod term;

pub use error::{Error, Result};
pub use term::{Definition, Flavor, FunId, Name, Program, Sugar, Term};
