//! Truly concurrent process algebra over quantum process configurations.

pub mod prob;
pub mod cli;
pub mod equivalence;
pub mod quantum;
pub mod rewrite;
pub mod semantics;
pub mod session;
pub mod syntax;
