//! Structural operational semantics over quantum process configurations.
//!
//! A configuration is first resolved probabilistically (`resolve`), which
//! yields a distribution over terms whose active positions contain no `(+)`.
//! A resolved term then offers action steps (`steps`); each step fires a
//! multiset of events whose channels are applied to the state in order.
//! [`build_lts`] closes a configuration under both kinds of transitions.

mod compress;
mod export;
mod lts;
mod resolve;
mod simulate;
mod steps;

use std::cell::Cell;

use thiserror::Error;

use crate::quantum::QuantumError;
use crate::syntax::{Env, Name, Term};

pub use compress::compress_silent;
pub use export::{matrix_rows, to_dot, to_json, LtsExport};
pub use lts::{build_lts, ActionEdge, Limits, Node, NodeKind, ProbEdge, StepLabel, TransitionSystem};
pub use resolve::theta_expand;
pub use simulate::{simulate, Leaf, Simulation};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SemanticsError {
    #[error("unbound recursion variable `{0}`")]
    Unbound(String),
    #[error("recursive specification has no equation for `{0}`")]
    UnknownEntry(String),
    #[error("probabilistic choice in an active position of `{0}`")]
    Unresolved(String),
    #[error("transition system is truncated")]
    Truncated,
    #[error("{0}")]
    Unsupported(String),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
}

pub type Result<T> = std::result::Result<T, SemanticsError>;

/// One event occurrence inside a step. `label` is what an observer sees;
/// `event` names the declared event whose channel is applied. They differ
/// after hiding or silencing.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fired {
    pub label: Name,
    pub event: Name,
}

impl Fired {
    fn same(name: &str) -> Self {
        Self {
            label: name.to_string(),
            event: name.to_string(),
        }
    }
}

/// A step before the state is threaded through: fired events and the
/// continuation (`None` is successful termination).
pub type SymStep = (Vec<Fired>, Option<Term>);

/// Stateless evaluator shared by resolution and step computation. Records
/// whether any recursive constant was unfolded.
pub struct Semantics<'a> {
    env: &'a Env,
    unfolded: Cell<bool>,
}

impl<'a> Semantics<'a> {
    pub fn new(env: &'a Env) -> Self {
        Self {
            env,
            unfolded: Cell::new(false),
        }
    }

    pub fn env(&self) -> &Env {
        self.env
    }

    /// Returns and clears the unfolding flag.
    pub fn take_unfolded(&self) -> bool {
        self.unfolded.replace(false)
    }
}
