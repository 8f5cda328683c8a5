//! Truly concurrent bisimulation equivalences between generated transition
//! systems, with state equality required at related configurations.
//!
//! Causality inside a run is the step order: events fired in one step are
//! concurrent, events of later steps depend on all earlier ones. Pomsets of
//! runs are therefore series of antichains and are represented by their
//! sequence of step labels.

mod flow;
mod graph;
mod hhp;
mod pairs;
mod partition;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::quantum::{QuantumError, DEFAULT_TOL};
use crate::semantics::TransitionSystem;

pub use flow::coupling_exists;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    Pomset,
    Step,
    Hp,
    Hhp,
    ProbPomset,
    ProbStep,
    ProbHp,
}

impl Relation {
    pub const ALL: [Relation; 7] = [
        Relation::Pomset,
        Relation::Step,
        Relation::Hp,
        Relation::Hhp,
        Relation::ProbPomset,
        Relation::ProbStep,
        Relation::ProbHp,
    ];

    pub fn flag(self) -> &'static str {
        match self {
            Relation::Pomset => "p",
            Relation::Step => "s",
            Relation::Hp => "hp",
            Relation::Hhp => "hhp",
            Relation::ProbPomset => "pp",
            Relation::ProbStep => "ps",
            Relation::ProbHp => "php",
        }
    }

    pub fn is_probabilistic(self) -> bool {
        matches!(self, Relation::ProbPomset | Relation::ProbStep | Relation::ProbHp)
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.flag())
    }
}

impl FromStr for Relation {
    type Err = EquivError;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Relation::ALL
            .into_iter()
            .find(|r| r.flag() == s)
            .ok_or_else(|| EquivError::UnknownRelation(s.to_string()))
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EquivError {
    #[error("transition system {0} is truncated; raise the exploration limits")]
    Truncated(usize),
    #[error("search budget of {0} run pairs exceeded")]
    BudgetExceeded(usize),
    #[error("{0}")]
    NotApplicable(String),
    #[error("unknown relation `{0}` (expected p, s, hp, hhp, pp, ps or php)")]
    UnknownRelation(String),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
}

pub type Result<T> = std::result::Result<T, EquivError>;

#[derive(Debug, Clone)]
pub struct Options {
    pub tol: f64,
    /// Compare only the reduced states of these variables.
    pub public: Option<Vec<String>>,
    /// Longest run, in steps, used as a pomset transition.
    pub pomset_depth: usize,
    /// Cap on the number of run pairs explored by the hhp check.
    pub hhp_budget: usize,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            public: None,
            pomset_depth: 3,
            hhp_budget: 200_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistinguishingTrace {
    /// Steps taken from the two initial configurations, e.g. `{a}`.
    pub steps: Vec<String>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Witness {
    /// Pairs `(node of the first system, node of the second system)`.
    Relation(Vec<(usize, usize)>),
    Trace(DistinguishingTrace),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BisimResult {
    pub relation: Relation,
    pub related: bool,
    pub witness: Witness,
    pub warnings: Vec<String>,
}

fn ensure_finite(t1: &TransitionSystem, t2: &TransitionSystem) -> Result<()> {
    if t1.truncated {
        return Err(EquivError::Truncated(1));
    }
    if t2.truncated {
        return Err(EquivError::Truncated(2));
    }
    Ok(())
}

/// Dispatches on the relation.
pub fn check(rel: Relation, t1: &TransitionSystem, t2: &TransitionSystem, opts: &Options) -> Result<BisimResult> {
    ensure_finite(t1, t2)?;
    let g = graph::Union::new(t1, t2, opts)?;
    let mut res = match rel {
        Relation::Step | Relation::ProbStep => partition::refine(&g, rel.is_probabilistic(), 1),
        Relation::Pomset | Relation::ProbPomset => {
            partition::refine(&g, rel.is_probabilistic(), opts.pomset_depth.max(1))
        }
        Relation::Hp | Relation::ProbHp => pairs::hp(&g, rel.is_probabilistic()),
        Relation::Hhp => hhp::hhp(&g, opts.hhp_budget)?,
    };
    res.relation = rel;
    Ok(res)
}

pub fn step_bisim(t1: &TransitionSystem, t2: &TransitionSystem, opts: &Options) -> Result<BisimResult> {
    check(Relation::Step, t1, t2, opts)
}

pub fn pomset_bisim(t1: &TransitionSystem, t2: &TransitionSystem, opts: &Options) -> Result<BisimResult> {
    check(Relation::Pomset, t1, t2, opts)
}

pub fn hp_bisim(t1: &TransitionSystem, t2: &TransitionSystem, opts: &Options) -> Result<BisimResult> {
    check(Relation::Hp, t1, t2, opts)
}

pub fn hhp_bisim(t1: &TransitionSystem, t2: &TransitionSystem, opts: &Options) -> Result<BisimResult> {
    check(Relation::Hhp, t1, t2, opts)
}

pub fn prob_step_bisim(t1: &TransitionSystem, t2: &TransitionSystem, opts: &Options) -> Result<BisimResult> {
    check(Relation::ProbStep, t1, t2, opts)
}

pub fn prob_pomset_bisim(t1: &TransitionSystem, t2: &TransitionSystem, opts: &Options) -> Result<BisimResult> {
    check(Relation::ProbPomset, t1, t2, opts)
}

pub fn prob_hp_bisim(t1: &TransitionSystem, t2: &TransitionSystem, opts: &Options) -> Result<BisimResult> {
    check(Relation::ProbHp, t1, t2, opts)
}
