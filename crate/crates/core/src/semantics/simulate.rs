use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::{NodeKind, TransitionSystem};
use crate::prob::Prob;
use crate::quantum::QuantumState;

#[derive(Debug, Clone)]
pub struct Leaf {
    pub node: usize,
    pub weight: Prob,
    /// True for `sqrt`, false for a deadlocked configuration.
    pub terminated: bool,
    pub state: QuantumState,
}

/// Probability-weighted final configurations.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub leaves: Vec<Leaf>,
    /// Mass still travelling after `max_steps` rounds (cycles) or sitting on
    /// unexplored nodes.
    pub residual: Prob,
    /// Some configuration offered more than one step; the scheduler picked
    /// each with equal probability.
    pub nondeterministic: bool,
}

impl Simulation {
    pub fn total(&self) -> Prob {
        self.leaves.iter().map(|l| l.weight.clone()).sum::<Prob>() + &self.residual
    }
}

/// Pushes probability mass from the initial node to the leaves. Probabilistic
/// nodes split by their weights; a node with several action steps is resolved
/// by a uniform scheduler.
pub fn simulate(ts: &TransitionSystem, max_steps: usize) -> Simulation {
    let mut frontier: BTreeMap<usize, Prob> = BTreeMap::new();
    frontier.insert(ts.initial, Prob::one());
    let mut leaves: BTreeMap<usize, Prob> = BTreeMap::new();
    let mut residual = Prob::zero();
    let mut nondeterministic = false;
    for _ in 0..max_steps {
        if frontier.is_empty() {
            break;
        }
        let mut next: BTreeMap<usize, Prob> = BTreeMap::new();
        for (n, mass) in frontier {
            let node = &ts.nodes[n];
            if !node.complete {
                residual += mass;
                continue;
            }
            match node.kind {
                NodeKind::Prob => {
                    for e in ts.prob_out(n) {
                        *next.entry(e.to).or_insert_with(Prob::zero) += &mass * &e.weight;
                    }
                }
                NodeKind::Done => *leaves.entry(n).or_insert_with(Prob::zero) += mass,
                NodeKind::Action => {
                    let out: Vec<usize> = ts.action_out(n).map(|e| e.to).collect();
                    if out.is_empty() {
                        *leaves.entry(n).or_insert_with(Prob::zero) += mass;
                        continue;
                    }
                    if out.len() > 1 {
                        nondeterministic = true;
                    }
                    let share = mass / Prob::from_integer(out.len().into());
                    for to in out {
                        *next.entry(to).or_insert_with(Prob::zero) += &share;
                    }
                }
            }
        }
        frontier = next;
    }
    for (_, mass) in frontier {
        residual += mass;
    }
    Simulation {
        leaves: leaves
            .into_iter()
            .map(|(node, weight)| Leaf {
                node,
                weight,
                terminated: ts.nodes[node].kind == NodeKind::Done,
                state: ts.nodes[node].state.clone(),
            })
            .collect(),
        residual,
        nondeterministic,
    }
}
