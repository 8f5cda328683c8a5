use std::collections::HashMap;

use super::{Options, Result};
use crate::prob::Prob;
use crate::quantum::{Fingerprint, QuantumState};
use crate::semantics::{NodeKind, StepLabel, TransitionSystem};

/// Both systems side by side. Nodes of the second system are shifted by the
/// size of the first.
pub struct Union {
    pub offset: usize,
    pub len: usize,
    pub kind: Vec<NodeKind>,
    /// Outgoing action edges as `(label, target)`.
    pub edges: Vec<Vec<(StepLabel, usize)>>,
    /// `dist[n]`: distribution over non-probabilistic nodes.
    pub dist: Vec<Vec<(Prob, usize)>>,
    /// State group of each node: equal within tolerance to the group's first
    /// member.
    pub group: Vec<usize>,
    pub init: [usize; 2],
    pub has_parallel_steps: bool,
}

impl Union {
    pub fn new(t1: &TransitionSystem, t2: &TransitionSystem, opts: &Options) -> Result<Self> {
        let offset = t1.len();
        let len = offset + t2.len();
        let mut kind = Vec::with_capacity(len);
        let mut edges = Vec::with_capacity(len);
        let mut dist = Vec::with_capacity(len);
        let mut states = Vec::with_capacity(len);
        for (ts, off) in [(t1, 0), (t2, offset)] {
            for (i, n) in ts.nodes.iter().enumerate() {
                kind.push(n.kind);
                edges.push(ts.action_out(i).map(|e| (e.label.clone(), e.to + off)).collect());
                dist.push(ts.dist(i).into_iter().map(|(p, j)| (p, j + off)).collect());
                states.push(match &opts.public {
                    Some(p) => n.state.restrict_public(p)?,
                    None => n.state.clone(),
                });
            }
        }
        let group = group_states(&states, opts.tol)?;
        let has_parallel_steps = t1
            .action_edges
            .iter()
            .chain(&t2.action_edges)
            .any(|e| e.label.len() > 1);
        Ok(Self {
            offset,
            len,
            kind,
            edges,
            dist,
            group,
            init: [t1.initial, t2.initial + offset],
            has_parallel_steps,
        })
    }

    pub fn is_prob(&self, n: usize) -> bool {
        self.kind[n] == NodeKind::Prob
    }

    pub fn done(&self, n: usize) -> bool {
        self.kind[n] == NodeKind::Done
    }

    /// Node indices that carry behaviour (everything but probabilistic nodes).
    pub fn action_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(|&n| !self.is_prob(n))
    }

    pub fn side(&self, n: usize) -> usize {
        usize::from(n >= self.offset)
    }

    pub fn local(&self, n: usize) -> usize {
        if n >= self.offset {
            n - self.offset
        } else {
            n
        }
    }
}

fn group_states(states: &[QuantumState], tol: f64) -> Result<Vec<usize>> {
    let mut reps: Vec<usize> = Vec::new();
    let mut exact: HashMap<Fingerprint, usize> = HashMap::new();
    let mut group = Vec::with_capacity(states.len());
    for (i, st) in states.iter().enumerate() {
        let fp = st.fingerprint();
        if let Some(&g) = exact.get(&fp) {
            group.push(g);
            continue;
        }
        let mut found = None;
        for (g, &r) in reps.iter().enumerate() {
            if states[r].register() == st.register() && states[r].state_equal(st, tol)? {
                found = Some(g);
                break;
            }
        }
        let g = match found {
            Some(g) => g,
            None => {
                reps.push(i);
                reps.len() - 1
            }
        };
        exact.insert(fp, g);
        group.push(g);
    }
    Ok(group)
}
