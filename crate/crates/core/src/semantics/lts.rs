use std::collections::{HashMap, VecDeque};
use std::fmt;

use num_traits::One;

use super::{Result, Semantics};
use crate::prob::Prob;
use crate::quantum::{Fingerprint, QuantumState};
use crate::syntax::{Env, Name, Term};

/// A step label: a nonempty multiset of event names, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StepLabel(Vec<Name>);

impl StepLabel {
    pub fn new(mut names: Vec<Name>) -> Self {
        names.sort();
        Self(names)
    }

    pub fn names(&self) -> &[Name] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for StepLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.0.join(","))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKind {
    /// Unresolved configuration with outgoing `~>` edges.
    Prob,
    /// Resolved configuration offering action steps.
    Action,
    /// The terminated configuration `<sqrt, rho>`.
    Done,
}

#[derive(Debug, Clone)]
pub struct Node {
    pub kind: NodeKind,
    pub term: Option<Term>,
    pub state: QuantumState,
    pub fingerprint: Fingerprint,
    /// Number of nodes along the discovery path whose evaluation unfolded a
    /// recursive constant.
    pub unfolds: usize,
    /// False when the node was not (fully) explored because a limit was hit.
    pub complete: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbEdge {
    pub from: usize,
    pub weight: Prob,
    pub to: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActionEdge {
    pub from: usize,
    pub label: StepLabel,
    /// Declared events behind the label, in firing order.
    pub events: Vec<Name>,
    pub to: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_nodes: usize,
    pub unfold_depth: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            max_nodes: 10_000,
            unfold_depth: 8,
        }
    }
}

/// Alternating probabilistic transition system. Node ids follow BFS order.
#[derive(Debug, Clone)]
pub struct TransitionSystem {
    pub nodes: Vec<Node>,
    pub prob_edges: Vec<ProbEdge>,
    pub action_edges: Vec<ActionEdge>,
    pub initial: usize,
    pub truncated: bool,
    prob_out: Vec<Vec<usize>>,
    action_out: Vec<Vec<usize>>,
}

impl TransitionSystem {
    /// Assembles a system from parts; used by transformations of generated
    /// systems.
    pub fn from_parts(
        nodes: Vec<Node>,
        prob_edges: Vec<ProbEdge>,
        action_edges: Vec<ActionEdge>,
        initial: usize,
        truncated: bool,
    ) -> Self {
        let mut ts = Self {
            nodes,
            prob_edges,
            action_edges,
            initial,
            truncated,
            prob_out: vec![],
            action_out: vec![],
        };
        ts.index();
        ts
    }

    fn index(&mut self) {
        self.prob_out = vec![Vec::new(); self.nodes.len()];
        self.action_out = vec![Vec::new(); self.nodes.len()];
        for (i, e) in self.prob_edges.iter().enumerate() {
            self.prob_out[e.from].push(i);
        }
        for (i, e) in self.action_edges.iter().enumerate() {
            self.action_out[e.from].push(i);
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn prob_out(&self, n: usize) -> impl Iterator<Item = &ProbEdge> {
        self.prob_out[n].iter().map(|&i| &self.prob_edges[i])
    }

    pub fn action_out(&self, n: usize) -> impl Iterator<Item = &ActionEdge> {
        self.action_out[n].iter().map(|&i| &self.action_edges[i])
    }

    /// The distribution over non-probabilistic nodes that `n` stands for.
    pub fn dist(&self, n: usize) -> Vec<(Prob, usize)> {
        if self.nodes[n].kind == NodeKind::Prob {
            self.prob_out(n).map(|e| (e.weight.clone(), e.to)).collect()
        } else {
            vec![(Prob::one(), n)]
        }
    }

    pub fn has_prob_nodes(&self) -> bool {
        self.nodes.iter().any(|n| n.kind == NodeKind::Prob)
    }

    /// True when no node can reach itself.
    pub fn is_acyclic(&self) -> bool {
        self.topological_order().is_some()
    }

    /// Nodes in an order where every edge points forward, if one exists.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let n = self.nodes.len();
        let mut indeg = vec![0usize; n];
        for e in &self.prob_edges {
            indeg[e.to] += 1;
        }
        for e in &self.action_edges {
            indeg[e.to] += 1;
        }
        let mut queue: VecDeque<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let succ: Vec<usize> = self
                .prob_out(v)
                .map(|e| e.to)
                .chain(self.action_out(v).map(|e| e.to))
                .collect();
            for w in succ {
                indeg[w] -= 1;
                if indeg[w] == 0 {
                    queue.push_back(w);
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    /// Checks that every probabilistic node has weights summing to one.
    pub fn weights_conserved(&self) -> bool {
        self.nodes.iter().enumerate().all(|(i, node)| {
            if node.kind != NodeKind::Prob || !node.complete {
                return true;
            }
            let total: Prob = self.prob_out(i).map(|e| e.weight.clone()).sum();
            total.is_one()
        })
    }
}

type Key = (NodeKind, Option<Term>, Fingerprint);

struct Builder<'a> {
    sem: Semantics<'a>,
    limits: Limits,
    nodes: Vec<Node>,
    index: HashMap<Key, usize>,
    prob_edges: Vec<ProbEdge>,
    action_edges: Vec<ActionEdge>,
    queue: VecDeque<usize>,
    truncated: bool,
}

impl Builder<'_> {
    /// Id of the node for `<proc, state>`, creating it when new. `None` when
    /// the node limit stops creation.
    fn enter(&mut self, proc: Option<Term>, state: &QuantumState, unfolds: usize) -> Result<Option<usize>> {
        let (kind, term, bump) = match proc {
            None => (NodeKind::Done, None, false),
            Some(t) => {
                let d = self.sem.resolve(&t)?;
                let bump = self.sem.take_unfolded();
                if d.len() == 1 {
                    (NodeKind::Action, Some(d.into_iter().next().expect("one").1), bump)
                } else {
                    (NodeKind::Prob, Some(t), bump)
                }
            }
        };
        self.intern(kind, term, state.clone(), unfolds + bump as usize)
    }

    fn intern(&mut self, kind: NodeKind, term: Option<Term>, state: QuantumState, unfolds: usize) -> Result<Option<usize>> {
        let fingerprint = state.fingerprint();
        let key = (kind, term, fingerprint);
        if let Some(&id) = self.index.get(&key) {
            return Ok(Some(id));
        }
        if self.nodes.len() >= self.limits.max_nodes {
            self.truncated = true;
            return Ok(None);
        }
        let id = self.nodes.len();
        let (kind, term, fingerprint) = key.clone();
        let over = unfolds > self.limits.unfold_depth;
        self.nodes.push(Node {
            kind,
            term,
            state,
            fingerprint,
            unfolds,
            complete: !over,
        });
        self.index.insert(key, id);
        if over {
            self.truncated = true;
        } else {
            self.queue.push_back(id);
        }
        Ok(Some(id))
    }

    fn expand(&mut self, id: usize) -> Result<()> {
        let node = self.nodes[id].clone();
        let Some(term) = node.term.clone() else {
            return Ok(());
        };
        match node.kind {
            NodeKind::Done => {}
            NodeKind::Prob => {
                let d = self.sem.resolve(&term)?;
                let bump = self.sem.take_unfolded() as usize;
                for (p, t) in d {
                    match self.intern(NodeKind::Action, Some(t), node.state.clone(), node.unfolds + bump)? {
                        Some(to) => self.prob_edges.push(ProbEdge { from: id, weight: p, to }),
                        None => self.nodes[id].complete = false,
                    }
                }
            }
            NodeKind::Action => {
                let steps = self.sem.steps(&term)?;
                let bump = self.sem.take_unfolded() as usize;
                for (fired, next) in steps {
                    let mut state = node.state.clone();
                    for f in &fired {
                        if let Some(ch) = self.sem.env().channel(&f.event) {
                            state = state.apply_channel(ch)?;
                        }
                    }
                    let label = StepLabel::new(fired.iter().map(|f| f.label.clone()).collect());
                    let events = fired.into_iter().map(|f| f.event).collect();
                    let Some(to) = self.enter(next, &state, node.unfolds + bump)? else {
                        self.nodes[id].complete = false;
                        continue;
                    };
                    let dup = self
                        .action_edges
                        .iter()
                        .rev()
                        .take_while(|e| e.from == id)
                        .any(|e| e.to == to && e.label == label);
                    if !dup {
                        self.action_edges.push(ActionEdge {
                            from: id,
                            label,
                            events,
                            to,
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

/// Explores `<term, state>` breadth first. Limits never drop behaviour
/// silently: hitting one sets `truncated` and marks the affected nodes
/// incomplete.
pub fn build_lts(env: &Env, term: &Term, state: &QuantumState, limits: Limits) -> Result<TransitionSystem> {
    let mut b = Builder {
        sem: Semantics::new(env),
        limits,
        nodes: Vec::new(),
        index: HashMap::new(),
        prob_edges: Vec::new(),
        action_edges: Vec::new(),
        queue: VecDeque::new(),
        truncated: false,
    };
    let initial = b
        .enter(Some(term.clone()), state, 0)?
        .expect("the first node always fits");
    while let Some(id) = b.queue.pop_front() {
        b.expand(id)?;
    }
    Ok(TransitionSystem::from_parts(
        b.nodes,
        b.prob_edges,
        b.action_edges,
        initial,
        b.truncated,
    ))
}
