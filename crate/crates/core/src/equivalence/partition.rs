use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};

use super::graph::Union;
use super::{BisimResult, DistinguishingTrace, Relation, Witness};
use crate::prob::{self, Prob};
use crate::semantics::StepLabel;

/// A run label (sequence of steps) and the node it ends in.
type Run = (Vec<StepLabel>, usize);
/// A distribution lifted to classes. Without probabilities every weight is 1.
type Lift = Vec<(usize, Prob)>;
type Signature = (usize, BTreeSet<(Vec<StepLabel>, Lift)>);

fn lift(dist: &[(Prob, usize)], classes: &[usize], prob: bool) -> Lift {
    let mut m: BTreeMap<usize, Prob> = BTreeMap::new();
    for (p, n) in dist {
        *m.entry(classes[*n]).or_insert_with(Prob::zero) += p;
    }
    if !prob {
        m.values_mut().for_each(|v| *v = Prob::one());
    }
    m.into_iter().collect()
}

/// Runs of at most `depth` steps. Intermediate configurations must be
/// reached with probability one.
fn runs(g: &Union, n: usize, depth: usize, out: &mut Vec<Run>, prefix: &mut Vec<StepLabel>) {
    for (label, t) in &g.edges[n] {
        prefix.push(label.clone());
        out.push((prefix.clone(), *t));
        if depth > 1 && !g.is_prob(*t) {
            runs(g, *t, depth - 1, out, prefix);
        }
        prefix.pop();
    }
}

struct Refiner<'a> {
    g: &'a Union,
    prob: bool,
    runs: Vec<Vec<Run>>,
    /// Partition after each round; round 0 splits by state and termination.
    history: Vec<Vec<usize>>,
}

impl Refiner<'_> {
    fn signature(&self, n: usize, classes: &[usize]) -> Signature {
        let moves = self.runs[n]
            .iter()
            .map(|(l, t)| (l.clone(), lift(&self.g.dist[*t], classes, self.prob)))
            .collect();
        (classes[n], moves)
    }

    fn run(&mut self) {
        let g = self.g;
        let mut initial: BTreeMap<(bool, usize), usize> = BTreeMap::new();
        let mut classes = vec![usize::MAX; g.len];
        for n in g.action_nodes() {
            let k = initial.len();
            classes[n] = *initial.entry((g.done(n), g.group[n])).or_insert(k);
        }
        let mut count = initial.len();
        self.history.push(classes.clone());
        loop {
            let mut seen: BTreeMap<Signature, usize> = BTreeMap::new();
            let mut next = vec![usize::MAX; g.len];
            for n in g.action_nodes() {
                let k = seen.len();
                next[n] = *seen.entry(self.signature(n, &classes)).or_insert(k);
            }
            let stable = seen.len() == count;
            count = seen.len();
            classes = next;
            self.history.push(classes.clone());
            if stable {
                break;
            }
        }
    }

    fn classes(&self) -> &[usize] {
        self.history.last().expect("at least one round")
    }

    fn first_split(&self, a: &[(Prob, usize)], b: &[(Prob, usize)]) -> Option<usize> {
        (0..self.history.len()).find(|&r| {
            lift(a, &self.history[r], self.prob) != lift(b, &self.history[r], self.prob)
        })
    }

    fn describe(&self, n: usize) -> &'static str {
        if self.g.side(n) == 0 {
            "left"
        } else {
            "right"
        }
    }

    /// Explains why two distributions are told apart, following the round in
    /// which they were first separated.
    fn explain_dists(&self, a: &[(Prob, usize)], b: &[(Prob, usize)], steps: &mut Vec<String>) -> String {
        let Some(r) = self.first_split(a, b) else {
            return "no difference found".into();
        };
        let cls = &self.history[r];
        let ca: BTreeSet<usize> = a.iter().map(|(_, n)| cls[*n]).collect();
        let cb: BTreeSet<usize> = b.iter().map(|(_, n)| cls[*n]).collect();
        if ca == cb {
            let wa = lift(a, cls, self.prob);
            let wb = lift(b, cls, self.prob);
            let (pa, pb) = wa
                .iter()
                .zip(&wb)
                .find(|(x, y)| x != y)
                .map(|(x, y)| (x.1.clone(), y.1.clone()))
                .unwrap_or((Prob::zero(), Prob::zero()));
            return format!(
                "equivalent outcomes are reached with different probabilities ({} vs {})",
                prob::format(&pa),
                prob::format(&pb)
            );
        }
        let (s, t) = match a.iter().find(|(_, n)| !cb.contains(&cls[*n])) {
            Some((_, s)) => (*s, b[0].1),
            None => {
                let (_, t) = b.iter().find(|(_, n)| !ca.contains(&cls[*n])).expect("class mismatch");
                (a[0].1, *t)
            }
        };
        self.explain_nodes(s, t, steps)
    }

    fn explain_nodes(&self, s: usize, t: usize, steps: &mut Vec<String>) -> String {
        let g = self.g;
        let r = (0..self.history.len())
            .find(|&r| self.history[r][s] != self.history[r][t])
            .expect("nodes are separated");
        if r == 0 {
            return if g.done(s) != g.done(t) {
                format!(
                    "the {} configuration has terminated and the {} one has not",
                    self.describe(if g.done(s) { s } else { t }),
                    self.describe(if g.done(s) { t } else { s })
                )
            } else {
                "the quantum states differ".into()
            };
        }
        let prev = &self.history[r - 1];
        let (ss, st) = (self.signature(s, prev).1, self.signature(t, prev).1);
        let (x, y, extra) = match ss.difference(&st).next() {
            Some(m) => (s, t, m.clone()),
            None => (t, s, st.difference(&ss).next().expect("signatures differ").clone()),
        };
        let label = extra
            .0
            .iter()
            .map(|l| l.to_string())
            .collect::<Vec<_>>()
            .join(" ");
        let own = self.runs[x].iter().find(|(l, tgt)| {
            *l == extra.0 && lift(&g.dist[*tgt], prev, self.prob) == extra.1
        });
        let other: Vec<&Run> = self.runs[y].iter().filter(|(l, _)| *l == extra.0).collect();
        steps.push(label.clone());
        let (Some(own), Some(first)) = (own, other.first()) else {
            return format!(
                "only the {} configuration can perform {}",
                self.describe(x),
                label
            );
        };
        let mut sub = Vec::new();
        let reason = self.explain_dists(&g.dist[own.1], &g.dist[first.1], &mut sub);
        steps.extend(sub);
        if other.len() > 1 {
            format!("{reason} (after every match of {label} by the {} configuration)", self.describe(y))
        } else {
            reason
        }
    }
}

fn refiner(g: &Union, prob: bool, depth: usize) -> Refiner<'_> {
    let mut runs_of = vec![Vec::new(); g.len];
    for n in g.action_nodes() {
        runs(g, n, depth, &mut runs_of[n], &mut Vec::new());
    }
    let mut r = Refiner {
        g,
        prob,
        runs: runs_of,
        history: Vec::new(),
    };
    r.run();
    r
}

pub fn refine(g: &Union, prob: bool, depth: usize) -> BisimResult {
    let r = refiner(g, prob, depth);
    let classes = r.classes();
    let (a, b) = (&g.dist[g.init[0]], &g.dist[g.init[1]]);
    let related = lift(a, classes, prob) == lift(b, classes, prob);
    let witness = if related {
        let mut pairs = Vec::new();
        for i in (0..g.offset).filter(|&i| !g.is_prob(i)) {
            for j in (g.offset..g.len).filter(|&j| !g.is_prob(j)) {
                if classes[i] == classes[j] {
                    pairs.push((i, j - g.offset));
                }
            }
        }
        Witness::Relation(pairs)
    } else {
        let mut steps = Vec::new();
        let reason = r.explain_dists(a, b, &mut steps);
        Witness::Trace(DistinguishingTrace { steps, reason })
    };
    BisimResult {
        relation: Relation::Step,
        related,
        witness,
        warnings: Vec::new(),
    }
}

/// A distinguishing trace for two systems that are not step bisimilar.
pub(crate) fn explain(g: &Union, prob: bool) -> DistinguishingTrace {
    let r = refiner(g, prob, 1);
    let mut steps = Vec::new();
    let reason = r.explain_dists(&g.dist[g.init[0]], &g.dist[g.init[1]], &mut steps);
    DistinguishingTrace { steps, reason }
}
