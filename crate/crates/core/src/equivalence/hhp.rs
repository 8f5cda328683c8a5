use std::collections::BTreeSet;

use super::graph::Union;
use super::partition::explain;
use super::{BisimResult, EquivError, Relation, Result, Witness};
use crate::semantics::StepLabel;

struct RunPair {
    s: usize,
    t: usize,
    parent: Option<usize>,
    /// Extensions of both runs by one matching step.
    children: Vec<(StepLabel, usize)>,
}

/// Hereditary history-preserving bisimulation over pairs of runs from the
/// two initial configurations. A pair survives when every step of either run
/// end is matched by a surviving extension (forward) and the pair obtained by
/// undoing the last step survives too (backward). Steps are undone as a whole.
pub fn hhp(g: &Union, budget: usize) -> Result<BisimResult> {
    if (0..g.len).any(|n| g.is_prob(n)) {
        return Err(EquivError::NotApplicable(
            "hhp bisimulation is only available for systems without probabilistic choice".into(),
        ));
    }
    let mut warnings = Vec::new();
    if g.has_parallel_steps {
        warnings.push(
            "hhp is checked on a system with simultaneous steps; it is only claimed for sequential terms"
                .to_string(),
        );
    }
    let mut pairs = vec![RunPair {
        s: g.init[0],
        t: g.init[1],
        parent: None,
        children: Vec::new(),
    }];
    let mut next = 0;
    while next < pairs.len() {
        let (s, t) = (pairs[next].s, pairs[next].t);
        let mut children = Vec::new();
        for (x, s2) in &g.edges[s] {
            for (y, t2) in &g.edges[t] {
                if x != y {
                    continue;
                }
                if pairs.len() >= budget {
                    return Err(EquivError::BudgetExceeded(budget));
                }
                children.push((x.clone(), pairs.len()));
                pairs.push(RunPair {
                    s: *s2,
                    t: *t2,
                    parent: Some(next),
                    children: Vec::new(),
                });
            }
        }
        pairs[next].children = children;
        next += 1;
    }

    let mut valid: Vec<bool> = pairs
        .iter()
        .map(|p| g.done(p.s) == g.done(p.t) && g.group[p.s] == g.group[p.t])
        .collect();
    loop {
        let mut changed = false;
        for k in 0..pairs.len() {
            if !valid[k] {
                continue;
            }
            let p = &pairs[k];
            let backward = p.parent.is_none_or(|q| valid[q]);
            let matched = |label: &StepLabel, target: usize, left: bool| {
                p.children.iter().any(|(l, c)| {
                    let end = if left { pairs[*c].s } else { pairs[*c].t };
                    l == label && end == target && valid[*c]
                })
            };
            let forward = g.edges[p.s].iter().all(|(x, s2)| matched(x, *s2, true))
                && g.edges[p.t].iter().all(|(y, t2)| matched(y, *t2, false));
            if !(backward && forward) {
                valid[k] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let related = valid[0];
    let witness = if related {
        let set: BTreeSet<(usize, usize)> = pairs
            .iter()
            .zip(&valid)
            .filter(|(_, v)| **v)
            .map(|(p, _)| (g.local(p.s), g.local(p.t)))
            .collect();
        Witness::Relation(set.into_iter().collect())
    } else {
        Witness::Trace(explain(g, false))
    };
    Ok(BisimResult {
        relation: Relation::Hhp,
        related,
        witness,
        warnings,
    })
}
