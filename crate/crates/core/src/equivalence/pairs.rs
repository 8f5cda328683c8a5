use std::collections::BTreeSet;

use super::flow::coupling_exists;
use super::graph::Union;
use super::partition::explain;
use super::{BisimResult, Relation, Witness};
use crate::prob::Prob;

/// Lifting of a relation between the two sides to distributions.
pub(crate) fn lifted(
    g: &Union,
    rel: &[Vec<bool>],
    mu: &[(Prob, usize)],
    nu: &[(Prob, usize)],
    prob: bool,
) -> bool {
    let r = |a: usize, b: usize| rel[a][b - g.offset];
    if prob {
        coupling_exists(mu, nu, r)
    } else {
        mu.iter().all(|(_, a)| nu.iter().any(|(_, b)| r(*a, *b)))
            && nu.iter().all(|(_, b)| mu.iter().any(|(_, a)| r(*a, *b)))
    }
}

/// History-preserving bisimulation as the greatest relation between the
/// configurations of the two systems closed under the transfer conditions.
/// Matched steps carry equal label multisets, which induces the label
/// preserving bijection between the events of the step.
pub fn hp(g: &Union, prob: bool) -> BisimResult {
    let n2 = g.len - g.offset;
    let mut rel = vec![vec![false; n2]; g.offset];
    for i in (0..g.offset).filter(|&i| !g.is_prob(i)) {
        for j in (g.offset..g.len).filter(|&j| !g.is_prob(j)) {
            rel[i][j - g.offset] = g.done(i) == g.done(j) && g.group[i] == g.group[j];
        }
    }
    loop {
        let mut changed = false;
        for i in 0..g.offset {
            for jj in 0..n2 {
                if !rel[i][jj] {
                    continue;
                }
                let j = jj + g.offset;
                let fwd = g.edges[i].iter().all(|(x, si)| {
                    g.edges[j]
                        .iter()
                        .any(|(y, tj)| x == y && lifted(g, &rel, &g.dist[*si], &g.dist[*tj], prob))
                });
                let ok = fwd
                    && g.edges[j].iter().all(|(y, tj)| {
                        g.edges[i]
                            .iter()
                            .any(|(x, si)| x == y && lifted(g, &rel, &g.dist[*si], &g.dist[*tj], prob))
                    });
                if !ok {
                    rel[i][jj] = false;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let related = lifted(g, &rel, &g.dist[g.init[0]], &g.dist[g.init[1]], prob);
    let witness = if related {
        let mut pairs = BTreeSet::new();
        for (i, row) in rel.iter().enumerate() {
            pairs.extend((0..n2).filter(|&j| row[j]).map(|j| (i, j)));
        }
        Witness::Relation(pairs.into_iter().collect())
    } else {
        Witness::Trace(explain(g, prob))
    };
    BisimResult {
        relation: Relation::Hp,
        related,
        witness,
        warnings: Vec::new(),
    }
}
