use std::collections::{BTreeMap, VecDeque};

use num_traits::{One, Zero};

use crate::prob::Prob;

fn merge(d: &[(Prob, usize)]) -> Vec<(usize, Prob)> {
    let mut m: BTreeMap<usize, Prob> = BTreeMap::new();
    for (p, n) in d {
        *m.entry(*n).or_insert_with(Prob::zero) += p;
    }
    m.into_iter().collect()
}

/// Whether `mu` and `nu` can be coupled inside `related`: a joint
/// distribution with these marginals supported on related pairs. Decided by
/// an exact max-flow computation.
pub fn coupling_exists(
    mu: &[(Prob, usize)],
    nu: &[(Prob, usize)],
    related: impl Fn(usize, usize) -> bool,
) -> bool {
    let (left, right) = (merge(mu), merge(nu));
    let total_l: Prob = left.iter().map(|(_, p)| p.clone()).sum();
    let total_r: Prob = right.iter().map(|(_, p)| p.clone()).sum();
    if total_l != total_r {
        return false;
    }
    let (m, k) = (left.len(), right.len());
    let (src, sink) = (0, m + k + 1);
    let size = m + k + 2;
    let mut cap = vec![vec![Prob::zero(); size]; size];
    for (i, (_, p)) in left.iter().enumerate() {
        cap[src][1 + i] = p.clone();
    }
    for (j, (_, p)) in right.iter().enumerate() {
        cap[1 + m + j][sink] = p.clone();
    }
    // Total mass is at most one, so one acts as unbounded capacity.
    for (i, (u, _)) in left.iter().enumerate() {
        for (j, (v, _)) in right.iter().enumerate() {
            if related(*u, *v) {
                cap[1 + i][1 + m + j] = Prob::one();
            }
        }
    }
    let mut flow = Prob::zero();
    loop {
        let mut prev = vec![usize::MAX; size];
        prev[src] = src;
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            for v in 0..size {
                if prev[v] == usize::MAX && cap[u][v] > Prob::zero() {
                    prev[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if prev[sink] == usize::MAX {
            break;
        }
        let mut bottleneck: Option<Prob> = None;
        let mut v = sink;
        while v != src {
            let u = prev[v];
            let c = cap[u][v].clone();
            bottleneck = Some(match bottleneck {
                Some(b) if b < c => b,
                _ => c,
            });
            v = u;
        }
        let b = bottleneck.expect("path has an edge");
        let mut v = sink;
        while v != src {
            let u = prev[v];
            cap[u][v] -= &b;
            cap[v][u] += &b;
            v = u;
        }
        flow += b;
    }
    flow == total_l
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::ratio;

    #[test]
    fn couplings() {
        let mu = vec![(ratio(1, 2), 0), (ratio(1, 2), 1)];
        let nu = vec![(ratio(1, 2), 10), (ratio(1, 2), 11)];
        assert!(coupling_exists(&mu, &nu, |a, b| b == a + 10));
        assert!(!coupling_exists(&mu, &nu, |a, b| a == 0 && b == 10));
        let nu = vec![(ratio(1, 3), 10), (ratio(2, 3), 11)];
        assert!(!coupling_exists(&mu, &nu, |a, b| b == a + 10));
        assert!(coupling_exists(&mu, &nu, |_, _| true));
    }
}
