//! Normal forms of closed terms.
//!
//! A normal form is a distribution over sums; a sum is a set of summands;
//! a summand is an atomic step (a multiset of actions fired together)
//! optionally followed by a continuation. Sets and sorted vectors give the
//! canonical order required by A1, A2, PrAC1 and PrAC2; set semantics gives
//! A3 on summands.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};

use crate::prob::Prob;
use crate::syntax::{Env, Name, NameSet, Term, TAU};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Act {
    pub label: Name,
    /// The declared event performing the action; differs from `label` after
    /// hiding or silencing.
    pub origin: Name,
}

impl Act {
    pub fn event(name: &str) -> Self {
        Self {
            label: name.into(),
            origin: name.into(),
        }
    }

    pub fn hidden(origin: &str) -> Self {
        Self {
            label: TAU.into(),
            origin: origin.into(),
        }
    }

    fn term(&self) -> Term {
        if self.label != TAU {
            Term::Event(self.label.clone())
        } else if self.origin == TAU {
            Term::Tau
        } else {
            Term::Hidden(self.origin.clone())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Summand {
    /// Sorted, nonempty.
    pub step: Vec<Act>,
    pub cont: Option<Nf>,
}

pub type Sum = BTreeSet<Summand>;

/// Sorted by sum, no duplicate sums, weights positive and summing to one.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Nf(pub Vec<(Sum, Prob)>);

impl Summand {
    pub fn new(mut step: Vec<Act>, cont: Option<Nf>) -> Self {
        step.sort();
        Self { step, cont }
    }
}

impl Nf {
    pub fn dirac(s: Sum) -> Self {
        Nf(vec![(s, Prob::one())])
    }

    pub fn delta() -> Self {
        Self::dirac(Sum::new())
    }

    pub fn act(a: Act) -> Self {
        Self::dirac(Sum::from([Summand::new(vec![a], None)]))
    }

    pub fn tau() -> Self {
        Self::act(Act::event(TAU))
    }

    /// Builds a normal form from arbitrary weighted sums, merging equal ones.
    pub fn from_parts(parts: impl IntoIterator<Item = (Sum, Prob)>) -> Self {
        let mut m: BTreeMap<Sum, Prob> = BTreeMap::new();
        for (s, p) in parts {
            if !p.is_zero() {
                *m.entry(s).or_insert_with(Prob::zero) += p;
            }
        }
        Nf(m.into_iter().collect())
    }

    pub fn is_dirac(&self) -> bool {
        self.0.len() == 1
    }

    pub fn sums(&self) -> impl Iterator<Item = &Sum> {
        self.0.iter().map(|(s, _)| s)
    }

    /// Applies `f` to every sum.
    pub fn map_sums(&self, mut f: impl FnMut(&Sum) -> Sum) -> Nf {
        Nf::from_parts(self.0.iter().map(|(s, p)| (f(s), p.clone())))
    }

    /// Combines every pair of sums of `self` and `other`.
    pub fn product(&self, other: &Nf, mut f: impl FnMut(&Sum, &Sum) -> Sum) -> Nf {
        let mut parts = Vec::new();
        for (s, p) in &self.0 {
            for (t, q) in &other.0 {
                parts.push((f(s, t), p * q));
            }
        }
        Nf::from_parts(parts)
    }

    pub fn to_term(&self) -> Term {
        let mut comps = self.0.iter();
        let (first, p0) = comps.next().expect("a normal form has at least one sum");
        let mut acc = sum_term(first);
        let mut mass = p0.clone();
        for (s, p) in comps {
            let total = &mass + p;
            acc = Term::prob(&mass / &total, acc, sum_term(s));
            mass = total;
        }
        acc
    }

    /// Number of summands at any depth; a size measure for tests.
    pub fn size(&self) -> usize {
        self.sums()
            .flat_map(|s| s.iter())
            .map(|m| 1 + m.cont.as_ref().map_or(0, Nf::size))
            .sum()
    }
}

fn sum_term(s: &Sum) -> Term {
    Term::alt_all(s.iter().map(summand_term).collect())
}

fn summand_term(m: &Summand) -> Term {
    let mut acts = m.step.iter().map(Act::term);
    let first = acts.next().expect("steps are nonempty");
    let step = acts.fold(first, Term::par);
    match &m.cont {
        None => step,
        Some(k) => Term::seq(step, k.to_term()),
    }
}

fn join(env: &Env, x: &Option<Nf>, y: &Option<Nf>) -> Option<Nf> {
    match (x, y) {
        (None, None) => None,
        (Some(x), None) => Some(x.clone()),
        (None, Some(y)) => Some(y.clone()),
        (Some(x), Some(y)) => Some(conc(env, x, y)),
    }
}

pub fn seq(x: &Nf, y: &Nf) -> Nf {
    x.map_sums(|s| {
        s.iter()
            .map(|m| Summand {
                step: m.step.clone(),
                cont: Some(match &m.cont {
                    None => y.clone(),
                    Some(k) => seq(k, y),
                }),
            })
            .collect()
    })
}

pub fn alt(x: &Nf, y: &Nf) -> Nf {
    x.product(y, |s, t| s.union(t).cloned().collect())
}

pub fn mix(p: &Prob, x: &Nf, y: &Nf) -> Nf {
    let q = Prob::one() - p;
    Nf::from_parts(
        x.0.iter()
            .map(|(s, w)| (s.clone(), p * w))
            .chain(y.0.iter().map(|(s, w)| (s.clone(), &q * w))),
    )
}

/// `%` between the initial steps of two sums.
pub fn races(env: &Env, s: &Sum, t: &Sum) -> bool {
    s.iter().any(|m| {
        t.iter().any(|n| {
            m.step
                .iter()
                .any(|a| n.step.iter().any(|b| env.races(&a.origin, &b.origin)))
        })
    })
}

/// Sum-level parallel composition of two prefix sums.
pub fn par_sum(env: &Env, s: &Sum, t: &Sum) -> Sum {
    if s.is_empty() || t.is_empty() {
        return Sum::new();
    }
    if races(env, s, t) {
        let rest = Nf::dirac(t.clone());
        return left_sum(env, s, &rest);
    }
    let mut out = Sum::new();
    for m in s {
        for n in t {
            let mut step = m.step.clone();
            step.extend(n.step.iter().cloned());
            out.insert(Summand::new(step, join(env, &m.cont, &n.cont)));
        }
    }
    out
}

pub fn comm_sum(env: &Env, s: &Sum, t: &Sum) -> Sum {
    let mut out = Sum::new();
    for m in s {
        for n in t {
            if let ([a], [b]) = (m.step.as_slice(), n.step.as_slice()) {
                if let Some(c) = env.communication(&a.label, &b.label) {
                    out.insert(Summand::new(vec![Act::event(c)], join(env, &m.cont, &n.cont)));
                }
            }
        }
    }
    out
}

/// `s ||_ rest`: the left sum moves first, the remainder runs concurrently.
pub fn left_sum(env: &Env, s: &Sum, rest: &Nf) -> Sum {
    s.iter()
        .map(|m| Summand {
            step: m.step.clone(),
            cont: Some(match &m.cont {
                None => rest.clone(),
                Some(k) => conc(env, k, rest),
            }),
        })
        .collect()
}

/// The merge of two resolved sums with the remainders used under a race.
pub fn merge_sum(env: &Env, s: &Sum, w: &Nf, t: &Sum, z: &Nf) -> Sum {
    let mut out = comm_sum(env, s, t);
    if races(env, s, t) {
        out.extend(left_sum(env, s, w));
        out.extend(left_sum(env, t, z));
    } else {
        out.extend(par_sum(env, s, t));
    }
    out
}

pub fn par(env: &Env, x: &Nf, y: &Nf) -> Nf {
    x.product(y, |s, t| par_sum(env, s, t))
}

pub fn comm(env: &Env, x: &Nf, y: &Nf) -> Nf {
    x.product(y, |s, t| comm_sum(env, s, t))
}

pub fn conc(env: &Env, x: &Nf, y: &Nf) -> Nf {
    x.product(y, |s, t| merge_sum(env, s, y, t, x))
}

pub fn left_merge(env: &Env, x: &Nf, y: &Nf) -> Nf {
    x.map_sums(|s| left_sum(env, s, y))
}

pub fn pair_merge(env: &Env, x: &Nf, z: &Nf, y: &Nf, w: &Nf) -> Nf {
    x.product(y, |s, t| merge_sum(env, s, w, t, z))
}

/// Rewrites every action and drops summands whose step is rejected.
pub fn map_acts(x: &Nf, f: &impl Fn(&Act) -> Option<Act>) -> Nf {
    x.map_sums(|s| {
        s.iter()
            .filter_map(|m| {
                let step: Option<Vec<Act>> = m.step.iter().map(f).collect();
                Some(Summand::new(step?, m.cont.as_ref().map(|k| map_acts(k, f))))
            })
            .collect()
    })
}

pub fn encap(x: &Nf, h: &NameSet) -> Nf {
    map_acts(x, &|a| (!h.contains(&a.label)).then(|| a.clone()))
}

pub fn hide(x: &Nf, i: &NameSet) -> Nf {
    map_acts(x, &|a| {
        Some(if i.contains(&a.label) {
            Act::hidden(&a.origin)
        } else {
            a.clone()
        })
    })
}

/// Renames actions silenced by some label of `alphabet` to `tau`.
pub fn unless(env: &Env, x: &Nf, alphabet: &NameSet) -> Nf {
    map_acts(x, &|a| {
        Some(if alphabet.iter().any(|c| env.silenced_by(&a.label, c)) {
            Act::hidden(&a.origin)
        } else {
            a.clone()
        })
    })
}

pub fn project(x: &Nf, n: u32) -> Nf {
    x.map_sums(|s| {
        s.iter()
            .map(|m| Summand {
                step: m.step.clone(),
                cont: match &m.cont {
                    Some(k) if n > 1 => Some(project(k, n - 1)),
                    _ => None,
                },
            })
            .collect()
    })
}

/// Forgets which event a silent action came from.
pub fn anonymize(x: &Nf) -> Nf {
    map_acts(x, &|a| {
        Some(if a.label == TAU {
            Act::event(TAU)
        } else {
            a.clone()
        })
    })
}

/// T1, `x . tau = x`, applied bottom up.
pub fn drop_trailing_tau(x: &Nf) -> Nf {
    let tau = Nf::tau();
    x.map_sums(|s| {
        s.iter()
            .map(|m| {
                let cont = m.cont.as_ref().map(drop_trailing_tau).filter(|k| *k != tau);
                Summand {
                    step: m.step.clone(),
                    cont,
                }
            })
            .collect()
    })
}
