use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::prob::Prob;

pub type Name = String;
pub type NameSet = BTreeSet<Name>;

/// Process terms.
///
/// `Hidden(e)` is the silent step obtained by abstracting event `e`: it is
/// observed as `tau` but still applies the quantum operation of `e`.
/// `Diverge` marks a recursion variable left over after bounded unfolding and
/// behaves like `Delta`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Event(Name),
    Tau,
    Hidden(Name),
    Delta,
    Diverge,
    Seq(Box<Term>, Box<Term>),
    Alt(Box<Term>, Box<Term>),
    Prob(Prob, Box<Term>, Box<Term>),
    Par(Box<Term>, Box<Term>),
    Comm(Box<Term>, Box<Term>),
    Conc(Box<Term>, Box<Term>),
    LeftMerge(Box<Term>, Box<Term>),
    /// `(x, z) ][ (y, w)`: fields are `[x, z, y, w]`.
    PairMerge(Box<[Term; 4]>),
    Conflict(Box<Term>),
    Unless(Box<Term>, Box<Term>),
    Encap(NameSet, Box<Term>),
    Abstract(NameSet, Box<Term>),
    Project(u32, Box<Term>),
    Var(Name),
    Rec(Arc<RecSpec>, Name),
}

/// A system of recursive equations `X = t_X`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RecSpec {
    pub equations: BTreeMap<Name, Term>,
}

impl Term {
    pub fn event(name: &str) -> Term {
        Term::Event(name.to_string())
    }
    pub fn seq(a: Term, b: Term) -> Term {
        Term::Seq(Box::new(a), Box::new(b))
    }
    pub fn alt(a: Term, b: Term) -> Term {
        Term::Alt(Box::new(a), Box::new(b))
    }
    pub fn prob(p: Prob, a: Term, b: Term) -> Term {
        Term::Prob(p, Box::new(a), Box::new(b))
    }
    pub fn par(a: Term, b: Term) -> Term {
        Term::Par(Box::new(a), Box::new(b))
    }
    pub fn comm(a: Term, b: Term) -> Term {
        Term::Comm(Box::new(a), Box::new(b))
    }
    pub fn conc(a: Term, b: Term) -> Term {
        Term::Conc(Box::new(a), Box::new(b))
    }
    pub fn left_merge(a: Term, b: Term) -> Term {
        Term::LeftMerge(Box::new(a), Box::new(b))
    }
    pub fn pair_merge(x: Term, z: Term, y: Term, w: Term) -> Term {
        Term::PairMerge(Box::new([x, z, y, w]))
    }
    pub fn conflict(a: Term) -> Term {
        Term::Conflict(Box::new(a))
    }
    pub fn unless(a: Term, b: Term) -> Term {
        Term::Unless(Box::new(a), Box::new(b))
    }
    pub fn encap<I: IntoIterator<Item = S>, S: Into<String>>(h: I, t: Term) -> Term {
        Term::Encap(h.into_iter().map(Into::into).collect(), Box::new(t))
    }
    pub fn abstract_<I: IntoIterator<Item = S>, S: Into<String>>(i: I, t: Term) -> Term {
        Term::Abstract(i.into_iter().map(Into::into).collect(), Box::new(t))
    }
    pub fn project(n: u32, t: Term) -> Term {
        Term::Project(n, Box::new(t))
    }

    /// Right-nested sequential composition of a nonempty list.
    pub fn seq_all(mut items: Vec<Term>) -> Term {
        let last = items.pop().expect("seq_all needs at least one term");
        items.into_iter().rev().fold(last, |acc, t| Term::seq(t, acc))
    }

    /// Right-nested alternative composition; `Delta` for an empty list.
    pub fn alt_all(mut items: Vec<Term>) -> Term {
        match items.pop() {
            None => Term::Delta,
            Some(last) => items.into_iter().rev().fold(last, |acc, t| Term::alt(t, acc)),
        }
    }

    /// Direct subterms, left to right.
    pub fn children(&self) -> Vec<&Term> {
        use Term::*;
        match self {
            Event(_) | Tau | Hidden(_) | Delta | Diverge | Var(_) | Rec(..) => vec![],
            Seq(a, b) | Alt(a, b) | Prob(_, a, b) | Par(a, b) | Comm(a, b) | Conc(a, b)
            | LeftMerge(a, b) | Unless(a, b) => vec![a, b],
            PairMerge(k) => k.iter().collect(),
            Conflict(a) | Encap(_, a) | Abstract(_, a) | Project(_, a) => vec![a],
        }
    }

    /// Number of constructor nodes (recursive specifications count once).
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    /// True when no `(+)` occurs anywhere, including recursion bodies.
    pub fn is_prob_free(&self) -> bool {
        match self {
            Term::Prob(..) => false,
            Term::Rec(spec, _) => spec.equations.values().all(Term::is_prob_free),
            t => t.children().iter().all(|c| c.is_prob_free()),
        }
    }

    /// True when the term contains a parallel-style operator.
    pub fn has_parallel(&self) -> bool {
        match self {
            Term::Par(..)
            | Term::Comm(..)
            | Term::Conc(..)
            | Term::LeftMerge(..)
            | Term::PairMerge(..) => true,
            Term::Rec(spec, _) => spec.equations.values().any(Term::has_parallel),
            t => t.children().iter().any(|c| c.has_parallel()),
        }
    }

    /// Free recursion variables.
    pub fn free_vars(&self) -> NameSet {
        let mut out = NameSet::new();
        self.collect_free(&mut out);
        out
    }

    fn collect_free(&self, out: &mut NameSet) {
        match self {
            Term::Var(x) => {
                out.insert(x.clone());
            }
            Term::Rec(spec, _) => {
                for body in spec.equations.values() {
                    for v in body.free_vars() {
                        if !spec.equations.contains_key(&v) {
                            out.insert(v);
                        }
                    }
                }
            }
            t => t.children().iter().for_each(|c| c.collect_free(out)),
        }
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Rebuilds the term with `f` applied to every direct child.
    pub fn map_children<F: FnMut(&Term) -> Term>(&self, mut f: F) -> Term {
        use Term::*;
        match self {
            Event(_) | Tau | Hidden(_) | Delta | Diverge | Var(_) | Rec(..) => self.clone(),
            Seq(a, b) => Term::seq(f(a), f(b)),
            Alt(a, b) => Term::alt(f(a), f(b)),
            Prob(p, a, b) => Term::prob(p.clone(), f(a), f(b)),
            Par(a, b) => Term::par(f(a), f(b)),
            Comm(a, b) => Term::comm(f(a), f(b)),
            Conc(a, b) => Term::conc(f(a), f(b)),
            LeftMerge(a, b) => Term::left_merge(f(a), f(b)),
            Unless(a, b) => Term::unless(f(a), f(b)),
            PairMerge(k) => Term::pair_merge(f(&k[0]), f(&k[1]), f(&k[2]), f(&k[3])),
            Conflict(a) => Term::conflict(f(a)),
            Encap(h, a) => Term::Encap(h.clone(), Box::new(f(a))),
            Abstract(i, a) => Term::Abstract(i.clone(), Box::new(f(a))),
            Project(n, a) => Term::Project(*n, Box::new(f(a))),
        }
    }
}

impl RecSpec {
    pub fn new(equations: BTreeMap<Name, Term>) -> Self {
        Self { equations }
    }

    /// The body of `var` with every bound variable replaced by the
    /// corresponding recursive constant.
    pub fn unfold(self: &Arc<Self>, var: &str) -> Option<Term> {
        let body = self.equations.get(var)?;
        let bindings: BTreeMap<Name, Term> = self
            .equations
            .keys()
            .map(|k| (k.clone(), Term::Rec(self.clone(), k.clone())))
            .collect();
        Some(super::subst::substitute_unchecked(body, &bindings))
    }
}
