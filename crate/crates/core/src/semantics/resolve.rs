use std::collections::BTreeSet;

use num_traits::One;

use super::{Result, SemanticsError, Semantics};
use crate::prob::Prob;
use crate::syntax::{Name, Term};

pub type Dist = Vec<(Prob, Term)>;

fn push(out: &mut Dist, p: Prob, t: Term) {
    match out.iter_mut().find(|(_, u)| *u == t) {
        Some(e) => e.0 += p,
        None => out.push((p, t)),
    }
}

fn dirac(t: &Term) -> Dist {
    vec![(Prob::one(), t.clone())]
}

fn map(d: Dist, f: impl Fn(Term) -> Term) -> Dist {
    let mut out = Dist::new();
    for (p, t) in d {
        push(&mut out, p, f(t));
    }
    out
}

/// One level of the conflict elimination axioms CE19 to PrCE25. `None` for
/// shapes these axioms do not cover.
pub fn theta_expand(t: &Term) -> Option<Term> {
    let th = |x: &Term| Term::conflict(x.clone());
    let unless = |x: &Term, y: &Term| Term::unless(th(x), y.clone());
    Some(match t {
        Term::Event(_) | Term::Tau | Term::Hidden(_) | Term::Delta | Term::Diverge => t.clone(),
        Term::Alt(x, y) => Term::alt(unless(x, y), unless(y, x)),
        Term::Seq(x, y) => Term::seq(th(x), th(y)),
        Term::Par(x, y) => Term::alt(
            Term::par(unless(x, y), (**y).clone()),
            Term::par(unless(y, x), (**x).clone()),
        ),
        Term::Comm(x, y) => Term::alt(
            Term::comm(unless(x, y), (**y).clone()),
            Term::comm(unless(y, x), (**x).clone()),
        ),
        Term::Prob(p, x, y) => Term::alt(
            Term::prob(p.clone(), unless(x, y), (**y).clone()),
            Term::prob(p.clone(), unless(y, x), (**x).clone()),
        ),
        _ => return None,
    })
}

impl Semantics<'_> {
    /// Probabilistic resolution: the distribution over terms reached through
    /// `~>` transitions. Equal outcomes are merged.
    pub fn resolve(&self, t: &Term) -> Result<Dist> {
        Ok(match t {
            Term::Event(_) | Term::Tau | Term::Hidden(_) | Term::Delta | Term::Diverge => dirac(t),
            Term::Var(x) => return Err(SemanticsError::Unbound(x.clone())),
            Term::Rec(spec, x) => {
                self.unfolded.set(true);
                let body = spec
                    .unfold(x)
                    .ok_or_else(|| SemanticsError::UnknownEntry(x.clone()))?;
                self.resolve(&body)?
            }
            Term::Seq(a, b) => map(self.resolve(a)?, |a| Term::seq(a, (**b).clone())),
            Term::Alt(a, b) => self.product(a, b, Term::alt)?,
            Term::Par(a, b) => self.product(a, b, Term::par)?,
            Term::Comm(a, b) => self.product(a, b, Term::comm)?,
            Term::Prob(p, a, b) => {
                let mut out = Dist::new();
                for (q, t) in self.resolve(a)? {
                    push(&mut out, p * q, t);
                }
                let rest = Prob::one() - p;
                for (q, t) in self.resolve(b)? {
                    push(&mut out, &rest * q, t);
                }
                out
            }
            Term::LeftMerge(a, b) => map(self.resolve(a)?, |a| Term::left_merge(a, (**b).clone())),
            Term::Unless(a, b) => map(self.resolve(a)?, |a| Term::unless(a, (**b).clone())),
            Term::Conc(x, y) => {
                let mut out = Dist::new();
                for (p, xr) in self.resolve(x)? {
                    for (q, yr) in self.resolve(y)? {
                        let t = self.merge_expansion(&xr, y, &yr, x)?;
                        push(&mut out, &p * &q, t);
                    }
                }
                out
            }
            Term::PairMerge(k) => {
                let [x, z, y, w] = &**k;
                let mut out = Dist::new();
                for (p, xr) in self.resolve(x)? {
                    for (q, yr) in self.resolve(y)? {
                        let t = self.merge_expansion(&xr, w, &yr, z)?;
                        push(&mut out, &p * &q, t);
                    }
                }
                out
            }
            Term::Conflict(a) => match theta_expand(a) {
                Some(e) => self.resolve(&e)?,
                None => map(self.resolve(a)?, Term::conflict),
            },
            Term::Encap(h, a) => map(self.resolve(a)?, |a| Term::Encap(h.clone(), Box::new(a))),
            Term::Abstract(i, a) => map(self.resolve(a)?, |a| Term::Abstract(i.clone(), Box::new(a))),
            Term::Project(n, a) => map(self.resolve(a)?, |a| Term::Project(*n, Box::new(a))),
        })
    }

    fn product(&self, a: &Term, b: &Term, f: fn(Term, Term) -> Term) -> Result<Dist> {
        let rb = self.resolve(b)?;
        let mut out = Dist::new();
        for (p, x) in self.resolve(a)? {
            for (q, y) in &rb {
                push(&mut out, &p * q, f(x.clone(), y.clone()));
            }
        }
        Ok(out)
    }

    /// The resolved form of a merge: `x' ||_ w + y' ||_ z + x' | y'` under a
    /// race between `x'` and `y'`, `x' || y' + x' | y'` otherwise.
    fn merge_expansion(&self, xr: &Term, w: &Term, yr: &Term, z: &Term) -> Result<Term> {
        let comm = Term::comm(xr.clone(), yr.clone());
        Ok(if self.race(xr, yr)? {
            Term::alt(
                Term::alt(
                    Term::left_merge(xr.clone(), w.clone()),
                    Term::left_merge(yr.clone(), z.clone()),
                ),
                comm,
            )
        } else {
            Term::alt(Term::par(xr.clone(), yr.clone()), comm)
        })
    }

    /// Events that may fire first in a resolved term.
    pub fn initial_events(&self, t: &Term) -> Result<BTreeSet<Name>> {
        Ok(self
            .steps(t)?
            .into_iter()
            .flat_map(|(fired, _)| fired.into_iter().map(|f| f.event))
            .collect())
    }

    /// `%(x, y)` for resolved terms: some initial event of `x` races some
    /// initial event of `y`.
    pub fn race(&self, x: &Term, y: &Term) -> Result<bool> {
        let ex = self.initial_events(x)?;
        if ex.is_empty() {
            return Ok(false);
        }
        let ey = self.initial_events(y)?;
        Ok(ex.iter().any(|a| ey.iter().any(|b| self.env.races(a, b))))
    }
}
