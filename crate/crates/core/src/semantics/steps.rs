use super::{Fired, Result, SemanticsError, Semantics, SymStep};
use crate::syntax::{occurring_events, print_term, Term, TAU};

fn wrap(steps: Vec<SymStep>, f: impl Fn(Term) -> Term) -> Vec<SymStep> {
    steps.into_iter().map(|(e, k)| (e, k.map(&f))).collect()
}

fn join(x: Option<Term>, y: Option<Term>) -> Option<Term> {
    match (x, y) {
        (None, None) => None,
        (Some(x), None) => Some(x),
        (None, Some(y)) => Some(y),
        (Some(x), Some(y)) => Some(Term::conc(x, y)),
    }
}

impl Semantics<'_> {
    /// Action steps of a resolved term, without states.
    pub fn steps(&self, t: &Term) -> Result<Vec<SymStep>> {
        Ok(match t {
            Term::Event(e) => vec![(vec![Fired::same(e)], None)],
            Term::Tau => vec![(vec![Fired::same(TAU)], None)],
            Term::Hidden(e) => vec![(
                vec![Fired {
                    label: TAU.into(),
                    event: e.clone(),
                }],
                None,
            )],
            Term::Delta | Term::Diverge => vec![],
            Term::Var(x) => return Err(SemanticsError::Unbound(x.clone())),
            Term::Prob(..) => return Err(SemanticsError::Unresolved(print_term(t))),
            Term::Rec(..) | Term::Conc(..) | Term::PairMerge(..) => self.resolved_steps(t)?,
            Term::Seq(a, b) => self
                .steps(a)?
                .into_iter()
                .map(|(e, k)| {
                    let next = match k {
                        None => (**b).clone(),
                        Some(a2) => Term::seq(a2, (**b).clone()),
                    };
                    (e, Some(next))
                })
                .collect(),
            Term::Alt(a, b) => {
                let mut s = self.steps(a)?;
                s.extend(self.steps(b)?);
                s
            }
            Term::Par(a, b) => self.par_steps(a, b)?,
            Term::Comm(a, b) => self.comm_steps(a, b)?,
            Term::LeftMerge(a, b) => self.left_steps(a, b)?,
            Term::Unless(a, b) => {
                let al = occurring_events(b);
                self.steps(a)?
                    .into_iter()
                    .map(|(fired, k)| {
                        let fired = fired
                            .into_iter()
                            .map(|f| {
                                if al.iter().any(|c| self.env.silenced_by(&f.label, c)) {
                                    Fired {
                                        label: TAU.into(),
                                        event: f.event,
                                    }
                                } else {
                                    f
                                }
                            })
                            .collect();
                        (fired, k.map(|a2| Term::unless(a2, (**b).clone())))
                    })
                    .collect()
            }
            Term::Conflict(a) => match super::theta_expand(a) {
                Some(e) => self.steps(&e)?,
                None => wrap(self.steps(a)?, Term::conflict),
            },
            Term::Encap(h, a) => {
                let kept = self
                    .steps(a)?
                    .into_iter()
                    .filter(|(fired, _)| fired.iter().all(|f| !h.contains(&f.label)))
                    .collect();
                wrap(kept, |a2| Term::Encap(h.clone(), Box::new(a2)))
            }
            Term::Abstract(i, a) => {
                let renamed = self
                    .steps(a)?
                    .into_iter()
                    .map(|(fired, k)| {
                        let fired = fired
                            .into_iter()
                            .map(|f| {
                                if i.contains(&f.label) {
                                    Fired {
                                        label: TAU.into(),
                                        event: f.event,
                                    }
                                } else {
                                    f
                                }
                            })
                            .collect();
                        (fired, k)
                    })
                    .collect();
                wrap(renamed, |a2| Term::Abstract(i.clone(), Box::new(a2)))
            }
            Term::Project(n, a) => self
                .steps(a)?
                .into_iter()
                .map(|(e, k)| {
                    let k = match k {
                        Some(a2) if *n > 1 => Some(Term::Project(n - 1, Box::new(a2))),
                        _ => None,
                    };
                    (e, k)
                })
                .collect(),
        })
    }

    /// Steps of a term that must resolve to a single outcome.
    fn resolved_steps(&self, t: &Term) -> Result<Vec<SymStep>> {
        let mut d = self.resolve(t)?;
        if d.len() != 1 {
            return Err(SemanticsError::Unresolved(print_term(t)));
        }
        let (_, r) = d.pop().expect("one outcome");
        self.steps(&r)
    }

    /// `x || y`: only simultaneous steps when no initial events race; under a
    /// race the left operand moves first and the rest runs as `x' <> y`.
    fn par_steps(&self, a: &Term, b: &Term) -> Result<Vec<SymStep>> {
        let sa = self.steps(a)?;
        let sb = self.steps(b)?;
        if sa.is_empty() || sb.is_empty() {
            return Ok(vec![]);
        }
        let racing = sa.iter().any(|(x, _)| {
            sb.iter().any(|(y, _)| {
                x.iter()
                    .any(|f| y.iter().any(|g| self.env.races(&f.event, &g.event)))
            })
        });
        if racing {
            return Ok(sa
                .into_iter()
                .map(|(e, k)| (e, Some(k.map_or_else(|| b.clone(), |k| Term::conc(k, b.clone())))))
                .collect());
        }
        let mut out = Vec::new();
        for (x, kx) in &sa {
            for (y, ky) in &sb {
                let mut fired = x.clone();
                fired.extend(y.iter().cloned());
                out.push((fired, join(kx.clone(), ky.clone())));
            }
        }
        Ok(out)
    }

    fn comm_steps(&self, a: &Term, b: &Term) -> Result<Vec<SymStep>> {
        let sa = self.steps(a)?;
        let sb = self.steps(b)?;
        let mut out = Vec::new();
        for (x, kx) in &sa {
            for (y, ky) in &sb {
                if let ([f], [g]) = (x.as_slice(), y.as_slice()) {
                    if let Some(c) = self.env.communication(&f.label, &g.label) {
                        out.push((vec![Fired::same(c)], join(kx.clone(), ky.clone())));
                    }
                }
            }
        }
        Ok(out)
    }

    fn left_steps(&self, a: &Term, b: &Term) -> Result<Vec<SymStep>> {
        Ok(self
            .steps(a)?
            .into_iter()
            .map(|(e, k)| {
                let next = match k {
                    None => b.clone(),
                    Some(a2) => Term::conc(a2, b.clone()),
                };
                (e, Some(next))
            })
            .collect())
    }
}
