use serde::Serialize;

use super::nf::{self, Nf, Sum};
use super::{RewriteError, System};
use crate::semantics::theta_expand;
use crate::syntax::{occurring_events, print_term, Env, Term};

/// One rewriting step: a redex at `path` (child indices from the root)
/// replaced by its normal form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProofStep {
    pub rules: Vec<String>,
    pub path: Vec<usize>,
    pub before: String,
    pub after: String,
}

pub(crate) struct Normalizer<'a> {
    env: &'a Env,
    system: System,
    pub trace: Vec<ProofStep>,
    quiet: usize,
}

fn non_dirac(n: &Nf) -> bool {
    !n.is_dirac()
}

fn any_empty(n: &Nf) -> bool {
    n.sums().any(Sum::is_empty)
}

fn any_choice(n: &Nf) -> bool {
    n.sums().any(|s| s.len() > 1)
}

fn any_cont(n: &Nf) -> bool {
    n.sums().flat_map(|s| s.iter()).any(|m| m.cont.is_some())
}

fn any_single(n: &Nf) -> bool {
    n.sums().flat_map(|s| s.iter()).any(|m| m.cont.is_none())
}

impl<'a> Normalizer<'a> {
    pub fn new(env: &'a Env, system: System) -> Self {
        Self {
            env,
            system,
            trace: Vec::new(),
            quiet: 0,
        }
    }

    pub fn run(&mut self, t: &Term) -> Result<Nf, RewriteError> {
        self.system.check(t)?;
        self.nf(t, &mut Vec::new())
    }

    fn record(&mut self, rules: Vec<&str>, path: &[usize], before: Term, after: &Nf) {
        if self.quiet > 0 {
            return;
        }
        let (before, after) = (print_term(&before), print_term(&after.to_term()));
        if before != after {
            self.trace.push(ProofStep {
                rules: rules.into_iter().map(String::from).collect(),
                path: path.to_vec(),
                before,
                after,
            });
        }
    }

    fn child(&mut self, t: &Term, path: &mut Vec<usize>, i: usize) -> Result<Nf, RewriteError> {
        path.push(i);
        let r = self.nf(t, path);
        path.pop();
        r
    }

    fn pair(&mut self, a: &Term, b: &Term, path: &mut Vec<usize>) -> Result<(Nf, Nf), RewriteError> {
        Ok((self.child(a, path, 0)?, self.child(b, path, 1)?))
    }

    fn races(&self, x: &Nf, y: &Nf) -> bool {
        x.sums().any(|s| y.sums().any(|t| nf::races(self.env, s, t)))
    }

    fn nf(&mut self, t: &Term, path: &mut Vec<usize>) -> Result<Nf, RewriteError> {
        let env = self.env;
        Ok(match t {
            Term::Event(e) => nf::Nf::act(nf::Act::event(e)),
            Term::Tau => Nf::tau(),
            Term::Hidden(e) => Nf::act(nf::Act::hidden(e)),
            Term::Delta | Term::Diverge => Nf::delta(),
            Term::Var(x) => return Err(RewriteError::Open(x.clone())),
            Term::Rec(_, x) => return Err(RewriteError::Recursive(x.clone())),
            Term::Seq(a, b) => {
                let (x, y) = self.pair(a, b, path)?;
                let out = nf::seq(&x, &y);
                let mut rules = Vec::new();
                if non_dirac(&x) {
                    rules.push("PrAC4");
                }
                if any_empty(&x) {
                    rules.push("A7");
                }
                if any_choice(&x) {
                    rules.push("A4");
                }
                if any_cont(&x) {
                    rules.push("A5");
                }
                self.record(rules, path, Term::seq(x.to_term(), y.to_term()), &out);
                out
            }
            Term::Alt(a, b) => {
                let (x, y) = self.pair(a, b, path)?;
                let out = nf::alt(&x, &y);
                let mut rules = Vec::new();
                if non_dirac(&x) || non_dirac(&y) {
                    rules.push("PrAC5");
                }
                if any_empty(&x) || any_empty(&y) {
                    rules.push("A6");
                }
                let dup = x.sums().any(|s| y.sums().any(|u| s.intersection(u).next().is_some()));
                if dup {
                    rules.push("AA3");
                }
                rules.extend(["A1", "A2"]);
                self.record(rules, path, Term::alt(x.to_term(), y.to_term()), &out);
                out
            }
            Term::Prob(p, a, b) => {
                let (x, y) = self.pair(a, b, path)?;
                let out = nf::mix(p, &x, &y);
                let mut rules = Vec::new();
                if out.0.len() < x.0.len() + y.0.len() {
                    rules.push("PrAC3");
                }
                if non_dirac(&x) || non_dirac(&y) {
                    rules.push("PrAC2");
                }
                rules.push("PrAC1");
                self.record(rules, path, Term::prob(p.clone(), x.to_term(), y.to_term()), &out);
                out
            }
            Term::Par(a, b) => {
                let (x, y) = self.pair(a, b, path)?;
                let out = nf::par(env, &x, &y);
                let mut rules = self.dist_rules(&x, &y, "PrCM1", "PrCM2");
                if any_empty(&x) {
                    rules.push("CM4");
                }
                if any_empty(&y) {
                    rules.push("CM5");
                }
                if self.races(&x, &y) {
                    let (p11, p12) = if self.system.closed { ("CM11", "CM12") } else { ("P11", "P12") };
                    if any_single(&x) {
                        rules.push(p11);
                    }
                    if any_cont(&x) {
                        rules.push(p12);
                    }
                } else {
                    if any_choice(&x) {
                        rules.push("PrCM7");
                    }
                    if any_choice(&y) {
                        rules.push("PrCM8");
                    }
                    match (any_cont(&x), any_cont(&y)) {
                        (true, true) => rules.push("CM3"),
                        (true, false) => rules.push("CM2"),
                        (false, true) => rules.push("CM1"),
                        _ => {}
                    }
                }
                self.record(rules, path, Term::par(x.to_term(), y.to_term()), &out);
                out
            }
            Term::Comm(a, b) => {
                let (x, y) = self.pair(a, b, path)?;
                let out = nf::comm(env, &x, &y);
                let mut rules = self.dist_rules(&x, &y, "PrCM3", "PrCM4");
                if any_empty(&x) {
                    rules.push("CM9");
                }
                if any_empty(&y) {
                    rules.push("CM10");
                }
                if any_choice(&x) {
                    rules.push("PrCM5");
                }
                if any_choice(&y) {
                    rules.push("PrCM6");
                }
                match (any_cont(&x), any_cont(&y)) {
                    (true, true) => rules.push("CM8"),
                    (true, false) => rules.push("CM7"),
                    (false, true) => rules.push("CM6"),
                    _ => {}
                }
                rules.push("CF");
                self.record(rules, path, Term::comm(x.to_term(), y.to_term()), &out);
                out
            }
            Term::Conc(a, b) => {
                let (x, y) = self.pair(a, b, path)?;
                let out = nf::conc(env, &x, &y);
                let mut rules = vec!["PrMM1"];
                rules.extend(self.dist_rules(&x, &y, "PrMM2", "PrMM3"));
                rules.push("PrMM4");
                self.record(rules, path, Term::conc(x.to_term(), y.to_term()), &out);
                out
            }
            Term::PairMerge(k) => {
                let mut n = Vec::with_capacity(4);
                for (i, c) in k.iter().enumerate() {
                    n.push(self.child(c, path, i)?);
                }
                let out = nf::pair_merge(env, &n[0], &n[1], &n[2], &n[3]);
                let mut rules = self.dist_rules(&n[0], &n[2], "PrMM2", "PrMM3");
                rules.push("PrMM4");
                let redex = Term::pair_merge(n[0].to_term(), n[1].to_term(), n[2].to_term(), n[3].to_term());
                self.record(rules, path, redex, &out);
                out
            }
            Term::LeftMerge(a, b) => {
                let (x, y) = self.pair(a, b, path)?;
                let out = nf::left_merge(env, &x, &y);
                self.record(vec!["PrMM4"], path, Term::left_merge(x.to_term(), y.to_term()), &out);
                out
            }
            Term::Unless(a, b) => {
                let x = self.child(a, path, 0)?;
                self.child(b, path, 1)?;
                let out = nf::unless(env, &x, &occurring_events(b));
                let mut rules = Vec::new();
                if non_dirac(&x) {
                    rules.push("PrU");
                }
                if any_choice(&x) {
                    rules.push("U31");
                }
                if any_cont(&x) {
                    rules.push("U32");
                }
                if any_empty(&x) {
                    rules.push("U30");
                }
                rules.push(match &**b {
                    Term::Alt(..) => "U35",
                    Term::Seq(..) => "U36",
                    Term::Par(..) => "U37",
                    Term::Comm(..) => "U38",
                    Term::Prob(..) => "U39",
                    Term::Delta => "U29",
                    _ => "U26",
                });
                if self.env.priorities().next().is_some() {
                    rules.extend(["U27", "U28"]);
                }
                self.record(rules, path, Term::unless(x.to_term(), (**b).clone()), &out);
                out
            }
            Term::Encap(h, a) => {
                let x = self.child(a, path, 0)?;
                let out = nf::encap(&x, h);
                let mut rules = self.prefix_rules(&x, "PrD6", "D3", "D4");
                rules.extend(["D1", "D2"]);
                if x.sums().flat_map(|s| s.iter()).any(|m| m.step.len() > 1) {
                    rules.push("D5");
                }
                self.record(rules, path, Term::Encap(h.clone(), Box::new(x.to_term())), &out);
                out
            }
            Term::Abstract(i, a) => {
                let x = self.child(a, path, 0)?;
                let out = nf::hide(&x, i);
                let mut rules = self.prefix_rules(&x, "PrTI", "TI3", "TI4");
                rules.extend(["TI0", "TI1", "TI2"]);
                if x.sums().flat_map(|s| s.iter()).any(|m| m.step.len() > 1) {
                    rules.push("TI5");
                }
                self.record(rules, path, Term::Abstract(i.clone(), Box::new(x.to_term())), &out);
                out
            }
            Term::Project(n, a) => {
                let x = self.child(a, path, 0)?;
                let out = nf::project(&x, *n);
                let mut rules = self.prefix_rules(&x, "prPR", "PR4", if *n > 1 { "PR3" } else { "PR2" });
                rules.push("PR1");
                self.record(rules, path, Term::project(*n, x.to_term()), &out);
                out
            }
            Term::Conflict(a) => {
                self.quiet += 1;
                let out = self.conflict(a);
                self.quiet -= 1;
                let out = out?;
                let rule = match &**a {
                    Term::Event(_) | Term::Tau | Term::Hidden(_) => "CE19",
                    Term::Delta => "CE20",
                    Term::Alt(..) => "CE21",
                    Term::Seq(..) => "CE22",
                    Term::Par(..) => "CE23",
                    Term::Comm(..) => "CE24",
                    Term::Prob(..) => "PrCE25",
                    _ => "CE21",
                };
                self.record(vec![rule], path, t.clone(), &out);
                out
            }
        })
    }

    fn conflict(&mut self, a: &Term) -> Result<Nf, RewriteError> {
        let expanded = match theta_expand(a) {
            Some(e) => e,
            None => {
                let basic = self.nf(a, &mut Vec::new())?.to_term();
                theta_expand(&basic).expect("basic terms are covered by the conflict axioms")
            }
        };
        self.nf(&expanded, &mut Vec::new())
    }

    fn dist_rules(&self, x: &Nf, y: &Nf, left: &'static str, right: &'static str) -> Vec<&'static str> {
        let mut r = Vec::new();
        if non_dirac(x) {
            r.push(left);
        }
        if non_dirac(y) {
            r.push(right);
        }
        r
    }

    fn prefix_rules(&self, x: &Nf, prob: &'static str, sum: &'static str, seq: &'static str) -> Vec<&'static str> {
        let mut r = Vec::new();
        if non_dirac(x) {
            r.push(prob);
        }
        if any_choice(x) {
            r.push(sum);
        }
        if any_cont(x) {
            r.push(seq);
        }
        r
    }
}
