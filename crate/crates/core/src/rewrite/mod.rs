//! Equational reasoning: normal forms, proofs by normalization, abstraction,
//! bounded unfolding of recursion and the probabilistic verification rules.
//!
//! Every closed term is evaluated bottom-up into a canonical basic term.
//! Distribution and expansion axioms are applied left to right; A1, A2,
//! PrAC1 and PrAC2 are realized by the canonical order of summands and of the
//! probabilistic spine.

mod nf;
mod normalize;
mod pvr;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::syntax::{check_guarded, substitute_unchecked, Env, Name, NameSet, RecSpec, SyntaxError, Term};

pub use nf::{Act, Nf, Summand};
pub use normalize::ProofStep;
pub use pvr::{apply_pvr, PvrEquation, PvrInstance, PvrLoop};

use normalize::Normalizer;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RewriteError {
    #[error("term has a free variable `{0}`")]
    Open(String),
    #[error("recursive constant `{0}` has no finite normal form; unfold it first")]
    Recursive(String),
    #[error("operator {op} is not part of the {system} signature")]
    Signature { op: &'static str, system: Signature },
    #[error("invalid PVR instance: {0}")]
    Pvr(String),
    #[error("unknown axiom system `{0}` (expected batc, aptc, batc-p or aptc-p)")]
    UnknownSystem(String),
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
}

pub type Result<T> = std::result::Result<T, RewriteError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Signature {
    Batc,
    Aptc,
    BatcP,
    AptcP,
}

impl Signature {
    pub fn name(self) -> &'static str {
        match self {
            Signature::Batc => "batc",
            Signature::Aptc => "aptc",
            Signature::BatcP => "batc-p",
            Signature::AptcP => "aptc-p",
        }
    }

    fn probabilistic(self) -> bool {
        matches!(self, Signature::BatcP | Signature::AptcP)
    }

    fn parallel(self) -> bool {
        matches!(self, Signature::Aptc | Signature::AptcP)
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Signature {
    type Err = RewriteError;

    fn from_str(s: &str) -> Result<Self> {
        [Signature::Batc, Signature::Aptc, Signature::BatcP, Signature::AptcP]
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| RewriteError::UnknownSystem(s.to_string()))
    }
}

/// An axiom system: the operator signature, and whether the closed-system
/// variants of the race axioms are used.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct System {
    pub signature: Signature,
    pub closed: bool,
}

impl Default for System {
    fn default() -> Self {
        Self {
            signature: Signature::AptcP,
            closed: false,
        }
    }
}

impl System {
    pub fn new(signature: Signature, closed: bool) -> Self {
        Self { signature, closed }
    }

    fn check(&self, t: &Term) -> Result<()> {
        let sig = self.signature;
        let op = match t {
            Term::Prob(..) if !sig.probabilistic() => Some("probabilistic choice"),
            Term::Par(..) if !sig.parallel() => Some("parallel composition"),
            Term::Comm(..) if !sig.parallel() => Some("communication merge"),
            Term::Conc(..) if !sig.parallel() => Some("concurrent merge"),
            Term::LeftMerge(..) if !sig.parallel() => Some("left merge"),
            Term::PairMerge(..) if !sig.parallel() => Some("pair merge"),
            Term::Conflict(..) if !sig.parallel() => Some("conflict elimination"),
            Term::Unless(..) if !sig.parallel() => Some("unless"),
            _ => None,
        };
        if let Some(op) = op {
            return Err(RewriteError::Signature { op, system: sig });
        }
        t.children().into_iter().try_for_each(|c| self.check(c))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Normalized {
    #[serde(skip)]
    pub term: Term,
    pub text: String,
    pub trace: Vec<ProofStep>,
}

/// The basic normal form of a closed term.
pub fn normalize(t: &Term, env: &Env, system: System) -> Result<Normalized> {
    let mut n = Normalizer::new(env, system);
    let term = n.run(t)?.to_term();
    Ok(Normalized {
        text: crate::syntax::print_term(&term),
        term,
        trace: n.trace,
    })
}

/// The normal form itself, for structural comparisons.
pub fn normal_form(t: &Term, env: &Env, system: System) -> Result<Nf> {
    Normalizer::new(env, system).run(t)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Proof {
    pub equal: bool,
    pub lhs: Normalized,
    pub rhs: Normalized,
}

/// Decides `t1 = t2` by comparing normal forms.
pub fn prove_equal(t1: &Term, t2: &Term, env: &Env, system: System) -> Result<Proof> {
    let (mut l, mut r) = (Normalizer::new(env, system), Normalizer::new(env, system));
    let (n1, n2) = (l.run(t1)?, r.run(t2)?);
    let pack = |n: &Nf, trace| {
        let term = n.to_term();
        Normalized {
            text: crate::syntax::print_term(&term),
            term,
            trace,
        }
    };
    Ok(Proof {
        equal: n1 == n2,
        lhs: pack(&n1, l.trace),
        rhs: pack(&n2, r.trace),
    })
}

/// Whether the initial steps of `x` and `y` race in every pair of their
/// probabilistic resolutions, and whether they race in some pair.
pub fn race_profile(x: &Term, y: &Term, env: &Env, system: System) -> Result<(bool, bool)> {
    let (nx, ny) = (normal_form(x, env, system)?, normal_form(y, env, system)?);
    let mut all = true;
    let mut any = false;
    for s in nx.sums() {
        for t in ny.sums() {
            let r = nf::races(env, s, t);
            all &= r;
            any |= r;
        }
    }
    Ok((all, any))
}

/// `tau_I(t)` in normal form with silent steps erased by T1.
pub fn tau_abstract(t: &Term, internal: &NameSet, env: &Env, system: System) -> Result<Term> {
    let hidden = Term::Abstract(internal.clone(), Box::new(t.clone()));
    let n = Normalizer::new(env, system).run(&hidden)?;
    Ok(abstracted(&n).to_term())
}

fn abstracted(n: &Nf) -> Nf {
    nf::drop_trailing_tau(&nf::anonymize(n))
}

/// Unfolds `var` of `spec` `depth` times; variables left over are replaced
/// by `diverge`.
pub fn unfold_recursion(spec: &Arc<RecSpec>, var: &str, depth: u32) -> Result<Term> {
    check_guarded(spec)?;
    if !spec.equations.contains_key(var) {
        return Err(SyntaxError::UnboundVariable(var.to_string()).into());
    }
    let mut level: BTreeMap<Name, Term> = spec.equations.keys().map(|k| (k.clone(), Term::Diverge)).collect();
    for _ in 0..depth {
        level = spec
            .equations
            .iter()
            .map(|(k, body)| (k.clone(), substitute_unchecked(body, &level)))
            .collect();
    }
    Ok(level.remove(var).expect("checked above"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::ratio;
    use crate::quantum::library;
    use crate::syntax::{parse_term, print_term, EventSpec};

    fn env() -> Env {
        let mut env = Env::classical(&["a", "b", "c", "x", "y", "z", "s", "r", "i"]);
        env.declare_comm("s", "r", "c").unwrap();
        for (n, g, q) in [("H", "H", "q1"), ("Z", "Z", "q1"), ("X", "X", "q2")] {
            env.declare(EventSpec::quantum(n, library::gate(g, &[q]).unwrap())).unwrap();
        }
        env
    }

    fn norm(s: &str) -> String {
        let env = env();
        normalize(&parse_term(s, &env).unwrap(), &env, System::default()).unwrap().text
    }

    fn same(l: &str, r: &str) -> bool {
        let env = env();
        let p = |s: &str| parse_term(s, &env).unwrap();
        prove_equal(&p(l), &p(r), &env, System::default()).unwrap().equal
    }

    #[test]
    fn basic_forms() {
        assert_eq!(norm("(a + b) . c"), norm("a . c + b . c"));
        assert_eq!(norm("a . c + b . c"), "a . c + b . c");
        assert_eq!(norm("x (+)[1/3] (y (+)[1/2] z)"), "x (+)[1/2] y (+)[2/3] z");
        assert_eq!(norm("proj[1](a . x)"), "a");
        assert_eq!(norm("delta | x"), "delta");
        assert_eq!(norm("(a . b) . c"), "a . (b . c)");
    }

    #[test]
    fn proofs() {
        let env = env();
        let p = |s: &str| parse_term(s, &env).unwrap();
        let proof = prove_equal(&p("a + a"), &p("a"), &env, System::default()).unwrap();
        assert!(proof.equal);
        assert!(proof.lhs.trace.iter().any(|s| s.rules.iter().any(|r| r == "AA3")));
        assert!(!same("a . (b + c)", "a . b + a . c"));
        assert!(same("enc{}(a . b + c)", "a . b + c"));
        assert!(same("a (+)[1/4] a", "a"));
        assert!(same("s | r", "c"));
        assert!(same("enc{s, r}(s <> r)", "c"));
    }

    #[test]
    fn races_serialize() {
        assert_eq!(norm("H || Z"), "H . Z");
        assert_eq!(norm("H <> Z"), "H . Z + Z . H");
        assert_eq!(norm("H || X"), "H || X");
        let env = env();
        let t = parse_term("H || Z", &env).unwrap();
        let open = normalize(&t, &env, System::default()).unwrap();
        assert!(open.trace[0].rules.iter().any(|r| r == "P11"));
        let closed = normalize(&t, &env, System::new(Signature::AptcP, true)).unwrap();
        assert!(closed.trace[0].rules.iter().any(|r| r == "CM11"));
    }

    #[test]
    fn signatures() {
        let env = env();
        let t = parse_term("a || b", &env).unwrap();
        let err = normalize(&t, &env, System::new(Signature::Batc, false)).unwrap_err();
        assert!(matches!(err, RewriteError::Signature { .. }));
        let t = parse_term("a (+)[1/2] b", &env).unwrap();
        assert!(normalize(&t, &env, System::new(Signature::Aptc, false)).is_err());
        assert!(normalize(&t, &env, System::new(Signature::BatcP, false)).is_ok());
        assert_eq!("aptc-p".parse::<Signature>().unwrap(), Signature::AptcP);
    }

    #[test]
    fn abstraction() {
        let env = env();
        let i = NameSet::from(["i".to_string()]);
        let t = |s: &str| tau_abstract(&parse_term(s, &env).unwrap(), &i, &env, System::default()).unwrap();
        assert_eq!(t("a"), Term::event("a"));
        assert_eq!(t("i"), Term::Tau);
        assert_eq!(t("b . tau"), Term::event("b"));
        assert_eq!(print_term(&t("a . i . b . i")), "a . (tau . b)");
    }

    #[test]
    fn unfolding() {
        let env = env();
        let spec = |s: &str| match parse_term(s, &env).unwrap() {
            Term::Rec(spec, _) => spec,
            _ => unreachable!(),
        };
        let s = spec("rec Y { Y = a . Y } in Y");
        assert_eq!(print_term(&unfold_recursion(&s, "Y", 2).unwrap()), "a . (a . diverge)");
        let s = spec("rec Y { Y = a . Y (+)[1/2] b } in Y");
        let expect = Term::prob(
            ratio(1, 2),
            Term::seq(
                Term::event("a"),
                Term::prob(ratio(1, 2), Term::seq(Term::event("a"), Term::Diverge), Term::event("b")),
            ),
            Term::event("b"),
        );
        assert_eq!(unfold_recursion(&s, "Y", 2).unwrap(), expect);
        let bad = Arc::new(RecSpec::new(BTreeMap::from([(
            "Y".to_string(),
            Term::alt(Term::Var("Y".into()), Term::event("a")),
        )])));
        assert!(matches!(unfold_recursion(&bad, "Y", 2), Err(RewriteError::Syntax(_))));
    }
}
