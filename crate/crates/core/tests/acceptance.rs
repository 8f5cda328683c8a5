mod common;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::process::ExitCode;
use std::time::Instant;

use common::{axiom_env, random_density, random_kraus, register3, rng, Gen, Rand};
use num_complex::Complex64;
use num_traits::{One, Zero};
use qtpa::equivalence::{self, Options, Relation};
use qtpa::prob::{ratio, Prob};
use qtpa::quantum::{library, max_norm_diff, Matrix, QuantumChannel, QuantumRegister, QuantumState};
use qtpa::rewrite::{self, apply_pvr, normal_form, race_profile, tau_abstract, PvrInstance, PvrLoop, Signature, System};
use qtpa::semantics::{build_lts, compress_silent, simulate, Limits, NodeKind, TransitionSystem};
use qtpa::session::Session;
use qtpa::syntax::{occurring_events, print_term, Env, EventSpec, NameSet, Term};
use rand::seq::SliceRandom;
use rand::Rng;

/// Tolerance on every state comparison.
const STATE_TOL: f64 = 1e-9;
/// Tolerance on trace, Hermiticity and channel identities.
const CHANNEL_TOL: f64 = 1e-9;
const INSTANCES: usize = 20;
const STATES: usize = 3;

type Outcome = Result<String, String>;

/// Axioms that admit counterexamples under every reading of the operators.
/// They are still instantiated and reported; criterion 1 then fails, and the
/// failure is not counted against the exit status.
const DOCUMENTED_UNSOUND: &[(&str, &str)] = &[(
    "U34",
    "(a | a) <| b = gamma(a, a) <| b while (a <| b) | (a <| b) = tau | tau = delta when a # b",
)];

type Criterion = (&'static str, fn() -> (Outcome, bool));

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("axiom soundness", axiom_soundness),
        ("completeness at desk scale", || (completeness(), false)),
        ("race-condition semantics", || (race_semantics(), false)),
        ("PVR arithmetic", || (pvr_arithmetic(), false)),
        ("probability conservation", || (conservation(), false)),
        ("quantum backend", || (quantum_backend(), false)),
        ("teleportation end to end", || (teleportation(), false)),
        ("equivalence sanity", || (equivalence_sanity(), false)),
    ];
    let mut passed = 0;
    let mut unexpected = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (outcome, documented) = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => {
                passed += 1;
                println!("criterion {} {name}: PASS ({detail}) [{secs:.1}s]", k + 1);
            }
            Err(detail) => {
                if !documented {
                    unexpected += 1;
                }
                let note = if documented { ", documented" } else { "" };
                println!("criterion {} {name}: FAIL ({detail}{note}) [{secs:.1}s]", k + 1);
            }
        }
    }
    println!(
        "{passed} of {} criteria passed, {unexpected} undocumented failures",
        criteria.len()
    );
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn opts() -> Options {
    Options {
        tol: STATE_TOL,
        ..Options::default()
    }
}

fn lts(env: &Env, t: &Term, st: &QuantumState) -> Result<TransitionSystem, String> {
    let limits = Limits {
        max_nodes: 200_000,
        ..Limits::default()
    };
    build_lts(env, t, st, limits).map_err(|e| format!("{}: {e}", print_term(t)))
}

fn check(rel: Relation, a: &TransitionSystem, b: &TransitionSystem) -> Result<bool, String> {
    equivalence::check(rel, a, b, &opts())
        .map(|r| r.related)
        .map_err(|e| e.to_string())
}

// ---------------------------------------------------------------- criterion 1

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Table {
    T2,
    T4,
    T5,
    T6,
    T9,
    T11,
}

impl Table {
    fn relations(self) -> &'static [Relation] {
        use Relation::*;
        match self {
            Table::T2 => &[Pomset, Step, Hp, Hhp],
            Table::T4 => &[Pomset, Step, Hp],
            _ => &[ProbPomset, ProbStep, ProbHp],
        }
    }

    fn gen(self) -> Gen {
        let ev = ["a", "U", "V"];
        match self {
            Table::T2 => Gen {
                delta: false,
                ..Gen::new(&ev, false, false)
            },
            Table::T4 => Gen::new(&ev, false, true),
            Table::T5 => Gen::new(&ev, true, false),
            _ => Gen::new(&ev, true, true),
        }
    }

    fn system(self) -> System {
        match self {
            Table::T2 => System::new(Signature::Batc, false),
            Table::T4 => System::new(Signature::Aptc, false),
            Table::T5 => System::new(Signature::BatcP, false),
            Table::T11 => System::new(Signature::AptcP, true),
            _ => System::default(),
        }
    }
}

struct Ctx<'a> {
    rng: Rand,
    env: &'a Env,
    gen: Gen,
}

impl Ctx<'_> {
    fn x(&mut self) -> Term {
        self.gen.term(&mut self.rng, 2)
    }

    /// A term without probabilistic choice, so that `x = x + x` holds.
    fn pf(&mut self) -> Term {
        let g = Gen {
            prob: false,
            ..self.gen.clone()
        };
        g.term(&mut self.rng, 2)
    }

    fn classical(&mut self) -> Term {
        let g = Gen {
            events: vec!["a".into()],
            ..self.gen.clone()
        };
        g.term(&mut self.rng, 2)
    }

    fn name(&mut self) -> String {
        self.gen.events.choose(&mut self.rng).unwrap().clone()
    }

    fn e(&mut self) -> Term {
        Term::event(&self.name())
    }

    /// Two events, with a bias towards the communicating pair `a | a`.
    fn pair(&mut self) -> (String, String) {
        if self.rng.gen_bool(0.5) {
            ("a".into(), "a".into())
        } else {
            (self.name(), self.name())
        }
    }

    fn quantum(&mut self) -> Term {
        Term::event(["U", "V"].choose(&mut self.rng).unwrap())
    }

    fn pi(&mut self) -> Prob {
        self.gen.prob(&mut self.rng)
    }

    fn set(&mut self) -> NameSet {
        self.gen
            .events
            .iter()
            .filter(|_| self.rng.gen_bool(0.5))
            .cloned()
            .collect()
    }

    fn profile(&self, x: &Term, y: &Term) -> (bool, bool) {
        race_profile(x, y, self.env, System::default()).unwrap_or((false, true))
    }

    /// No initial step of `x` races with an initial step of `y`.
    fn calm(&self, x: &Term, y: &Term) -> bool {
        !self.profile(x, y).1
    }

    /// Every resolution of `x` races with every resolution of `y`.
    fn clash(&self, x: &Term, y: &Term) -> bool {
        self.profile(x, y).0
    }

    /// No event written in `x` races with one written in `y`.
    fn apart(&self, x: &Term, y: &Term) -> bool {
        let (ex, ey) = (occurring_events(x), occurring_events(y));
        !ex.iter().any(|a| ey.iter().any(|b| self.env.races(a, b)))
    }

    fn search(&mut self, f: impl Fn(&mut Self) -> Option<(Term, Term)>) -> Option<(Term, Term)> {
        (0..400).find_map(|_| f(self))
    }
}

fn seq(a: Term, b: Term) -> Term {
    Term::seq(a, b)
}
fn alt(a: Term, b: Term) -> Term {
    Term::alt(a, b)
}
fn pr(p: Prob, a: Term, b: Term) -> Term {
    Term::prob(p, a, b)
}
fn par(a: Term, b: Term) -> Term {
    Term::par(a, b)
}
fn comm(a: Term, b: Term) -> Term {
    Term::comm(a, b)
}
fn conc(a: Term, b: Term) -> Term {
    Term::conc(a, b)
}
fn unl(a: Term, b: Term) -> Term {
    Term::unless(a, b)
}
fn theta(a: Term) -> Term {
    Term::conflict(a)
}
fn enc(h: &NameSet, a: Term) -> Term {
    Term::encap(h.iter().cloned(), a)
}
fn abs(i: &NameSet, a: Term) -> Term {
    Term::abstract_(i.iter().cloned(), a)
}
fn proj(n: u32, a: Term) -> Term {
    Term::project(n, a)
}

type Build = fn(&mut Ctx) -> Option<(Term, Term)>;

/// Checked on the transition systems, or by the rewriter alone.
#[derive(Clone, Copy, PartialEq)]
enum Via {
    Lts,
    Rewriter,
}

struct Axiom {
    name: &'static str,
    table: Table,
    via: Via,
    build: Build,
}

fn ax(name: &'static str, table: Table, build: Build) -> Axiom {
    Axiom {
        name,
        table,
        via: Via::Lts,
        build,
    }
}

fn axioms() -> Vec<Axiom> {
    use Table::*;
    let mut v = vec![
        ax("A1", T2, |c| {
            let (x, y) = (c.x(), c.x());
            Some((alt(x.clone(), y.clone()), alt(y, x)))
        }),
        ax("A2", T2, |c| {
            let (x, y, z) = (c.x(), c.x(), c.x());
            Some((alt(alt(x.clone(), y.clone()), z.clone()), alt(x, alt(y, z))))
        }),
        ax("A3", T2, |c| {
            let x = c.x();
            Some((alt(x.clone(), x.clone()), x))
        }),
        ax("A4", T2, |c| {
            let (x, y, z) = (c.x(), c.x(), c.x());
            Some((seq(alt(x.clone(), y.clone()), z.clone()), alt(seq(x, z.clone()), seq(y, z))))
        }),
        ax("A5", T2, |c| {
            let (x, y, z) = (c.x(), c.x(), c.x());
            Some((seq(seq(x.clone(), y.clone()), z.clone()), seq(x, seq(y, z))))
        }),
        ax("P11", T4, |c| {
            c.search(|c| {
                let (e, y) = (c.quantum(), c.x());
                c.clash(&e, &y).then(|| (par(e.clone(), y.clone()), seq(e, y)))
            })
        }),
        ax("P12", T4, |c| {
            c.search(|c| {
                let (e, x, y) = (c.quantum(), c.x(), c.x());
                c.clash(&e, &y)
                    .then(|| (par(seq(e.clone(), x.clone()), y.clone()), seq(e, conc(x, y))))
            })
        }),
        ax("A5", T5, |c| {
            let (x, y, z) = (c.x(), c.x(), c.x());
            Some((seq(seq(x.clone(), y.clone()), z.clone()), seq(x, seq(y, z))))
        }),
        ax("PrAC1", T5, |c| {
            let (x, y, p) = (c.x(), c.x(), c.pi());
            Some((pr(p.clone(), x.clone(), y.clone()), pr(Prob::one() - p, y, x)))
        }),
        ax("PrAC2", T5, |c| {
            let (x, y, z, p, r) = (c.x(), c.x(), c.x(), c.pi(), c.pi());
            let m = &p + &r - &p * &r;
            let lhs = pr(p.clone(), x.clone(), pr(r, y.clone(), z.clone()));
            Some((lhs, pr(m.clone(), pr(&p / &m, x, y), z)))
        }),
        ax("PrAC3", T5, |c| {
            let (x, p) = (c.x(), c.pi());
            Some((pr(p, x.clone(), x.clone()), x))
        }),
        ax("PrAC4", T5, |c| {
            let (x, y, z, p) = (c.x(), c.x(), c.x(), c.pi());
            let rhs = pr(p.clone(), seq(x.clone(), z.clone()), seq(y.clone(), z.clone()));
            Some((seq(pr(p, x, y), z), rhs))
        }),
        ax("A1", T5, |c| {
            let (x, y) = (c.x(), c.x());
            Some((alt(x.clone(), y.clone()), alt(y, x)))
        }),
        ax("A2", T5, |c| {
            let (x, y, z) = (c.x(), c.x(), c.x());
            Some((alt(alt(x.clone(), y.clone()), z.clone()), alt(x, alt(y, z))))
        }),
        ax("AA3", T5, |c| {
            let e = c.e();
            Some((alt(e.clone(), e.clone()), e))
        }),
        ax("A4", T5, |c| {
            let (x, y, z) = (c.x(), c.x(), c.x());
            Some((seq(alt(x.clone(), y.clone()), z.clone()), alt(seq(x, z.clone()), seq(y, z))))
        }),
        ax("PrAC5", T5, |c| {
            let (x, y, z, p) = (c.x(), c.x(), c.x(), c.pi());
            let rhs = pr(p.clone(), alt(x.clone(), z.clone()), alt(y.clone(), z.clone()));
            Some((alt(pr(p, x, y), z), rhs))
        }),
        ax("A6", T5, |c| {
            let x = c.x();
            Some((alt(x.clone(), Term::Delta), x))
        }),
        ax("A7", T5, |c| Some((seq(Term::Delta, c.x()), Term::Delta))),
        ax("PR1", T5, |c| {
            let (n, e) = (c.rng.gen_range(1..=3), c.e());
            Some((proj(n, e.clone()), e))
        }),
        ax("PR2", T5, |c| {
            let (e, x) = (c.e(), c.x());
            Some((proj(1, seq(e.clone(), x)), e))
        }),
        ax("PR3", T5, |c| {
            let (n, e, x) = (c.rng.gen_range(1..=3), c.e(), c.x());
            Some((proj(n + 1, seq(e.clone(), x.clone())), seq(e, proj(n, x))))
        }),
        ax("PR4", T5, |c| {
            let (n, x, y) = (c.rng.gen_range(1..=3), c.x(), c.x());
            Some((proj(n, alt(x.clone(), y.clone())), alt(proj(n, x), proj(n, y))))
        }),
        ax("prPR", T5, |c| {
            let (n, x, y, p) = (c.rng.gen_range(1..=3), c.x(), c.x(), c.pi());
            Some((proj(n, pr(p.clone(), x.clone(), y.clone())), pr(p, proj(n, x), proj(n, y))))
        }),
        ax("PrMM1", T6, |c| {
            let (x, y) = (c.x(), c.x());
            Some((conc(x.clone(), y.clone()), Term::pair_merge(x.clone(), x, y.clone(), y)))
        }),
        ax("PrMM2", T6, |c| {
            let (x, x2, z, y, w, p) = (c.x(), c.x(), c.x(), c.x(), c.x(), c.pi());
            let lhs = Term::pair_merge(pr(p.clone(), x.clone(), x2.clone()), z.clone(), y.clone(), w.clone());
            let rhs = pr(p, Term::pair_merge(x, z.clone(), y.clone(), w.clone()), Term::pair_merge(x2, z, y, w));
            Some((lhs, rhs))
        }),
        ax("PrMM3", T6, |c| {
            let (x, z, y, y2, w, p) = (c.x(), c.x(), c.x(), c.x(), c.x(), c.pi());
            let lhs = Term::pair_merge(x.clone(), z.clone(), pr(p.clone(), y.clone(), y2.clone()), w.clone());
            let rhs = pr(p, Term::pair_merge(x.clone(), z.clone(), y, w.clone()), Term::pair_merge(x, z, y2, w));
            Some((lhs, rhs))
        }),
        ax("PrMM4", T6, |c| {
            c.search(|c| {
                let (x, y, z, w) = (c.pf(), c.pf(), c.x(), c.x());
                c.calm(&x, &y).then(|| {
                    let rhs = alt(par(x.clone(), y.clone()), comm(x.clone(), y.clone()));
                    (Term::pair_merge(x, z, y, w), rhs)
                })
            })
        }),
        ax("CF", T6, |c| {
            let (a, b) = c.pair();
            let rhs = match c.env.communication(&a, &b) {
                Some(g) => Term::event(g),
                None => Term::Delta,
            };
            Some((comm(Term::event(&a), Term::event(&b)), rhs))
        }),
        ax("CM1", T6, |c| {
            c.search(|c| {
                let (a, b, y) = (c.name(), c.name(), c.x());
                let (a, b) = (Term::event(&a), Term::event(&b));
                c.calm(&a, &b)
                    .then(|| (par(a.clone(), seq(b.clone(), y.clone())), seq(par(a, b), y)))
            })
        }),
        ax("CM2", T6, |c| {
            c.search(|c| {
                let (a, b, x) = (c.e(), c.e(), c.x());
                c.calm(&a, &b)
                    .then(|| (par(seq(a.clone(), x.clone()), b.clone()), seq(par(a, b), x)))
            })
        }),
        ax("CM3", T6, |c| {
            c.search(|c| {
                let (a, b, x, y) = (c.e(), c.e(), c.x(), c.x());
                c.calm(&a, &b).then(|| {
                    let lhs = par(seq(a.clone(), x.clone()), seq(b.clone(), y.clone()));
                    (lhs, seq(par(a, b), conc(x, y)))
                })
            })
        }),
        ax("CM4", T6, |c| Some((par(Term::Delta, c.x()), Term::Delta))),
        ax("CM5", T6, |c| Some((par(c.x(), Term::Delta), Term::Delta))),
        ax("PrCM1", T6, |c| {
            let (x, y, z, p) = (c.x(), c.x(), c.x(), c.pi());
            let rhs = pr(p.clone(), par(x.clone(), z.clone()), par(y.clone(), z.clone()));
            Some((par(pr(p, x, y), z), rhs))
        }),
        ax("PrCM2", T6, |c| {
            let (x, y, z, p) = (c.x(), c.x(), c.x(), c.pi());
            let rhs = pr(p.clone(), par(x.clone(), y.clone()), par(x.clone(), z.clone()));
            Some((par(x, pr(p, y, z)), rhs))
        }),
        ax("CM6", T6, |c| {
            let ((a, b), x) = (c.pair(), c.x());
            let (a, b) = (Term::event(&a), Term::event(&b));
            Some((comm(a.clone(), seq(b.clone(), x.clone())), seq(comm(a, b), x)))
        }),
        ax("CM7", T6, |c| {
            let ((a, b), x) = (c.pair(), c.x());
            let (a, b) = (Term::event(&a), Term::event(&b));
            Some((comm(seq(a.clone(), x.clone()), b.clone()), seq(comm(a, b), x)))
        }),
        ax("CM8", T6, |c| {
            let ((a, b), x, y) = (c.pair(), c.x(), c.x());
            let (a, b) = (Term::event(&a), Term::event(&b));
            let lhs = comm(seq(a.clone(), x.clone()), seq(b.clone(), y.clone()));
            Some((lhs, seq(comm(a, b), conc(x, y))))
        }),
        ax("PrCM3", T6, |c| {
            let (x, y, z, p) = (c.x(), c.x(), c.x(), c.pi());
            let rhs = pr(p.clone(), comm(x.clone(), z.clone()), comm(y.clone(), z.clone()));
            Some((comm(pr(p, x, y), z), rhs))
        }),
        ax("PrCM4", T6, |c| {
            let (x, y, z, p) = (c.x(), c.x(), c.x(), c.pi());
            let rhs = pr(p.clone(), comm(x.clone(), y.clone()), comm(x.clone(), z.clone()));
            Some((comm(x, pr(p, y, z)), rhs))
        }),
        ax("CM9", T6, |c| Some((comm(Term::Delta, c.x()), Term::Delta))),
        ax("CM10", T6, |c| Some((comm(c.x(), Term::Delta), Term::Delta))),
        ax("CE19", T6, |c| {
            let e = c.e();
            Some((theta(e.clone()), e))
        }),
        ax("CE20", T6, |_| Some((theta(Term::Delta), Term::Delta))),
        ax("CE21", T6, |c| {
            let (x, y) = (c.x(), c.x());
            let rhs = alt(unl(theta(x.clone()), y.clone()), unl(theta(y.clone()), x.clone()));
            Some((theta(alt(x, y)), rhs))
        }),
        ax("CE22", T6, |c| {
            let (x, y) = (c.x(), c.x());
            Some((theta(seq(x.clone(), y.clone())), seq(theta(x), theta(y))))
        }),
        ax("CE23", T6, |c| {
            let (x, y) = (c.x(), c.x());
            let rhs = alt(
                par(unl(theta(x.clone()), y.clone()), y.clone()),
                par(unl(theta(y.clone()), x.clone()), x.clone()),
            );
            Some((theta(par(x, y)), rhs))
        }),
        ax("CE24", T6, |c| {
            let (x, y) = (c.x(), c.x());
            let rhs = alt(
                comm(unl(theta(x.clone()), y.clone()), y.clone()),
                comm(unl(theta(y.clone()), x.clone()), x.clone()),
            );
            Some((theta(comm(x, y)), rhs))
        }),
        ax("PrCE25", T6, |c| {
            let (x, y, p) = (c.x(), c.x(), c.pi());
            let rhs = alt(
                pr(p.clone(), unl(theta(x.clone()), y.clone()), y.clone()),
                pr(p.clone(), unl(theta(y.clone()), x.clone()), x.clone()),
            );
            Some((theta(pr(p, x, y)), rhs))
        }),
        ax("U26", T6, |c| {
            let (a, b) = if c.rng.gen_bool(0.5) { ("a", "U") } else { ("U", "a") };
            Some((unl(Term::event(a), Term::event(b)), Term::Hidden(a.into())))
        }),
        ax("U27", T6, |_| Some((unl(Term::event("a"), Term::event("V")), Term::event("a")))),
        ax("U28", T6, |_| Some((unl(Term::event("V"), Term::event("a")), Term::Hidden("V".into())))),
        ax("U29", T6, |c| {
            let e = c.e();
            Some((unl(e.clone(), Term::Delta), e))
        }),
        ax("U30", T6, |c| Some((unl(Term::Delta, c.e()), Term::Delta))),
        ax("U31", T6, |c| {
            let (x, y, z) = (c.x(), c.x(), c.x());
            Some((unl(alt(x.clone(), y.clone()), z.clone()), alt(unl(x, z.clone()), unl(y, z))))
        }),
        ax("U32", T6, |c| {
            let (x, y, z) = (c.x(), c.x(), c.x());
            Some((unl(seq(x.clone(), y.clone()), z.clone()), seq(unl(x, z.clone()), unl(y, z))))
        }),
        ax("U33", T6, |c| {
            let (x, y, z) = (c.x(), c.x(), c.x());
            Some((unl(par(x.clone(), y.clone()), z.clone()), par(unl(x, z.clone()), unl(y, z))))
        }),
        ax("U34", T6, |c| {
            let (x, y, z) = (c.x(), c.x(), c.x());
            Some((unl(comm(x.clone(), y.clone()), z.clone()), comm(unl(x, z.clone()), unl(y, z))))
        }),
        ax("U34 without silenced partners", T6, |c| {
            c.search(|c| {
                let (x, y, z) = (c.x(), c.x(), c.x());
                let zs = occurring_events(&z);
                let mut partners = occurring_events(&x);
                partners.extend(occurring_events(&y));
                let quiet = partners.iter().all(|e| !zs.iter().any(|b| c.env.silenced_by(e, b)));
                quiet.then(|| (unl(comm(x.clone(), y.clone()), z.clone()), comm(unl(x, z.clone()), unl(y, z))))
            })
        }),
        ax("U35", T6, |c| {
            let (x, y, z) = (c.x(), c.x(), c.x());
            Some((unl(x.clone(), alt(y.clone(), z.clone())), unl(unl(x, y), z)))
        }),
        ax("U36", T6, |c| {
            let (x, y, z) = (c.x(), c.x(), c.x());
            Some((unl(x.clone(), seq(y.clone(), z.clone())), unl(unl(x, y), z)))
        }),
        ax("U37", T6, |c| {
            let (x, y, z) = (c.x(), c.x(), c.x());
            Some((unl(x.clone(), par(y.clone(), z.clone())), unl(unl(x, y), z)))
        }),
        ax("U38", T6, |c| {
            let (x, y, z) = (c.x(), c.x(), c.x());
            Some((unl(x.clone(), comm(y.clone(), z.clone())), unl(unl(x, y), z)))
        }),
        ax("U39", T6, |c| {
            let (x, y, z, p) = (c.x(), c.x(), c.x(), c.pi());
            Some((unl(x.clone(), pr(p, y.clone(), z.clone())), unl(unl(x, y), z)))
        }),
        ax("D1", T6, |c| {
            c.search(|c| {
                let (h, a) = (c.set(), c.name());
                (!h.contains(&a)).then(|| (enc(&h, Term::event(&a)), Term::event(&a)))
            })
        }),
        ax("D2", T6, |c| {
            c.search(|c| {
                let (h, a) = (c.set(), c.name());
                h.contains(&a).then(|| (enc(&h, Term::event(&a)), Term::Delta))
            })
        }),
        ax("D3", T6, |c| {
            let (h, x, y) = (c.set(), c.x(), c.x());
            Some((enc(&h, alt(x.clone(), y.clone())), alt(enc(&h, x), enc(&h, y))))
        }),
        ax("D4", T6, |c| {
            let (h, x, y) = (c.set(), c.x(), c.x());
            Some((enc(&h, seq(x.clone(), y.clone())), seq(enc(&h, x), enc(&h, y))))
        }),
        ax("D5", T6, |c| {
            let (h, x) = (c.set(), c.x());
            let y = c.classical();
            let (x, y) = if c.rng.gen_bool(0.5) { (x, y) } else { (y, x) };
            debug_assert!(c.apart(&x, &y));
            Some((enc(&h, par(x.clone(), y.clone())), par(enc(&h, x), enc(&h, y))))
        }),
        ax("PrD6", T6, |c| {
            let (h, x, y, p) = (c.set(), c.x(), c.x(), c.pi());
            Some((enc(&h, pr(p.clone(), x.clone(), y.clone())), pr(p, enc(&h, x), enc(&h, y))))
        }),
        ax("PrCM5", T6, |c| {
            let (x, y, z) = (c.x(), c.x(), c.pf());
            Some((comm(alt(x.clone(), y.clone()), z.clone()), alt(comm(x, z.clone()), comm(y, z))))
        }),
        ax("PrCM6", T6, |c| {
            let (x, y, z) = (c.x(), c.x(), c.pf());
            Some((comm(z.clone(), alt(x.clone(), y.clone())), alt(comm(z.clone(), x), comm(z, y))))
        }),
        ax("PrCM7", T6, |c| {
            c.search(|c| {
                let (x, y, z) = (c.x(), c.x(), c.pf());
                let s = alt(x.clone(), y.clone());
                c.calm(&s, &z)
                    .then(|| (par(s, z.clone()), alt(par(x, z.clone()), par(y, z))))
            })
        }),
        ax("PrCM8", T6, |c| {
            c.search(|c| {
                let (x, y, z) = (c.x(), c.x(), c.pf());
                let s = alt(x.clone(), y.clone());
                c.calm(&z, &s)
                    .then(|| (par(z.clone(), s), alt(par(z.clone(), x), par(z, y))))
            })
        }),
        ax("TI0", T9, |c| Some((abs(&c.set(), Term::Tau), Term::Tau))),
        ax("TI1", T9, |c| {
            c.search(|c| {
                let (i, a) = (c.set(), c.name());
                (!i.contains(&a)).then(|| (abs(&i, Term::event(&a)), Term::event(&a)))
            })
        }),
        ax("TI2", T9, |c| {
            c.search(|c| {
                let (i, a) = (c.set(), c.name());
                i.contains(&a).then(|| (abs(&i, Term::event(&a)), Term::Hidden(a.clone())))
            })
        }),
        ax("TI4", T9, |c| {
            let (i, x, y) = (c.set(), c.x(), c.x());
            Some((abs(&i, seq(x.clone(), y.clone())), seq(abs(&i, x), abs(&i, y))))
        }),
        ax("TI5", T9, |c| {
            let (i, x, y) = (c.set(), c.x(), c.x());
            Some((abs(&i, par(x.clone(), y.clone())), par(abs(&i, x), abs(&i, y))))
        }),
        ax("PrTI", T9, |c| {
            let (i, x, y, p) = (c.set(), c.x(), c.x(), c.pi());
            Some((abs(&i, pr(p.clone(), x.clone(), y.clone())), pr(p, abs(&i, x), abs(&i, y))))
        }),
        ax("CM11", T11, |c| {
            c.search(|c| {
                let (e, y) = (c.quantum(), c.pf());
                c.clash(&e, &y).then(|| (par(e.clone(), y.clone()), seq(e, y)))
            })
        }),
        ax("CM12", T11, |c| {
            c.search(|c| {
                let (e, x, y) = (c.quantum(), c.x(), c.pf());
                c.clash(&e, &y)
                    .then(|| (par(seq(e.clone(), x.clone()), y.clone()), seq(e, conc(x, y))))
            })
        }),
    ];
    v.push(Axiom {
        name: "T1",
        table: T9,
        via: Via::Rewriter,
        build: |c| {
            let x = c.x();
            Some((seq(x.clone(), Term::Tau), x))
        },
    });
    v
}

fn axiom_soundness() -> (Outcome, bool) {
    let mut r = rng(1);
    let env = axiom_env(&mut r);
    let reg = register3();
    let states: Vec<QuantumState> = (0..STATES).map(|_| common::random_state(&mut r, &reg)).collect();
    let mut failures = Vec::new();
    let mut undocumented = false;
    let mut checks = 0usize;
    let list = axioms();
    for (k, axiom) in list.iter().enumerate() {
        let mut c = Ctx {
            rng: rng(100 + k as u64),
            env: &env,
            gen: axiom.table.gen(),
        };
        let system = axiom.table.system();
        let mut bad = None;
        for _ in 0..INSTANCES {
            let Some((lhs, rhs)) = (axiom.build)(&mut c) else {
                bad = Some("no instance satisfies the side condition".to_string());
                break;
            };
            let verdict = match axiom.via {
                Via::Rewriter => {
                    checks += 1;
                    let none = NameSet::new();
                    match (
                        tau_abstract(&lhs, &none, &env, system),
                        tau_abstract(&rhs, &none, &env, system),
                    ) {
                        (Ok(a), Ok(b)) if a == b => Ok(()),
                        (Ok(a), Ok(b)) => Err(format!("{} vs {}", print_term(&a), print_term(&b))),
                        (a, b) => Err(format!("{:?} {:?}", a.err(), b.err())),
                    }
                }
                Via::Lts => sound_on(axiom.table.relations(), &env, &lhs, &rhs, &states, &mut checks),
            };
            if let Err(why) = verdict {
                bad = Some(format!("{} = {}: {why}", print_term(&lhs), print_term(&rhs)));
                break;
            }
        }
        let known = DOCUMENTED_UNSOUND.iter().find(|(n, _)| *n == axiom.name);
        match (bad, known) {
            (Some(why), Some((_, reason))) => {
                println!("  axiom {} ({:?}) fails as documented: {why}", axiom.name, axiom.table);
                println!("    {reason}");
                failures.push(axiom.name);
            }
            (Some(why), None) => {
                println!("  axiom {} ({:?}) fails: {why}", axiom.name, axiom.table);
                failures.push(axiom.name);
                undocumented = true;
            }
            (None, Some(_)) => println!("  axiom {} ({:?}): no counterexample among the instances", axiom.name, axiom.table),
            (None, None) => {}
        }
    }
    let summary = format!(
        "{} axioms, {} instances each, {} states, {checks} relation checks",
        list.len(),
        INSTANCES,
        STATES
    );
    let outcome = if failures.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{summary}; unsound instances for {}", failures.join(", ")))
    };
    (outcome, !undocumented)
}

fn sound_on(
    rels: &[Relation],
    env: &Env,
    lhs: &Term,
    rhs: &Term,
    states: &[QuantumState],
    checks: &mut usize,
) -> Result<(), String> {
    for st in states {
        let (a, b) = (lts(env, lhs, st)?, lts(env, rhs, st)?);
        for &rel in rels {
            *checks += 1;
            if !check(rel, &a, &b)? {
                return Err(format!("not related under {rel}"));
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------- criterion 2

type Op = Box<dyn Fn(Term, Term) -> Term>;

fn enumerate(atoms: &[Term], ops: &[Op], depth: usize) -> Vec<Term> {
    let mut level = atoms.to_vec();
    for _ in 0..depth {
        let mut next = atoms.to_vec();
        for op in ops {
            for x in &level {
                for y in &level {
                    next.push(op(x.clone(), y.clone()));
                }
            }
        }
        level = next;
    }
    level
}

/// Canonical names of bisimulation classes of finite acyclic systems: two
/// nodes get the same id iff their unfolded behaviour is identical up to
/// merging of equal branches.
#[derive(Default)]
struct Canon {
    ids: HashMap<String, usize>,
}

impl Canon {
    fn key(&mut self, ts: &TransitionSystem) -> usize {
        let mut memo = HashMap::new();
        self.node(ts, ts.initial, &mut memo)
    }

    fn node(&mut self, ts: &TransitionSystem, n: usize, memo: &mut HashMap<usize, usize>) -> usize {
        if let Some(&id) = memo.get(&n) {
            return id;
        }
        let text = match ts.nodes[n].kind {
            NodeKind::Done => "done".to_string(),
            NodeKind::Action => {
                let mut out = BTreeSet::new();
                for e in ts.action_out(n) {
                    let to = self.node(ts, e.to, memo);
                    out.insert(format!("{}>{to}", e.label));
                }
                format!("act[{}]", out.into_iter().collect::<Vec<_>>().join(" "))
            }
            NodeKind::Prob => {
                let mut out: BTreeMap<usize, Prob> = BTreeMap::new();
                for e in ts.prob_out(n) {
                    let to = self.node(ts, e.to, memo);
                    *out.entry(to).or_insert_with(Prob::zero) += &e.weight;
                }
                if out.len() == 1 {
                    let id = *out.keys().next().unwrap();
                    memo.insert(n, id);
                    return id;
                }
                let parts: Vec<String> = out.iter().map(|(k, w)| format!("{k}@{w}")).collect();
                format!("prob[{}]", parts.join(" "))
            }
        };
        let fresh = self.ids.len();
        let id = *self.ids.entry(text).or_insert(fresh);
        memo.insert(n, id);
        id
    }
}

struct Classes {
    terms: usize,
    classes: usize,
    checker_calls: usize,
}

fn classify(env: &Env, terms: &[Term], system: System, rel: Relation, seed: u64) -> Result<Classes, String> {
    let st = QuantumState::zero(QuantumRegister::trivial());
    let mut canon = Canon::default();
    let mut by_nf: HashMap<String, (usize, usize)> = HashMap::new();
    let mut by_key: HashMap<usize, String> = HashMap::new();
    let mut reps: Vec<usize> = Vec::new();
    let mut systems = Vec::with_capacity(terms.len());
    let mut calls = 0;
    for (i, t) in terms.iter().enumerate() {
        let nf = normal_form(t, env, system).map_err(|e| e.to_string())?;
        let text = print_term(&nf.to_term());
        let ts = lts(env, t, &st)?;
        let key = canon.key(&ts);
        systems.push(ts);
        if let Some(other) = by_key.get(&key) {
            if *other != text {
                return Err(format!(
                    "{} is bisimilar to a term with normal form {other} but normalizes to {text}",
                    print_term(t)
                ));
            }
        }
        by_key.insert(key, text.clone());
        match by_nf.get(&text) {
            Some(&(rep, rep_key)) => {
                if rep_key != key {
                    return Err(format!("{} and {} share a normal form but differ", print_term(t), print_term(&terms[rep])));
                }
                calls += 1;
                if !check(rel, &systems[rep], &systems[i])? {
                    return Err(format!("checker separates {} and {}", print_term(t), print_term(&terms[rep])));
                }
            }
            None => {
                by_nf.insert(text, (i, key));
                reps.push(i);
            }
        }
    }
    // Distinct classes, paired with their neighbours in normal-form order and
    // with random partners.
    reps.sort_by_key(|&i| print_term(&normal_form(&terms[i], env, system).unwrap().to_term()));
    let mut r = rng(seed);
    let mut pairs: Vec<(usize, usize)> = reps.windows(2).map(|w| (w[0], w[1])).collect();
    for _ in 0..reps.len().min(5000) {
        let (a, b) = (*reps.choose(&mut r).unwrap(), *reps.choose(&mut r).unwrap());
        if a != b {
            pairs.push((a, b));
        }
    }
    for (a, b) in pairs {
        calls += 1;
        if check(rel, &systems[a], &systems[b])? {
            return Err(format!("checker relates {} and {}", print_term(&terms[a]), print_term(&terms[b])));
        }
    }
    Ok(Classes {
        terms: terms.len(),
        classes: reps.len(),
        checker_calls: calls,
    })
}

fn completeness() -> Outcome {
    let env = Env::classical(&["a", "b"]);
    let atoms = [Term::event("a"), Term::event("b")];
    let ops: Vec<Op> = vec![Box::new(Term::seq), Box::new(Term::alt)];
    let batc = enumerate(&atoms, &ops, 3);
    let c1 = classify(&env, &batc, System::new(Signature::Batc, false), Relation::Step, 2)?;
    let mut ops: Vec<Op> = vec![Box::new(Term::seq), Box::new(Term::alt)];
    for p in [ratio(1, 3), ratio(1, 2)] {
        ops.push(Box::new(move |x, y| Term::prob(p.clone(), x, y)));
    }
    let batcp = enumerate(&atoms, &ops, 2);
    let c2 = classify(&env, &batcp, System::new(Signature::BatcP, false), Relation::ProbStep, 3)?;
    Ok(format!(
        "batc: {} terms in {} classes, batc-p: {} terms in {} classes, {} checker calls, 0 mismatches",
        c1.terms,
        c1.classes,
        c2.terms,
        c2.classes,
        c1.checker_calls + c2.checker_calls
    ))
}

// ---------------------------------------------------------------- criterion 3

fn race_env() -> Env {
    let mut env = Env::classical(&["a"]);
    for (n, g, q) in [("H", "H", "q1"), ("Z", "Z", "q1"), ("X", "X", "q2")] {
        env.declare(EventSpec::quantum(n, library::gate(g, &[q]).unwrap())).unwrap();
    }
    env
}

fn apply_named(env: &Env, st: &QuantumState, names: &[&str]) -> QuantumState {
    names.iter().fold(st.clone(), |s, n| match env.channel(n) {
        Some(ch) => s.apply_channel(ch).unwrap(),
        None => s,
    })
}

/// Step sequences of maximal runs, with the final state of each.
fn runs(ts: &TransitionSystem) -> Vec<(Vec<String>, QuantumState)> {
    let mut out = Vec::new();
    let mut stack = vec![(ts.initial, Vec::new())];
    while let Some((n, path)) = stack.pop() {
        let edges: Vec<_> = ts.action_out(n).collect();
        if edges.is_empty() {
            out.push((path, ts.nodes[n].state.clone()));
            continue;
        }
        for e in edges {
            let mut p = path.clone();
            p.push(e.label.to_string());
            stack.push((e.to, p));
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

fn race_semantics() -> Outcome {
    let env = race_env();
    let names = ["H", "Z", "X", "a"];
    let reg = QuantumRegister::qubits(&["q1", "q2"]).unwrap();
    let mut r = rng(3);
    let st = common::random_state(&mut r, &reg);
    let mut pairs = 0;
    for (i, e1) in names.iter().enumerate() {
        for e2 in &names[i..] {
            pairs += 1;
            let (t1, t2) = (Term::event(e1), Term::event(e2));
            let races = env.races(e1, e2);
            let both = format!("{{{}}}", [*e1, *e2].iter().copied().collect::<BTreeSet<_>>().into_iter().collect::<Vec<_>>().join(","));
            let both = if e1 == e2 { format!("{{{e1},{e2}}}") } else { both };
            let ts = lts(&env, &par(t1.clone(), t2.clone()), &st)?;
            let simultaneous = ts.action_out(ts.initial).any(|e| e.label.len() == 2);
            if simultaneous == races {
                return Err(format!("{e1} || {e2}: simultaneous step {simultaneous}, race {races}"));
            }
            let merged = runs(&lts(&env, &conc(t1, t2), &st)?);
            if races {
                let want: BTreeSet<Vec<String>> = [
                    vec![format!("{{{e1}}}"), format!("{{{e2}}}")],
                    vec![format!("{{{e2}}}"), format!("{{{e1}}}")],
                ]
                .into();
                let got: BTreeSet<Vec<String>> = merged.iter().map(|r| r.0.clone()).collect();
                if got != want {
                    return Err(format!("{e1} <> {e2} runs {got:?}"));
                }
                for (path, fin) in &merged {
                    let order: Vec<&str> = path.iter().map(|s| s.trim_matches(|c| c == '{' || c == '}')).collect();
                    let expect = apply_named(&env, &st, &order);
                    if !fin.state_equal(&expect, STATE_TOL).unwrap() {
                        return Err(format!("{e1} <> {e2}: wrong state after {path:?}"));
                    }
                }
            } else {
                let (path, fin) = &runs(&ts)[0];
                if path != &vec![both.clone()] || runs(&ts).len() != 1 {
                    return Err(format!("{e1} || {e2} runs {:?}", runs(&ts)));
                }
                if !fin.state_equal(&apply_named(&env, &st, &[e1, e2]), STATE_TOL).unwrap() {
                    return Err(format!("{e1} || {e2}: wrong final state"));
                }
            }
        }
    }
    Ok(format!("{pairs} pairs"))
}

// ---------------------------------------------------------------- criterion 4

fn pvr_arithmetic() -> Outcome {
    let mut r = rng(4);
    let mut count = 0;
    for n in 1..=5usize {
        for _ in 0..100 {
            let pis: Vec<Prob> = (0..n)
                .map(|_| {
                    let d = r.gen_range(2..=12i64);
                    ratio(r.gen_range(1..d), d)
                })
                .collect();
            let inst = PvrInstance {
                internal: NameSet::from(["i".to_string()]),
                loops: pis
                    .iter()
                    .enumerate()
                    .map(|(k, p)| PvrLoop {
                        labels: vec!["i".into()],
                        pi: p.clone(),
                        exit: Term::event(&format!("y{k}")),
                    })
                    .collect(),
            };
            let eq = apply_pvr(&inst).map_err(|e| e.to_string())?;
            let all: Prob = pis.iter().product();
            let denom = Prob::one() - &all;
            let mut prefix = Prob::one();
            for (j, p) in pis.iter().enumerate() {
                let want = &prefix * (Prob::one() - p) / &denom;
                if eq.alphas[j] != want {
                    return Err(format!("pi {pis:?}: alpha_{} = {} but closed form gives {want}", j + 1, eq.alphas[j]));
                }
                prefix *= p;
            }
            let total: Prob = eq.alphas.iter().sum();
            if !total.is_one() {
                return Err(format!("pi {pis:?}: alphas sum to {total}"));
            }
            count += 1;
        }
    }
    Ok(format!("{count} instances, exact"))
}

// ---------------------------------------------------------------- criterion 5

fn prob_nodes_exact(ts: &TransitionSystem) -> Result<usize, String> {
    let mut n = 0;
    for (i, node) in ts.nodes.iter().enumerate() {
        if node.kind != NodeKind::Prob || !node.complete {
            continue;
        }
        let total: Prob = ts.prob_out(i).map(|e| e.weight.clone()).sum();
        if !total.is_one() {
            return Err(format!("node {i} weights sum to {total}"));
        }
        n += 1;
    }
    Ok(n)
}

fn conservation() -> Outcome {
    let mut r = rng(5);
    let env = axiom_env(&mut r);
    let reg = register3();
    let g = Gen::new(&["a", "U", "V"], true, true);
    let mut nodes = 0;
    let mut runs = 0;
    for _ in 0..300 {
        let t = g.term(&mut r, 3);
        let st = common::random_state(&mut r, &reg);
        let ts = lts(&env, &t, &st)?;
        nodes += prob_nodes_exact(&ts)?;
        let sim = simulate(&ts, 64);
        if !sim.residual.is_zero() || !sim.total().is_one() {
            return Err(format!("{}: leaves sum to {}", print_term(&t), sim.total()));
        }
        runs += 1;
    }
    // A cyclic system from a fair loop.
    let inst = PvrInstance {
        internal: NameSet::from(["a".to_string()]),
        loops: vec![
            PvrLoop {
                labels: vec!["a".into()],
                pi: ratio(1, 3),
                exit: Term::event("U"),
            },
            PvrLoop {
                labels: vec!["a".into()],
                pi: ratio(3, 4),
                exit: Term::event("V"),
            },
        ],
    };
    let rec = Term::Rec(inst.spec(), PvrInstance::var(0));
    nodes += prob_nodes_exact(&lts(&env, &rec, &QuantumState::zero(reg.clone()))?)?;
    let session = teleport_session()?;
    let t = session.term("T").map_err(|e| e.to_string())?;
    for st in teleport_inputs(&mut r)? {
        let ts = lts(&session.env, &t, &st)?;
        nodes += prob_nodes_exact(&ts)?;
        let sim = simulate(&ts, 64);
        let leaves: Prob = sim.leaves.iter().map(|l| l.weight.clone()).sum();
        if !sim.residual.is_zero() || !leaves.is_one() {
            return Err(format!("teleportation leaves sum to {leaves}"));
        }
        runs += 1;
    }
    Ok(format!("{nodes} probabilistic nodes, {runs} simulations"))
}

// ---------------------------------------------------------------- criterion 6

fn embed(k: &Matrix, left: usize, right: usize) -> Matrix {
    let il = Matrix::identity(left, left);
    let ir = Matrix::identity(right, right);
    il.kronecker(k).kronecker(&ir)
}

fn kraus_sum(ks: &[Matrix], rho: &Matrix) -> Matrix {
    ks.iter().fold(Matrix::zeros(rho.nrows(), rho.ncols()), |acc, k| acc + k * rho * k.adjoint())
}

fn quantum_backend() -> Outcome {
    let mut r = rng(6);
    let reg = register3();
    let names = ["q1", "q2", "q3"];
    let mut worst: f64 = 0.0;
    for n in 0..500 {
        let size = r.gen_range(1..=3);
        let mut fp: Vec<&str> = names.to_vec();
        fp.shuffle(&mut r);
        fp.truncate(size);
        let count = r.gen_range(1..=4);
        let dim = 1 << size;
        let ks = random_kraus(&mut r, dim, count);
        let ch = QuantumChannel::new(fp.iter().map(|s| s.to_string()).collect(), ks.clone()).map_err(|e| e.to_string())?;
        let st = common::random_state(&mut r, &reg);
        let out = st.apply_channel(&ch).map_err(|e| e.to_string())?;
        let m = out.matrix();
        let tr_dev = (m.trace() - Complex64::new(1.0, 0.0)).norm();
        let herm_dev = max_norm_diff(m, &m.adjoint());
        worst = worst.max(tr_dev).max(herm_dev);
        if tr_dev > CHANNEL_TOL || herm_dev > CHANNEL_TOL || out.min_eigenvalue() < -CHANNEL_TOL {
            return Err(format!("channel {n} on {fp:?}: trace dev {tr_dev:.2e}, hermiticity dev {herm_dev:.2e}"));
        }
        // Contiguous footprints in register order against an explicit embedding.
        let pos: Vec<usize> = fp.iter().map(|q| reg.position(q).unwrap()).collect();
        if pos.windows(2).all(|w| w[1] == w[0] + 1) {
            let left = 1 << pos[0];
            let right = 8 / (left * dim);
            let full: Vec<Matrix> = ks.iter().map(|k| embed(k, left, right)).collect();
            let d = max_norm_diff(&kraus_sum(&full, st.matrix()), m);
            if d > CHANNEL_TOL {
                return Err(format!("channel {n} on {fp:?} differs from its embedding by {d:.2e}"));
            }
        }
        // Disjoint footprints commute.
        let rest: Vec<&str> = names.iter().copied().filter(|q| !fp.contains(q)).collect();
        if !rest.is_empty() {
            let u = QuantumChannel::new(
                rest.iter().map(|s| s.to_string()).collect(),
                random_kraus(&mut r, 1 << rest.len(), 2),
            )
            .map_err(|e| e.to_string())?;
            let ab = st.apply_channel(&ch).and_then(|s| s.apply_channel(&u)).unwrap();
            let ba = st.apply_channel(&u).and_then(|s| s.apply_channel(&ch)).unwrap();
            let d = max_norm_diff(ab.matrix(), ba.matrix());
            if d > CHANNEL_TOL {
                return Err(format!("channels on {fp:?} and {rest:?} do not commute ({d:.2e})"));
            }
            // The untouched variables keep their reduced state.
            let before = st.restrict_public(&rest).unwrap();
            let after = out.restrict_public(&rest).unwrap();
            let d = max_norm_diff(before.matrix(), after.matrix());
            if d > CHANNEL_TOL {
                return Err(format!("channel on {fp:?} changed {rest:?} by {d:.2e}"));
            }
        }
    }
    // Partial trace against index arithmetic and product states.
    for _ in 0..100 {
        let st = common::random_state(&mut r, &reg);
        let rho = st.matrix();
        let mut first = Matrix::zeros(2, 2);
        let mut last = Matrix::zeros(2, 2);
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..4 {
                    first[(i, j)] += rho[(i * 4 + k, j * 4 + k)];
                    last[(i, j)] += rho[(k * 2 + i, k * 2 + j)];
                }
            }
        }
        let d1 = max_norm_diff(st.restrict_public(&["q1"]).unwrap().matrix(), &first);
        let d3 = max_norm_diff(st.restrict_public(&["q3"]).unwrap().matrix(), &last);
        let (a, b) = (random_density(&mut r, 2), random_density(&mut r, 4));
        let sa = QuantumState::from_density(QuantumRegister::qubits(&["q1"]).unwrap(), a.clone()).unwrap();
        let sb = QuantumState::from_density(QuantumRegister::qubits(&["q2", "q3"]).unwrap(), b.clone()).unwrap();
        let prod = sa.tensor(&sb).unwrap();
        let da = max_norm_diff(prod.restrict_public(&["q1"]).unwrap().matrix(), &a);
        let db = max_norm_diff(prod.restrict_public(&["q2", "q3"]).unwrap().matrix(), &b);
        let d = d1.max(d3).max(da).max(db);
        worst = worst.max(d);
        if d > CHANNEL_TOL {
            return Err(format!("partial trace deviates by {d:.2e}"));
        }
    }
    Ok(format!("500 channels, 100 partial traces, worst deviation {worst:.1e}"))
}

// ---------------------------------------------------------------- criterion 7

fn teleport_session() -> Result<Session, String> {
    include_str!("../../../sessions/teleport.toml")
        .parse::<Session>()
        .map_err(|e| e.to_string())
}

fn ket(a: Complex64, b: Complex64) -> Matrix {
    let v = nalgebra::DVector::from_vec(vec![a, b]);
    &v * v.adjoint()
}

/// The six Pauli eigenstates and three random mixed states of q1.
fn qubit_inputs(r: &mut Rand) -> Vec<Matrix> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let re = |x: f64| Complex64::new(x, 0.0);
    let im = |x: f64| Complex64::new(0.0, x);
    let mut out = vec![
        ket(re(1.0), re(0.0)),
        ket(re(0.0), re(1.0)),
        ket(re(s), re(s)),
        ket(re(s), re(-s)),
        ket(re(s), im(s)),
        ket(re(s), im(-s)),
    ];
    out.extend((0..3).map(|_| random_density(r, 2)));
    out
}

fn teleport_inputs(r: &mut Rand) -> Result<Vec<QuantumState>, String> {
    let rest = QuantumState::zero(QuantumRegister::qubits(&["q2", "q3"]).unwrap());
    qubit_inputs(r)
        .into_iter()
        .map(|m| {
            QuantumState::from_density(QuantumRegister::qubits(&["q1"]).unwrap(), m)
                .and_then(|s| s.tensor(&rest))
                .map_err(|e| e.to_string())
        })
        .collect()
}

fn teleportation() -> Outcome {
    let session = teleport_session()?;
    let env = &session.env;
    let t = session.term("T").map_err(|e| e.to_string())?;
    let s = session.term("S").map_err(|e| e.to_string())?;
    let public = vec!["q3".to_string()];
    let mut r = rng(7);
    let inputs = qubit_inputs(&mut r);
    let states = teleport_inputs(&mut rng(7))?;
    let internal: NameSet = env.events().map(|e| e.name.clone()).collect();
    let system = session.settings.system();
    let (at, as_) = (
        tau_abstract(&t, &internal, env, system).map_err(|e| e.to_string())?,
        tau_abstract(&s, &internal, env, system).map_err(|e| e.to_string())?,
    );
    if at != as_ || at != Term::Tau {
        return Err(format!("abstraction gives {} and {}", print_term(&at), print_term(&as_)));
    }
    let hide = |x: &Term| abs(&internal, x.clone());
    let o = Options {
        tol: STATE_TOL,
        public: Some(public.clone()),
        ..Options::default()
    };
    let mut worst: f64 = 0.0;
    for (input, st) in inputs.iter().zip(&states) {
        let sim = simulate(&lts(env, &t, st)?, 64);
        if sim.leaves.len() != 4 || sim.leaves.iter().any(|l| l.weight != ratio(1, 4) || !l.terminated) {
            let w: Vec<String> = sim.leaves.iter().map(|l| l.weight.to_string()).collect();
            return Err(format!("expected four terminated leaves of 1/4, got {w:?}"));
        }
        for leaf in &sim.leaves {
            let q3 = leaf.state.restrict_public(&public).unwrap();
            let d = max_norm_diff(q3.matrix(), input);
            worst = worst.max(d);
            if d > STATE_TOL {
                return Err(format!("q3 deviates from the input by {d:.2e}"));
            }
        }
        let spec = simulate(&lts(env, &s, st)?, 8);
        let d = max_norm_diff(spec.leaves[0].state.restrict_public(&public).unwrap().matrix(), input);
        if d > STATE_TOL {
            return Err(format!("the specification moves q1 to q3 with error {d:.2e}"));
        }
        let ct = compress_silent(&lts(env, &hide(&t), st)?, Some(&public), STATE_TOL).map_err(|e| e.to_string())?;
        let cs = compress_silent(&lts(env, &hide(&s), st)?, Some(&public), STATE_TOL).map_err(|e| e.to_string())?;
        let related = equivalence::check(Relation::ProbStep, &ct, &cs, &o).map_err(|e| e.to_string())?;
        if !related.related {
            return Err("abstracted protocol and specification are not probabilistic step bisimilar".into());
        }
    }
    Ok(format!(
        "{} inputs, four branches of 1/4 each, worst q3 deviation {worst:.1e}, both sides abstract to tau",
        inputs.len()
    ))
}

// ---------------------------------------------------------------- criterion 8

fn rebuild_root(t: &Term, k: usize) -> Option<Term> {
    let ops: [fn(Term, Term) -> Term; 4] = [Term::seq, Term::alt, Term::par, Term::conc];
    let (a, b) = match t {
        Term::Seq(a, b) | Term::Alt(a, b) | Term::Par(a, b) | Term::Conc(a, b) => (a, b),
        _ => return None,
    };
    let out = ops[k % 4]((**a).clone(), (**b).clone());
    (out != *t).then_some(out)
}

fn equivalence_sanity() -> Outcome {
    use Relation::*;
    let mut r = rng(8);
    let env = axiom_env(&mut r);
    let reg = register3();
    let g = Gen::new(&["a", "U", "V"], false, true);
    let aptc = System::new(Signature::Aptc, false);
    let mut pairs = Vec::new();
    while pairs.len() < 200 {
        let t = g.term(&mut r, 2);
        let other = match pairs.len() % 4 {
            0 => rewrite::normalize(&t, &env, aptc).map_err(|e| e.to_string())?.term,
            1 => match rebuild_root(&t, r.gen_range(0..4)) {
                Some(u) => u,
                None => continue,
            },
            2 => alt(t.clone(), t.clone()),
            _ => g.term(&mut r, 2),
        };
        pairs.push((t, other));
    }
    let mut counts: BTreeMap<Relation, usize> = BTreeMap::new();
    let mut hhp_skipped = 0;
    for (l, rt) in &pairs {
        let st = common::random_state(&mut r, &reg);
        let (a, b) = (lts(&env, l, &st)?, lts(&env, rt, &st)?);
        let mut v = BTreeMap::new();
        for rel in [Pomset, Step, Hp] {
            let x = check(rel, &a, &b)?;
            if x != check(rel, &b, &a)? {
                return Err(format!("{rel} is not symmetric on {} and {}", print_term(l), print_term(rt)));
            }
            v.insert(rel, x);
        }
        match check(Hhp, &a, &b) {
            Ok(x) => {
                v.insert(Hhp, x);
            }
            Err(_) => hhp_skipped += 1,
        }
        let get = |rel| v.get(&rel).copied().unwrap_or(false);
        if (get(Hp) && !get(Pomset)) || (get(Pomset) && !get(Step)) || (get(Hhp) && !get(Hp)) {
            return Err(format!("hierarchy broken on {} and {}: {v:?}", print_term(l), print_term(rt)));
        }
        for (rel, x) in v {
            *counts.entry(rel).or_default() += x as usize;
        }
        for rel in [Pomset, Step, Hp] {
            if !check(rel, &a, &a)? {
                return Err(format!("{rel} is not reflexive on {}", print_term(l)));
            }
        }
    }
    // Transitivity over chains t, nf(t), t + t, with a probabilistic variant.
    let gp = Gen::new(&["a", "U", "V"], true, true);
    for k in 0..40 {
        let t = if k % 2 == 0 { g.term(&mut r, 2) } else { gp.term(&mut r, 2) };
        let n = rewrite::normalize(&t, &env, System::default()).map_err(|e| e.to_string())?.term;
        let u = if k % 2 == 0 {
            alt(t.clone(), t.clone())
        } else {
            pr(ratio(1, 3), t.clone(), t.clone())
        };
        let st = common::random_state(&mut r, &reg);
        let sys = [lts(&env, &t, &st)?, lts(&env, &n, &st)?, lts(&env, &u, &st)?];
        let rels: &[Relation] = if k % 2 == 0 {
            &[Pomset, Step, Hp]
        } else {
            &[ProbPomset, ProbStep, ProbHp]
        };
        for &rel in rels {
            let (xy, yz, xz) = (check(rel, &sys[0], &sys[1])?, check(rel, &sys[1], &sys[2])?, check(rel, &sys[0], &sys[2])?);
            if xy && yz && !xz {
                return Err(format!("{rel} is not transitive on {}", print_term(&t)));
            }
            if !check(rel, &sys[1], &sys[1])? {
                return Err(format!("{rel} is not reflexive on {}", print_term(&n)));
            }
        }
    }
    classic_pairs()?;
    let tally: Vec<String> = counts.iter().map(|(k, v)| format!("{k} {v}")).collect();
    Ok(format!(
        "200 pairs, related counts [{}], hhp budget exceeded {hhp_skipped} times, classic pairs as expected",
        tally.join(", ")
    ))
}

fn classic_pairs() -> Result<(), String> {
    let env = Env::classical(&["a", "b", "c"]);
    let st = QuantumState::zero(QuantumRegister::trivial());
    let p = |s: &str| qtpa::syntax::parse_term(s, &env).unwrap();
    let cases = [
        ("a . (b + c)", "a . b + a . c", false),
        ("a || b", "a . b + b . a", false),
        ("a || b", "b || a", true),
        ("a . b + a . b", "a . b", true),
    ];
    for (l, rt, want) in cases {
        let (x, y) = (lts(&env, &p(l), &st)?, lts(&env, &p(rt), &st)?);
        for rel in Relation::ALL {
            let got = check(rel, &x, &y)?;
            if got != want {
                return Err(format!("{l} vs {rt} under {rel}: {got}"));
            }
        }
    }
    Ok(())
}
