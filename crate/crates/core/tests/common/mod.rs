#![allow(dead_code)]

use num_complex::Complex64;
use qtpa::equivalence::{self, Options, Relation};
use qtpa::prob::{ratio, Prob};
use qtpa::quantum::{Matrix, QuantumChannel, QuantumRegister, QuantumState};
use qtpa::semantics::{build_lts, Limits, TransitionSystem};
use qtpa::syntax::{Env, EventSpec, Term};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Rand = ChaCha8Rng;

pub fn rng(seed: u64) -> Rand {
    ChaCha8Rng::seed_from_u64(seed)
}

fn ginibre(rng: &mut Rand, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

pub fn random_unitary(rng: &mut Rand, dim: usize) -> Matrix {
    ginibre(rng, dim, dim).qr().q()
}

/// Kraus operators of a random channel, cut from a random isometry.
pub fn random_kraus(rng: &mut Rand, dim: usize, count: usize) -> Vec<Matrix> {
    let v = ginibre(rng, dim * count, dim).qr().q();
    (0..count).map(|k| v.rows(k * dim, dim).into_owned()).collect()
}

pub fn random_density(rng: &mut Rand, dim: usize) -> Matrix {
    let g = ginibre(rng, dim, dim);
    let rho = &g * g.adjoint();
    let tr = rho.trace();
    rho / tr
}

pub fn register3() -> QuantumRegister {
    QuantumRegister::qubits(&["q1", "q2", "q3"]).unwrap()
}

pub fn random_state(rng: &mut Rand, reg: &QuantumRegister) -> QuantumState {
    QuantumState::from_density(reg.clone(), random_density(rng, reg.dimension())).unwrap()
}

/// Events `a` (classical), `U` on q1 and `V` on q1, q2 with random
/// unitaries; `a | a = c`; `a # U`; `U <= V`.
pub fn axiom_env(rng: &mut Rand) -> Env {
    let mut env = Env::classical(&["a", "c"]);
    let u = QuantumChannel::unitary(vec!["q1".into()], random_unitary(rng, 2)).unwrap();
    let v = QuantumChannel::unitary(vec!["q1".into(), "q2".into()], random_unitary(rng, 4)).unwrap();
    env.declare(EventSpec::quantum("U", u)).unwrap();
    env.declare(EventSpec::quantum("V", v)).unwrap();
    env.declare_comm("a", "a", "c").unwrap();
    env.declare_conflict("a", "U");
    env.declare_priority("U", "V");
    env
}

#[derive(Debug, Clone)]
pub struct Gen {
    pub events: Vec<String>,
    pub prob: bool,
    pub parallel: bool,
    pub delta: bool,
    pub probs: Vec<Prob>,
}

impl Gen {
    pub fn new(events: &[&str], prob: bool, parallel: bool) -> Self {
        Self {
            events: events.iter().map(|s| s.to_string()).collect(),
            prob,
            parallel,
            delta: true,
            probs: vec![ratio(1, 3), ratio(1, 2), ratio(2, 3), ratio(1, 4)],
        }
    }

    pub fn event(&self, rng: &mut Rand) -> Term {
        Term::event(&self.events[rng.gen_range(0..self.events.len())])
    }

    fn atom(&self, rng: &mut Rand) -> Term {
        if self.delta && rng.gen_bool(0.1) {
            Term::Delta
        } else {
            self.event(rng)
        }
    }

    pub fn prob(&self, rng: &mut Rand) -> Prob {
        self.probs[rng.gen_range(0..self.probs.len())].clone()
    }

    pub fn term(&self, rng: &mut Rand, depth: usize) -> Term {
        if depth == 0 || rng.gen_bool(0.3) {
            return self.atom(rng);
        }
        let mut ops = vec![0, 1];
        if self.prob {
            ops.push(2);
        }
        if self.parallel {
            ops.extend([3, 4, 5, 6, 7]);
        }
        let d = depth - 1;
        match ops[rng.gen_range(0..ops.len())] {
            0 => Term::seq(self.term(rng, d), self.term(rng, d)),
            1 => Term::alt(self.term(rng, d), self.term(rng, d)),
            2 => Term::prob(self.prob(rng), self.term(rng, d), self.term(rng, d)),
            3 => Term::par(self.term(rng, d), self.term(rng, d)),
            4 => Term::comm(self.term(rng, d), self.term(rng, d)),
            5 => Term::conc(self.term(rng, d), self.term(rng, d)),
            6 => Term::encap([self.events[0].clone()], self.term(rng, d)),
            _ => Term::unless(self.term(rng, d), self.event(rng)),
        }
    }
}

pub fn lts(env: &Env, t: &Term, st: &QuantumState) -> TransitionSystem {
    build_lts(env, t, st, Limits::default()).unwrap()
}

pub fn related(rel: Relation, env: &Env, l: &Term, r: &Term, st: &QuantumState) -> bool {
    let (a, b) = (lts(env, l, st), lts(env, r, st));
    equivalence::check(rel, &a, &b, &Options::default()).unwrap().related
}
