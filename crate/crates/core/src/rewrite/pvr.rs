use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};

use super::{Result, RewriteError};
use crate::prob::{self, Prob};
use crate::syntax::{Name, NameSet, RecSpec, Term, TAU};

/// `X_k = (i_k^1 || ... || i_k^m) . X_{k+1} (+)[pi_k] Y_k`, indices mod n.
#[derive(Debug, Clone, PartialEq)]
pub struct PvrLoop {
    pub labels: Vec<Name>,
    pub pi: Prob,
    pub exit: Term,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PvrInstance {
    pub internal: NameSet,
    pub loops: Vec<PvrLoop>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PvrEquation {
    pub spec: Arc<RecSpec>,
    pub lhs: Term,
    pub rhs: Term,
    /// Probability of leaving through each exit.
    pub alphas: Vec<Prob>,
}

impl PvrInstance {
    pub fn var(k: usize) -> Name {
        format!("X{}", k + 1)
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(RewriteError::Pvr(m));
        if self.loops.is_empty() {
            return bad("at least one equation is required".into());
        }
        let mut all_tau = true;
        for (k, l) in self.loops.iter().enumerate() {
            if l.labels.is_empty() {
                return bad(format!("equation {} has no internal step", k + 1));
            }
            if !prob::is_proper(&l.pi) {
                return bad(format!("probability {} of equation {} is not strictly between 0 and 1", l.pi, k + 1));
            }
            if !l.exit.is_closed() {
                return bad(format!("exit of equation {} is not closed", k + 1));
            }
            for i in &l.labels {
                if i != TAU && !self.internal.contains(i) {
                    return bad(format!("`{i}` is neither tau nor internal"));
                }
                all_tau &= i == TAU;
            }
        }
        if all_tau {
            return bad("the internal steps may not all be tau".into());
        }
        Ok(())
    }

    pub fn spec(&self) -> Arc<RecSpec> {
        let n = self.loops.len();
        let eqs = self.loops.iter().enumerate().map(|(k, l)| {
            let step = l
                .labels
                .iter()
                .map(|i| if i == TAU { Term::Tau } else { Term::event(i) })
                .reduce(Term::par)
                .expect("validated");
            let body = Term::prob(
                l.pi.clone(),
                Term::seq(step, Term::Var(Self::var((k + 1) % n))),
                l.exit.clone(),
            );
            (Self::var(k), body)
        });
        Arc::new(RecSpec::new(eqs.collect::<BTreeMap<_, _>>()))
    }

    /// Absorption probabilities of the cycle started in `X_1`, from the
    /// linear system `a_k = (1 - pi_k) e_k + pi_k a_{k+1}`.
    pub fn alphas(&self) -> Vec<Prob> {
        let n = self.loops.len();
        // Augmented system (I - Q) A = R.
        let mut m = vec![vec![Prob::zero(); 2 * n]; n];
        for (k, l) in self.loops.iter().enumerate() {
            m[k][k] += Prob::one();
            m[k][(k + 1) % n] -= &l.pi;
            m[k][n + k] = Prob::one() - &l.pi;
        }
        for col in 0..n {
            let pivot = (col..n).find(|&r| !m[r][col].is_zero()).expect("I - Q is invertible");
            m.swap(col, pivot);
            let p = m[col][col].clone();
            for v in m[col].iter_mut() {
                *v /= &p;
            }
            for r in 0..n {
                if r != col && !m[r][col].is_zero() {
                    let f = m[r][col].clone();
                    let pivot = m[col].clone();
                    for (x, y) in m[r].iter_mut().zip(&pivot) {
                        *x -= &f * y;
                    }
                }
            }
        }
        m[0][n..].to_vec()
    }
}

/// The conclusion of PVR_n for `inst`:
/// `tau . tau_I(X1) = tau . (tau_I(Y1) (+)[b1] (tau_I(Y2) (+)[b2] ...))` where
/// `b_j` is the probability of exit `j` given that no earlier exit was taken.
pub fn apply_pvr(inst: &PvrInstance) -> Result<PvrEquation> {
    inst.validate()?;
    let spec = inst.spec();
    let alphas = inst.alphas();
    let hide = |t: Term| Term::Abstract(inst.internal.clone(), Box::new(t));
    let lhs = Term::seq(Term::Tau, hide(Term::Rec(spec.clone(), PvrInstance::var(0))));
    let n = alphas.len();
    let mut body = hide(inst.loops[n - 1].exit.clone());
    let mut rest = alphas[n - 1].clone();
    for j in (0..n - 1).rev() {
        rest += &alphas[j];
        body = Term::prob(&alphas[j] / &rest, hide(inst.loops[j].exit.clone()), body);
    }
    Ok(PvrEquation {
        spec,
        lhs,
        rhs: Term::seq(Term::Tau, body),
        alphas,
    })
}
