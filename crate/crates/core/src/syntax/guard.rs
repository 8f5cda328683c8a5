use super::{NameSet, RecSpec, SyntaxError, Term};

/// Every occurrence of a variable of `spec` in a right-hand side must sit
/// behind at least one action. Different summands may use different guards.
pub fn check_guarded(spec: &RecSpec) -> Result<(), SyntaxError> {
    let vars: NameSet = spec.equations.keys().cloned().collect();
    for (eq, body) in &spec.equations {
        let mut bad = NameSet::new();
        unguarded(body, &vars, &mut bad);
        if let Some(var) = bad.into_iter().next() {
            return Err(SyntaxError::Unguarded {
                var,
                equation: eq.clone(),
            });
        }
    }
    Ok(())
}

/// Collects variables from `vars` that occur in an active position of `t`.
fn unguarded(t: &Term, vars: &NameSet, out: &mut NameSet) {
    match t {
        Term::Var(x) => {
            if vars.contains(x) {
                out.insert(x.clone());
            }
        }
        // The right operand only runs after the left one has acted.
        Term::Seq(a, _) | Term::LeftMerge(a, _) => unguarded(a, vars, out),
        Term::PairMerge(k) => {
            unguarded(&k[0], vars, out);
            unguarded(&k[2], vars, out);
        }
        Term::Rec(spec, _) => {
            let inner: NameSet = vars
                .iter()
                .filter(|v| !spec.equations.contains_key(*v))
                .cloned()
                .collect();
            for body in spec.equations.values() {
                unguarded(body, &inner, out);
            }
        }
        _ => t.children().into_iter().for_each(|c| unguarded(c, vars, out)),
    }
}
