use std::collections::BTreeMap;
use std::sync::Arc;

use super::{Name, RecSpec, SyntaxError, Term};

/// Replaces free recursion variables according to `bindings`.
///
/// Every free variable of `t` must be bound, and no binding may be captured by
/// a recursive specification nested inside `t`.
pub fn substitute(t: &Term, bindings: &BTreeMap<Name, Term>) -> Result<Term, SyntaxError> {
    for v in t.free_vars() {
        if !bindings.contains_key(&v) {
            return Err(SyntaxError::UnboundVariable(v));
        }
    }
    check_capture(t, bindings)?;
    Ok(substitute_unchecked(t, bindings))
}

fn check_capture(t: &Term, bindings: &BTreeMap<Name, Term>) -> Result<(), SyntaxError> {
    match t {
        Term::Rec(spec, _) => {
            let inner_free = t.free_vars();
            for (v, value) in bindings {
                if !inner_free.contains(v) {
                    continue;
                }
                if let Some(x) = value.free_vars().into_iter().find(|x| spec.equations.contains_key(x)) {
                    return Err(SyntaxError::Capture(x));
                }
            }
            for body in spec.equations.values() {
                let outer: BTreeMap<Name, Term> = bindings
                    .iter()
                    .filter(|(k, _)| !spec.equations.contains_key(*k))
                    .map(|(k, v)| (k.clone(), v.clone()))
                    .collect();
                check_capture(body, &outer)?;
            }
            Ok(())
        }
        _ => t.children().into_iter().try_for_each(|c| check_capture(c, bindings)),
    }
}

pub(crate) fn substitute_unchecked(t: &Term, bindings: &BTreeMap<Name, Term>) -> Term {
    match t {
        Term::Var(x) => bindings.get(x).cloned().unwrap_or_else(|| t.clone()),
        Term::Rec(spec, entry) => {
            let free = t.free_vars();
            if !free.iter().any(|v| bindings.contains_key(v)) {
                return t.clone();
            }
            let outer: BTreeMap<Name, Term> = bindings
                .iter()
                .filter(|(k, _)| !spec.equations.contains_key(*k))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect();
            let equations = spec
                .equations
                .iter()
                .map(|(k, body)| (k.clone(), substitute_unchecked(body, &outer)))
                .collect();
            Term::Rec(Arc::new(RecSpec::new(equations)), entry.clone())
        }
        _ => t.map_children(|c| substitute_unchecked(c, bindings)),
    }
}
