use std::collections::BTreeSet;
use std::sync::Arc;

use super::{Env, Name, NameSet, RecSpec, Term, TAU};

/// Labels `t` may ever perform, including communication results and `tau`.
pub fn alphabet(t: &Term, env: &Env) -> NameSet {
    let mut seen = BTreeSet::new();
    collect(t, env, &mut seen)
}

/// Event names written anywhere in `t`, without regard to what it can do.
pub fn occurring_events(t: &Term) -> NameSet {
    let mut out = NameSet::new();
    gather(t, &mut out);
    out
}

fn gather(t: &Term, out: &mut NameSet) {
    match t {
        Term::Event(e) => {
            out.insert(e.clone());
        }
        Term::Rec(spec, _) => spec.equations.values().for_each(|b| gather(b, out)),
        _ => t.children().into_iter().for_each(|c| gather(c, out)),
    }
}

fn comms(a: &NameSet, b: &NameSet, env: &Env) -> NameSet {
    let mut out = NameSet::new();
    for x in a {
        for y in b {
            if let Some(c) = env.communication(x, y) {
                out.insert(c.to_string());
            }
        }
    }
    out
}

fn collect(t: &Term, env: &Env, seen: &mut BTreeSet<(usize, Name)>) -> NameSet {
    let tau = || NameSet::from([TAU.to_string()]);
    match t {
        Term::Event(e) => NameSet::from([e.clone()]),
        Term::Tau | Term::Hidden(_) => tau(),
        Term::Delta | Term::Diverge | Term::Var(_) => NameSet::new(),
        Term::Seq(a, b) | Term::Alt(a, b) | Term::Prob(_, a, b) => {
            let mut s = collect(a, env, seen);
            s.extend(collect(b, env, seen));
            s
        }
        Term::Comm(a, b) => {
            let (x, y) = (collect(a, env, seen), collect(b, env, seen));
            comms(&x, &y, env)
        }
        Term::Par(a, b) | Term::Conc(a, b) | Term::LeftMerge(a, b) => {
            let (x, y) = (collect(a, env, seen), collect(b, env, seen));
            let mut s = comms(&x, &y, env);
            s.extend(x);
            s.extend(y);
            s
        }
        Term::PairMerge(k) => {
            let x: NameSet = [&k[0], &k[1]].iter().flat_map(|t| collect(t, env, seen)).collect();
            let y: NameSet = [&k[2], &k[3]].iter().flat_map(|t| collect(t, env, seen)).collect();
            let mut s = comms(&x, &y, env);
            s.extend(x);
            s.extend(y);
            s
        }
        Term::Unless(a, b) => {
            let y = collect(b, env, seen);
            collect(a, env, seen)
                .into_iter()
                .map(|e| {
                    if y.iter().any(|c| env.silenced_by(&e, c)) {
                        TAU.to_string()
                    } else {
                        e
                    }
                })
                .collect()
        }
        Term::Conflict(a) => {
            let mut s = collect(a, env, seen);
            s.insert(TAU.to_string());
            s
        }
        Term::Encap(h, a) => collect(a, env, seen).into_iter().filter(|e| !h.contains(e)).collect(),
        Term::Abstract(i, a) => collect(a, env, seen)
            .into_iter()
            .map(|e| if i.contains(&e) { TAU.to_string() } else { e })
            .collect(),
        Term::Project(_, a) => collect(a, env, seen),
        Term::Rec(spec, entry) => rec(spec, entry, env, seen),
    }
}

fn rec(spec: &Arc<RecSpec>, entry: &str, env: &Env, seen: &mut BTreeSet<(usize, Name)>) -> NameSet {
    let key = (Arc::as_ptr(spec) as usize, entry.to_string());
    if !seen.insert(key) {
        return NameSet::new();
    }
    let Some(body) = spec.equations.get(entry) else {
        return NameSet::new();
    };
    let mut out = collect(body, env, seen);
    for v in body.free_vars() {
        if spec.equations.contains_key(&v) {
            out.extend(rec(spec, &v, env, seen));
        }
    }
    out
}
