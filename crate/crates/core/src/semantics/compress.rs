use num_traits::One;

use super::{simulate, ActionEdge, Node, NodeKind, ProbEdge, Result, SemanticsError, StepLabel, TransitionSystem};
use crate::prob::Prob;
use crate::quantum::QuantumState;
use crate::syntax::{Term, TAU};

fn restrict(st: &QuantumState, public: Option<&[String]>) -> Result<QuantumState> {
    Ok(match public {
        Some(p) => st.restrict_public(p)?,
        None => st.clone(),
    })
}

fn node(kind: NodeKind, term: Option<Term>, state: QuantumState) -> Node {
    Node {
        kind,
        term,
        fingerprint: state.fingerprint(),
        state,
        unfolds: 0,
        complete: true,
    }
}

/// Collapses a finite, deterministic system whose steps are all silent into
/// at most one `tau` step followed by the distribution over its final
/// configurations. Final states are restricted to `public` and grouped when
/// equal within `tol`.
pub fn compress_silent(ts: &TransitionSystem, public: Option<&[String]>, tol: f64) -> Result<TransitionSystem> {
    if ts.truncated {
        return Err(SemanticsError::Truncated);
    }
    if let Some(e) = ts.action_edges.iter().find(|e| e.label.names() != [TAU]) {
        return Err(SemanticsError::Unsupported(format!(
            "silent compression needs silent steps only, found {}",
            e.label
        )));
    }
    if !ts.is_acyclic() {
        return Err(SemanticsError::Unsupported(
            "silent compression needs an acyclic system".into(),
        ));
    }
    let sim = simulate(ts, ts.len() + 1);
    if sim.nondeterministic {
        return Err(SemanticsError::Unsupported(
            "silent compression needs a deterministic system".into(),
        ));
    }
    let start = restrict(&ts.nodes[ts.initial].state, public)?;
    if ts.action_edges.is_empty() && !ts.has_prob_nodes() {
        let kind = ts.nodes[ts.initial].kind;
        let term = ts.nodes[ts.initial].term.as_ref().map(|_| Term::Delta);
        return Ok(TransitionSystem::from_parts(vec![node(kind, term, start)], vec![], vec![], 0, false));
    }

    let mut groups: Vec<(bool, QuantumState, Prob)> = Vec::new();
    for leaf in &sim.leaves {
        let st = restrict(&leaf.state, public)?;
        let mut placed = false;
        for g in groups.iter_mut() {
            if g.0 == leaf.terminated && g.1.state_equal(&st, tol)? {
                g.2 += &leaf.weight;
                placed = true;
                break;
            }
        }
        if !placed {
            groups.push((leaf.terminated, st, leaf.weight.clone()));
        }
    }

    let mut nodes = vec![node(NodeKind::Action, Some(Term::Tau), start.clone())];
    let mut prob_edges = Vec::new();
    let tau = StepLabel::new(vec![TAU.into()]);
    let leaf_node = |terminated: bool, st: QuantumState| {
        if terminated {
            node(NodeKind::Done, None, st)
        } else {
            node(NodeKind::Action, Some(Term::Delta), st)
        }
    };
    if groups.len() == 1 && groups[0].2.is_one() {
        let (t, st, _) = groups.pop().expect("one group");
        nodes.push(leaf_node(t, st));
    } else {
        nodes.push(node(NodeKind::Prob, Some(Term::Tau), start));
        for (t, st, w) in groups {
            prob_edges.push(ProbEdge {
                from: 1,
                weight: w,
                to: nodes.len(),
            });
            nodes.push(leaf_node(t, st));
        }
    }
    let action_edges = vec![ActionEdge {
        from: 0,
        label: tau,
        events: vec![TAU.into()],
        to: 1,
    }];
    Ok(TransitionSystem::from_parts(nodes, prob_edges, action_edges, 0, false))
}
