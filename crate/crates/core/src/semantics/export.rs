use std::fmt::Write;

use serde::Serialize;

use super::{NodeKind, TransitionSystem};
use crate::syntax::print_term;

#[derive(Debug, Serialize)]
pub struct LtsExport {
    pub initial: usize,
    pub truncated: bool,
    pub nodes: Vec<NodeExport>,
    pub prob_edges: Vec<ProbEdgeExport>,
    pub action_edges: Vec<ActionEdgeExport>,
}

#[derive(Debug, Serialize)]
pub struct NodeExport {
    pub id: usize,
    pub kind: &'static str,
    pub term: String,
    pub fingerprint: String,
    pub complete: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<[f64; 2]>>>,
}

#[derive(Debug, Serialize)]
pub struct ProbEdgeExport {
    pub from: usize,
    pub num: String,
    pub den: String,
    pub to: usize,
}

#[derive(Debug, Serialize)]
pub struct ActionEdgeExport {
    pub from: usize,
    pub label: Vec<String>,
    pub to: usize,
}

fn kind_name(k: NodeKind) -> &'static str {
    match k {
        NodeKind::Prob => "prob",
        NodeKind::Action => "action",
        NodeKind::Done => "done",
    }
}

/// Row-major `[re, im]` pairs; negative zero is normalized away so output
/// is byte stable.
/// Rows of `m` as `[re, im]` pairs, with negative zeros cleared.
pub fn matrix_rows(m: &crate::quantum::Matrix) -> Vec<Vec<[f64; 2]>> {
    let clean = |x: f64| if x == 0.0 { 0.0 } else { x };
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [clean(m[(i, j)].re), clean(m[(i, j)].im)]).collect())
        .collect()
}

impl LtsExport {
    pub fn new(ts: &TransitionSystem, with_matrices: bool) -> Self {
        Self {
            initial: ts.initial,
            truncated: ts.truncated,
            nodes: ts
                .nodes
                .iter()
                .enumerate()
                .map(|(id, n)| NodeExport {
                    id,
                    kind: kind_name(n.kind),
                    term: n.term.as_ref().map_or_else(|| "sqrt".to_string(), print_term),
                    fingerprint: n.state.fingerprint_hex(),
                    complete: n.complete,
                    matrix: with_matrices.then(|| matrix_rows(n.state.matrix())),
                })
                .collect(),
            prob_edges: ts
                .prob_edges
                .iter()
                .map(|e| ProbEdgeExport {
                    from: e.from,
                    num: e.weight.numer().to_string(),
                    den: e.weight.denom().to_string(),
                    to: e.to,
                })
                .collect(),
            action_edges: ts
                .action_edges
                .iter()
                .map(|e| ActionEdgeExport {
                    from: e.from,
                    label: e.label.names().to_vec(),
                    to: e.to,
                })
                .collect(),
        }
    }
}

pub fn to_json(ts: &TransitionSystem, with_matrices: bool) -> String {
    serde_json::to_string_pretty(&LtsExport::new(ts, with_matrices)).expect("export is serializable")
}

pub fn to_dot(ts: &TransitionSystem) -> String {
    let mut out = String::from("digraph lts {\n  rankdir=LR;\n");
    for (id, n) in ts.nodes.iter().enumerate() {
        let label = n.term.as_ref().map_or_else(|| "√".to_string(), print_term);
        let shape = match n.kind {
            NodeKind::Prob => "diamond",
            NodeKind::Action => "ellipse",
            NodeKind::Done => "doublecircle",
        };
        let label = label.replace('\\', "\\\\").replace('"', "\\\"");
        let _ = writeln!(out, "  n{id} [shape={shape}, label=\"{id}: {label}\"];");
    }
    for e in &ts.prob_edges {
        let _ = writeln!(
            out,
            "  n{} -> n{} [style=dashed, label=\"{}\"];",
            e.from,
            e.to,
            crate::prob::format(&e.weight)
        );
    }
    for e in &ts.action_edges {
        let _ = writeln!(out, "  n{} -> n{} [label=\"{}\"];", e.from, e.to, e.label);
    }
    out.push_str("}\n");
    out
}
