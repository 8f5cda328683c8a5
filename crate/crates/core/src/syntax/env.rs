use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Name, SyntaxError};
use crate::quantum::{QuantumChannel, DEFAULT_TOL};

pub const TAU: &str = "tau";
pub const DELTA: &str = "delta";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventKind {
    ClassicalAction,
    QuantumOperation,
    Unitary,
    Silent,
    Deadlock,
}

impl EventKind {
    pub fn is_quantum(self) -> bool {
        matches!(self, EventKind::QuantumOperation | EventKind::Unitary)
    }
}

/// A declared event. Quantum events carry their channel.
#[derive(Debug, Clone)]
pub struct EventSpec {
    pub name: Name,
    pub kind: EventKind,
    pub footprint: Vec<Name>,
    pub channel: Option<Arc<QuantumChannel>>,
}

impl EventSpec {
    pub fn classical(name: &str) -> Self {
        Self {
            name: name.to_string(),
            kind: EventKind::ClassicalAction,
            footprint: Vec::new(),
            channel: None,
        }
    }

    /// A quantum event; unitary when the channel has one Kraus operator that
    /// is unitary, a general operation otherwise.
    pub fn quantum(name: &str, channel: QuantumChannel) -> Self {
        let kind = if channel.is_unitary(DEFAULT_TOL) {
            EventKind::Unitary
        } else {
            EventKind::QuantumOperation
        };
        Self {
            name: name.to_string(),
            kind,
            footprint: channel.footprint().to_vec(),
            channel: Some(Arc::new(channel)),
        }
    }

    pub fn silent() -> Self {
        Self {
            name: TAU.into(),
            kind: EventKind::Silent,
            footprint: Vec::new(),
            channel: None,
        }
    }

    pub fn deadlock() -> Self {
        Self {
            name: DELTA.into(),
            kind: EventKind::Deadlock,
            footprint: Vec::new(),
            channel: None,
        }
    }

    pub fn is_quantum(&self) -> bool {
        self.kind.is_quantum()
    }

    fn check(&self) -> Result<(), String> {
        match (self.kind.is_quantum(), &self.channel) {
            (false, Some(_)) => Err(format!("classical event `{}` carries a channel", self.name)),
            (false, None) if !self.footprint.is_empty() => {
                Err(format!("classical event `{}` has a footprint", self.name))
            }
            (true, None) => Err(format!("quantum event `{}` has no channel", self.name)),
            (true, Some(ch)) => {
                if self.footprint.is_empty() {
                    return Err(format!("quantum event `{}` has an empty footprint", self.name));
                }
                if ch.footprint() != self.footprint.as_slice() {
                    return Err(format!("footprint of `{}` does not match its channel", self.name));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// `%(e1, e2)`: both events are quantum and share a quantum variable.
pub fn races(a: &EventSpec, b: &EventSpec) -> bool {
    a.is_quantum() && b.is_quantum() && a.footprint.iter().any(|v| b.footprint.contains(v))
}

/// Declarations shared by the parser, the semantics and the rewriter: events,
/// the communication function, the conflict relation and the priority order
/// used by the unless operator.
#[derive(Debug, Clone, Default)]
pub struct Env {
    events: BTreeMap<Name, EventSpec>,
    comm: BTreeMap<(Name, Name), Name>,
    conflicts: BTreeSet<(Name, Name)>,
    priority: BTreeSet<(Name, Name)>,
}

impl Env {
    pub fn new() -> Self {
        Self::default()
    }

    /// Environment declaring the given classical events.
    pub fn classical<S: AsRef<str>>(names: &[S]) -> Self {
        let mut env = Self::new();
        for n in names {
            env.declare(EventSpec::classical(n.as_ref()))
                .expect("fresh classical names");
        }
        env
    }

    pub fn declare(&mut self, spec: EventSpec) -> Result<(), SyntaxError> {
        if super::is_reserved(&spec.name) {
            return Err(SyntaxError::config(format!("`{}` is reserved", spec.name)));
        }
        if !super::is_identifier(&spec.name) {
            return Err(SyntaxError::config(format!("`{}` is not an identifier", spec.name)));
        }
        if self.events.contains_key(&spec.name) {
            return Err(SyntaxError::config(format!("event `{}` declared twice", spec.name)));
        }
        spec.check().map_err(SyntaxError::config)?;
        self.events.insert(spec.name.clone(), spec);
        Ok(())
    }

    /// Declares `a | b = c`. Only classical events communicate.
    pub fn declare_comm(&mut self, a: &str, b: &str, c: &str) -> Result<(), SyntaxError> {
        for n in [a, b, c] {
            let spec = self
                .events
                .get(n)
                .ok_or_else(|| SyntaxError::config(format!("communication uses undeclared event `{n}`")))?;
            if spec.kind != super::EventKind::ClassicalAction {
                return Err(SyntaxError::config(format!(
                    "communication involves quantum event `{n}`; communication actions are classical"
                )));
            }
        }
        let key = ordered(a, b);
        if self.comm.contains_key(&key) {
            return Err(SyntaxError::config(format!("communication of `{a}` and `{b}` declared twice")));
        }
        self.comm.insert(key, c.to_string());
        Ok(())
    }

    pub fn declare_conflict(&mut self, a: &str, b: &str) {
        self.conflicts.insert((a.to_string(), b.to_string()));
        self.conflicts.insert((b.to_string(), a.to_string()));
    }

    /// Declares `lower < higher`.
    pub fn declare_priority(&mut self, lower: &str, higher: &str) {
        self.priority.insert((lower.to_string(), higher.to_string()));
    }

    pub fn get(&self, name: &str) -> Option<&EventSpec> {
        self.events.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.events.contains_key(name)
    }

    pub fn events(&self) -> impl Iterator<Item = &EventSpec> {
        self.events.values()
    }

    pub fn comm_pairs(&self) -> impl Iterator<Item = (&Name, &Name, &Name)> {
        self.comm.iter().map(|((a, b), c)| (a, b, c))
    }

    pub fn conflicts(&self) -> impl Iterator<Item = &(Name, Name)> {
        self.conflicts.iter()
    }

    pub fn priorities(&self) -> impl Iterator<Item = &(Name, Name)> {
        self.priority.iter()
    }

    /// `gamma(a, b)`; `None` means the communication is `delta`.
    pub fn communication(&self, a: &str, b: &str) -> Option<&str> {
        self.comm.get(&ordered(a, b)).map(String::as_str)
    }

    pub fn in_conflict(&self, a: &str, b: &str) -> bool {
        self.conflicts.contains(&(a.to_string(), b.to_string()))
    }

    /// Event-level unless: `a <| b` silences `a` when `a # b`, or when some
    /// `c` with `b # c` has strictly lower priority than `a`.
    pub fn silenced_by(&self, a: &str, b: &str) -> bool {
        if a == TAU {
            return false;
        }
        self.in_conflict(a, b)
            || self
                .priority
                .iter()
                .any(|(lo, hi)| hi == a && self.in_conflict(b, lo))
    }

    /// Race between two event names. Unknown names never race.
    pub fn races(&self, a: &str, b: &str) -> bool {
        match (self.events.get(a), self.events.get(b)) {
            (Some(x), Some(y)) => races(x, y),
            _ => false,
        }
    }

    pub fn is_quantum(&self, name: &str) -> bool {
        self.events.get(name).is_some_and(EventSpec::is_quantum)
    }

    pub fn channel(&self, name: &str) -> Option<&Arc<QuantumChannel>> {
        self.events.get(name).and_then(|e| e.channel.as_ref())
    }
}

fn ordered(a: &str, b: &str) -> (Name, Name) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}
