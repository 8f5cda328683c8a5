//! Session files: one TOML document declaring the register, events,
//! communication, conflict and priority relations, initial states, named
//! terms and default settings.
//!
//! ```toml
//! [register]
//! qubits = ["q1", "q2"]
//!
//! [settings]
//! mode = "open"
//! system = "aptc-p"
//!
//! [[events]]
//! name = "H1"
//! gate = "H"
//! on = ["q1"]
//!
//! [[events]]
//! name = "M0"
//! on = ["q1"]
//! outcome = [0]
//!
//! [[events]]
//! name = "a"
//!
//! [relations]
//! comm = [["s", "r", "c"]]
//! conflicts = [["a", "b"]]
//! priority = [["a", "b"]]
//!
//! [states.plus]
//! pure = [[0.7071067811865476, 0.0], [0.7071067811865476, 0.0]]
//!
//! [terms]
//! T = "H1 . a"
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use serde::Deserialize;
use thiserror::Error;

use crate::quantum::{library, Matrix, QuantumChannel, QuantumError, QuantumRegister, QuantumState, DEFAULT_TOL};
use crate::rewrite::{Signature, System};
use crate::semantics::Limits;
use crate::syntax::{parse_term, Env, EventSpec, SyntaxError, Term};

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("cannot read {path}: {msg}")]
    Io { path: String, msg: String },
    #[error("session file: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, SessionError> {
    Err(SessionError::Invalid(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Open,
    Closed,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "open" => Ok(Mode::Open),
            "closed" => Ok(Mode::Closed),
            _ => Err(format!("unknown mode `{s}` (expected open or closed)")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Open => "open",
            Mode::Closed => "closed",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub mode: Mode,
    pub system: Signature,
    pub tol: f64,
    pub max_nodes: usize,
    pub unfold_depth: usize,
    pub max_steps: usize,
    pub public: Option<Vec<String>>,
}

impl Default for Settings {
    fn default() -> Self {
        let l = Limits::default();
        Self {
            mode: Mode::Open,
            system: Signature::AptcP,
            tol: DEFAULT_TOL,
            max_nodes: l.max_nodes,
            unfold_depth: l.unfold_depth,
            max_steps: 1000,
            public: None,
        }
    }
}

impl Settings {
    pub fn limits(&self) -> Limits {
        Limits {
            max_nodes: self.max_nodes,
            unfold_depth: self.unfold_depth,
        }
    }

    pub fn system(&self) -> System {
        System::new(self.system, self.mode == Mode::Closed)
    }
}

type Complex = [f64; 2];

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    #[serde(default)]
    register: RawRegister,
    #[serde(default)]
    settings: RawSettings,
    #[serde(default)]
    events: Vec<RawEvent>,
    #[serde(default)]
    relations: RawRelations,
    #[serde(default)]
    states: BTreeMap<String, RawState>,
    #[serde(default)]
    terms: BTreeMap<String, String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRegister {
    #[serde(default)]
    qubits: Vec<String>,
    /// Variables of arbitrary dimension, as `[name, dim]`.
    #[serde(default)]
    qudits: Vec<(String, usize)>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSettings {
    mode: Option<Mode>,
    system: Option<String>,
    tol: Option<f64>,
    max_nodes: Option<usize>,
    unfold_depth: Option<usize>,
    max_steps: Option<usize>,
    public: Option<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEvent {
    name: String,
    #[serde(default)]
    on: Vec<String>,
    gate: Option<String>,
    kraus: Option<Vec<Vec<Vec<Complex>>>>,
    outcome: Option<Vec<usize>>,
    #[serde(default)]
    postselect: bool,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRelations {
    #[serde(default)]
    comm: Vec<(String, String, String)>,
    #[serde(default)]
    conflicts: Vec<(String, String)>,
    /// `[lower, higher]`.
    #[serde(default)]
    priority: Vec<(String, String)>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawState {
    basis: Option<Vec<usize>>,
    pure: Option<Vec<Complex>>,
    density: Option<Vec<Vec<Complex>>>,
    mixed: Option<Vec<RawComponent>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawComponent {
    p: f64,
    basis: Option<Vec<usize>>,
    pure: Option<Vec<Complex>>,
    density: Option<Vec<Vec<Complex>>>,
}

#[derive(Debug, Clone)]
pub struct Session {
    pub env: Env,
    pub register: QuantumRegister,
    pub settings: Settings,
    pub states: BTreeMap<String, QuantumState>,
    pub terms: BTreeMap<String, String>,
    pub warnings: Vec<String>,
}

fn matrix(rows: &[Vec<Complex>], what: &str) -> Result<Matrix, SessionError> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return invalid(format!("{what} is not a square matrix"));
    }
    Ok(Matrix::from_fn(n, n, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1])))
}

impl Session {
    pub fn load(path: &Path) -> Result<Self, SessionError> {
        let text = std::fs::read_to_string(path).map_err(|e| SessionError::Io {
            path: path.display().to_string(),
            msg: e.to_string(),
        })?;
        text.parse()
    }

    fn build(raw: RawFile) -> Result<Self, SessionError> {
        let mut vars: Vec<(String, usize)> = raw.register.qubits.iter().map(|q| (q.clone(), 2)).collect();
        vars.extend(raw.register.qudits.iter().cloned());
        let register = if vars.is_empty() {
            QuantumRegister::trivial()
        } else {
            QuantumRegister::new(vars)?
        };

        let d = Settings::default();
        let s = raw.settings;
        let settings = Settings {
            mode: s.mode.unwrap_or(d.mode),
            system: match s.system {
                Some(x) => x.parse().map_err(|e: crate::rewrite::RewriteError| SessionError::Invalid(e.to_string()))?,
                None => d.system,
            },
            tol: s.tol.unwrap_or(d.tol),
            max_nodes: s.max_nodes.unwrap_or(d.max_nodes),
            unfold_depth: s.unfold_depth.unwrap_or(d.unfold_depth),
            max_steps: s.max_steps.unwrap_or(d.max_steps),
            public: s.public,
        };
        if let Some(p) = &settings.public {
            for v in p {
                register.position(v)?;
            }
        }

        let mut env = Env::new();
        for e in &raw.events {
            env.declare(Self::event(e, &register)?)?;
        }
        for (a, b, c) in &raw.relations.comm {
            env.declare_comm(a, b, c)?;
        }
        for (a, b) in &raw.relations.conflicts {
            Self::known(&env, &[a, b])?;
            env.declare_conflict(a, b);
        }
        for (lo, hi) in &raw.relations.priority {
            Self::known(&env, &[lo, hi])?;
            env.declare_priority(lo, hi);
        }

        let mut states = BTreeMap::new();
        for (name, st) in &raw.states {
            let rho = Self::state(st, &register).map_err(|e| SessionError::Invalid(format!("state `{name}`: {e}")))?;
            states.insert(name.clone(), rho);
        }
        let mut session = Self {
            env,
            register,
            settings,
            states,
            terms: raw.terms,
            warnings: Vec::new(),
        };
        session.warnings = session.mode_warnings();
        for (name, text) in &session.terms {
            parse_term(text, &session.env).map_err(|e| SessionError::Invalid(format!("term `{name}`: {e}")))?;
        }
        Ok(session)
    }

    /// Closed systems evolve by unitaries; other channels are reported.
    /// Measurement outcomes are exempt.
    pub fn mode_warnings(&self) -> Vec<String> {
        if self.settings.mode != Mode::Closed {
            return Vec::new();
        }
        self.env
            .events()
            .filter(|e| {
                e.channel
                    .as_ref()
                    .is_some_and(|ch| !ch.is_postselected() && !ch.is_unitary(self.settings.tol))
            })
            .map(|e| format!("event `{}` is not unitary; closed systems expect unitary operations", e.name))
            .collect()
    }

    fn known(env: &Env, names: &[&String]) -> Result<(), SessionError> {
        match names.iter().find(|n| !env.contains(n)) {
            Some(n) => invalid(format!("relation uses undeclared event `{n}`")),
            None => Ok(()),
        }
    }

    fn event(e: &RawEvent, register: &QuantumRegister) -> Result<EventSpec, SessionError> {
        let sources = [e.gate.is_some(), e.kraus.is_some(), e.outcome.is_some()];
        match sources.iter().filter(|x| **x).count() {
            0 => {
                if !e.on.is_empty() {
                    return invalid(format!("classical event `{}` cannot act on quantum variables", e.name));
                }
                return Ok(EventSpec::classical(&e.name));
            }
            1 => {}
            _ => return invalid(format!("event `{}` gives more than one of gate, kraus and outcome", e.name)),
        }
        for v in &e.on {
            register.position(v)?;
        }
        let ch = if let Some(g) = &e.gate {
            library::gate(g, &e.on)?
        } else if let Some(ks) = &e.kraus {
            let ks = ks
                .iter()
                .map(|k| matrix(k, &format!("Kraus operator of `{}`", e.name)))
                .collect::<Result<Vec<_>, _>>()?;
            if e.postselect {
                QuantumChannel::outcome(e.on.clone(), ks)?
            } else {
                QuantumChannel::new(e.on.clone(), ks)?
            }
        } else {
            let out = e.outcome.as_ref().expect("counted above");
            let dims: Vec<usize> = e
                .on
                .iter()
                .map(|v| register.position(v).map(|i| register.dims()[i]))
                .collect::<Result<_, _>>()?;
            QuantumChannel::basis_projector(e.on.clone(), &dims, out)?
        };
        Ok(EventSpec::quantum(&e.name, ch))
    }

    fn state(st: &RawState, register: &QuantumRegister) -> Result<QuantumState, SessionError> {
        let given = [st.basis.is_some(), st.pure.is_some(), st.density.is_some(), st.mixed.is_some()];
        if given.iter().filter(|x| **x).count() != 1 {
            return invalid("give exactly one of basis, pure, density and mixed");
        }
        if let Some(b) = &st.basis {
            return Ok(QuantumState::basis(register.clone(), b)?);
        }
        if let Some(p) = &st.pure {
            let amps: Vec<Complex64> = p.iter().map(|c| Complex64::new(c[0], c[1])).collect();
            return Ok(QuantumState::from_pure(register.clone(), &amps)?);
        }
        if let Some(d) = &st.density {
            return Ok(QuantumState::from_density(register.clone(), matrix(d, "density")?)?);
        }
        let parts = st.mixed.as_ref().expect("counted above");
        let n = register.dimension();
        let mut rho = Matrix::zeros(n, n);
        for c in parts {
            let part = RawState {
                basis: c.basis.clone(),
                pure: c.pure.clone(),
                density: c.density.clone(),
                mixed: None,
            };
            rho += Self::state(&part, register)?.matrix() * Complex64::new(c.p, 0.0);
        }
        Ok(QuantumState::from_density(register.clone(), rho)?)
    }

    /// A named term, or the argument parsed as a term.
    pub fn term(&self, text: &str) -> Result<Term, SessionError> {
        let src = self.terms.get(text).map(String::as_str).unwrap_or(text);
        Ok(parse_term(src, &self.env)?)
    }

    /// A named state, or the all-zero basis state.
    pub fn state_named(&self, name: Option<&str>) -> Result<QuantumState, SessionError> {
        match name {
            None => Ok(QuantumState::zero(self.register.clone())),
            Some(n) => match self.states.get(n) {
                Some(s) => Ok(s.clone()),
                None if n == "zero" => Ok(QuantumState::zero(self.register.clone())),
                None if n == "mixed" => Ok(QuantumState::maximally_mixed(self.register.clone())),
                None => invalid(format!("unknown state `{n}`")),
            },
        }
    }
}

impl FromStr for Session {
    type Err = SessionError;

    fn from_str(text: &str) -> Result<Self, SessionError> {
        Self::build(toml::from_str(text)?)
    }
}
