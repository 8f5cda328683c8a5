//! Process terms: abstract syntax, event declarations, the concrete ASCII
//! grammar and structural utilities.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! term  := term "(+)[" p "/" q "]" term      probabilistic choice
//!        | term "+" term                      alternative
//!        | term "<|" term                     unless
//!        | term ("||" | "||_" | "<>") term    parallel, left merge, concurrent merge
//!        | term "|" term                      communication merge
//!        | term "." term                      sequential
//!        | atom
//! atom  := event | "tau" | "tau[" event "]" | "delta" | "diverge" | VAR
//!        | "enc{" names "}(" term ")" | "abs{" names "}(" term ")"
//!        | "proj[" n "](" term ")" | "theta(" term ")"
//!        | "(" term "," term ")][(" term "," term ")"
//!        | "rec" VAR "{" VAR "=" term (";" VAR "=" term)* "}" "in" VAR
//!        | "(" term ")"
//! ```
//!
//! All binary operators associate to the left.

mod alphabet;
mod ast;
mod env;
mod guard;
mod lexer;
mod parser;
mod printer;
mod subst;

use thiserror::Error;

pub use alphabet::{alphabet, occurring_events};
pub use ast::{Name, NameSet, RecSpec, Term};
pub use env::{races, Env, EventKind, EventSpec, DELTA, TAU};
pub use guard::check_guarded;
pub use parser::parse_term;
pub use printer::print_term;
pub use subst::substitute;

#[allow(unused_imports)]
pub(crate) use subst::substitute_unchecked;

pub const RESERVED: &[&str] = &[
    "tau", "delta", "diverge", "enc", "abs", "proj", "theta", "rec", "in",
];

pub fn is_reserved(name: &str) -> bool {
    RESERVED.contains(&name)
}

pub fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SyntaxError {
    #[error("{line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: unknown event `{name}`")]
    UnknownEvent { name: String, line: usize, col: usize },
    #[error("{line}:{col}: probability {value} is not strictly between 0 and 1")]
    BadProbability { value: String, line: usize, col: usize },
    #[error("unguarded recursion: `{var}` occurs unguarded in the equation for `{equation}`")]
    Unguarded { var: String, equation: String },
    #[error("unbound recursion variable `{0}`")]
    UnboundVariable(String),
    #[error("substitution would capture variable `{0}`")]
    Capture(String),
    #[error("{0}")]
    Config(String),
}

impl SyntaxError {
    pub fn config(msg: impl Into<String>) -> Self {
        SyntaxError::Config(msg.into())
    }
}
