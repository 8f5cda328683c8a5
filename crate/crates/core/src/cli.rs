//! The `qtpa` command line.
//!
//! Exit codes: 0 success or related, 1 not related or proof failure,
//! 2 usage or configuration error, 3 exploration limits reached.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::equivalence::{self, EquivError, Options, Relation, Witness};
use crate::prob;
use crate::rewrite::{self, RewriteError, Signature};
use crate::semantics::{build_lts, matrix_rows, simulate, to_dot, to_json, SemanticsError, TransitionSystem};
use crate::session::{Mode, Session, SessionError};
use crate::syntax::{print_term, Term};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_TRUNCATED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "qtpa", version, about = "Truly concurrent process algebra over quantum configurations")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Axiom system used by `prove` and `normalize`.
    #[arg(long, global = true, value_parser = parse_signature)]
    system: Option<Signature>,
    #[arg(long, global = true)]
    mode: Option<Mode>,
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    max_nodes: Option<usize>,
    #[arg(long, global = true)]
    unfold_depth: Option<usize>,
    /// Compare and report only these quantum variables.
    #[arg(long, global = true, value_delimiter = ',')]
    public: Option<Vec<String>>,
    /// Write the machine-readable result to this file.
    #[arg(long, global = true)]
    export: Option<PathBuf>,
}

fn parse_signature(s: &str) -> Result<Signature, String> {
    s.parse().map_err(|e: RewriteError| e.to_string())
}

fn parse_relation(s: &str) -> Result<Relation, String> {
    s.parse().map_err(|e: EquivError| e.to_string())
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse terms and dump their syntax trees.
    Parse {
        session: PathBuf,
        /// Term names or inline terms; all named terms when omitted.
        terms: Vec<String>,
    },
    /// Generate the transition system of a configuration.
    Lts {
        session: PathBuf,
        term: String,
        #[arg(long)]
        state: Option<String>,
        #[arg(long)]
        dot: Option<PathBuf>,
        /// Include density matrices in the export.
        #[arg(long)]
        matrices: bool,
    },
    /// Decide an equivalence between two configurations.
    Equiv {
        session: PathBuf,
        left: String,
        right: String,
        #[arg(long, default_value = "s", value_parser = parse_relation)]
        relation: Relation,
        #[arg(long)]
        state: Option<String>,
    },
    /// Prove an equation by normalization.
    Prove {
        session: PathBuf,
        left: String,
        right: String,
    },
    /// Print the normal form of a term with its derivation.
    Normalize { session: PathBuf, term: String },
    /// Distribution over final configurations.
    Simulate {
        session: PathBuf,
        term: String,
        #[arg(long)]
        state: Option<String>,
        #[arg(long)]
        max_steps: Option<usize>,
    },
}

#[derive(Debug)]
struct Failure {
    code: i32,
    msg: String,
}

impl Failure {
    fn usage(msg: impl ToString) -> Self {
        Self {
            code: EXIT_USAGE,
            msg: msg.to_string(),
        }
    }
}

impl From<SessionError> for Failure {
    fn from(e: SessionError) -> Self {
        Failure::usage(e)
    }
}

impl From<RewriteError> for Failure {
    fn from(e: RewriteError) -> Self {
        Failure::usage(e)
    }
}

impl From<SemanticsError> for Failure {
    fn from(e: SemanticsError) -> Self {
        let code = match e {
            SemanticsError::Truncated => EXIT_TRUNCATED,
            _ => EXIT_USAGE,
        };
        Self { code, msg: e.to_string() }
    }
}

impl From<EquivError> for Failure {
    fn from(e: EquivError) -> Self {
        let code = match e {
            EquivError::Truncated(_) | EquivError::BudgetExceeded(_) => EXIT_TRUNCATED,
            _ => EXIT_USAGE,
        };
        Self { code, msg: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::usage(e)
    }
}

type Outcome = Result<i32, Failure>;

/// Runs the command line and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    let mut ctx = Ctx { out, err, global: &cli.global };
    match ctx.dispatch(&cli.command) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(ctx.err, "error: {}", f.msg);
            f.code
        }
    }
}

struct Ctx<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
    global: &'a Global,
}

#[derive(Serialize)]
struct LeafExport {
    weight: String,
    terminated: bool,
    matrix: Vec<Vec<[f64; 2]>>,
}

impl Ctx<'_> {
    fn session(&mut self, path: &Path) -> Result<Session, Failure> {
        let mut s = Session::load(path)?;
        let g = self.global;
        if let Some(m) = g.mode {
            s.settings.mode = m;
        }
        if let Some(x) = g.system {
            s.settings.system = x;
        }
        if let Some(t) = g.tol {
            s.settings.tol = t;
        }
        if let Some(n) = g.max_nodes {
            s.settings.max_nodes = n;
        }
        if let Some(d) = g.unfold_depth {
            s.settings.unfold_depth = d;
        }
        if let Some(p) = &g.public {
            for v in p {
                s.register.position(v).map_err(Failure::usage)?;
            }
            s.settings.public = Some(p.clone());
        }
        s.warnings = s.mode_warnings();
        for w in &s.warnings {
            writeln!(self.err, "warning: {w}")?;
        }
        Ok(s)
    }

    fn export(&mut self, text: &str) -> Result<(), Failure> {
        if let Some(p) = &self.global.export {
            std::fs::write(p, text)?;
        }
        Ok(())
    }

    fn lts(&mut self, s: &Session, term: &Term, state: Option<&str>) -> Result<TransitionSystem, Failure> {
        let st = s.state_named(state)?;
        Ok(build_lts(&s.env, term, &st, s.settings.limits())?)
    }

    fn dispatch(&mut self, cmd: &Command) -> Outcome {
        match cmd {
            Command::Parse { session, terms } => self.parse(session, terms),
            Command::Lts {
                session,
                term,
                state,
                dot,
                matrices,
            } => self.cmd_lts(session, term, state.as_deref(), dot.as_deref(), *matrices),
            Command::Equiv {
                session,
                left,
                right,
                relation,
                state,
            } => self.equiv(session, left, right, *relation, state.as_deref()),
            Command::Prove { session, left, right } => self.prove(session, left, right),
            Command::Normalize { session, term } => self.normalize(session, term),
            Command::Simulate {
                session,
                term,
                state,
                max_steps,
            } => self.simulate(session, term, state.as_deref(), *max_steps),
        }
    }

    fn parse(&mut self, path: &Path, terms: &[String]) -> Outcome {
        let s = self.session(path)?;
        let names: Vec<String> = if terms.is_empty() {
            s.terms.keys().cloned().collect()
        } else {
            terms.to_vec()
        };
        let mut dump = Vec::new();
        for n in &names {
            let t = s.term(n)?;
            writeln!(self.out, "{n} = {}", print_term(&t))?;
            let mut lines = Vec::new();
            tree(&t, 1, &mut lines);
            for l in &lines {
                writeln!(self.out, "{l}")?;
            }
            dump.push(json!({ "name": n, "term": print_term(&t), "tree": lines }));
        }
        self.export(&serde_json::to_string_pretty(&dump).expect("serializable"))?;
        Ok(EXIT_OK)
    }

    fn cmd_lts(&mut self, path: &Path, term: &str, state: Option<&str>, dot: Option<&Path>, matrices: bool) -> Outcome {
        let s = self.session(path)?;
        let t = s.term(term)?;
        let ts = self.lts(&s, &t, state)?;
        writeln!(
            self.out,
            "{} nodes, {} probabilistic edges, {} action edges{}",
            ts.len(),
            ts.prob_edges.len(),
            ts.action_edges.len(),
            if ts.truncated { " (truncated)" } else { "" }
        )?;
        for e in &ts.action_edges {
            writeln!(self.out, "  {} --{}--> {}", e.from, e.label, e.to)?;
        }
        for e in &ts.prob_edges {
            writeln!(self.out, "  {} ~{}~> {}", e.from, prob::format(&e.weight), e.to)?;
        }
        self.export(&to_json(&ts, matrices))?;
        if let Some(d) = dot {
            std::fs::write(d, to_dot(&ts))?;
        }
        Ok(if ts.truncated { EXIT_TRUNCATED } else { EXIT_OK })
    }

    fn equiv(&mut self, path: &Path, l: &str, r: &str, rel: Relation, state: Option<&str>) -> Outcome {
        let s = self.session(path)?;
        let (t1, t2) = (s.term(l)?, s.term(r)?);
        let (a, b) = (self.lts(&s, &t1, state)?, self.lts(&s, &t2, state)?);
        let opts = Options {
            tol: s.settings.tol,
            public: s.settings.public.clone(),
            ..Options::default()
        };
        let res = equivalence::check(rel, &a, &b, &opts)?;
        for w in &res.warnings {
            writeln!(self.err, "warning: {w}")?;
        }
        let verdict = if res.related { "related" } else { "not related" };
        writeln!(self.out, "{verdict} under {rel}")?;
        match &res.witness {
            Witness::Relation(pairs) => writeln!(self.out, "witness: relation with {} pairs", pairs.len())?,
            Witness::Trace(tr) => {
                let steps = if tr.steps.is_empty() { "(initial)".to_string() } else { tr.steps.join(" ") };
                writeln!(self.out, "after {steps}: {}", tr.reason)?;
            }
        }
        self.export(&serde_json::to_string_pretty(&res).expect("serializable"))?;
        Ok(if res.related { EXIT_OK } else { EXIT_FAIL })
    }

    fn prove(&mut self, path: &Path, l: &str, r: &str) -> Outcome {
        let s = self.session(path)?;
        let (t1, t2) = (s.term(l)?, s.term(r)?);
        let proof = rewrite::prove_equal(&t1, &t2, &s.env, s.settings.system())?;
        for (side, n) in [("lhs", &proof.lhs), ("rhs", &proof.rhs)] {
            for step in &n.trace {
                writeln!(
                    self.out,
                    "{side} [{}] at {}: {} => {}",
                    step.rules.join(","),
                    position(&step.path),
                    step.before,
                    step.after
                )?;
            }
            writeln!(self.out, "{side} normal form: {}", n.text)?;
        }
        writeln!(self.out, "{}", if proof.equal { "proved" } else { "not provable: normal forms differ" })?;
        self.export(&serde_json::to_string_pretty(&proof).expect("serializable"))?;
        Ok(if proof.equal { EXIT_OK } else { EXIT_FAIL })
    }

    fn normalize(&mut self, path: &Path, term: &str) -> Outcome {
        let s = self.session(path)?;
        let t = s.term(term)?;
        let n = rewrite::normalize(&t, &s.env, s.settings.system())?;
        for step in &n.trace {
            writeln!(self.out, "[{}] at {}: {} => {}", step.rules.join(","), position(&step.path), step.before, step.after)?;
        }
        writeln!(self.out, "{}", n.text)?;
        self.export(&serde_json::to_string_pretty(&n).expect("serializable"))?;
        Ok(EXIT_OK)
    }

    fn simulate(&mut self, path: &Path, term: &str, state: Option<&str>, max_steps: Option<usize>) -> Outcome {
        let s = self.session(path)?;
        let t = s.term(term)?;
        let ts = self.lts(&s, &t, state)?;
        let sim = simulate(&ts, max_steps.unwrap_or(s.settings.max_steps));
        if sim.nondeterministic {
            writeln!(self.err, "warning: nondeterministic choices were resolved uniformly")?;
        }
        let mut leaves = Vec::new();
        for leaf in &sim.leaves {
            let st = match &s.settings.public {
                Some(p) => leaf.state.restrict_public(p).map_err(Failure::usage)?,
                None => leaf.state.clone(),
            };
            let m = matrix_rows(st.matrix());
            writeln!(
                self.out,
                "{} {} {}",
                leaf.weight,
                if leaf.terminated { "terminated" } else { "deadlock" },
                format_matrix(&m)
            )?;
            leaves.push(LeafExport {
                weight: leaf.weight.to_string(),
                terminated: leaf.terminated,
                matrix: m,
            });
        }
        writeln!(self.out, "residual {}", sim.residual)?;
        let doc = json!({ "leaves": leaves, "residual": sim.residual.to_string() });
        self.export(&serde_json::to_string_pretty(&doc).expect("serializable"))?;
        Ok(if ts.truncated { EXIT_TRUNCATED } else { EXIT_OK })
    }
}

fn position(path: &[usize]) -> String {
    if path.is_empty() {
        "root".into()
    } else {
        path.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(".")
    }
}

fn format_matrix(m: &[Vec<[f64; 2]>]) -> String {
    let tidy = |x: f64| if x.abs() < 5e-7 { 0.0 } else { x };
    let row = |r: &Vec<[f64; 2]>| {
        r.iter()
            .map(|c| match (tidy(c[0]), tidy(c[1])) {
                (re, 0.0) => format!("{re:.6}"),
                (re, im) => format!("{re:.6}{im:+.6}i"),
            })
            .collect::<Vec<_>>()
            .join(" ")
    };
    format!("[{}]", m.iter().map(row).collect::<Vec<_>>().join("; "))
}

fn tree(t: &Term, depth: usize, out: &mut Vec<String>) {
    let pad = "  ".repeat(depth);
    let (label, kids): (String, Vec<&Term>) = match t {
        Term::Event(e) => (format!("event {e}"), vec![]),
        Term::Tau => ("tau".into(), vec![]),
        Term::Hidden(e) => (format!("tau[{e}]"), vec![]),
        Term::Delta => ("delta".into(), vec![]),
        Term::Diverge => ("diverge".into(), vec![]),
        Term::Var(x) => (format!("var {x}"), vec![]),
        Term::Seq(..) => ("seq".into(), t.children()),
        Term::Alt(..) => ("alt".into(), t.children()),
        Term::Prob(p, ..) => (format!("prob {}", prob::format(p)), t.children()),
        Term::Par(..) => ("par".into(), t.children()),
        Term::Comm(..) => ("comm".into(), t.children()),
        Term::Conc(..) => ("merge".into(), t.children()),
        Term::LeftMerge(..) => ("left-merge".into(), t.children()),
        Term::PairMerge(..) => ("pair-merge".into(), t.children()),
        Term::Conflict(..) => ("theta".into(), t.children()),
        Term::Unless(..) => ("unless".into(), t.children()),
        Term::Encap(h, _) => (format!("enc {{{}}}", names(h)), t.children()),
        Term::Abstract(i, _) => (format!("abs {{{}}}", names(i)), t.children()),
        Term::Project(n, _) => (format!("proj {n}"), t.children()),
        Term::Rec(spec, x) => {
            out.push(format!("{pad}rec {x}"));
            for (v, body) in &spec.equations {
                out.push(format!("{pad}  {v} ="));
                tree(body, depth + 2, out);
            }
            return;
        }
    };
    out.push(format!("{pad}{label}"));
    for k in kids {
        tree(k, depth + 1, out);
    }
}

fn names(s: &crate::syntax::NameSet) -> String {
    s.iter().cloned().collect::<Vec<_>>().join(", ")
}
