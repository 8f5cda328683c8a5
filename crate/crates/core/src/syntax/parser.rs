use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_bigint::BigInt;

use super::lexer::{tokenize, Tok, Token};
use super::{check_guarded, is_reserved, Env, NameSet, RecSpec, SyntaxError, Term};
use crate::prob::{self, Prob};

/// Parses `text` against the event declarations in `env`.
pub fn parse_term(text: &str, env: &Env) -> Result<Term, SyntaxError> {
    let tokens = tokenize(text)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        env,
        scopes: Vec::new(),
    };
    let t = p.term()?;
    p.expect(&Tok::Eof, "end of input")?;
    Ok(t)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    env: &'a Env,
    scopes: Vec<BTreeSet<String>>,
}

/// Binding levels, tightest first.
const SEQ: u8 = 1;
const COMM: u8 = 2;
const PAR: u8 = 3;
const UNLESS: u8 = 4;
const ALT: u8 = 5;
const PROB: u8 = 6;

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.tokens[self.pos];
        (t.line, t.col)
    }

    fn bump(&mut self) -> Tok {
        let t = self.tokens[self.pos].tok.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T, SyntaxError> {
        let (line, col) = self.here();
        Err(SyntaxError::Parse {
            line,
            col,
            msg: msg.into(),
        })
    }

    fn expect(&mut self, tok: &Tok, what: &str) -> Result<(), SyntaxError> {
        if self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected {what}, found {}", describe(self.peek())))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, SyntaxError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            other => self.error(format!("expected {what}, found {}", describe(&other))),
        }
    }

    fn number(&mut self) -> Result<BigInt, SyntaxError> {
        match self.peek().clone() {
            Tok::Num(s) => {
                self.bump();
                Ok(s.parse().expect("lexer yields digits"))
            }
            other => self.error(format!("expected a number, found {}", describe(&other))),
        }
    }

    fn term(&mut self) -> Result<Term, SyntaxError> {
        self.level(PROB)
    }

    fn level(&mut self, lvl: u8) -> Result<Term, SyntaxError> {
        if lvl == 0 {
            return self.atom();
        }
        let mut lhs = self.level(lvl - 1)?;
        loop {
            let op = self.peek().clone();
            let matches = matches!(
                (&op, lvl),
                (Tok::Dot, SEQ)
                    | (Tok::Bar, COMM)
                    | (Tok::Unless, UNLESS)
                    | (Tok::Plus, ALT)
                    | (Tok::Par | Tok::LeftMerge | Tok::Conc, PAR)
                    | (Tok::ProbOp, PROB)
            );
            if !matches {
                return Ok(lhs);
            }
            self.bump();
            let p = if op == Tok::ProbOp {
                Some(self.probability()?)
            } else {
                None
            };
            let rhs = self.level(lvl - 1)?;
            lhs = match op {
                Tok::Dot => Term::seq(lhs, rhs),
                Tok::Bar => Term::comm(lhs, rhs),
                Tok::Par => Term::par(lhs, rhs),
                Tok::LeftMerge => Term::left_merge(lhs, rhs),
                Tok::Conc => Term::conc(lhs, rhs),
                Tok::Unless => Term::unless(lhs, rhs),
                Tok::Plus => Term::alt(lhs, rhs),
                Tok::ProbOp => Term::prob(p.expect("parsed above"), lhs, rhs),
                _ => unreachable!(),
            };
        }
    }

    fn probability(&mut self) -> Result<Prob, SyntaxError> {
        let (line, col) = self.here();
        self.expect(&Tok::LBrack, "`[` after `(+)`")?;
        let num = self.number()?;
        self.expect(&Tok::Slash, "`/`")?;
        let den = self.number()?;
        self.expect(&Tok::RBrack, "`]`")?;
        let value = format!("{num}/{den}");
        if den == BigInt::from(0) {
            return Err(SyntaxError::BadProbability { value, line, col });
        }
        let p = Prob::new(num, den);
        if !prob::is_proper(&p) {
            return Err(SyntaxError::BadProbability { value, line, col });
        }
        Ok(p)
    }

    fn name_set(&mut self) -> Result<NameSet, SyntaxError> {
        self.expect(&Tok::LBrace, "`{`")?;
        let mut out = NameSet::new();
        if self.peek() == &Tok::RBrace {
            self.bump();
            return Ok(out);
        }
        loop {
            out.insert(self.ident("an event name")?);
            match self.bump() {
                Tok::Comma => continue,
                Tok::RBrace => return Ok(out),
                other => {
                    self.pos -= 1;
                    return self.error(format!("expected `,` or `}}`, found {}", describe(&other)));
                }
            }
        }
    }

    fn parenthesized(&mut self) -> Result<Term, SyntaxError> {
        self.expect(&Tok::LParen, "`(`")?;
        let t = self.term()?;
        self.expect(&Tok::RParen, "`)`")?;
        Ok(t)
    }

    fn is_var(&self, name: &str) -> bool {
        self.scopes.iter().rev().any(|s| s.contains(name))
    }

    fn atom(&mut self) -> Result<Term, SyntaxError> {
        let (line, col) = self.here();
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let first = self.term()?;
                if self.peek() == &Tok::Comma {
                    self.bump();
                    let z = self.term()?;
                    self.expect(&Tok::RParen, "`)`")?;
                    self.expect(&Tok::PairOp, "`][`")?;
                    self.expect(&Tok::LParen, "`(`")?;
                    let y = self.term()?;
                    self.expect(&Tok::Comma, "`,`")?;
                    let w = self.term()?;
                    self.expect(&Tok::RParen, "`)`")?;
                    return Ok(Term::pair_merge(first, z, y, w));
                }
                self.expect(&Tok::RParen, "`)`")?;
                Ok(first)
            }
            Tok::Ident(name) => {
                self.bump();
                match name.as_str() {
                    "tau" if self.peek() == &Tok::LBrack => {
                        self.bump();
                        let (l, c) = self.here();
                        let e = self.ident("an event name")?;
                        if !self.env.contains(&e) {
                            return Err(SyntaxError::UnknownEvent { name: e, line: l, col: c });
                        }
                        self.expect(&Tok::RBrack, "`]`")?;
                        Ok(Term::Hidden(e))
                    }
                    "tau" => Ok(Term::Tau),
                    "delta" => Ok(Term::Delta),
                    "diverge" => Ok(Term::Diverge),
                    "enc" => {
                        let h = self.name_set()?;
                        Ok(Term::Encap(h, Box::new(self.parenthesized()?)))
                    }
                    "abs" => {
                        let i = self.name_set()?;
                        Ok(Term::Abstract(i, Box::new(self.parenthesized()?)))
                    }
                    "proj" => {
                        self.expect(&Tok::LBrack, "`[`")?;
                        let n = self.number()?;
                        let n: u32 = match u32::try_from(n) {
                            Ok(n) if n >= 1 => n,
                            _ => return self.error("projection index must be a positive integer"),
                        };
                        self.expect(&Tok::RBrack, "`]`")?;
                        Ok(Term::project(n, self.parenthesized()?))
                    }
                    "theta" => Ok(Term::conflict(self.parenthesized()?)),
                    "rec" => self.rec(),
                    "in" => self.error("unexpected `in`"),
                    _ if self.is_var(&name) => Ok(Term::Var(name)),
                    _ if self.env.contains(&name) => Ok(Term::Event(name)),
                    _ => Err(SyntaxError::UnknownEvent { name, line, col }),
                }
            }
            other => self.error(format!("expected a term, found {}", describe(&other))),
        }
    }

    /// `rec X { X = t ; Y = u } in X`, with `rec` already consumed.
    fn rec(&mut self) -> Result<Term, SyntaxError> {
        // Variable names are collected first so that bodies may refer to
        // equations declared later.
        let mut names = BTreeSet::new();
        let mut k = 0;
        while !matches!(self.peek_at(k), Tok::LBrace | Tok::Eof) {
            k += 1;
        }
        let mut depth = 0usize;
        let mut expect_lhs = true;
        loop {
            match self.peek_at(k) {
                Tok::LBrace | Tok::LParen => depth += 1,
                Tok::RBrace | Tok::RParen => {
                    depth = depth.saturating_sub(1);
                    if depth == 0 {
                        break;
                    }
                }
                Tok::Semi if depth == 1 => expect_lhs = true,
                Tok::Ident(n) if depth == 1 && expect_lhs => {
                    names.insert(n.clone());
                    expect_lhs = false;
                }
                Tok::Eof => break,
                _ => {}
            }
            k += 1;
        }
        for n in &names {
            if is_reserved(n) || self.env.contains(n) {
                return self.error(format!("`{n}` cannot be used as a recursion variable"));
            }
        }
        // The optional variable between `rec` and `{` is informational.
        if let Tok::Ident(_) = self.peek() {
            self.bump();
        }
        self.expect(&Tok::LBrace, "`{`")?;
        self.scopes.push(names);
        let mut equations = BTreeMap::new();
        loop {
            let v = self.ident("a recursion variable")?;
            self.expect(&Tok::Eq, "`=`")?;
            let body = self.term()?;
            if equations.insert(v.clone(), body).is_some() {
                self.scopes.pop();
                return self.error(format!("equation for `{v}` given twice"));
            }
            match self.peek() {
                Tok::Semi => {
                    self.bump();
                }
                _ => break,
            }
        }
        self.scopes.pop();
        self.expect(&Tok::RBrace, "`}`")?;
        let kw = self.ident("`in`")?;
        if kw != "in" {
            self.pos -= 1;
            return self.error("expected `in`");
        }
        let entry = self.ident("a recursion variable")?;
        if !equations.contains_key(&entry) {
            return Err(SyntaxError::UnboundVariable(entry));
        }
        let spec = RecSpec::new(equations);
        check_guarded(&spec)?;
        Ok(Term::Rec(Arc::new(spec), entry))
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Num(s) => format!("number {s}"),
        Tok::Eof => "end of input".into(),
        other => format!("{other:?}"),
    }
}
