use std::fmt;

use super::{NameSet, Term};
use crate::prob;

/// Concrete syntax of `t`; `parse_term` reads it back to the same tree.
pub fn print_term(t: &Term) -> String {
    t.to_string()
}

fn level(t: &Term) -> u8 {
    match t {
        Term::Seq(..) => 1,
        Term::Comm(..) => 2,
        Term::Par(..) | Term::LeftMerge(..) | Term::Conc(..) => 3,
        Term::Unless(..) => 4,
        Term::Alt(..) => 5,
        Term::Prob(..) => 6,
        _ => 0,
    }
}

fn names(set: &NameSet) -> String {
    set.iter().cloned().collect::<Vec<_>>().join(",")
}

fn operand(f: &mut fmt::Formatter<'_>, t: &Term, parent: u8, right: bool) -> fmt::Result {
    let l = level(t);
    if l > parent || (right && l == parent) {
        write!(f, "({t})")
    } else {
        write!(f, "{t}")
    }
}

fn binary(f: &mut fmt::Formatter<'_>, parent: &Term, op: &str, a: &Term, b: &Term) -> fmt::Result {
    let l = level(parent);
    operand(f, a, l, false)?;
    write!(f, " {op} ")?;
    operand(f, b, l, true)
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Event(e) => write!(f, "{e}"),
            Term::Tau => write!(f, "tau"),
            Term::Hidden(e) => write!(f, "tau[{e}]"),
            Term::Delta => write!(f, "delta"),
            Term::Diverge => write!(f, "diverge"),
            Term::Var(x) => write!(f, "{x}"),
            Term::Seq(a, b) => binary(f, self, ".", a, b),
            Term::Alt(a, b) => binary(f, self, "+", a, b),
            Term::Prob(p, a, b) => binary(f, self, &format!("(+)[{}]", prob::format(p)), a, b),
            Term::Par(a, b) => binary(f, self, "||", a, b),
            Term::Comm(a, b) => binary(f, self, "|", a, b),
            Term::Conc(a, b) => binary(f, self, "<>", a, b),
            Term::LeftMerge(a, b) => binary(f, self, "||_", a, b),
            Term::Unless(a, b) => binary(f, self, "<|", a, b),
            Term::PairMerge(k) => write!(f, "({}, {}) ][ ({}, {})", k[0], k[1], k[2], k[3]),
            Term::Conflict(a) => write!(f, "theta({a})"),
            Term::Encap(h, a) => write!(f, "enc{{{}}}({a})", names(h)),
            Term::Abstract(i, a) => write!(f, "abs{{{}}}({a})", names(i)),
            Term::Project(n, a) => write!(f, "proj[{n}]({a})"),
            Term::Rec(spec, entry) => {
                write!(f, "rec {entry} {{ ")?;
                for (k, (v, body)) in spec.equations.iter().enumerate() {
                    if k > 0 {
                        write!(f, " ; ")?;
                    }
                    write!(f, "{v} = {body}")?;
                }
                write!(f, " }} in {entry}")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::ratio;
    use crate::syntax::{parse_term, Env};

    fn ev(s: &str) -> Term {
        Term::event(s)
    }

    #[test]
    fn examples() {
        assert_eq!(print_term(&Term::seq(ev("a"), ev("b"))), "a . b");
        assert_eq!(print_term(&Term::par(ev("a"), ev("b"))), "a || b");
        assert_eq!(print_term(&Term::prob(ratio(1, 2), ev("a"), ev("b"))), "a (+)[1/2] b");
        assert_eq!(
            print_term(&Term::seq(ev("a"), Term::seq(ev("b"), ev("c")))),
            "a . (b . c)"
        );
        assert_eq!(
            print_term(&Term::seq(Term::alt(ev("a"), ev("b")), ev("c"))),
            "(a + b) . c"
        );
    }

    #[test]
    fn nested_rec_round_trips() {
        let env = Env::classical(&["a", "b"]);
        let src = "rec X { X = a . (rec Y { Y = b . Y + a . X } in Y) } in X";
        let t = parse_term(src, &env).unwrap();
        assert_eq!(parse_term(&print_term(&t), &env).unwrap(), t);
    }
}
