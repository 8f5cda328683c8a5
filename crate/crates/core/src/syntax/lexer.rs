use super::SyntaxError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Num(String),
    Dot,
    Plus,
    ProbOp,
    LBrack,
    RBrack,
    PairOp,
    Slash,
    Bar,
    Par,
    LeftMerge,
    Conc,
    Unless,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Eq,
    Eof,
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

pub(crate) fn tokenize(src: &str) -> Result<Vec<Token>, SyntaxError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let at = |k: usize| chars.get(k).copied();
    while i < chars.len() {
        let ch = chars[i];
        let (tl, tc) = (line, col);
        let push = |out: &mut Vec<Token>, tok: Tok| out.push(Token { tok, line: tl, col: tc });
        if ch == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if ch.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if ch == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let (tok, len) = if ch.is_ascii_alphabetic() || ch == '_' {
            let start = i;
            let mut j = i;
            while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_' || chars[j] == '\'') {
                j += 1;
            }
            (Tok::Ident(chars[start..j].iter().collect()), j - start)
        } else if ch.is_ascii_digit() {
            let start = i;
            let mut j = i;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            (Tok::Num(chars[start..j].iter().collect()), j - start)
        } else {
            match (ch, at(i + 1), at(i + 2)) {
                ('(', Some('+'), Some(')')) => (Tok::ProbOp, 3),
                ('|', Some('|'), Some('_')) => (Tok::LeftMerge, 3),
                ('|', Some('|'), _) => (Tok::Par, 2),
                ('|', _, _) => (Tok::Bar, 1),
                ('<', Some('>'), _) => (Tok::Conc, 2),
                ('<', Some('|'), _) => (Tok::Unless, 2),
                (']', Some('['), _) => (Tok::PairOp, 2),
                ('.', _, _) => (Tok::Dot, 1),
                ('+', _, _) => (Tok::Plus, 1),
                ('[', _, _) => (Tok::LBrack, 1),
                (']', _, _) => (Tok::RBrack, 1),
                ('/', _, _) => (Tok::Slash, 1),
                ('(', _, _) => (Tok::LParen, 1),
                (')', _, _) => (Tok::RParen, 1),
                ('{', _, _) => (Tok::LBrace, 1),
                ('}', _, _) => (Tok::RBrace, 1),
                (',', _, _) => (Tok::Comma, 1),
                (';', _, _) => (Tok::Semi, 1),
                ('=', _, _) => (Tok::Eq, 1),
                _ => {
                    return Err(SyntaxError::Parse {
                        line,
                        col,
                        msg: format!("unexpected character `{ch}`"),
                    })
                }
            }
        };
        push(&mut out, tok);
        i += len;
        col += len;
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}
