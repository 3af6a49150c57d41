//! Lexer and recursive-descent parser for `.qfc` sources.
//!
//! ```text
//! program := proc+
//! proc    := "proc" IDENT "(" [param ("," param)*] ")" block
//! param   := IDENT [":" "qbit"]
//! block   := "{" stmt* "}"
//! stmt    := "new" "qbit" IDENT ";"
//!          | IDENT "*=" GATE ";"
//!          | IDENT "," IDENT "*=" GATE ";"
//!          | "measure" IDENT "{" "0" ":" block "1" ":" block "}"
//!          | "while" IDENT block
//!          | "discard" IDENT ";"
//!          | "call" IDENT "(" [IDENT ("," IDENT)*] ")" ";"
//! ```

use std::fmt;

use thiserror::Error;

use super::ast::{Block, Ident, Proc, Program, Span, Stmt, StmtKind};
use crate::gates::Gate;

const KEYWORDS: [&str; 7] = ["proc", "new", "qbit", "measure", "while", "discard", "call"];

/// Blocks nested deeper than this are rejected rather than risking the stack.
pub const MAX_NESTING: usize = 128;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{span}: expected {}, found {found}", expected.join(" or "))]
pub struct ParseError {
    pub span: Span,
    pub expected: Vec<String>,
    pub found: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Semi,
    Comma,
    Colon,
    StarEq,
    Stray(char),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(s) => write!(f, "`{s}`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::StarEq => f.write_str("`*=`"),
            Tok::Stray(c) => write!(f, "{c:?}"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

fn lex(src: &str) -> Vec<(Tok, Span)> {
    let mut out = Vec::new();
    let mut chars = src.chars().peekable();
    let (mut line, mut col) = (1u32, 1u32);
    while let Some(&c) = chars.peek() {
        let span = Span::new(line, col);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars<'_>>| {
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        match c {
            c if c.is_whitespace() => {
                bump(&mut chars);
            }
            '/' => {
                bump(&mut chars);
                if chars.peek() == Some(&'/') {
                    while chars.peek().is_some_and(|&c| c != '\n') {
                        bump(&mut chars);
                    }
                } else {
                    out.push((Tok::Stray('/'), span));
                }
            }
            '*' => {
                bump(&mut chars);
                if chars.peek() == Some(&'=') {
                    bump(&mut chars);
                    out.push((Tok::StarEq, span));
                } else {
                    out.push((Tok::Stray('*'), span));
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while chars
                    .peek()
                    .is_some_and(|&c| c.is_ascii_alphanumeric() || c == '_')
                {
                    s.push(bump(&mut chars).expect("peeked"));
                }
                out.push((Tok::Ident(s), span));
            }
            c if c.is_ascii_digit() => {
                let mut s = String::new();
                while chars.peek().is_some_and(char::is_ascii_digit) {
                    s.push(bump(&mut chars).expect("peeked"));
                }
                out.push((Tok::Int(s), span));
            }
            _ => {
                bump(&mut chars);
                let tok = match c {
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    ';' => Tok::Semi,
                    ',' => Tok::Comma,
                    ':' => Tok::Colon,
                    other => Tok::Stray(other),
                };
                out.push((tok, span));
            }
        }
    }
    out.push((Tok::Eof, Span::new(line, col)));
    out
}

struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
    depth: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    fn advance(&mut self) -> (Tok, Span) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, expected: &[&str]) -> PResult<T> {
        Err(ParseError {
            span: self.span(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().to_string(),
        })
    }

    fn expect(&mut self, tok: Tok, name: &str) -> PResult<Span> {
        if *self.peek() == tok {
            Ok(self.advance().1)
        } else {
            self.error(&[name])
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn keyword(&mut self, kw: &str) -> PResult<Span> {
        if self.at_keyword(kw) {
            Ok(self.advance().1)
        } else {
            self.error(&[&format!("`{kw}`")])
        }
    }

    fn ident(&mut self) -> PResult<Ident> {
        match self.peek() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let (tok, span) = self.advance();
                let Tok::Ident(name) = tok else { unreachable!() };
                Ok(Ident { name, span })
            }
            _ => self.error(&["identifier"]),
        }
    }

    fn gate(&mut self) -> PResult<Gate> {
        if let Tok::Ident(s) = self.peek() {
            if let Ok(g) = s.parse::<Gate>() {
                self.advance();
                return Ok(g);
            }
        }
        self.error(&["gate name (N, H, V, W, Nc, Hc, Vc, Wc, X)"])
    }

    fn program(&mut self) -> PResult<Program> {
        let mut procs = vec![self.proc()?];
        while *self.peek() != Tok::Eof {
            procs.push(self.proc()?);
        }
        Ok(Program { procs })
    }

    fn proc(&mut self) -> PResult<Proc> {
        self.keyword("proc")?;
        let name = self.ident()?;
        self.expect(Tok::LParen, "`(`")?;
        let mut params = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                params.push(self.ident()?);
                if *self.peek() == Tok::Colon {
                    self.advance();
                    self.keyword("qbit")?;
                }
                if *self.peek() == Tok::Comma {
                    self.advance();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen, "`)`")?;
        let body = self.block()?;
        Ok(Proc { name, params, body })
    }

    fn block(&mut self) -> PResult<Block> {
        if self.depth >= MAX_NESTING {
            return self.error(&[&format!("at most {MAX_NESTING} nested blocks")]);
        }
        self.expect(Tok::LBrace, "`{`")?;
        self.depth += 1;
        let mut stmts = Vec::new();
        while *self.peek() != Tok::RBrace {
            stmts.push(self.stmt()?);
        }
        self.advance();
        self.depth -= 1;
        Ok(Block { stmts })
    }

    fn branch_label(&mut self, bit: &str) -> PResult<()> {
        match self.peek() {
            Tok::Int(s) if s == bit => {
                self.advance();
                self.expect(Tok::Colon, "`:`")?;
                Ok(())
            }
            _ => self.error(&[&format!("`{bit}`")]),
        }
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let span = self.span();
        let kind = match self.peek() {
            Tok::Ident(s) => match s.as_str() {
                "new" => {
                    self.advance();
                    self.keyword("qbit")?;
                    let q = self.ident()?;
                    self.expect(Tok::Semi, "`;`")?;
                    StmtKind::NewQbit(q)
                }
                "measure" => {
                    self.advance();
                    let qubit = self.ident()?;
                    self.expect(Tok::LBrace, "`{`")?;
                    self.branch_label("0")?;
                    let zero = self.block()?;
                    self.branch_label("1")?;
                    let one = self.block()?;
                    self.expect(Tok::RBrace, "`}`")?;
                    StmtKind::Measure { qubit, zero, one }
                }
                "while" => {
                    self.advance();
                    let qubit = self.ident()?;
                    let body = self.block()?;
                    StmtKind::While { qubit, body }
                }
                "discard" => {
                    self.advance();
                    let q = self.ident()?;
                    self.expect(Tok::Semi, "`;`")?;
                    StmtKind::Discard(q)
                }
                "call" => {
                    self.advance();
                    let callee = self.ident()?;
                    self.expect(Tok::LParen, "`(`")?;
                    let mut args = Vec::new();
                    if *self.peek() != Tok::RParen {
                        args.push(self.ident()?);
                        while *self.peek() == Tok::Comma {
                            self.advance();
                            args.push(self.ident()?);
                        }
                    }
                    self.expect(Tok::RParen, "`)`")?;
                    self.expect(Tok::Semi, "`;`")?;
                    StmtKind::Call { callee, args }
                }
                _ => {
                    let first = self.ident()?;
                    let second = if *self.peek() == Tok::Comma {
                        self.advance();
                        Some(self.ident()?)
                    } else {
                        None
                    };
                    if *self.peek() != Tok::StarEq {
                        return if second.is_none() {
                            self.error(&["`*=`", "`,`"])
                        } else {
                            self.error(&["`*=`"])
                        };
                    }
                    self.advance();
                    let gate = self.gate()?;
                    self.expect(Tok::Semi, "`;`")?;
                    match second {
                        None => StmtKind::UnaryGate {
                            target: first,
                            gate,
                        },
                        Some(second) => StmtKind::BinaryGate {
                            first,
                            second,
                            gate,
                        },
                    }
                }
            },
            _ => return self.error(&["statement", "`}`"]),
        };
        Ok(Stmt { kind, span })
    }
}

/// Parses a whole program.
pub fn parse(src: &str) -> Result<Program, ParseError> {
    let mut p = Parser {
        toks: lex(src),
        pos: 0,
        depth: 0,
    };
    p.program()
}

/// Parses raw bytes; invalid UTF-8 is reported as a parse error at the first
/// offending byte.
pub fn parse_bytes(src: &[u8]) -> Result<Program, ParseError> {
    match std::str::from_utf8(src) {
        Ok(s) => parse(s),
        Err(e) => {
            let valid = std::str::from_utf8(&src[..e.valid_up_to()]).expect("valid prefix");
            let line = valid.matches('\n').count() as u32 + 1;
            let column = valid.rsplit('\n').next().map_or(0, |l| l.chars().count()) as u32 + 1;
            Err(ParseError {
                span: Span::new(line, column),
                expected: vec!["UTF-8 text".into()],
                found: format!("byte 0x{:02x}", src[e.valid_up_to()]),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_program() {
        let p = parse("proc main() { new qbit q; q *= H; }").unwrap();
        assert_eq!(p.procs.len(), 1);
        let main = p.main().unwrap();
        assert_eq!(main.body.stmts.len(), 2);
        assert!(matches!(
            &main.body.stmts[1].kind,
            StmtKind::UnaryGate { gate: Gate::H, .. }
        ));
        assert_eq!(main.body.stmts[1].span, Span::new(1, 27));
    }

    #[test]
    fn measure_fragment() {
        let src = "proc main(){ new qbit p; new qbit q; measure p { 0: { q *= N; } 1: { p *= N; } } }";
        let p = parse(src).unwrap();
        let stmts = &p.main().unwrap().body.stmts;
        let StmtKind::Measure { qubit, zero, one } = &stmts[2].kind else {
            panic!("not a measure: {:?}", stmts[2]);
        };
        assert_eq!(qubit.name, "p");
        assert!(matches!(
            &zero.stmts[0].kind,
            StmtKind::UnaryGate { target, gate: Gate::N } if target.name == "q"
        ));
        assert!(matches!(
            &one.stmts[0].kind,
            StmtKind::UnaryGate { target, gate: Gate::N } if target.name == "p"
        ));
    }

    #[test]
    fn missing_gate_name() {
        let err = parse("proc main() { q *= ; }").unwrap_err();
        assert_eq!(err.span, Span::new(1, 20));
        assert!(err.expected[0].starts_with("gate name"));
        assert_eq!(err.found, "`;`");
    }

    #[test]
    fn all_statement_forms() {
        let src = "
            // leading comment
            proc helper(a: qbit, b) { a, b *= X; }
            proc main() {
              new qbit p; new qbit q;
              p, q *= Nc;   // trailing comment
              while p { p *= H; }
              call helper(p, q);
              discard q;
            }";
        let p = parse(src).unwrap();
        assert_eq!(p.procs.len(), 2);
        assert_eq!(p.procs[0].params.len(), 2);
        assert_eq!(p.procs[1].name.span, Span::new(4, 18));
    }

    #[test]
    fn error_positions() {
        let cases = [
            ("", Span::new(1, 1)),
            ("proc main() { new q; }", Span::new(1, 19)),
            ("proc main() {\n  q *= Y;\n}", Span::new(2, 8)),
            ("proc main() { measure q { 1: {} 0: {} } }", Span::new(1, 27)),
            ("proc main() { q $ }", Span::new(1, 17)),
            ("proc new() {}", Span::new(1, 6)),
            ("proc main() { p, q H; }", Span::new(1, 20)),
            ("proc main() {", Span::new(1, 14)),
        ];
        for (src, span) in cases {
            let err = parse(src).unwrap_err();
            assert_eq!(err.span, span, "{src}: {err}");
        }
    }

    #[test]
    fn deep_nesting_is_an_error_not_a_crash() {
        let src = format!(
            "proc main() {{ new qbit q; {} {} }}",
            "while q { ".repeat(10_000),
            "}".repeat(10_000)
        );
        let err = parse(&src).unwrap_err();
        assert!(err.expected[0].contains("nested"));
    }

    #[test]
    fn invalid_utf8() {
        let err = parse_bytes(b"proc main() {\n  \xff }").unwrap_err();
        assert_eq!(err.span, Span::new(2, 3));
    }
}
