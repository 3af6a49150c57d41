use std::fmt;

use crate::gates::Gate;

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Span {
    pub line: u32,
    pub column: u32,
}

impl Span {
    pub fn new(line: u32, column: u32) -> Self {
        Self { line, column }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ident {
    pub name: String,
    pub span: Span,
}

impl Ident {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            span: Span::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Block {
    pub stmts: Vec<Stmt>,
}

impl Block {
    pub fn new(stmts: Vec<Stmt>) -> Self {
        Self { stmts }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: Span,
}

impl Stmt {
    pub fn new(kind: StmtKind) -> Self {
        Self {
            kind,
            span: Span::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StmtKind {
    /// `new qbit q;`
    NewQbit(Ident),
    /// `q *= G;`
    UnaryGate { target: Ident, gate: Gate },
    /// `p, q *= G;` with `p` on the gate's leading line.
    BinaryGate { first: Ident, second: Ident, gate: Gate },
    /// `measure q { 0: {..} 1: {..} }`
    Measure { qubit: Ident, zero: Block, one: Block },
    /// `while q {..}`: measure at the head, run the body on outcome 1.
    While { qubit: Ident, body: Block },
    /// `discard q;`
    Discard(Ident),
    /// `call f(a, b);`
    Call { callee: Ident, args: Vec<Ident> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Proc {
    pub name: Ident,
    pub params: Vec<Ident>,
    pub body: Block,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Program {
    pub procs: Vec<Proc>,
}

impl Program {
    pub fn proc(&self, name: &str) -> Option<&Proc> {
        self.procs.iter().find(|p| p.name.name == name)
    }

    pub fn main(&self) -> Option<&Proc> {
        self.proc("main")
    }

    /// A copy with every span reset, for structural comparison.
    pub fn without_spans(&self) -> Program {
        fn ident(i: &Ident) -> Ident {
            Ident::new(i.name.clone())
        }
        fn block(b: &Block) -> Block {
            Block::new(b.stmts.iter().map(stmt).collect())
        }
        fn stmt(s: &Stmt) -> Stmt {
            Stmt::new(match &s.kind {
                StmtKind::NewQbit(q) => StmtKind::NewQbit(ident(q)),
                StmtKind::UnaryGate { target, gate } => StmtKind::UnaryGate {
                    target: ident(target),
                    gate: *gate,
                },
                StmtKind::BinaryGate {
                    first,
                    second,
                    gate,
                } => StmtKind::BinaryGate {
                    first: ident(first),
                    second: ident(second),
                    gate: *gate,
                },
                StmtKind::Measure { qubit, zero, one } => StmtKind::Measure {
                    qubit: ident(qubit),
                    zero: block(zero),
                    one: block(one),
                },
                StmtKind::While { qubit, body } => StmtKind::While {
                    qubit: ident(qubit),
                    body: block(body),
                },
                StmtKind::Discard(q) => StmtKind::Discard(ident(q)),
                StmtKind::Call { callee, args } => StmtKind::Call {
                    callee: ident(callee),
                    args: args.iter().map(ident).collect(),
                },
            })
        }
        Program {
            procs: self
                .procs
                .iter()
                .map(|p| Proc {
                    name: ident(&p.name),
                    params: p.params.iter().map(ident).collect(),
                    body: block(&p.body),
                })
                .collect(),
        }
    }
}
