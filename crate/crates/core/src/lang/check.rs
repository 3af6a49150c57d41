//! Linear type checking.
//!
//! Each procedure body is checked by threading a context of live qubit names
//! through its statements. A name may appear in the context at most once, and
//! every operation that touches qubits demands live, pairwise distinct
//! operands, so no program that passes can ever hand the same qubit to a gate
//! twice or touch a qubit after discarding it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use super::ast::{Block, Ident, Proc, Program, Span, StmtKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("unknown qubit `{name}`")]
    UnknownVariable { name: String, span: Span },
    #[error("qubit `{name}` used twice in one operation")]
    DuplicateOperand { name: String, span: Span },
    #[error("measurement branches end with different live qubits: {{{}}} vs {{{}}}", zero.join(", "), one.join(", "))]
    BranchContextMismatch {
        span: Span,
        zero: Vec<String>,
        one: Vec<String>,
    },
    #[error("qubit `{name}` used after it was discarded at {discarded_at}")]
    UseAfterDiscard {
        name: String,
        span: Span,
        discarded_at: Span,
    },
    #[error("recursive call cycle {}", cycle.join(" -> "))]
    RecursionDetected { span: Span, cycle: Vec<String> },
    #[error("{what} takes {expected} qubit(s), {found} given")]
    ArityMismatch {
        span: Span,
        what: String,
        expected: usize,
        found: usize,
    },
    #[error("`new qbit {name}` shadows a live qubit")]
    ShadowedQubit { name: String, span: Span },
    #[error("unknown procedure `{name}`")]
    UnknownProcedure { name: String, span: Span },
    #[error("procedure `{name}` defined more than once")]
    DuplicateProcedure { name: String, span: Span },
    #[error("parameter `{name}` listed more than once")]
    DuplicateParameter { name: String, span: Span },
    #[error("no procedure named `main`")]
    MissingMain,
    #[error("`main` must not take parameters")]
    MainHasParameters { span: Span },
    #[error("loop body changes the live qubits: {{{}}} before, {{{}}} after", before.join(", "), after.join(", "))]
    LoopContextMismatch {
        span: Span,
        before: Vec<String>,
        after: Vec<String>,
    },
    #[error("procedure `{name}` must end with exactly its parameters live, found {{{}}}", found.join(", "))]
    ProcedureContextMismatch {
        name: String,
        span: Span,
        found: Vec<String>,
    },
}

impl TypeError {
    pub fn variant_name(&self) -> &'static str {
        match self {
            TypeError::UnknownVariable { .. } => "UnknownVariable",
            TypeError::DuplicateOperand { .. } => "DuplicateOperand",
            TypeError::BranchContextMismatch { .. } => "BranchContextMismatch",
            TypeError::UseAfterDiscard { .. } => "UseAfterDiscard",
            TypeError::RecursionDetected { .. } => "RecursionDetected",
            TypeError::ArityMismatch { .. } => "ArityMismatch",
            TypeError::ShadowedQubit { .. } => "ShadowedQubit",
            TypeError::UnknownProcedure { .. } => "UnknownProcedure",
            TypeError::DuplicateProcedure { .. } => "DuplicateProcedure",
            TypeError::DuplicateParameter { .. } => "DuplicateParameter",
            TypeError::MissingMain => "MissingMain",
            TypeError::MainHasParameters { .. } => "MainHasParameters",
            TypeError::LoopContextMismatch { .. } => "LoopContextMismatch",
            TypeError::ProcedureContextMismatch { .. } => "ProcedureContextMismatch",
        }
    }

    pub fn span(&self) -> Span {
        match self {
            TypeError::UnknownVariable { span, .. }
            | TypeError::DuplicateOperand { span, .. }
            | TypeError::BranchContextMismatch { span, .. }
            | TypeError::UseAfterDiscard { span, .. }
            | TypeError::RecursionDetected { span, .. }
            | TypeError::ArityMismatch { span, .. }
            | TypeError::ShadowedQubit { span, .. }
            | TypeError::UnknownProcedure { span, .. }
            | TypeError::DuplicateProcedure { span, .. }
            | TypeError::DuplicateParameter { span, .. }
            | TypeError::MainHasParameters { span }
            | TypeError::LoopContextMismatch { span, .. }
            | TypeError::ProcedureContextMismatch { span, .. } => *span,
            TypeError::MissingMain => Span::new(1, 1),
        }
    }
}

/// All errors found in one program, in source order.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct TypeErrors(pub Vec<TypeError>);

impl fmt::Display for TypeErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{}: {}: {}", e.span(), e.variant_name(), e)?;
        }
        Ok(())
    }
}

/// A program that passed [`typecheck`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypedProgram {
    program: Program,
}

impl TypedProgram {
    pub fn program(&self) -> &Program {
        &self.program
    }

    pub fn main(&self) -> &Proc {
        self.program.main().expect("typechecked programs have main")
    }

    pub fn proc(&self, name: &str) -> &Proc {
        self.program
            .proc(name)
            .expect("typechecked calls resolve")
    }
}

#[derive(Debug, Clone, Default)]
struct Context {
    live: BTreeSet<String>,
    discarded: BTreeMap<String, Span>,
}

impl Context {
    fn names(&self) -> Vec<String> {
        self.live.iter().cloned().collect()
    }

    fn absorb_discards(&mut self, other: &Context) {
        for (k, v) in &other.discarded {
            if !self.live.contains(k) {
                self.discarded.entry(k.clone()).or_insert(*v);
            }
        }
    }
}

struct Checker<'p> {
    program: &'p Program,
    errors: Vec<TypeError>,
}

impl Checker<'_> {
    fn require_live(&mut self, ctx: &Context, q: &Ident) -> bool {
        if ctx.live.contains(&q.name) {
            return true;
        }
        self.errors.push(match ctx.discarded.get(&q.name) {
            Some(&discarded_at) => TypeError::UseAfterDiscard {
                name: q.name.clone(),
                span: q.span,
                discarded_at,
            },
            None => TypeError::UnknownVariable {
                name: q.name.clone(),
                span: q.span,
            },
        });
        false
    }

    fn require_distinct(&mut self, operands: &[&Ident]) {
        let mut seen = BTreeSet::new();
        for q in operands {
            if !seen.insert(q.name.as_str()) {
                self.errors.push(TypeError::DuplicateOperand {
                    name: q.name.clone(),
                    span: q.span,
                });
            }
        }
    }

    fn block(&mut self, block: &Block, ctx: &mut Context) {
        for stmt in &block.stmts {
            match &stmt.kind {
                StmtKind::NewQbit(q) => {
                    if ctx.live.contains(&q.name) {
                        self.errors.push(TypeError::ShadowedQubit {
                            name: q.name.clone(),
                            span: q.span,
                        });
                    }
                    ctx.live.insert(q.name.clone());
                    ctx.discarded.remove(&q.name);
                }
                StmtKind::UnaryGate { target, gate } => {
                    if gate.arity() != 1 {
                        self.errors.push(TypeError::ArityMismatch {
                            span: stmt.span,
                            what: format!("gate {gate}"),
                            expected: gate.arity(),
                            found: 1,
                        });
                    }
                    self.require_live(ctx, target);
                }
                StmtKind::BinaryGate {
                    first,
                    second,
                    gate,
                } => {
                    if gate.arity() != 2 {
                        self.errors.push(TypeError::ArityMismatch {
                            span: stmt.span,
                            what: format!("gate {gate}"),
                            expected: gate.arity(),
                            found: 2,
                        });
                    }
                    self.require_live(ctx, first);
                    if first.name != second.name {
                        self.require_live(ctx, second);
                    }
                    self.require_distinct(&[first, second]);
                }
                StmtKind::Measure { qubit, zero, one } => {
                    self.require_live(ctx, qubit);
                    let mut c0 = ctx.clone();
                    self.block(zero, &mut c0);
                    let mut c1 = ctx.clone();
                    self.block(one, &mut c1);
                    if c0.live != c1.live {
                        self.errors.push(TypeError::BranchContextMismatch {
                            span: stmt.span,
                            zero: c0.names(),
                            one: c1.names(),
                        });
                    }
                    c0.absorb_discards(&c1);
                    *ctx = c0;
                }
                StmtKind::While { qubit, body } => {
                    self.require_live(ctx, qubit);
                    let mut inner = ctx.clone();
                    self.block(body, &mut inner);
                    if inner.live != ctx.live {
                        self.errors.push(TypeError::LoopContextMismatch {
                            span: stmt.span,
                            before: ctx.names(),
                            after: inner.names(),
                        });
                    }
                    ctx.absorb_discards(&inner);
                }
                StmtKind::Discard(q) => {
                    if self.require_live(ctx, q) {
                        ctx.live.remove(&q.name);
                        ctx.discarded.insert(q.name.clone(), q.span);
                    }
                }
                StmtKind::Call { callee, args } => {
                    match self.program.proc(&callee.name) {
                        None => self.errors.push(TypeError::UnknownProcedure {
                            name: callee.name.clone(),
                            span: callee.span,
                        }),
                        Some(p) if p.params.len() != args.len() => {
                            self.errors.push(TypeError::ArityMismatch {
                                span: stmt.span,
                                what: format!("procedure {}", callee.name),
                                expected: p.params.len(),
                                found: args.len(),
                            })
                        }
                        Some(_) => {}
                    }
                    let mut reported = BTreeSet::new();
                    for a in args {
                        if reported.insert(a.name.as_str()) {
                            self.require_live(ctx, a);
                        }
                    }
                    let refs: Vec<&Ident> = args.iter().collect();
                    self.require_distinct(&refs);
                }
            }
        }
    }

    fn check_recursion(&mut self) {
        let mut graph: BTreeMap<&str, Vec<(&str, Span)>> = BTreeMap::new();
        for p in &self.program.procs {
            let mut calls = Vec::new();
            collect_calls(&p.body, &mut calls);
            graph.entry(p.name.name.as_str()).or_default().extend(calls);
        }
        // Colour-marking DFS; every back edge closes a cycle.
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            Active,
            Done,
        }
        fn visit<'a>(
            node: &'a str,
            graph: &BTreeMap<&'a str, Vec<(&'a str, Span)>>,
            marks: &mut BTreeMap<&'a str, Mark>,
            stack: &mut Vec<&'a str>,
            errors: &mut Vec<TypeError>,
        ) {
            marks.insert(node, Mark::Active);
            stack.push(node);
            for &(callee, span) in graph.get(node).map(Vec::as_slice).unwrap_or_default() {
                match marks.get(callee) {
                    Some(Mark::Active) => {
                        let start = stack.iter().position(|&n| n == callee).expect("on stack");
                        let mut cycle: Vec<String> =
                            stack[start..].iter().map(|s| s.to_string()).collect();
                        cycle.push(callee.to_string());
                        errors.push(TypeError::RecursionDetected { span, cycle });
                    }
                    Some(Mark::Done) => {}
                    None if graph.contains_key(callee) => {
                        visit(callee, graph, marks, stack, errors)
                    }
                    None => {}
                }
            }
            stack.pop();
            marks.insert(node, Mark::Done);
        }
        let mut marks = BTreeMap::new();
        let mut errors = Vec::new();
        let roots: Vec<&str> = self.program.procs.iter().map(|p| p.name.name.as_str()).collect();
        for root in roots {
            if !marks.contains_key(root) {
                visit(root, &graph, &mut marks, &mut Vec::new(), &mut errors);
            }
        }
        self.errors.extend(errors);
    }
}

fn collect_calls<'a>(block: &'a Block, out: &mut Vec<(&'a str, Span)>) {
    for s in &block.stmts {
        match &s.kind {
            StmtKind::Call { callee, .. } => out.push((callee.name.as_str(), callee.span)),
            StmtKind::Measure { zero, one, .. } => {
                collect_calls(zero, out);
                collect_calls(one, out);
            }
            StmtKind::While { body, .. } => collect_calls(body, out),
            _ => {}
        }
    }
}

/// Checks linearity, arities, branch agreement and the call graph.
pub fn typecheck(program: &Program) -> Result<TypedProgram, TypeErrors> {
    let mut ck = Checker {
        program,
        errors: Vec::new(),
    };

    let mut names = BTreeSet::new();
    for p in &program.procs {
        if !names.insert(p.name.name.as_str()) {
            ck.errors.push(TypeError::DuplicateProcedure {
                name: p.name.name.clone(),
                span: p.name.span,
            });
        }
    }
    match program.main() {
        None => ck.errors.push(TypeError::MissingMain),
        Some(m) if !m.params.is_empty() => {
            ck.errors.push(TypeError::MainHasParameters { span: m.name.span })
        }
        Some(_) => {}
    }

    for p in &program.procs {
        let mut ctx = Context::default();
        for q in &p.params {
            if !ctx.live.insert(q.name.clone()) {
                ck.errors.push(TypeError::DuplicateParameter {
                    name: q.name.clone(),
                    span: q.span,
                });
            }
        }
        let params = ctx.live.clone();
        ck.block(&p.body, &mut ctx);
        if p.name.name != "main" && ctx.live != params {
            ck.errors.push(TypeError::ProcedureContextMismatch {
                name: p.name.name.clone(),
                span: p.name.span,
                found: ctx.names(),
            });
        }
    }
    ck.check_recursion();

    if ck.errors.is_empty() {
        Ok(TypedProgram {
            program: program.clone(),
        })
    } else {
        let mut errors = ck.errors;
        errors.sort_by_key(|e| e.span());
        Err(TypeErrors(errors))
    }
}
