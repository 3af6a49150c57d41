use std::fmt::Write;

use super::ast::{Block, Program, StmtKind};

/// Canonical source text: one statement per line, two-space indentation.
pub fn pretty(p: &Program) -> String {
    let mut out = String::new();
    for (i, proc) in p.procs.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let params: Vec<String> = proc
            .params
            .iter()
            .map(|q| format!("{}: qbit", q.name))
            .collect();
        write!(out, "proc {}({}) ", proc.name.name, params.join(", ")).unwrap();
        block(&mut out, &proc.body, 0);
        out.push('\n');
    }
    out
}

fn indent(out: &mut String, level: usize) {
    out.push_str(&"  ".repeat(level));
}

fn block(out: &mut String, b: &Block, level: usize) {
    out.push_str("{\n");
    for s in &b.stmts {
        indent(out, level + 1);
        match &s.kind {
            StmtKind::NewQbit(q) => writeln!(out, "new qbit {};", q.name).unwrap(),
            StmtKind::UnaryGate { target, gate } => {
                writeln!(out, "{} *= {};", target.name, gate).unwrap()
            }
            StmtKind::BinaryGate {
                first,
                second,
                gate,
            } => writeln!(out, "{}, {} *= {};", first.name, second.name, gate).unwrap(),
            StmtKind::Measure { qubit, zero, one } => {
                writeln!(out, "measure {} {{", qubit.name).unwrap();
                indent(out, level + 2);
                out.push_str("0: ");
                block(out, zero, level + 2);
                out.push('\n');
                indent(out, level + 2);
                out.push_str("1: ");
                block(out, one, level + 2);
                out.push('\n');
                indent(out, level + 1);
                out.push_str("}\n");
            }
            StmtKind::While { qubit, body } => {
                write!(out, "while {} ", qubit.name).unwrap();
                block(out, body, level + 1);
                out.push('\n');
            }
            StmtKind::Discard(q) => writeln!(out, "discard {};", q.name).unwrap(),
            StmtKind::Call { callee, args } => {
                let args: Vec<&str> = args.iter().map(|a| a.name.as_str()).collect();
                writeln!(out, "call {}({});", callee.name, args.join(", ")).unwrap()
            }
        }
    }
    indent(out, level);
    out.push('}');
}
