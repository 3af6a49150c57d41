//! Text form of an instruction log and replay against a fresh device.
//!
//! One entry per line: `ALLOC -> 3`, `APPLY Hc 0 2 -> ACK`, `MEASURE 0 -> 1`,
//! `FREE 0 -> ACK`, `APPLY H 7 -> FAULT UnknownAddress`.

use std::fmt;

use thiserror::Error;

use super::device::{DeviceReply, FaultCode, Instruction, LogEntry, PoolTooLarge, QramDevice};
use crate::gates::Gate;

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instruction::Alloc => write!(f, "ALLOC"),
            Instruction::ApplyUnary(g, a) => write!(f, "APPLY {g} {a}"),
            Instruction::ApplyBinary(g, a, b) => write!(f, "APPLY {g} {a} {b}"),
            Instruction::Measure(a) => write!(f, "MEASURE {a}"),
            Instruction::Free(a) => write!(f, "FREE {a}"),
        }
    }
}

impl fmt::Display for DeviceReply {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DeviceReply::Allocated(a) => write!(f, "{a}"),
            DeviceReply::Bit(b) => write!(f, "{b}"),
            DeviceReply::Ack => write!(f, "ACK"),
            DeviceReply::Fault(c) => write!(f, "FAULT {c}"),
        }
    }
}

impl fmt::Display for LogEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.instruction, self.reply)
    }
}

pub fn format_log(log: &[LogEntry]) -> String {
    log.iter().map(|e| format!("{e}\n")).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("log line {line}: {message}")]
pub struct LogParseError {
    pub line: usize,
    pub message: String,
}

fn parse_entry(text: &str) -> Result<LogEntry, String> {
    let (ins, reply) = text
        .split_once("->")
        .ok_or_else(|| "missing `->`".to_string())?;
    let words: Vec<&str> = ins.split_whitespace().collect();
    let addr = |s: &str| s.parse::<usize>().map_err(|_| format!("bad address `{s}`"));
    let gate = |s: &str| s.parse::<Gate>().map_err(|e| e.to_string());
    let instruction = match words.as_slice() {
        ["ALLOC"] => Instruction::Alloc,
        ["APPLY", g, a] => Instruction::ApplyUnary(gate(g)?, addr(a)?),
        ["APPLY", g, a, b] => Instruction::ApplyBinary(gate(g)?, addr(a)?, addr(b)?),
        ["MEASURE", a] => Instruction::Measure(addr(a)?),
        ["FREE", a] => Instruction::Free(addr(a)?),
        _ => return Err(format!("unrecognized instruction `{}`", ins.trim())),
    };
    let words: Vec<&str> = reply.split_whitespace().collect();
    let reply = match (words.as_slice(), instruction) {
        (["ACK"], _) => DeviceReply::Ack,
        (["FAULT", code], _) => DeviceReply::Fault(
            FaultCode::parse(code).ok_or_else(|| format!("unknown fault `{code}`"))?,
        ),
        ([a], Instruction::Alloc) => DeviceReply::Allocated(addr(a)?),
        (["0"], Instruction::Measure(_)) => DeviceReply::Bit(0),
        (["1"], Instruction::Measure(_)) => DeviceReply::Bit(1),
        _ => return Err(format!("unrecognized reply `{}`", reply.trim())),
    };
    Ok(LogEntry { instruction, reply })
}

/// Parses the text form; blank lines are skipped.
pub fn parse_log(text: &str) -> Result<Vec<LogEntry>, LogParseError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            parse_entry(l).map_err(|message| LogParseError {
                line: i + 1,
                message,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplayError {
    #[error(transparent)]
    Pool(#[from] PoolTooLarge),
    #[error("entry {index}: `{instruction}` replied {found}, log says {expected}")]
    Mismatch {
        index: usize,
        instruction: Instruction,
        expected: DeviceReply,
        found: DeviceReply,
    },
}

/// Re-executes `log` on a fresh device seeded with `seed` and checks every
/// reply.
pub fn replay(log: &[LogEntry], pool_size: usize, seed: u64) -> Result<(), ReplayError> {
    let mut dev = QramDevice::new(pool_size, seed)?;
    dev.set_logging(false);
    for (index, e) in log.iter().enumerate() {
        let found = dev.step(e.instruction);
        if found != e.reply {
            return Err(ReplayError::Mismatch {
                index,
                instruction: e.instruction,
                expected: e.reply,
                found,
            });
        }
    }
    Ok(())
}
