use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::densmat::{ComplexMatrix, Complex64};
use crate::gates::Gate;

/// Largest pool a device will simulate; the state vector has `2^n` entries.
pub const MAX_POOL: usize = 20;

pub type Addr = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Instruction {
    Alloc,
    ApplyUnary(Gate, Addr),
    ApplyBinary(Gate, Addr, Addr),
    Measure(Addr),
    Free(Addr),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FaultCode {
    UnknownAddress,
    PoolExhausted,
    DuplicateAddress,
    ArityMismatch,
}

impl FaultCode {
    pub fn as_str(self) -> &'static str {
        match self {
            FaultCode::UnknownAddress => "UnknownAddress",
            FaultCode::PoolExhausted => "PoolExhausted",
            FaultCode::DuplicateAddress => "DuplicateAddress",
            FaultCode::ArityMismatch => "ArityMismatch",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "UnknownAddress" => FaultCode::UnknownAddress,
            "PoolExhausted" => FaultCode::PoolExhausted,
            "DuplicateAddress" => FaultCode::DuplicateAddress,
            "ArityMismatch" => FaultCode::ArityMismatch,
            _ => return None,
        })
    }
}

impl fmt::Display for FaultCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DeviceReply {
    Allocated(Addr),
    Bit(u8),
    Ack,
    Fault(FaultCode),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LogEntry {
    pub instruction: Instruction,
    pub reply: DeviceReply,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("pool size {0} exceeds the simulator limit of {MAX_POOL}")]
pub struct PoolTooLarge(pub usize);

/// A single-trajectory quantum memory behind an instruction channel.
///
/// The state is a pure vector over the in-use addresses. Register position 0
/// is the most significant bit of the amplitude index; a fresh allocation is
/// appended as the least significant position.
#[derive(Debug, Clone)]
pub struct QramDevice {
    pool_size: usize,
    seed: u64,
    rng: ChaCha8Rng,
    slots: Vec<Addr>,
    amps: Vec<Complex64>,
    record: bool,
    log: Vec<LogEntry>,
}

impl QramDevice {
    pub fn new(pool_size: usize, seed: u64) -> Result<Self, PoolTooLarge> {
        if pool_size > MAX_POOL {
            return Err(PoolTooLarge(pool_size));
        }
        Ok(Self {
            pool_size,
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
            slots: Vec::new(),
            amps: vec![Complex64::new(1.0, 0.0)],
            record: true,
            log: Vec::new(),
        })
    }

    /// Turns instruction logging on or off (on by default).
    pub fn set_logging(&mut self, on: bool) {
        self.record = on;
    }

    pub fn pool_size(&self) -> usize {
        self.pool_size
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn log(&self) -> &[LogEntry] {
        &self.log
    }

    pub fn take_log(&mut self) -> Vec<LogEntry> {
        std::mem::take(&mut self.log)
    }

    /// In-use addresses in register order.
    pub fn in_use(&self) -> &[Addr] {
        &self.slots
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn position(&self, addr: Addr) -> Option<usize> {
        self.slots.iter().position(|&a| a == addr)
    }

    pub fn step(&mut self, ins: Instruction) -> DeviceReply {
        let reply = self.execute(ins);
        if self.record {
            self.log.push(LogEntry {
                instruction: ins,
                reply,
            });
        }
        reply
    }

    fn execute(&mut self, ins: Instruction) -> DeviceReply {
        match ins {
            Instruction::Alloc => match (0..self.pool_size).find(|a| !self.slots.contains(a)) {
                None => DeviceReply::Fault(FaultCode::PoolExhausted),
                Some(addr) => {
                    let mut amps = vec![Complex64::new(0.0, 0.0); self.amps.len() * 2];
                    for (i, &a) in self.amps.iter().enumerate() {
                        amps[2 * i] = a;
                    }
                    self.amps = amps;
                    self.slots.push(addr);
                    DeviceReply::Allocated(addr)
                }
            },
            Instruction::ApplyUnary(gate, addr) => {
                if gate.arity() != 1 {
                    return DeviceReply::Fault(FaultCode::ArityMismatch);
                }
                let Some(p) = self.position(addr) else {
                    return DeviceReply::Fault(FaultCode::UnknownAddress);
                };
                self.apply(&gate.matrix(), &[p]);
                DeviceReply::Ack
            }
            Instruction::ApplyBinary(gate, a, b) => {
                if gate.arity() != 2 {
                    return DeviceReply::Fault(FaultCode::ArityMismatch);
                }
                let (Some(pa), Some(pb)) = (self.position(a), self.position(b)) else {
                    return DeviceReply::Fault(FaultCode::UnknownAddress);
                };
                if a == b {
                    return DeviceReply::Fault(FaultCode::DuplicateAddress);
                }
                self.apply(&gate.matrix(), &[pa, pb]);
                DeviceReply::Ack
            }
            Instruction::Measure(addr) => match self.position(addr) {
                None => DeviceReply::Fault(FaultCode::UnknownAddress),
                Some(p) => DeviceReply::Bit(self.measure(p)),
            },
            Instruction::Free(addr) => {
                let Some(p) = self.position(addr) else {
                    return DeviceReply::Fault(FaultCode::UnknownAddress);
                };
                if self.measure(p) == 1 {
                    self.apply(&Gate::N.matrix(), &[p]);
                }
                self.detach(p);
                DeviceReply::Ack
            }
        }
    }

    fn bit_of(&self, p: usize) -> usize {
        1 << (self.slots.len() - 1 - p)
    }

    fn apply(&mut self, gate: &ComplexMatrix, positions: &[usize]) {
        let k = positions.len();
        let offsets: Vec<usize> = (0..1usize << k)
            .map(|j| {
                positions
                    .iter()
                    .enumerate()
                    .filter(|(t, _)| j >> (k - 1 - t) & 1 == 1)
                    .map(|(_, &p)| self.bit_of(p))
                    .sum()
            })
            .collect();
        let mask = *offsets.last().expect("nonempty");
        let mut buf = vec![Complex64::new(0.0, 0.0); offsets.len()];
        for base in 0..self.amps.len() {
            if base & mask != 0 {
                continue;
            }
            for (b, &off) in buf.iter_mut().zip(&offsets) {
                *b = self.amps[base + off];
            }
            for (r, &off) in offsets.iter().enumerate() {
                self.amps[base + off] = buf
                    .iter()
                    .enumerate()
                    .map(|(c, v)| gate[(r, c)] * v)
                    .sum();
            }
        }
    }

    /// Born-rule sample of position `p`, then collapse and renormalize.
    fn measure(&mut self, p: usize) -> u8 {
        let bit = self.bit_of(p);
        let p1: f64 = self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & bit != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum();
        let u: f64 = self.rng.gen();
        let outcome = u8::from(u < p1);
        let keep = if outcome == 1 { p1 } else { 1.0 - p1 };
        let scale = 1.0 / keep.sqrt();
        for (i, a) in self.amps.iter_mut().enumerate() {
            if (i & bit != 0) == (outcome == 1) {
                *a *= scale;
            } else {
                *a = Complex64::new(0.0, 0.0);
            }
        }
        outcome
    }

    /// Drops position `p`, which must hold |0⟩.
    fn detach(&mut self, p: usize) {
        let bit = self.bit_of(p);
        let low = bit - 1;
        self.amps = (0..self.amps.len() / 2)
            .map(|i| self.amps[((i & !low) << 1) | (i & low)])
            .collect();
        self.slots.remove(p);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fresh() -> QramDevice {
        QramDevice::new(4, 9).unwrap()
    }

    #[test]
    fn alloc_starts_at_zero() {
        let mut d = fresh();
        assert_eq!(d.step(Instruction::Alloc), DeviceReply::Allocated(0));
        assert_eq!(d.step(Instruction::Measure(0)), DeviceReply::Bit(0));
    }

    #[test]
    fn free_resets_flipped_qubit() {
        for seed in 0..50 {
            let mut d = QramDevice::new(4, seed).unwrap();
            d.step(Instruction::Alloc);
            d.step(Instruction::ApplyUnary(Gate::N, 0));
            assert_eq!(d.step(Instruction::Free(0)), DeviceReply::Ack);
            assert_eq!(d.step(Instruction::Alloc), DeviceReply::Allocated(0));
            assert_eq!(d.step(Instruction::Measure(0)), DeviceReply::Bit(0));
        }
    }

    #[test]
    fn faults() {
        let mut d = fresh();
        assert_eq!(
            d.step(Instruction::ApplyUnary(Gate::H, 7)),
            DeviceReply::Fault(FaultCode::UnknownAddress)
        );
        d.step(Instruction::Alloc);
        assert_eq!(
            d.step(Instruction::ApplyBinary(Gate::Nc, 0, 0)),
            DeviceReply::Fault(FaultCode::DuplicateAddress)
        );
        assert_eq!(
            d.step(Instruction::ApplyUnary(Gate::Nc, 0)),
            DeviceReply::Fault(FaultCode::ArityMismatch)
        );
        for _ in 0..3 {
            d.step(Instruction::Alloc);
        }
        assert_eq!(
            d.step(Instruction::Alloc),
            DeviceReply::Fault(FaultCode::PoolExhausted)
        );
        assert!(QramDevice::new(MAX_POOL + 1, 0).is_err());
    }

    #[test]
    fn lowest_free_address_is_reused() {
        let mut d = fresh();
        for _ in 0..3 {
            d.step(Instruction::Alloc);
        }
        d.step(Instruction::Free(1));
        assert_eq!(d.step(Instruction::Alloc), DeviceReply::Allocated(1));
        assert_eq!(d.in_use(), [0, 2, 1]);
    }

    #[test]
    fn binary_gate_targets_follow_addresses() {
        // Control on address 2, target address 0; register order 0,1,2.
        let mut d = fresh();
        for _ in 0..3 {
            d.step(Instruction::Alloc);
        }
        d.step(Instruction::ApplyUnary(Gate::N, 2));
        d.step(Instruction::ApplyBinary(Gate::Nc, 2, 0));
        assert_eq!(d.step(Instruction::Measure(0)), DeviceReply::Bit(1));
        assert_eq!(d.step(Instruction::Measure(1)), DeviceReply::Bit(0));
        assert_eq!(d.step(Instruction::Measure(2)), DeviceReply::Bit(1));
    }

    #[test]
    fn free_leaves_product_state() {
        for seed in 0..20 {
            let mut d = QramDevice::new(3, seed).unwrap();
            for _ in 0..3 {
                d.step(Instruction::Alloc);
            }
            d.step(Instruction::ApplyUnary(Gate::H, 0));
            d.step(Instruction::ApplyBinary(Gate::Nc, 0, 1));
            d.step(Instruction::ApplyBinary(Gate::Hc, 1, 2));
            d.step(Instruction::Free(1));
            let norm: f64 = d.amplitudes().iter().map(|a| a.norm_sqr()).sum();
            assert!((norm - 1.0).abs() < 1e-12);
            assert_eq!(d.amplitudes().len(), 4);
            d.step(Instruction::Alloc);
            // Address 1 is now the least significant position and must be |0⟩.
            for (i, a) in d.amplitudes().iter().enumerate() {
                if i & 1 == 1 {
                    assert!(a.norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn bit_replies_only_for_measure() {
        let mut d = fresh();
        d.step(Instruction::Alloc);
        d.step(Instruction::ApplyUnary(Gate::H, 0));
        d.step(Instruction::Measure(0));
        d.step(Instruction::Free(0));
        for e in d.log() {
            assert_eq!(
                matches!(e.reply, DeviceReply::Bit(_)),
                matches!(e.instruction, Instruction::Measure(_))
            );
        }
    }
}
