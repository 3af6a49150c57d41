//! Flow-chart quantum programs with quantum data and classical control.
//!
//! The crate is organised bottom-up:
//!
//! * [`densmat`]: dense complex matrices and the density-operator calculus
//!   (gate embedding, measurement split, merge, partial trace).
//! * [`gates`]: the built-in gate catalog, controlled gates, phase-invariant
//!   distance and brute-force synthesis of small unitaries.
//! * [`lang`]: the `.qfc` surface language: parser, pretty-printer and the
//!   linear type checker that rejects cloning of qubits.
//! * [`interp`]: exact execution on unnormalized density matrices, where the
//!   trace of each edge state is the probability of reaching that edge.
//! * [`qram`]: an instruction-level device simulator driven by a classical
//!   controller that only ever sees measurement bits.
//! * [`report`]: the JSON documents shared by the CLI and the C API.
//! * [`cli`]: the `qfc` command line.

pub mod cli;
pub mod densmat;
pub mod gates;
pub mod interp;
pub mod json;
pub mod lang;
pub mod qram;
pub mod random;
pub mod report;

pub use densmat::{ComplexMatrix, DensityMatrix, QubitIndex};
pub use gates::{Gate, GateDef};
pub use interp::{run_exact, InterpConfig, RunResult};
pub use lang::{parse, typecheck, Program, TypedProgram};
pub use qram::{run_shots, QramDevice, ShotConfig, ShotReport};
