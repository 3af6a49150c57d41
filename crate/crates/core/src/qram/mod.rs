//! Instruction-level model of a quantum memory driven by a classical
//! controller. The device answers gate and allocation requests with
//! acknowledgements and measurement requests with bits; nothing else about
//! the quantum state leaves it.
//!
//! Freeing an address resets it by measuring and, on outcome 1, applying `N`,
//! so a re-allocated address always starts in |0⟩.

mod device;
mod log;
mod shots;

pub use device::{
    Addr, DeviceReply, FaultCode, Instruction, LogEntry, PoolTooLarge, QramDevice, MAX_POOL,
};
pub use log::{format_log, parse_log, replay, LogParseError, ReplayError};
pub use shots::{
    run_shots, run_single_shot, shot_seed, splitmix64, ShotConfig, ShotError, ShotReport,
    ShotTrace,
};
