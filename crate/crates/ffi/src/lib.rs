//! C ABI for `qfc`.
//!
//! Handles are opaque pointers owned by the caller and released with the
//! matching `*_free` function. Every fallible call returns a [`QfcStatus`].
//! Calls that produce text hand back a NUL-terminated UTF-8 string through an
//! out-parameter; on failure that string is a JSON error document instead of
//! the result. Strings are released with [`qfc_string_free`].
//!
//! Handles are not synchronised: a `QfcProgram` may be shared between threads
//! for reading, a `QfcDevice` must not be used from two threads at once.

use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qfc::densmat::{matrix_from_json, DensityMatrix};
use qfc::gates::{default_max_depth, synthesize, Gate, SynthOutcome};
use qfc::interp::{run_exact, InterpConfig, InterpError};
use qfc::lang::{check_source, CheckOutcome, TypedProgram};
use qfc::qram::{format_log, run_shots, DeviceReply, FaultCode, Instruction, QramDevice, ShotConfig, ShotError};
use qfc::report;
use serde_json::Value;

/// Default synthesis tolerance.
pub const QFC_DEFAULT_EPS: f64 = 1e-10;

/// Largest QRAM pool a device accepts.
pub const QFC_MAX_POOL: usize = 20;

const _: () = assert!(QFC_MAX_POOL == qfc::qram::MAX_POOL);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QfcStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    TypeError = 4,
    /// An option or input document was rejected.
    InvalidArgument = 5,
    /// The program needs more qubits than allowed.
    LimitExceeded = 6,
    /// A sampled shot drove the device into a fault.
    DeviceFault = 7,
    /// Synthesis found no sequence within the depth bound. The result
    /// document is still written.
    NotFound = 8,
    /// An internal error was caught at the boundary.
    Panic = 9,
}

impl QfcStatus {
    fn name(self) -> &'static str {
        match self {
            QfcStatus::Ok => "Ok",
            QfcStatus::NullArgument => "NullArgument",
            QfcStatus::InvalidUtf8 => "InvalidUtf8",
            QfcStatus::ParseError => "ParseError",
            QfcStatus::TypeError => "TypeError",
            QfcStatus::InvalidArgument => "InvalidArgument",
            QfcStatus::LimitExceeded => "LimitExceeded",
            QfcStatus::DeviceFault => "DeviceFault",
            QfcStatus::NotFound => "NotFound",
            QfcStatus::Panic => "Panic",
        }
    }

    fn c_name(self) -> &'static CStr {
        match self {
            QfcStatus::Ok => c"Ok",
            QfcStatus::NullArgument => c"NullArgument",
            QfcStatus::InvalidUtf8 => c"InvalidUtf8",
            QfcStatus::ParseError => c"ParseError",
            QfcStatus::TypeError => c"TypeError",
            QfcStatus::InvalidArgument => c"InvalidArgument",
            QfcStatus::LimitExceeded => c"LimitExceeded",
            QfcStatus::DeviceFault => c"DeviceFault",
            QfcStatus::NotFound => c"NotFound",
            QfcStatus::Panic => c"Panic",
        }
    }
}

/// A parsed and typechecked program.
pub struct QfcProgram(TypedProgram);

/// A QRAM device with its own random stream.
pub struct QfcDevice(QramDevice);

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct QfcExactOptions {
    pub max_qubits: usize,
    pub loop_tol: f64,
    pub max_iters: usize,
    pub keep_branches: bool,
    /// Optional JSON matrix bound to the leading allocations of `main`; may be null.
    pub input_state_json: *const c_char,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct QfcShotOptions {
    pub shots: u64,
    pub seed: u64,
    pub pool_size: usize,
    pub max_iters: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QfcOpcode {
    Alloc = 0,
    Apply = 1,
    Measure = 2,
    Free = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QfcGate {
    N = 0,
    H = 1,
    V = 2,
    W = 3,
    Nc = 4,
    Hc = 5,
    Vc = 6,
    Wc = 7,
    X = 8,
}

impl From<QfcGate> for Gate {
    fn from(g: QfcGate) -> Gate {
        match g {
            QfcGate::N => Gate::N,
            QfcGate::H => Gate::H,
            QfcGate::V => Gate::V,
            QfcGate::W => Gate::W,
            QfcGate::Nc => Gate::Nc,
            QfcGate::Hc => Gate::Hc,
            QfcGate::Vc => Gate::Vc,
            QfcGate::Wc => Gate::Wc,
            QfcGate::X => Gate::X,
        }
    }
}

/// `gate` and `b` are read only by `Apply`; `b` only for two-qubit gates.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct QfcInstruction {
    pub opcode: QfcOpcode,
    pub gate: QfcGate,
    pub a: usize,
    pub b: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QfcReplyKind {
    Allocated = 0,
    Bit = 1,
    Ack = 2,
    Fault = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QfcFault {
    None = 0,
    UnknownAddress = 1,
    PoolExhausted = 2,
    DuplicateAddress = 3,
    ArityMismatch = 4,
}

/// `value` is the address for `Allocated` and the bit for `Bit`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QfcReply {
    pub kind: QfcReplyKind,
    pub value: usize,
    pub fault: QfcFault,
}

struct Failure {
    status: QfcStatus,
    message: String,
    diagnostics: Vec<Value>,
}

impl Failure {
    fn new(status: QfcStatus, message: impl ToString) -> Self {
        Self {
            status,
            message: message.to_string(),
            diagnostics: Vec::new(),
        }
    }

    fn document(&self) -> String {
        report::render(&report::error_document(self.status.name(), &self.message, &self.diagnostics))
    }
}

type Outcome = Result<(QfcStatus, String), Failure>;

fn into_c_string(s: String) -> *mut c_char {
    // JSON text and logs never contain NUL.
    CString::new(s).map(CString::into_raw).unwrap_or(ptr::null_mut())
}

/// Writes `text` or the error document to `out` (if non-null) and returns the status.
unsafe fn finish(out: *mut *mut c_char, f: impl FnOnce() -> Outcome) -> QfcStatus {
    let result = catch_unwind(AssertUnwindSafe(f))
        .unwrap_or_else(|_| Err(Failure::new(QfcStatus::Panic, "internal error")));
    let (status, text) = match result {
        Ok(pair) => pair,
        Err(e) => (e.status, e.document()),
    };
    if !out.is_null() {
        *out = into_c_string(text);
    }
    status
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::new(QfcStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure::new(QfcStatus::InvalidUtf8, format!("{what}: {e}")))
}

fn interp_failure(e: InterpError) -> Failure {
    let status = match e {
        InterpError::QubitCapExceeded { .. } => QfcStatus::LimitExceeded,
        _ => QfcStatus::InvalidArgument,
    };
    Failure::new(status, e)
}

fn shot_failure(e: ShotError) -> Failure {
    let status = match e {
        ShotError::Fault { .. } => QfcStatus::DeviceFault,
        _ => QfcStatus::InvalidArgument,
    };
    Failure::new(status, e)
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn qfc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Name of a status code as a static string.
#[no_mangle]
pub extern "C" fn qfc_status_name(status: QfcStatus) -> *const c_char {
    status.c_name().as_ptr()
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn qfc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses and typechecks `len` bytes of source. On success `*out` receives a
/// program handle; otherwise `*error_json` (if non-null) receives an error
/// document listing diagnostics.
///
/// # Safety
/// `src` must point to `len` readable bytes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qfc_program_compile(
    src: *const u8,
    len: usize,
    out: *mut *mut QfcProgram,
    error_json: *mut *mut c_char,
) -> QfcStatus {
    if !error_json.is_null() {
        *error_json = ptr::null_mut();
    }
    if out.is_null() {
        return QfcStatus::NullArgument;
    }
    *out = ptr::null_mut();
    let result = catch_unwind(AssertUnwindSafe(|| {
        if src.is_null() && len > 0 {
            return Err(Failure::new(QfcStatus::NullArgument, "src is null"));
        }
        let bytes = if len == 0 { &[][..] } else { std::slice::from_raw_parts(src, len) };
        match check_source(bytes) {
            CheckOutcome::Typed(p) => Ok(p),
            CheckOutcome::Parse(e) => Err(Failure {
                status: QfcStatus::ParseError,
                message: e.to_string(),
                diagnostics: vec![report::parse_diagnostic(&e)],
            }),
            CheckOutcome::Type(errs) => Err(Failure {
                status: QfcStatus::TypeError,
                message: errs.to_string(),
                diagnostics: report::type_diagnostics(&errs),
            }),
        }
    }))
    .unwrap_or_else(|_| Err(Failure::new(QfcStatus::Panic, "internal error")));
    match result {
        Ok(p) => {
            *out = Box::into_raw(Box::new(QfcProgram(p)));
            QfcStatus::Ok
        }
        Err(e) => {
            if !error_json.is_null() {
                *error_json = into_c_string(e.document());
            }
            e.status
        }
    }
}

/// Releases a program. Null is ignored.
///
/// # Safety
/// `program` must come from [`qfc_program_compile`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn qfc_program_free(program: *mut QfcProgram) {
    if !program.is_null() {
        drop(Box::from_raw(program));
    }
}

#[no_mangle]
pub extern "C" fn qfc_exact_options_default() -> QfcExactOptions {
    let d = InterpConfig::default();
    QfcExactOptions {
        max_qubits: d.max_qubits,
        loop_tol: d.loop_tol,
        max_iters: d.max_iters,
        keep_branches: d.keep_branches,
        input_state_json: ptr::null(),
    }
}

#[no_mangle]
pub extern "C" fn qfc_shot_options_default() -> QfcShotOptions {
    let d = ShotConfig::default();
    QfcShotOptions {
        shots: d.shots,
        seed: d.seed,
        pool_size: d.pool_size,
        max_iters: d.max_iters,
    }
}

/// Runs the exact backend; `*out_json` receives the result or error document.
/// Null `options` means defaults.
///
/// # Safety
/// `program` must be a live handle; `options`, if non-null, must be readable.
#[no_mangle]
pub unsafe extern "C" fn qfc_run_exact(
    program: *const QfcProgram,
    options: *const QfcExactOptions,
    out_json: *mut *mut c_char,
) -> QfcStatus {
    finish(out_json, || {
        let program = program
            .as_ref()
            .ok_or_else(|| Failure::new(QfcStatus::NullArgument, "program is null"))?;
        let o = options.as_ref().copied().unwrap_or_else(|| qfc_exact_options_default());
        if !(o.loop_tol >= 0.0 && o.loop_tol.is_finite()) {
            return Err(Failure::new(QfcStatus::InvalidArgument, "loop_tol must be a nonnegative number"));
        }
        let input_state = if o.input_state_json.is_null() {
            None
        } else {
            let text = c_str(o.input_state_json, "input_state_json")?;
            let rho = matrix_from_json(text)
                .and_then(DensityMatrix::new)
                .map_err(|e| Failure::new(QfcStatus::InvalidArgument, format!("input state: {e}")))?;
            Some(rho)
        };
        let cfg = InterpConfig {
            max_qubits: o.max_qubits,
            loop_tol: o.loop_tol,
            max_iters: o.max_iters,
            keep_branches: o.keep_branches,
            input_state,
            ..InterpConfig::default()
        };
        let r = run_exact(&program.0, &cfg).map_err(interp_failure)?;
        Ok((QfcStatus::Ok, report::render(&report::exact_document(&r))))
    })
}

/// Runs the sampling backend; `*out_json` receives the result or error
/// document. Null `options` means defaults.
///
/// # Safety
/// `program` must be a live handle; `options`, if non-null, must be readable.
#[no_mangle]
pub unsafe extern "C" fn qfc_run_shots(
    program: *const QfcProgram,
    options: *const QfcShotOptions,
    out_json: *mut *mut c_char,
) -> QfcStatus {
    finish(out_json, || {
        let program = program
            .as_ref()
            .ok_or_else(|| Failure::new(QfcStatus::NullArgument, "program is null"))?;
        let o = options.as_ref().copied().unwrap_or_else(|| qfc_shot_options_default());
        let cfg = ShotConfig {
            shots: o.shots,
            seed: o.seed,
            pool_size: o.pool_size,
            max_iters: o.max_iters,
        };
        let r = run_shots(&program.0, &cfg).map_err(shot_failure)?;
        Ok((QfcStatus::Ok, report::render(&report::sample_document(&r))))
    })
}

/// Searches for a gate sequence equal to the JSON target up to phase.
/// `lines == 0` infers the line count from the target and `max_depth == 0`
/// uses the default bound for that many lines. Returns `NotFound` with the
/// search document when no sequence is within `eps`.
///
/// # Safety
/// `target_json` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn qfc_synthesize(
    target_json: *const c_char,
    lines: usize,
    eps: f64,
    max_depth: usize,
    out_json: *mut *mut c_char,
) -> QfcStatus {
    finish(out_json, || {
        let text = c_str(target_json, "target_json")?;
        let target =
            matrix_from_json(text).map_err(|e| Failure::new(QfcStatus::InvalidArgument, format!("target: {e}")))?;
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Failure::new(QfcStatus::InvalidArgument, "eps must be a positive number"));
        }
        let lines = if lines == 0 { target.num_qubits() } else { lines };
        let depth = if max_depth == 0 { default_max_depth(lines) } else { max_depth };
        let outcome =
            synthesize(&target, lines, eps, depth).map_err(|e| Failure::new(QfcStatus::InvalidArgument, e))?;
        let status = match outcome {
            SynthOutcome::Found { .. } => QfcStatus::Ok,
            SynthOutcome::NotFound { .. } => QfcStatus::NotFound,
        };
        Ok((status, report::render(&report::synth_document(&outcome))))
    })
}

/// Creates a device with `pool_size` addresses (at most [`QFC_MAX_POOL`]).
/// With `logging` set, every step is recorded for [`qfc_device_log`].
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qfc_device_new(
    pool_size: usize,
    seed: u64,
    logging: bool,
    out: *mut *mut QfcDevice,
) -> QfcStatus {
    if out.is_null() {
        return QfcStatus::NullArgument;
    }
    *out = ptr::null_mut();
    match QramDevice::new(pool_size, seed) {
        Ok(mut d) => {
            d.set_logging(logging);
            *out = Box::into_raw(Box::new(QfcDevice(d)));
            QfcStatus::Ok
        }
        Err(_) => QfcStatus::InvalidArgument,
    }
}

/// Executes one instruction. Device faults are ordinary replies, not errors.
///
/// # Safety
/// `device` must be a live handle, `instruction` readable, `reply` writable.
#[no_mangle]
pub unsafe extern "C" fn qfc_device_step(
    device: *mut QfcDevice,
    instruction: *const QfcInstruction,
    reply: *mut QfcReply,
) -> QfcStatus {
    let (Some(device), Some(ins), false) = (device.as_mut(), instruction.as_ref(), reply.is_null()) else {
        return QfcStatus::NullArgument;
    };
    let ins = match ins.opcode {
        QfcOpcode::Alloc => Instruction::Alloc,
        QfcOpcode::Apply => {
            let g = Gate::from(ins.gate);
            if g.arity() == 1 {
                Instruction::ApplyUnary(g, ins.a)
            } else {
                Instruction::ApplyBinary(g, ins.a, ins.b)
            }
        }
        QfcOpcode::Measure => Instruction::Measure(ins.a),
        QfcOpcode::Free => Instruction::Free(ins.a),
    };
    let Ok(r) = catch_unwind(AssertUnwindSafe(|| device.0.step(ins))) else {
        return QfcStatus::Panic;
    };
    *reply = match r {
        DeviceReply::Allocated(a) => QfcReply {
            kind: QfcReplyKind::Allocated,
            value: a,
            fault: QfcFault::None,
        },
        DeviceReply::Bit(b) => QfcReply {
            kind: QfcReplyKind::Bit,
            value: b as usize,
            fault: QfcFault::None,
        },
        DeviceReply::Ack => QfcReply {
            kind: QfcReplyKind::Ack,
            value: 0,
            fault: QfcFault::None,
        },
        DeviceReply::Fault(f) => QfcReply {
            kind: QfcReplyKind::Fault,
            value: 0,
            fault: match f {
                FaultCode::UnknownAddress => QfcFault::UnknownAddress,
                FaultCode::PoolExhausted => QfcFault::PoolExhausted,
                FaultCode::DuplicateAddress => QfcFault::DuplicateAddress,
                FaultCode::ArityMismatch => QfcFault::ArityMismatch,
            },
        },
    };
    QfcStatus::Ok
}

/// Writes the recorded instruction log, one entry per line, to `*out`.
///
/// # Safety
/// `device` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qfc_device_log(device: *const QfcDevice, out: *mut *mut c_char) -> QfcStatus {
    finish(out, || {
        let device = device
            .as_ref()
            .ok_or_else(|| Failure::new(QfcStatus::NullArgument, "device is null"))?;
        Ok((QfcStatus::Ok, format_log(device.0.log())))
    })
}

/// Releases a device. Null is ignored.
///
/// # Safety
/// `device` must come from [`qfc_device_new`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn qfc_device_free(device: *mut QfcDevice) {
    if !device.is_null() {
        drop(Box::from_raw(device));
    }
}
