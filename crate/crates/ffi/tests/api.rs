use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::ptr;

use qfc_ffi::*;
use serde_json::Value;

const BELL: &str = "proc main() { new qbit p; new qbit q; p *= H; p, q *= Nc;
                    measure p { 0: {} 1: {} } measure q { 0: {} 1: {} } }";

fn take(s: *mut c_char) -> String {
    assert!(!s.is_null());
    let text = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_owned();
    unsafe { qfc_string_free(s) };
    text
}

fn json(s: *mut c_char) -> Value {
    serde_json::from_str(&take(s)).unwrap()
}

fn compile(src: &str) -> Result<*mut QfcProgram, (QfcStatus, Value)> {
    let mut p = ptr::null_mut();
    let mut err = ptr::null_mut();
    let status = unsafe { qfc_program_compile(src.as_ptr(), src.len(), &mut p, &mut err) };
    if status == QfcStatus::Ok {
        assert!(err.is_null());
        Ok(p)
    } else {
        assert!(p.is_null());
        Err((status, json(err)))
    }
}

fn error_validator() -> jsonschema::Validator {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/schemas/error.schema.json");
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&schema).unwrap()
}

#[test]
fn exact_and_sampled_bell() {
    let p = compile(BELL).unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { qfc_run_exact(p, ptr::null(), &mut out) }, QfcStatus::Ok);
    let doc = json(out);
    assert_eq!(doc["backend"], "exact");
    let p00 = doc["outcomes"]["p=0,q=0"].as_f64().unwrap();
    assert!((p00 - 0.5).abs() < 1e-15);

    let mut opts = qfc_shot_options_default();
    opts.shots = 2000;
    opts.seed = 3;
    assert_eq!(unsafe { qfc_run_shots(p, &opts, &mut out) }, QfcStatus::Ok);
    let a = take(out);
    assert_eq!(unsafe { qfc_run_shots(p, &opts, &mut out) }, QfcStatus::Ok);
    assert_eq!(take(out), a);
    let doc: Value = serde_json::from_str(&a).unwrap();
    let c00 = doc["counts"]["p=0,q=0"].as_u64().unwrap();
    let c11 = doc["counts"]["p=1,q=1"].as_u64().unwrap();
    assert_eq!(c00 + c11, 2000);
    unsafe { qfc_program_free(p) };
}

#[test]
fn compile_errors_carry_diagnostics() {
    let v = error_validator();
    let (status, doc) = compile("proc main() {\n  new qbit p;\n  p, p *= X;\n}\n").unwrap_err();
    assert_eq!(status, QfcStatus::TypeError);
    assert!(v.is_valid(&doc), "{doc}");
    assert_eq!(doc["diagnostics"][0]["kind"], "DuplicateOperand");
    assert_eq!(doc["diagnostics"][0]["line"], 3);

    let (status, doc) = compile("proc main( {").unwrap_err();
    assert_eq!(status, QfcStatus::ParseError);
    assert!(v.is_valid(&doc), "{doc}");
    assert_eq!(doc["diagnostics"][0]["kind"], "ParseError");
}

#[test]
fn run_errors_are_error_documents() {
    let v = error_validator();
    let p = compile(BELL).unwrap();
    let mut out = ptr::null_mut();

    let mut opts = qfc_exact_options_default();
    opts.max_qubits = 1;
    assert_eq!(unsafe { qfc_run_exact(p, &opts, &mut out) }, QfcStatus::LimitExceeded);
    let doc = json(out);
    assert!(v.is_valid(&doc));
    assert_eq!(doc["error"], "LimitExceeded");

    let bad = CString::new(r#"{"dim": 2, "entries": [[[1,0],[1,0]],[[0,0],[0,0]]]}"#).unwrap();
    let mut opts = qfc_exact_options_default();
    opts.input_state_json = bad.as_ptr();
    assert_eq!(unsafe { qfc_run_exact(p, &opts, &mut out) }, QfcStatus::InvalidArgument);
    assert!(v.is_valid(&json(out)));

    let mut opts = qfc_shot_options_default();
    opts.shots = 0;
    assert_eq!(unsafe { qfc_run_shots(p, &opts, &mut out) }, QfcStatus::InvalidArgument);
    assert!(v.is_valid(&json(out)));

    assert_eq!(unsafe { qfc_run_exact(ptr::null(), ptr::null(), &mut out) }, QfcStatus::NullArgument);
    assert!(v.is_valid(&json(out)));
    unsafe { qfc_program_free(p) };
}

#[test]
fn input_state_is_bound() {
    let p = compile("proc main() { new qbit q; q *= N; }").unwrap();
    let rho = CString::new(r#"{"dim": 2, "entries": [[[0.25,0],[0,0]],[[0,0],[0.75,0]]]}"#).unwrap();
    let mut opts = qfc_exact_options_default();
    opts.input_state_json = rho.as_ptr();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { qfc_run_exact(p, &opts, &mut out) }, QfcStatus::Ok);
    let doc = json(out);
    assert!((doc["merged_rho"]["entries"][0][0][0].as_f64().unwrap() - 0.75).abs() < 1e-15);
    assert!((doc["merged_rho"]["entries"][1][1][0].as_f64().unwrap() - 0.25).abs() < 1e-15);
    unsafe { qfc_program_free(p) };
}

#[test]
fn synthesis_status() {
    let z = CString::new(r#"{"dim": 2, "entries": [[[1,0],[0,0]],[[0,0],[-1,0]]]}"#).unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { qfc_synthesize(z.as_ptr(), 0, QFC_DEFAULT_EPS, 0, &mut out) }, QfcStatus::Ok);
    let doc = json(out);
    let gates: Vec<&str> = doc["steps"].as_array().unwrap().iter().map(|s| s["gate"].as_str().unwrap()).collect();
    assert_eq!(gates, ["V", "V"]);

    let n = CString::new(r#"{"dim": 2, "entries": [[[0,0],[1,0]],[[1,0],[0,0]]]}"#).unwrap();
    assert_eq!(unsafe { qfc_synthesize(n.as_ptr(), 0, QFC_DEFAULT_EPS, 2, &mut out) }, QfcStatus::NotFound);
    let doc = json(out);
    assert_eq!(doc["max_depth"], 2);

    assert_eq!(unsafe { qfc_synthesize(z.as_ptr(), 0, -1.0, 0, &mut out) }, QfcStatus::InvalidArgument);
    assert!(error_validator().is_valid(&json(out)));
    assert_eq!(
        unsafe { qfc_synthesize(ptr::null(), 0, QFC_DEFAULT_EPS, 0, &mut out) },
        QfcStatus::NullArgument
    );
    take(out);
}

fn step(d: *mut QfcDevice, opcode: QfcOpcode, gate: QfcGate, a: usize, b: usize) -> QfcReply {
    let ins = QfcInstruction { opcode, gate, a, b };
    let mut reply = QfcReply {
        kind: QfcReplyKind::Ack,
        value: 0,
        fault: QfcFault::None,
    };
    assert_eq!(unsafe { qfc_device_step(d, &ins, &mut reply) }, QfcStatus::Ok);
    reply
}

#[test]
fn device_round_trip() {
    let mut d = ptr::null_mut();
    assert_eq!(unsafe { qfc_device_new(QFC_MAX_POOL + 1, 0, false, &mut d) }, QfcStatus::InvalidArgument);
    assert!(d.is_null());
    assert_eq!(unsafe { qfc_device_new(2, 9, true, &mut d) }, QfcStatus::Ok);

    let r = step(d, QfcOpcode::Alloc, QfcGate::N, 0, 0);
    assert_eq!((r.kind, r.value), (QfcReplyKind::Allocated, 0));
    step(d, QfcOpcode::Alloc, QfcGate::N, 0, 0);
    let r = step(d, QfcOpcode::Alloc, QfcGate::N, 0, 0);
    assert_eq!((r.kind, r.fault), (QfcReplyKind::Fault, QfcFault::PoolExhausted));
    assert_eq!(step(d, QfcOpcode::Apply, QfcGate::N, 0, 0).kind, QfcReplyKind::Ack);
    let r = step(d, QfcOpcode::Apply, QfcGate::Nc, 0, 1);
    assert_eq!(r.kind, QfcReplyKind::Ack);
    let r = step(d, QfcOpcode::Measure, QfcGate::N, 1, 0);
    assert_eq!((r.kind, r.value), (QfcReplyKind::Bit, 1));
    let r = step(d, QfcOpcode::Apply, QfcGate::Hc, 0, 0);
    assert_eq!(r.fault, QfcFault::DuplicateAddress);
    let r = step(d, QfcOpcode::Free, QfcGate::N, 7, 0);
    assert_eq!(r.fault, QfcFault::UnknownAddress);

    let mut out = ptr::null_mut();
    assert_eq!(unsafe { qfc_device_log(d, &mut out) }, QfcStatus::Ok);
    let log = take(out);
    assert_eq!(log.lines().count(), 8);
    assert!(log.contains("APPLY Nc 0 1 -> ACK"));
    assert!(log.contains("MEASURE 1 -> 1"));
    unsafe { qfc_device_free(d) };
}

#[test]
fn static_strings() {
    let name = unsafe { CStr::from_ptr(qfc_status_name(QfcStatus::DeviceFault)) };
    assert_eq!(name.to_str().unwrap(), "DeviceFault");
    let v = unsafe { CStr::from_ptr(qfc_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    unsafe {
        qfc_string_free(ptr::null_mut());
        qfc_program_free(ptr::null_mut());
        qfc_device_free(ptr::null_mut());
    }
}
