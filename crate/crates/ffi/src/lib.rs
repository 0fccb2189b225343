//! C ABI over `hqsim`.
//!
//! Handles are opaque and owned by the caller once returned; free them with
//! the matching `*_free`. Every fallible call returns an [`HqStatus`]; on
//! failure [`hq_last_error_message`] describes the error on the calling
//! thread. Outcome and sample bit strings are byte arrays with one `0`/`1`
//! byte per qubit, qubit 0 first.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use hqsim::circuit::{Circuit, CircuitError};
use hqsim::engine::{EngineConfig, EngineError, Simulator};
use hqsim::sampler::{Sampler, SamplerError};
use hqsim::{BitString, GeneratorSpec};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HqStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidArgument = 2,
    ParseError = 3,
    ResourceLimit = 4,
    Internal = 5,
}

/// Exact amplitude `numerator / 2^exponent` with a 128-bit numerator split
/// into its high (signed) and low words, plus the nearest double.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct HqAmplitude {
    pub numerator_hi: i64,
    pub numerator_lo: u64,
    pub exponent: u32,
    pub value: f64,
}

pub struct HqCircuit {
    inner: Circuit,
}

pub struct HqSimulator {
    sim: Simulator,
    config: EngineConfig,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let text = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = text);
}

fn fail(status: HqStatus, msg: impl Into<String>) -> HqStatus {
    set_error(msg);
    status
}

fn engine_status(e: &EngineError) -> HqStatus {
    match e {
        EngineError::ResourceLimit { .. } => HqStatus::ResourceLimit,
        _ => HqStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> HqStatus) -> HqStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(HqStatus::Internal, "internal panic"))
}

fn read_bits(ptr: *const u8, len: usize) -> Result<BitString, HqStatus> {
    // SAFETY: caller guarantees `ptr` points at `len` readable bytes.
    let bytes = unsafe { std::slice::from_raw_parts(ptr, len) };
    let mut bits = Vec::with_capacity(len);
    for (i, &b) in bytes.iter().enumerate() {
        match b {
            0 => bits.push(false),
            1 => bits.push(true),
            _ => {
                return Err(fail(
                    HqStatus::InvalidArgument,
                    format!("outcome byte {i} is {b}, expected 0 or 1"),
                ))
            }
        }
    }
    Ok(BitString::from_bools(&bits))
}

/// Message for the last failed call on this thread. The pointer stays valid
/// until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn hq_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Generate a circuit with the default gate density.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn hq_circuit_generate(
    k: u32,
    seed: u64,
    extra_layers: usize,
    out: *mut *mut HqCircuit,
) -> HqStatus {
    if out.is_null() {
        return fail(HqStatus::NullArgument, "out is null");
    }
    guard(|| {
        match GeneratorSpec::new(k, seed)
            .with_extra_layers(extra_layers)
            .build()
        {
            Ok(c) => {
                *out = Box::into_raw(Box::new(HqCircuit { inner: c }));
                HqStatus::Ok
            }
            Err(e) => fail(HqStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Parse a JSON circuit document.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hq_circuit_from_json(
    json: *const c_char,
    out: *mut *mut HqCircuit,
) -> HqStatus {
    if json.is_null() || out.is_null() {
        return fail(HqStatus::NullArgument, "json or out is null");
    }
    guard(|| {
        let Ok(text) = CStr::from_ptr(json).to_str() else {
            return fail(HqStatus::ParseError, "circuit text is not UTF-8");
        };
        match Circuit::from_json(text) {
            Ok(c) => {
                *out = Box::into_raw(Box::new(HqCircuit { inner: c }));
                HqStatus::Ok
            }
            Err(e @ CircuitError::Parse { .. }) => fail(HqStatus::ParseError, e.to_string()),
            Err(e) => fail(HqStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Serialize to JSON; free the result with [`hq_string_free`].
///
/// # Safety
/// `circuit` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hq_circuit_to_json(
    circuit: *const HqCircuit,
    out: *mut *mut c_char,
) -> HqStatus {
    if circuit.is_null() || out.is_null() {
        return fail(HqStatus::NullArgument, "circuit or out is null");
    }
    guard(|| {
        let text = (*circuit).inner.to_json();
        match CString::new(text) {
            Ok(s) => {
                *out = s.into_raw();
                HqStatus::Ok
            }
            Err(_) => fail(HqStatus::Internal, "serialized circuit contains NUL"),
        }
    })
}

/// # Safety
/// `s` must come from this library, or be null.
#[no_mangle]
pub unsafe extern "C" fn hq_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Qubit count, or 0 for a null handle.
///
/// # Safety
/// `circuit` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn hq_circuit_num_qubits(circuit: *const HqCircuit) -> usize {
    circuit.as_ref().map_or(0, |c| c.inner.n())
}

/// # Safety
/// `circuit` must come from this library, or be null; it is invalid after.
#[no_mangle]
pub unsafe extern "C" fn hq_circuit_free(circuit: *mut HqCircuit) {
    if !circuit.is_null() {
        drop(Box::from_raw(circuit));
    }
}

/// Preprocess a circuit for amplitude queries. The simulator starts
/// single-threaded.
///
/// # Safety
/// `circuit` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hq_simulator_new(
    circuit: *const HqCircuit,
    out: *mut *mut HqSimulator,
) -> HqStatus {
    if circuit.is_null() || out.is_null() {
        return fail(HqStatus::NullArgument, "circuit or out is null");
    }
    guard(|| match Simulator::new(&(*circuit).inner) {
        Ok(sim) => {
            *out = Box::into_raw(Box::new(HqSimulator {
                sim,
                config: EngineConfig::single_threaded(),
            }));
            HqStatus::Ok
        }
        Err(e) => fail(engine_status(&e), e.to_string()),
    })
}

/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn hq_simulator_set_threads(
    sim: *mut HqSimulator,
    threads: usize,
) -> HqStatus {
    let Some(s) = sim.as_mut() else {
        return fail(HqStatus::NullArgument, "simulator is null");
    };
    if threads == 0 {
        return fail(HqStatus::InvalidArgument, "threads must be at least 1");
    }
    s.config.threads = threads;
    HqStatus::Ok
}

/// # Safety
/// `sim` must come from this library, or be null; it is invalid after.
#[no_mangle]
pub unsafe extern "C" fn hq_simulator_free(sim: *mut HqSimulator) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Exact amplitude `<y|C|0>`.
///
/// # Safety
/// `sim` must be a live handle, `outcome` must point at `len` bytes and
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hq_amplitude(
    sim: *const HqSimulator,
    outcome: *const u8,
    len: usize,
    out: *mut HqAmplitude,
) -> HqStatus {
    if sim.is_null() || outcome.is_null() || out.is_null() {
        return fail(HqStatus::NullArgument, "simulator, outcome or out is null");
    }
    guard(|| {
        let s = &*sim;
        if len != s.sim.n() {
            return fail(
                HqStatus::InvalidArgument,
                format!("outcome has {len} bits, expected {}", s.sim.n()),
            );
        }
        let y = match read_bits(outcome, len) {
            Ok(y) => y,
            Err(status) => return status,
        };
        match s.sim.amplitude(&y, &s.config) {
            Ok(r) => {
                let num = r.amplitude.numerator();
                *out = HqAmplitude {
                    numerator_hi: (num >> 64) as i64,
                    numerator_lo: num as u64,
                    exponent: r.amplitude.exponent(),
                    value: r.amplitude.to_f64(),
                };
                HqStatus::Ok
            }
            Err(e) => fail(engine_status(&e), e.to_string()),
        }
    })
}

/// Draw `count` samples into `out`, `n` bytes per sample back to back.
///
/// # Safety
/// `circuit` must be a live handle and `out` must point at `out_len`
/// writable bytes.
#[no_mangle]
pub unsafe extern "C" fn hq_sample(
    circuit: *const HqCircuit,
    seed: u64,
    count: usize,
    out: *mut u8,
    out_len: usize,
) -> HqStatus {
    if circuit.is_null() || out.is_null() {
        return fail(HqStatus::NullArgument, "circuit or out is null");
    }
    guard(|| {
        let c = &(*circuit).inner;
        let n = c.n();
        if count.checked_mul(n) != Some(out_len) {
            return fail(
                HqStatus::InvalidArgument,
                format!("buffer holds {out_len} bytes, need {count} x {n}"),
            );
        }
        let samples = match Sampler::new(c).and_then(|s| s.sample(seed, count)) {
            Ok(v) => v,
            Err(
                e @ SamplerError::Engine {
                    source: EngineError::ResourceLimit { .. },
                    ..
                },
            ) => return fail(HqStatus::ResourceLimit, e.to_string()),
            Err(e) => return fail(HqStatus::InvalidArgument, e.to_string()),
        };
        let buf = std::slice::from_raw_parts_mut(out, out_len);
        for (chunk, s) in buf.chunks_exact_mut(n.max(1)).zip(&samples) {
            for (q, b) in chunk.iter_mut().enumerate() {
                *b = s.get(q) as u8;
            }
        }
        HqStatus::Ok
    })
}
