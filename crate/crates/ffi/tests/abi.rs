use std::ffi::{CStr, CString};
use std::ptr;

use hqsim::oracle::statevector;
use hqsim_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(hq_last_error_message()) }
        .to_string_lossy()
        .into_owned()
}

const SINGLE_CCZ: &str = r#"{"k": 1, "n": 6, "stages": [
  {"type": "diag", "gates": [{"kind": "ccz", "block": 0, "wires": [0, 1, 2]}]},
  {"type": "cnot", "dimension": 0, "orientation": [0]},
  {"type": "diag", "gates": []}
]}"#;

fn exact(a: &HqAmplitude) -> f64 {
    let num = ((a.numerator_hi as i128) << 64) | a.numerator_lo as i128;
    num as f64 / 2f64.powi(a.exponent as i32)
}

#[test]
fn single_ccz_amplitude_over_the_abi() {
    let json = CString::new(SINGLE_CCZ).unwrap();
    let mut c = ptr::null_mut();
    unsafe {
        assert_eq!(hq_circuit_from_json(json.as_ptr(), &mut c), HqStatus::Ok);
        assert_eq!(hq_circuit_num_qubits(c), 6);
        let mut sim = ptr::null_mut();
        assert_eq!(hq_simulator_new(c, &mut sim), HqStatus::Ok);
        let y = [0u8; 6];
        let mut a = HqAmplitude::default();
        assert_eq!(hq_amplitude(sim, y.as_ptr(), 6, &mut a), HqStatus::Ok);
        assert_eq!((a.numerator_hi, a.numerator_lo, a.exponent), (0, 3, 2));
        assert_eq!(a.value, 0.75);
        hq_simulator_free(sim);
        hq_circuit_free(c);
    }
}

#[test]
fn generated_circuit_matches_oracle() {
    let mut c = ptr::null_mut();
    unsafe {
        assert_eq!(hq_circuit_generate(2, 17, 1, &mut c), HqStatus::Ok);
        let mut text = ptr::null_mut();
        assert_eq!(hq_circuit_to_json(c, &mut text), HqStatus::Ok);
        let circuit = hqsim::Circuit::from_json(CStr::from_ptr(text).to_str().unwrap()).unwrap();
        hq_string_free(text);
        let state = statevector(&circuit).unwrap();

        let mut sim = ptr::null_mut();
        assert_eq!(hq_simulator_new(c, &mut sim), HqStatus::Ok);
        assert_eq!(hq_simulator_set_threads(sim, 2), HqStatus::Ok);
        for idx in (0..4096usize).step_by(37) {
            let y: Vec<u8> = (0..12).map(|q| (idx >> q & 1) as u8).collect();
            let mut a = HqAmplitude::default();
            assert_eq!(hq_amplitude(sim, y.as_ptr(), 12, &mut a), HqStatus::Ok);
            assert!((exact(&a) - state.amplitude_at(idx)).abs() < 1e-12);
            assert_eq!(exact(&a), a.value);
        }
        hq_simulator_free(sim);
        hq_circuit_free(c);
    }
}

#[test]
fn sampling_fills_buffer_deterministically() {
    let mut c = ptr::null_mut();
    unsafe {
        assert_eq!(hq_circuit_generate(1, 4, 0, &mut c), HqStatus::Ok);
        let mut a = vec![9u8; 6 * 50];
        let mut b = vec![9u8; 6 * 50];
        assert_eq!(hq_sample(c, 3, 50, a.as_mut_ptr(), a.len()), HqStatus::Ok);
        assert_eq!(hq_sample(c, 3, 50, b.as_mut_ptr(), b.len()), HqStatus::Ok);
        assert_eq!(a, b);
        assert!(a.iter().all(|&x| x <= 1));
        assert_eq!(
            hq_sample(c, 3, 50, a.as_mut_ptr(), 10),
            HqStatus::InvalidArgument
        );
        hq_circuit_free(c);
    }
}

#[test]
fn error_codes() {
    unsafe {
        let mut c = ptr::null_mut();
        assert_eq!(
            hq_circuit_generate(1, 0, 0, ptr::null_mut()),
            HqStatus::NullArgument
        );
        let bad = CString::new("{\"k\": 1,").unwrap();
        assert_eq!(
            hq_circuit_from_json(bad.as_ptr(), &mut c),
            HqStatus::ParseError
        );
        assert!(last_error().contains("parse error"));

        assert_eq!(hq_circuit_generate(1, 0, 0, &mut c), HqStatus::Ok);
        let mut sim = ptr::null_mut();
        assert_eq!(hq_simulator_new(c, &mut sim), HqStatus::Ok);
        let mut a = HqAmplitude::default();
        let short = [0u8; 5];
        assert_eq!(
            hq_amplitude(sim, short.as_ptr(), 5, &mut a),
            HqStatus::InvalidArgument
        );
        let wrong = [0u8, 1, 2, 0, 0, 0];
        assert_eq!(
            hq_amplitude(sim, wrong.as_ptr(), 6, &mut a),
            HqStatus::InvalidArgument
        );
        assert!(last_error().contains("byte 2"));
        assert_eq!(hq_simulator_set_threads(sim, 0), HqStatus::InvalidArgument);
        hq_simulator_free(sim);
        hq_circuit_free(c);
        hq_circuit_free(ptr::null_mut());
        assert_eq!(hq_circuit_num_qubits(ptr::null()), 0);
    }
}

#[test]
fn header_declares_the_api() {
    let header =
        std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/hqsim.h")).unwrap();
    for name in [
        "hq_circuit_generate",
        "hq_circuit_from_json",
        "hq_simulator_new",
        "hq_amplitude",
        "hq_sample",
        "hq_last_error_message",
        "typedef struct HqCircuit HqCircuit",
        "HQ_STATUS_RESOURCE_LIMIT = 4",
    ] {
        assert!(header.contains(name), "missing {name}");
    }
}
