//! Exercise the C ABI surface from Rust: parity with the core library,
//! artifact round trips through files, and error-path status codes.

use std::ffi::{CStr, CString};
use std::ptr;

use ensnet_ffi::*;

fn line_points() -> (Vec<f64>, Vec<u8>) {
    let xs = vec![-1.0, -0.6, -0.2, 0.2, 0.6, 1.0];
    let labels = xs.iter().map(|&x| u8::from(x > 0.0)).collect();
    (xs, labels)
}

fn build_training_set() -> *mut EnsnetTrainingSet {
    let (xs, labels) = line_points();
    let mut ts: *mut EnsnetTrainingSet = ptr::null_mut();
    let status = unsafe {
        ensnet_training_set_from_arrays(xs.as_ptr(), labels.len(), 1, labels.as_ptr(), &mut ts)
    };
    assert_eq!(status, EnsnetStatus::Ok);
    assert!(!ts.is_null());
    ts
}

fn config_json() -> CString {
    CString::new(
        r#"{
  "mode": "gibbs", "n": 400, "beta": 1.0,
  "distribution": {"grid": {"values": [-1.0, 0.0, 1.0]}},
  "pool": {"entries": [
    {"architecture": {"id": "stump", "input_dim": 1, "layers": [1], "activation": "hard"}}
  ]},
  "master_seed": 12
}"#,
    )
    .unwrap()
}

fn last_error() -> String {
    unsafe {
        CStr::from_ptr(ensnet_last_error_message())
            .to_string_lossy()
            .into_owned()
    }
}

#[test]
fn version_is_non_empty() {
    let v = unsafe { CStr::from_ptr(ensnet_version()) };
    assert!(!v.to_bytes().is_empty());
}

#[test]
fn build_evaluate_predict_matches_core() {
    let ts = build_training_set();
    assert_eq!(unsafe { ensnet_training_set_len(ts) }, 6);
    assert_eq!(unsafe { ensnet_training_set_input_dim(ts) }, 1);

    let mut ens: *mut EnsnetEnsemble = ptr::null_mut();
    let status = unsafe { ensnet_ensemble_build(config_json().as_ptr(), ts, &mut ens) };
    assert_eq!(status, EnsnetStatus::Ok, "{}", last_error());
    assert_eq!(unsafe { ensnet_ensemble_member_count(ens) }, 400);
    assert_eq!(unsafe { ensnet_ensemble_input_dim(ens) }, 1);

    // core-library reference values over the same config
    let config = ensnet::RunConfig::from_json(config_json().to_str().unwrap()).unwrap();
    let core_ts = ensnet::data::TrainingSet::new(
        line_points()
            .0
            .iter()
            .map(|&x| ensnet::data::LabeledPoint::new(vec![x], u8::from(x > 0.0)).unwrap())
            .collect(),
    )
    .unwrap();
    let core = ensnet::ensemble::build(&core_ts, &config).unwrap();

    for probe in [-1.5, -0.3, 0.0, 0.4, 2.0] {
        let mut value = f64::NAN;
        let mut se = f64::NAN;
        let status =
            unsafe { ensnet_ensemble_evaluate(ens, &probe, 1, &mut value, &mut se) };
        assert_eq!(status, EnsnetStatus::Ok);
        let expect = core.evaluate(&[probe]).unwrap();
        assert_eq!(value.to_bits(), expect.value.to_bits());
        assert_eq!(se.to_bits(), expect.std_error.to_bits());

        let mut label = 9u8;
        let status = unsafe { ensnet_ensemble_predict(ens, &probe, 1, &mut label) };
        assert_eq!(status, EnsnetStatus::Ok);
        assert_eq!(label, core.predict(&[probe]).unwrap());
    }

    unsafe {
        ensnet_ensemble_free(ens);
        ensnet_training_set_free(ts);
    }
}

#[test]
fn artifact_round_trip_through_files() {
    let ts = build_training_set();
    let mut ens: *mut EnsnetEnsemble = ptr::null_mut();
    assert_eq!(
        unsafe { ensnet_ensemble_build(config_json().as_ptr(), ts, &mut ens) },
        EnsnetStatus::Ok
    );

    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("ens.json").to_str().unwrap()).unwrap();
    assert_eq!(
        unsafe { ensnet_ensemble_save(ens, path.as_ptr()) },
        EnsnetStatus::Ok
    );

    let mut back: *mut EnsnetEnsemble = ptr::null_mut();
    assert_eq!(
        unsafe { ensnet_ensemble_load(path.as_ptr(), &mut back) },
        EnsnetStatus::Ok,
        "{}",
        last_error()
    );
    let probe = 0.25f64;
    let (mut v1, mut s1, mut v2, mut s2) = (0.0, 0.0, 0.0, 0.0);
    unsafe {
        assert_eq!(
            ensnet_ensemble_evaluate(ens, &probe, 1, &mut v1, &mut s1),
            EnsnetStatus::Ok
        );
        assert_eq!(
            ensnet_ensemble_evaluate(back, &probe, 1, &mut v2, &mut s2),
            EnsnetStatus::Ok
        );
    }
    assert_eq!(v1.to_bits(), v2.to_bits());
    assert_eq!(s1.to_bits(), s2.to_bits());

    unsafe {
        ensnet_ensemble_free(ens);
        ensnet_ensemble_free(back);
        ensnet_training_set_free(ts);
    }
}

#[test]
fn error_paths_set_status_and_message() {
    // null out pointer
    let status = unsafe { ensnet_training_set_load(ptr::null(), ptr::null_mut()) };
    assert_eq!(status, EnsnetStatus::InvalidArgument);

    // malformed config
    let ts = build_training_set();
    let bad = CString::new("{\"mode\": \"gibbs\"").unwrap();
    let mut ens: *mut EnsnetEnsemble = ptr::null_mut();
    let status = unsafe { ensnet_ensemble_build(bad.as_ptr(), ts, &mut ens) };
    assert_eq!(status, EnsnetStatus::Config);
    assert!(!last_error().is_empty());

    // rejection sampling that cannot succeed: XOR with a stump pool
    let xor_xs = [0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 1.0, 1.0];
    let xor_labels = [0u8, 1, 1, 0];
    let mut xor: *mut EnsnetTrainingSet = ptr::null_mut();
    assert_eq!(
        unsafe {
            ensnet_training_set_from_arrays(xor_xs.as_ptr(), 4, 2, xor_labels.as_ptr(), &mut xor)
        },
        EnsnetStatus::Ok
    );
    let config = CString::new(
        r#"{
  "mode": "zero_error", "n": 1, "beta": "inf",
  "distribution": {"normal": {"mean": 0.0, "stddev": 1.0}},
  "pool": {"entries": [
    {"architecture": {"id": "stump", "input_dim": 2, "layers": [1], "activation": "hard"}}
  ]},
  "master_seed": 1, "max_attempts": 20000
}"#,
    )
    .unwrap();
    let status = unsafe { ensnet_ensemble_build(config.as_ptr(), xor, &mut ens) };
    assert_eq!(status, EnsnetStatus::AcceptanceTooLow);
    assert!(last_error().contains("acceptance rate too low"));

    // contradictory labels in from_arrays
    let dup_xs = [0.5, 0.5];
    let dup_labels = [0u8, 1];
    let mut dup: *mut EnsnetTrainingSet = ptr::null_mut();
    let status = unsafe {
        ensnet_training_set_from_arrays(dup_xs.as_ptr(), 2, 1, dup_labels.as_ptr(), &mut dup)
    };
    assert_eq!(status, EnsnetStatus::InvalidArgument);

    // missing artifact file
    let mut back: *mut EnsnetEnsemble = ptr::null_mut();
    let path = CString::new("/nonexistent/ens.json").unwrap();
    assert_eq!(
        unsafe { ensnet_ensemble_load(path.as_ptr(), &mut back) },
        EnsnetStatus::Io
    );

    // frees accept null
    unsafe {
        ensnet_ensemble_free(ptr::null_mut());
        ensnet_training_set_free(ptr::null_mut());
        ensnet_training_set_free(ts);
        ensnet_training_set_free(xor);
    }
}

#[test]
fn generated_header_is_current() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/ensnet.h");
    let text = std::fs::read_to_string(header).expect("header generated at build time");
    for symbol in [
        "ensnet_version",
        "ensnet_training_set_load",
        "ensnet_training_set_from_arrays",
        "ensnet_ensemble_build",
        "ensnet_ensemble_evaluate",
        "ensnet_ensemble_predict",
        "ensnet_ensemble_save",
        "ensnet_ensemble_load",
        "ENSNET_STATUS_ACCEPTANCE_TOO_LOW",
    ] {
        assert!(text.contains(symbol), "header is missing {symbol}");
    }
}
