use std::ffi::{c_char, CStr, CString};
use std::ptr;

use covbvm_ffi::*;

fn matrix(dim: usize, data: &[f64]) -> *mut CovbvmMatrix {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { covbvm_matrix_new(dim, data.as_ptr(), &mut m) }, CovbvmStatus::Ok);
    m
}

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 256];
    unsafe {
        covbvm_last_error_message(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

#[test]
fn matrix_round_trip_and_log_det() {
    let m = matrix(2, &[2.0, 1.0, 1.0, 3.0]);
    let mut dim = 0;
    let mut x = 0.0;
    unsafe {
        assert_eq!(covbvm_matrix_dim(m, &mut dim), CovbvmStatus::Ok);
        assert_eq!(dim, 2);
        assert_eq!(covbvm_matrix_get(m, 0, 1, &mut x), CovbvmStatus::Ok);
        assert_eq!(x, 1.0);
        assert_eq!(covbvm_matrix_get(m, 2, 0, &mut x), CovbvmStatus::IndexOutOfRange);
        assert_eq!(covbvm_matrix_log_det(m, &mut x), CovbvmStatus::Ok);
        assert!((x - 5f64.ln()).abs() < 1e-14);
        let mut buf = [0.0; 4];
        assert_eq!(covbvm_matrix_copy(m, buf.as_mut_ptr(), 4), CovbvmStatus::Ok);
        assert_eq!(buf, [2.0, 1.0, 1.0, 3.0]);
        covbvm_matrix_free(m);
    }
}

#[test]
fn inverse_and_eigenvalues() {
    let m = matrix(2, &[2.0, 0.0, 0.0, 4.0]);
    let mut inv = ptr::null_mut();
    let mut vals = [0.0; 2];
    let mut x = 0.0;
    unsafe {
        assert_eq!(covbvm_matrix_inverse(m, &mut inv), CovbvmStatus::Ok);
        assert_eq!(covbvm_matrix_get(inv, 1, 1, &mut x), CovbvmStatus::Ok);
        assert!((x - 0.25).abs() < 1e-15);
        assert_eq!(covbvm_matrix_eigenvalues(m, vals.as_mut_ptr(), 2), CovbvmStatus::Ok);
        assert_eq!(vals, [4.0, 2.0]);
        assert_eq!(covbvm_matrix_eigenvalues(m, vals.as_mut_ptr(), 1), CovbvmStatus::DimensionMismatch);
        covbvm_matrix_free(inv);
        covbvm_matrix_free(m);
    }
}

#[test]
fn errors_map_to_status_codes() {
    let indefinite = matrix(2, &[1.0, 2.0, 2.0, 1.0]);
    let mut x = 0.0;
    unsafe {
        assert_eq!(covbvm_matrix_log_det(indefinite, &mut x), CovbvmStatus::NotPositiveDefinite);
        assert!(last_error().contains("not positive definite"));
        assert_eq!(covbvm_matrix_log_det(ptr::null(), &mut x), CovbvmStatus::NullPointer);
        let mut m = ptr::null_mut();
        let nan = [f64::NAN];
        assert_eq!(covbvm_matrix_new(1, nan.as_ptr(), &mut m), CovbvmStatus::NonFinite);
        assert!(m.is_null());
        covbvm_matrix_free(indefinite);
        covbvm_matrix_free(ptr::null_mut());
    }
}

#[test]
fn functional_evaluation_and_variance() {
    let sigma = matrix(2, &[1.0, 0.3, 0.3, 1.0]);
    let spec = CString::new(r#"{"kind":"entry","i":1,"j":2,"target":"cov"}"#).unwrap();
    let mut x = 0.0;
    unsafe {
        assert_eq!(covbvm_functional_evaluate(spec.as_ptr(), sigma, &mut x), CovbvmStatus::Ok);
        assert_eq!(x, 0.3);
        assert_eq!(covbvm_functional_variance(spec.as_ptr(), sigma, &mut x), CovbvmStatus::Ok);
        assert!((x - 1.09).abs() < 1e-14);
        let bad = CString::new(r#"{"kind":"entry","i":1}"#).unwrap();
        assert_eq!(covbvm_functional_evaluate(bad.as_ptr(), sigma, &mut x), CovbvmStatus::ConfigParse);
        let logdet = CString::new(r#"{"kind":"log_det"}"#).unwrap();
        assert_eq!(covbvm_functional_variance(logdet.as_ptr(), sigma, &mut x), CovbvmStatus::Ok);
        assert_eq!(x, 4.0);
        covbvm_matrix_free(sigma);
    }
}

#[test]
fn conjugate_draws_are_seeded() {
    let rows: Vec<f64> = (0..40).map(|k| ((k * 37 % 11) as f64 - 5.0) / 3.0).collect();
    let mut data = ptr::null_mut();
    unsafe {
        assert_eq!(covbvm_dataset_new(20, 2, rows.as_ptr(), &mut data), CovbvmStatus::Ok);
        let mut a = ptr::null_mut();
        let mut b = ptr::null_mut();
        assert_eq!(covbvm_conjugate_draws(data, 3, 5, 42, 0, &mut a), CovbvmStatus::Ok);
        assert_eq!(covbvm_conjugate_draws(data, 3, 5, 42, 0, &mut b), CovbvmStatus::Ok);
        let mut len = 0;
        assert_eq!(covbvm_draws_len(a, &mut len), CovbvmStatus::Ok);
        assert_eq!(len, 5);
        let (mut ma, mut mb) = (ptr::null_mut(), ptr::null_mut());
        assert_eq!(covbvm_draws_get(a, 4, &mut ma), CovbvmStatus::Ok);
        assert_eq!(covbvm_draws_get(b, 4, &mut mb), CovbvmStatus::Ok);
        let (mut xa, mut xb) = ([0.0; 4], [0.0; 4]);
        covbvm_matrix_copy(ma, xa.as_mut_ptr(), 4);
        covbvm_matrix_copy(mb, xb.as_mut_ptr(), 4);
        assert_eq!(xa, xb);
        assert_eq!(covbvm_draws_get(a, 5, &mut ma), CovbvmStatus::IndexOutOfRange);

        let mut cov = ptr::null_mut();
        assert_eq!(covbvm_sample_covariance(data, 1, &mut cov), CovbvmStatus::Ok);
        covbvm_matrix_free(cov);
        covbvm_matrix_free(mb);
        covbvm_draws_free(a);
        covbvm_draws_free(b);
        covbvm_dataset_free(data);
    }
}

#[test]
fn normal_cdf_and_ks() {
    assert_eq!(covbvm_std_normal_cdf(0.0), 0.5);
    let mut x = 0.0;
    unsafe {
        assert_eq!(covbvm_ks_normal([0.0].as_ptr(), 1, &mut x), CovbvmStatus::Ok);
        assert_eq!(x, 0.5);
        assert_eq!(covbvm_ks_normal(ptr::null(), 0, &mut x), CovbvmStatus::EmptySamples);
    }
}

#[test]
fn kato_second_order_term() {
    let eps = 0.01;
    let delta = matrix(2, &[0.0, eps, eps, 0.0]);
    let values = [3.0, 1.0];
    let mut x = 0.0;
    unsafe {
        assert_eq!(covbvm_kato_term(values.as_ptr(), 2, delta, 1, 2, &mut x), CovbvmStatus::Ok);
        assert!((x - eps * eps / 2.0).abs() < 1e-18);
        assert_eq!(covbvm_kato_term(values.as_ptr(), 2, delta, 1, 7, &mut x), CovbvmStatus::OrderTooHigh);
        covbvm_matrix_free(delta);
    }
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(covbvm_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/covbvm.h")).unwrap();
    let source = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/src/lib.rs")).unwrap();
    let exports: Vec<&str> = source
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 20);
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    assert!(header.contains("typedef struct CovbvmMatrix CovbvmMatrix;"));
}
