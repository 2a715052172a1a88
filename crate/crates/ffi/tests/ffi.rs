use std::ffi::{CStr, CString};
use std::ptr;

use racl_core::model::{Model, ModelSpec};
use racl_ffi::*;
use rand::SeedableRng;

fn last_error() -> String {
    let p = racl_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn softmax_and_schedule() {
    let z = [1.0, 2.0, 3.0];
    let mut out = [0.0; 3];
    assert_eq!(unsafe { racl_softmax(z.as_ptr(), 3, out.as_mut_ptr()) }, RaclStatus::Ok);
    assert!((out.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!(out[2] > out[1] && out[1] > out[0]);

    let mut beta = 0.0;
    assert_eq!(unsafe { racl_beta_at(0.75, 0.55, 10, 0, &mut beta) }, RaclStatus::Ok);
    assert_eq!(beta, 0.75);
    assert_eq!(unsafe { racl_beta_at(0.75, 0.55, 10, 5, &mut beta) }, RaclStatus::Ok);
    assert!((beta - 0.65).abs() < 1e-12);
    assert_eq!(unsafe { racl_beta_at(0.5, 0.6, 10, 0, &mut beta) }, RaclStatus::InvalidConfig);
    assert!(last_error().contains("decay"));
}

#[test]
fn credal_calls() {
    let pi = [1.0, 0.3, 0.3];
    let mut inside = -1;
    let p_in = [0.8, 0.1, 0.1];
    assert_eq!(unsafe { racl_credal_contains(pi.as_ptr(), p_in.as_ptr(), 3, &mut inside) }, RaclStatus::Ok);
    assert_eq!(inside, 1);
    let p_out = [0.5, 0.3, 0.2];
    assert_eq!(unsafe { racl_credal_contains(pi.as_ptr(), p_out.as_ptr(), 3, &mut inside) }, RaclStatus::Ok);
    assert_eq!(inside, 0);

    let mut r = [0.0; 3];
    assert_eq!(unsafe { racl_project(p_out.as_ptr(), pi.as_ptr(), 3, 0.3, r.as_mut_ptr()) }, RaclStatus::Ok);
    for (a, b) in r.iter().zip([0.7, 0.18, 0.12]) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn loss_and_gradient() {
    let alpha = [0.3, 0.3, 0.3];
    let p = [0.5, 0.3, 0.2];
    let (mut loss, mut inside) = (f64::NAN, -1);
    let st = unsafe { racl_loss(p.as_ptr(), 3, 0, 0.75, alpha.as_ptr(), &mut loss, &mut inside) };
    assert_eq!(st, RaclStatus::Ok);
    assert_eq!(inside, 0);
    let expected = 0.7 * (0.7f64 / 0.5).ln() + 0.3 * (0.3f64 / 0.5).ln();
    assert!((loss - expected).abs() < 1e-12);
    // the out-flag is optional
    let st = unsafe { racl_loss(p.as_ptr(), 3, 0, 0.75, alpha.as_ptr(), &mut loss, ptr::null_mut()) };
    assert_eq!(st, RaclStatus::Ok);

    let z = [0.2, -0.1, 0.4];
    let mut grad = [0.0; 3];
    let st = unsafe { racl_loss_grad(z.as_ptr(), 3, 1, 0.75, alpha.as_ptr(), &mut loss, grad.as_mut_ptr()) };
    assert_eq!(st, RaclStatus::Ok);
    assert!(grad.iter().sum::<f64>().abs() < 1e-12);
    assert!(grad[1] < 0.0);

    let st = unsafe { racl_loss(p.as_ptr(), 3, 7, 0.75, alpha.as_ptr(), &mut loss, ptr::null_mut()) };
    assert_eq!(st, RaclStatus::IndexOutOfRange);
}

#[test]
fn auc_cases() {
    let scores = [0.1, 0.4, 0.35, 0.8];
    let labels = [0u8, 0, 1, 1];
    let mut auc = 0.0;
    assert_eq!(unsafe { racl_roc_auc(scores.as_ptr(), labels.as_ptr(), 4, &mut auc) }, RaclStatus::Ok);
    assert!((auc - 0.75).abs() < 1e-12);
    let one_class = [1u8; 4];
    assert_eq!(
        unsafe { racl_roc_auc(scores.as_ptr(), one_class.as_ptr(), 4, &mut auc) },
        RaclStatus::Undefined
    );
}

#[test]
fn null_pointers_are_reported() {
    let mut out = [0.0; 2];
    assert_eq!(unsafe { racl_softmax(ptr::null(), 2, out.as_mut_ptr()) }, RaclStatus::NullPointer);
    assert!(last_error().contains("logits"));
    assert_eq!(unsafe { racl_model_shape(ptr::null(), ptr::null_mut(), ptr::null_mut()) }, RaclStatus::NullPointer);
    unsafe { racl_model_free(ptr::null_mut()) };
}

#[test]
fn model_handle_roundtrip() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let model = Model::init(ModelSpec::mlp(2, 4), 3, &mut rng).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    std::fs::write(&path, serde_json::to_string(&model.to_file(3, "h".into())).unwrap()).unwrap();

    let cpath = CString::new(path.to_str().unwrap()).unwrap();
    let mut handle: *mut RaclModel = ptr::null_mut();
    assert_eq!(unsafe { racl_model_load(cpath.as_ptr(), &mut handle) }, RaclStatus::Ok);
    assert!(!handle.is_null());

    let (mut dim, mut k) = (0usize, 0usize);
    assert_eq!(unsafe { racl_model_shape(handle, &mut dim, &mut k) }, RaclStatus::Ok);
    assert_eq!((dim, k), (2, 3));

    let x = [0.5, -1.0];
    let mut p = [0.0; 3];
    assert_eq!(unsafe { racl_model_predict_proba(handle, x.as_ptr(), 2, p.as_mut_ptr(), 3) }, RaclStatus::Ok);
    assert_eq!(p.to_vec(), model.predict_proba(&x).unwrap().into_vec());

    let x3 = [0.5, -1.0, 2.0];
    assert_eq!(
        unsafe { racl_model_predict_proba(handle, x3.as_ptr(), 3, p.as_mut_ptr(), 3) },
        RaclStatus::DimensionMismatch
    );
    unsafe { racl_model_free(handle) };

    let missing = CString::new(dir.path().join("nope.json").to_str().unwrap()).unwrap();
    let mut h2: *mut RaclModel = ptr::null_mut();
    assert_eq!(unsafe { racl_model_load(missing.as_ptr(), &mut h2) }, RaclStatus::Io);
    assert!(h2.is_null());
}

#[test]
fn header_declares_every_export() {
    let header = include_str!("../include/racl.h");
    for name in [
        "racl_last_error_message",
        "racl_softmax",
        "racl_beta_at",
        "racl_credal_contains",
        "racl_project",
        "racl_loss",
        "racl_loss_grad",
        "racl_roc_auc",
        "racl_model_load",
        "racl_model_shape",
        "racl_model_predict_proba",
        "racl_model_free",
        "RACL_STATUS_OK = 0",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}
