//! C ABI over `racl_core`.
//!
//! Every function returns a [`RaclStatus`]; results go through out-pointers.
//! On failure the message is kept per thread and read back with
//! [`racl_last_error_message`]. Arrays are passed as pointer plus length and
//! are only borrowed for the duration of the call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use racl_core::credal::{self, BetaSchedule, CredalSet, PossibilityDist};
use racl_core::losses::{self, AlphaSelector, RaclConfig};
use racl_core::metrics;
use racl_core::model::{Model, ModelFile};
use racl_core::prob::{self, Logits, ProbDist};
use racl_core::RaclError;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RaclStatus {
    Ok = 0,
    InvalidInput = 1,
    IndexOutOfRange = 2,
    DimensionMismatch = 3,
    UnsupportedSize = 4,
    InvalidConfig = 5,
    Divergence = 6,
    Parse = 7,
    Io = 8,
    NullPointer = 9,
    Undefined = 10,
    Panic = 11,
}

/// Opaque model handle.
pub struct RaclModel {
    inner: Model,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &RaclError) -> RaclStatus {
    match err {
        RaclError::InvalidInput(_) => RaclStatus::InvalidInput,
        RaclError::IndexOutOfRange { .. } => RaclStatus::IndexOutOfRange,
        RaclError::DimensionMismatch { .. } => RaclStatus::DimensionMismatch,
        RaclError::UnsupportedSize(_) => RaclStatus::UnsupportedSize,
        RaclError::InvalidConfig(_) => RaclStatus::InvalidConfig,
        RaclError::Divergence { .. } => RaclStatus::Divergence,
        RaclError::Parse(_) => RaclStatus::Parse,
        RaclError::Io(_) => RaclStatus::Io,
    }
}

struct Fail(RaclStatus, String);

impl From<RaclError> for Fail {
    fn from(e: RaclError) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> RaclStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RaclStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            RaclStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(RaclStatus::NullPointer, format!("{what} is null"))
}

unsafe fn slice<'a>(p: *const f64, n: usize, what: &str) -> Result<&'a [f64], Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn slice_mut<'a>(p: *mut f64, n: usize, what: &str) -> Result<&'a mut [f64], Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, n))
}

unsafe fn write<T>(p: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    *p = value;
    Ok(())
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn racl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Numerically stable softmax of `k` logits into `out` (length `k`).
///
/// # Safety
/// `logits` and `out` must point to `k` valid doubles.
#[no_mangle]
pub unsafe extern "C" fn racl_softmax(logits: *const f64, k: usize, out: *mut f64) -> RaclStatus {
    guard(|| {
        let z = Logits::new(slice(logits, k, "logits")?.to_vec())?;
        slice_mut(out, k, "out")?.copy_from_slice(prob::softmax(&z).values());
        Ok(())
    })
}

/// β at epoch `t` of the cosine schedule from `beta0` down to `beta1`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn racl_beta_at(beta0: f64, beta1: f64, t_max: usize, t: usize, out: *mut f64) -> RaclStatus {
    guard(|| {
        let schedule = BetaSchedule::new(beta0, beta1, t_max)?;
        write(out, credal::beta_at(&schedule, t)?, "out")
    })
}

/// Writes 1 to `out` when `p` lies in the credal set generated by `pi`, else 0.
///
/// # Safety
/// `pi` and `p` must point to `k` valid doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn racl_credal_contains(pi: *const f64, p: *const f64, k: usize, out: *mut i32) -> RaclStatus {
    guard(|| {
        let set = CredalSet::new(PossibilityDist::new(slice(pi, k, "pi")?.to_vec())?);
        let p = ProbDist::new(slice(p, k, "p")?.to_vec())?;
        write(out, i32::from(credal::contains(&set, &p)?), "out")
    })
}

/// Closest boundary point of the two-level credal set (possibility 1 on
/// classes with `pi == 1`, `alpha` elsewhere) to `p_hat`.
///
/// # Safety
/// `p_hat`, `pi` and `out` must point to `k` valid doubles.
#[no_mangle]
pub unsafe extern "C" fn racl_project(
    p_hat: *const f64,
    pi: *const f64,
    k: usize,
    alpha: f64,
    out: *mut f64,
) -> RaclStatus {
    guard(|| {
        let p = ProbDist::new(slice(p_hat, k, "p_hat")?.to_vec())?;
        let pi = PossibilityDist::new(slice(pi, k, "pi")?.to_vec())?;
        let r = credal::project(&p, &pi, alpha)?;
        slice_mut(out, k, "out")?.copy_from_slice(r.values());
        Ok(())
    })
}

unsafe fn racl_config(beta: f64, alpha_per_class: *const f64, k: usize) -> Result<RaclConfig, Fail> {
    let alpha = slice(alpha_per_class, k, "alpha_per_class")?.to_vec();
    Ok(RaclConfig::new(beta, alpha, AlphaSelector::ObservedLabel)?)
}

/// Credal loss of prediction `p_hat` for observed label `y_obs`. `inside`
/// (optional) receives 1 when the prediction already lies in the set.
///
/// # Safety
/// `p_hat` and `alpha_per_class` must point to `k` valid doubles; `loss`
/// must be valid; `inside` may be null.
#[no_mangle]
pub unsafe extern "C" fn racl_loss(
    p_hat: *const f64,
    k: usize,
    y_obs: usize,
    beta: f64,
    alpha_per_class: *const f64,
    loss: *mut f64,
    inside: *mut i32,
) -> RaclStatus {
    guard(|| {
        let cfg = racl_config(beta, alpha_per_class, k)?;
        let p = ProbDist::new(slice(p_hat, k, "p_hat")?.to_vec())?;
        let outcome = losses::racl_loss(&p, y_obs, &cfg)?;
        write(loss, outcome.loss, "loss")?;
        if !inside.is_null() {
            *inside = i32::from(outcome.inside);
        }
        Ok(())
    })
}

/// Credal loss and its gradient with respect to the logits.
///
/// # Safety
/// `logits`, `alpha_per_class` and `grad` must point to `k` valid doubles;
/// `loss` must be valid.
#[no_mangle]
pub unsafe extern "C" fn racl_loss_grad(
    logits: *const f64,
    k: usize,
    y_obs: usize,
    beta: f64,
    alpha_per_class: *const f64,
    loss: *mut f64,
    grad: *mut f64,
) -> RaclStatus {
    guard(|| {
        let cfg = racl_config(beta, alpha_per_class, k)?;
        let z = Logits::new(slice(logits, k, "logits")?.to_vec())?;
        let out = losses::racl_grad_logits(&z, y_obs, &cfg)?;
        write(loss, out.loss.racl, "loss")?;
        slice_mut(grad, k, "grad")?.copy_from_slice(&out.grad);
        Ok(())
    })
}

/// Binary ROC AUC with tie-averaged ranks; `positive` holds 0 or 1 per
/// sample. Returns `Undefined` when one class is absent.
///
/// # Safety
/// `scores` and `positive` must point to `n` valid elements; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn racl_roc_auc(scores: *const f64, positive: *const u8, n: usize, out: *mut f64) -> RaclStatus {
    guard(|| {
        let s = slice(scores, n, "scores")?;
        if positive.is_null() {
            return Err(null("positive"));
        }
        let pos: Vec<bool> = std::slice::from_raw_parts(positive, n).iter().map(|&b| b != 0).collect();
        let auc = metrics::binary_auc(s, &pos)
            .ok_or_else(|| Fail(RaclStatus::Undefined, "AUC undefined without both classes".into()))?;
        write(out, auc, "out")
    })
}

/// Loads a model JSON file written by `racl train`.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be valid. The handle
/// must be released with [`racl_model_free`].
#[no_mangle]
pub unsafe extern "C" fn racl_model_load(path: *const c_char, out: *mut *mut RaclModel) -> RaclStatus {
    guard(|| {
        if path.is_null() {
            return Err(null("path"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| Fail(RaclStatus::InvalidInput, "path is not UTF-8".into()))?;
        let text = std::fs::read_to_string(path).map_err(RaclError::from)?;
        let file: ModelFile = serde_json::from_str(&text).map_err(RaclError::from)?;
        let inner = Model::from_file(&file)?;
        *out = Box::into_raw(Box::new(RaclModel { inner }));
        Ok(())
    })
}

/// Input dimension and class count of a loaded model.
///
/// # Safety
/// `model` must come from [`racl_model_load`]; out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn racl_model_shape(
    model: *const RaclModel,
    input_dim: *mut usize,
    num_classes: *mut usize,
) -> RaclStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        write(input_dim, m.inner.input_dim(), "input_dim")?;
        write(num_classes, m.inner.num_classes(), "num_classes")
    })
}

/// Class probabilities for one feature vector.
///
/// # Safety
/// `model` must come from [`racl_model_load`]; `x` must hold `dim` doubles
/// and `out` `k` doubles.
#[no_mangle]
pub unsafe extern "C" fn racl_model_predict_proba(
    model: *const RaclModel,
    x: *const f64,
    dim: usize,
    out: *mut f64,
    k: usize,
) -> RaclStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        if k != m.inner.num_classes() {
            return Err(RaclError::DimensionMismatch { expected: m.inner.num_classes(), actual: k }.into());
        }
        let p = m.inner.predict_proba(slice(x, dim, "x")?)?;
        slice_mut(out, k, "out")?.copy_from_slice(p.values());
        Ok(())
    })
}

/// Releases a model handle; null is ignored.
///
/// # Safety
/// `model` must come from [`racl_model_load`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn racl_model_free(model: *mut RaclModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}
