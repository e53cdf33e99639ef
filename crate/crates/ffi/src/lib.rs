//! C ABI over the `dqc1` library.
//!
//! Every call returns a [`Dqc1Status`]; on failure a message is kept per
//! thread and read back with [`dqc1_last_error`]. Gram matrices and trained
//! models are opaque handles owned by the caller and released with their
//! `_free` functions. Point arrays are interleaved `x1, x2` pairs.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use dqc1::dqc1::{shots_needed, RegisterPrep};
use dqc1::kernel::{quantum_gram, quantum_kernel, rbf_gram, GramMatrix, GramMode};
use dqc1::svm::{train_smo, Label, SmoParams, SvmModel};
use dqc1::Error;

/// Result of every exported call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dqc1Status {
    Ok = 0,
    InvalidInput = 1,
    DimensionMismatch = 2,
    Parse = 3,
    Io = 4,
    NullPointer = 5,
    Panic = 6,
}

pub const DQC1_REGISTER_MIXED: u32 = 0;
pub const DQC1_REGISTER_PURE: u32 = 1;

/// Opaque Gram matrix handle.
pub struct Dqc1Gram(GramMatrix);

/// Opaque trained-model handle.
pub struct Dqc1Model(SvmModel);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(err: &Error) -> Dqc1Status {
    match err {
        Error::InvalidInput(_) => Dqc1Status::InvalidInput,
        Error::DimensionMismatch { .. } => Dqc1Status::DimensionMismatch,
        Error::Parse { .. } | Error::Json(_) => Dqc1Status::Parse,
        Error::Io { .. } => Dqc1Status::Io,
    }
}

enum Failure {
    Lib(Error),
    Null(&'static str),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

/// Runs `f`, translating errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> Dqc1Status {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            Dqc1Status::Ok
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Null(what))) => {
            set_error(&format!("null pointer: {what}"));
            Dqc1Status::NullPointer
        }
        Err(_) => {
            set_error("internal panic");
            Dqc1Status::Panic
        }
    }
}

fn non_null<T>(p: *const T, what: &'static str) -> Result<(), Failure> {
    if p.is_null() {
        Err(Failure::Null(what))
    } else {
        Ok(())
    }
}

fn register(code: u32) -> Result<RegisterPrep, Failure> {
    match code {
        DQC1_REGISTER_MIXED => Ok(RegisterPrep::MaximallyMixed),
        DQC1_REGISTER_PURE => Ok(RegisterPrep::AllZerosPure),
        other => Err(Error::InvalidInput(format!("unknown register code {other}")).into()),
    }
}

/// # Safety
/// `xs` must be null (with `n == 0`) or point to `2·n` readable doubles.
unsafe fn points<'a>(xs: *const f64, n: usize, what: &'static str) -> Result<Vec<[f64; 2]>, Failure> {
    if n == 0 {
        return Ok(Vec::new());
    }
    non_null(xs, what)?;
    let flat = std::slice::from_raw_parts(xs, 2 * n);
    Ok(flat.chunks_exact(2).map(|c| [c[0], c[1]]).collect())
}

/// Message for the last failed call on this thread; empty after a success.
/// Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn dqc1_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dqc1_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Shots per quadrature for accuracy `epsilon` with failure probability
/// `delta` at control polarization `beta`.
///
/// # Safety
/// `out` must be a valid pointer to a `uint64_t`.
#[no_mangle]
pub unsafe extern "C" fn dqc1_shots_needed(epsilon: f64, delta: f64, beta: f64, out: *mut u64) -> Dqc1Status {
    guard(|| {
        non_null(out, "out")?;
        *out = shots_needed(epsilon, delta, beta)?;
        Ok(())
    })
}

/// Complex kernel `Tr(ρₙ 𝒰ʳ(x) 𝒰ʳ†(x′))` for one pair of phase-scaled points.
///
/// # Safety
/// `out_re` and `out_im` must be valid pointers to doubles.
#[no_mangle]
pub unsafe extern "C" fn dqc1_kernel(
    x1: f64,
    x2: f64,
    y1: f64,
    y2: f64,
    depth_r: usize,
    register_code: u32,
    out_re: *mut f64,
    out_im: *mut f64,
) -> Dqc1Status {
    guard(|| {
        non_null(out_re, "out_re")?;
        non_null(out_im, "out_im")?;
        let k = quantum_kernel([x1, x2], [y1, y2], depth_r, &register(register_code)?)?;
        *out_re = k.re;
        *out_im = k.im;
        Ok(())
    })
}

/// Exact quantum Gram matrix of `|K|` between two point sets.
///
/// # Safety
/// `xs_a`/`xs_b` must hold `2·n_a`/`2·n_b` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dqc1_gram_quantum(
    xs_a: *const f64,
    n_a: usize,
    xs_b: *const f64,
    n_b: usize,
    depth_r: usize,
    register_code: u32,
    out: *mut *mut Dqc1Gram,
) -> Dqc1Status {
    guard(|| {
        non_null(out, "out")?;
        let a = points(xs_a, n_a, "xs_a")?;
        let b = points(xs_b, n_b, "xs_b")?;
        let g = quantum_gram(&a, &b, depth_r, &register(register_code)?, GramMode::Exact)?;
        *out = Box::into_raw(Box::new(Dqc1Gram(g)));
        Ok(())
    })
}

/// RBF Gram matrix `exp(−γ‖x − x′‖²)`.
///
/// # Safety
/// As for [`dqc1_gram_quantum`].
#[no_mangle]
pub unsafe extern "C" fn dqc1_gram_rbf(
    xs_a: *const f64,
    n_a: usize,
    xs_b: *const f64,
    n_b: usize,
    gamma: f64,
    out: *mut *mut Dqc1Gram,
) -> Dqc1Status {
    guard(|| {
        non_null(out, "out")?;
        let a = points(xs_a, n_a, "xs_a")?;
        let b = points(xs_b, n_b, "xs_b")?;
        *out = Box::into_raw(Box::new(Dqc1Gram(rbf_gram(&a, &b, gamma)?)));
        Ok(())
    })
}

/// # Safety
/// `gram` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn dqc1_gram_rows(gram: *const Dqc1Gram) -> usize {
    gram.as_ref().map_or(0, |g| g.0.rows())
}

/// # Safety
/// `gram` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn dqc1_gram_cols(gram: *const Dqc1Gram) -> usize {
    gram.as_ref().map_or(0, |g| g.0.cols())
}

/// Copies the row-major values into `out`, which must hold `rows·cols` doubles.
///
/// # Safety
/// `gram` must be a live handle and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn dqc1_gram_values(gram: *const Dqc1Gram, out: *mut f64, len: usize) -> Dqc1Status {
    guard(|| {
        let g = gram.as_ref().ok_or(Failure::Null("gram"))?;
        non_null(out, "out")?;
        let v = g.0.values();
        if len != v.len() {
            return Err(Error::DimensionMismatch {
                op: "dqc1_gram_values",
                detail: format!("buffer holds {len}, matrix has {}", v.len()),
            }
            .into());
        }
        ptr::copy_nonoverlapping(v.as_ptr(), out, len);
        Ok(())
    })
}

/// # Safety
/// `gram` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dqc1_gram_free(gram: *mut Dqc1Gram) {
    if !gram.is_null() {
        drop(Box::from_raw(gram));
    }
}

/// Trains a soft-margin SVM on a square Gram matrix with labels in {+1, −1}.
///
/// # Safety
/// `labels` must hold `n` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dqc1_svm_train(
    gram: *const Dqc1Gram,
    labels: *const i8,
    n: usize,
    c: f64,
    out: *mut *mut Dqc1Model,
) -> Dqc1Status {
    guard(|| {
        let g = gram.as_ref().ok_or(Failure::Null("gram"))?;
        non_null(labels, "labels")?;
        non_null(out, "out")?;
        let y: &[Label] = std::slice::from_raw_parts(labels, n);
        let model = train_smo(&g.0, y, SmoParams::new(c))?;
        *out = Box::into_raw(Box::new(Dqc1Model(model)));
        Ok(())
    })
}

/// Decision values for each row of a (query × train) Gram matrix.
///
/// # Safety
/// `out` must hold `len` doubles, `len` equal to the Gram's row count.
#[no_mangle]
pub unsafe extern "C" fn dqc1_svm_decision(
    model: *const Dqc1Model,
    gram_cross: *const Dqc1Gram,
    out: *mut f64,
    len: usize,
) -> Dqc1Status {
    guard(|| {
        let m = model.as_ref().ok_or(Failure::Null("model"))?;
        let g = gram_cross.as_ref().ok_or(Failure::Null("gram_cross"))?;
        non_null(out, "out")?;
        if len != g.0.rows() {
            return Err(Error::DimensionMismatch {
                op: "dqc1_svm_decision",
                detail: format!("buffer holds {len}, Gram has {} rows", g.0.rows()),
            }
            .into());
        }
        let out = std::slice::from_raw_parts_mut(out, len);
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = m.0.decision_value(g.0.row(i))?;
        }
        Ok(())
    })
}

/// Number of support vectors, or 0 for a null handle.
///
/// # Safety
/// `model` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn dqc1_svm_support_count(model: *const Dqc1Model) -> usize {
    model.as_ref().map_or(0, |m| m.0.support_indices.len())
}

/// Model as a JSON string; release it with [`dqc1_string_free`]. Null on failure.
///
/// # Safety
/// `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dqc1_svm_to_json(model: *const Dqc1Model) -> *mut c_char {
    let mut out = ptr::null_mut();
    guard(|| {
        let m = model.as_ref().ok_or(Failure::Null("model"))?;
        let s = serde_json::to_string(&m.0).map_err(Error::from)?;
        out = CString::new(s).expect("JSON has no NUL").into_raw();
        Ok(())
    });
    out
}

/// # Safety
/// `model` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dqc1_svm_free(model: *mut Dqc1Model) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dqc1_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
