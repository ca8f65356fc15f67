//! C ABI over `covbvm`.
//!
//! Matrices, datasets and posterior draws are opaque handles created by
//! `*_new`/producer functions and released with the matching `*_free`.
//! Every fallible function returns a [`CovbvmStatus`]; on failure the
//! message is kept per thread and can be read with
//! [`covbvm_last_error_message`]. Results are written through out-pointers.
//! Functional specs are passed as JSON strings, e.g.
//! `{"kind":"entry","i":1,"j":2,"target":"cov"}`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use covbvm::functionals::{asymptotic_variance, evaluate, FunctionalSpec, TruthSpec};
use covbvm::harness::{ks_statistic, std_normal_cdf};
use covbvm::linalg::{sample_covariance, Dataset, SpdMatrix, SymMatrix};
use covbvm::perturbation::{kato_term, KatoContext};
use covbvm::samplers::{conjugate_posterior_draws, PosteriorDraws};
use covbvm::{Error, RngStream};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CovbvmStatus {
    Ok = 0,
    NullPointer = 1,
    NotPositiveDefinite = 2,
    NoConvergence = 3,
    DimensionMismatch = 4,
    EmptyData = 5,
    NonFinite = 6,
    DegreesOfFreedomTooSmall = 7,
    BadInit = 8,
    NonFiniteLikelihood = 9,
    PerturbationTooLarge = 10,
    ZeroEigengap = 11,
    SingularSample = 12,
    NonPositiveVariance = 13,
    EmptySamples = 14,
    OrderTooHigh = 15,
    CovarianceMismatch = 16,
    InvalidArgument = 17,
    ConfigParse = 18,
    Io = 19,
    IndexOutOfRange = 20,
    Panic = 99,
}

impl From<&Error> for CovbvmStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::NotPositiveDefinite { .. } => CovbvmStatus::NotPositiveDefinite,
            Error::NoConvergence { .. } => CovbvmStatus::NoConvergence,
            Error::DimensionMismatch { .. } => CovbvmStatus::DimensionMismatch,
            Error::EmptyData => CovbvmStatus::EmptyData,
            Error::NonFinite(_) => CovbvmStatus::NonFinite,
            Error::DegreesOfFreedomTooSmall { .. } => CovbvmStatus::DegreesOfFreedomTooSmall,
            Error::BadInit => CovbvmStatus::BadInit,
            Error::NonFiniteLikelihood => CovbvmStatus::NonFiniteLikelihood,
            Error::PerturbationTooLarge { .. } => CovbvmStatus::PerturbationTooLarge,
            Error::ZeroEigengap { .. } => CovbvmStatus::ZeroEigengap,
            Error::SingularSample { .. } => CovbvmStatus::SingularSample,
            Error::NonPositiveVariance(_) => CovbvmStatus::NonPositiveVariance,
            Error::EmptySamples => CovbvmStatus::EmptySamples,
            Error::OrderTooHigh { .. } => CovbvmStatus::OrderTooHigh,
            Error::CovarianceMismatch => CovbvmStatus::CovarianceMismatch,
            Error::InvalidArgument { .. } => CovbvmStatus::InvalidArgument,
            Error::ConfigParse { .. } => CovbvmStatus::ConfigParse,
            Error::Io(_) => CovbvmStatus::Io,
        }
    }
}

/// Symmetric matrix handle.
pub struct CovbvmMatrix(SymMatrix);

/// Data matrix handle (`n` rows of length `p`).
pub struct CovbvmDataset(Dataset);

/// Posterior precision draws.
pub struct CovbvmDraws(PosteriorDraws);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

enum Failure {
    Null(&'static str),
    Index(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type FfiResult<T> = std::result::Result<T, Failure>;

fn guard(f: impl FnOnce() -> FfiResult<()>) -> CovbvmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            CovbvmStatus::Ok
        }
        Ok(Err(Failure::Null(name))) => {
            set_error(format!("null pointer: {name}"));
            CovbvmStatus::NullPointer
        }
        Ok(Err(Failure::Index(msg))) => {
            set_error(msg);
            CovbvmStatus::IndexOutOfRange
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            CovbvmStatus::from(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            CovbvmStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, name: &'static str) -> FfiResult<&'a T> {
    p.as_ref().ok_or(Failure::Null(name))
}

unsafe fn slice<'a>(p: *const f64, len: usize, name: &'static str) -> FfiResult<&'a [f64]> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn write<T>(out: *mut T, value: T, name: &'static str) -> FfiResult<()> {
    if out.is_null() {
        return Err(Failure::Null(name));
    }
    out.write(value);
    Ok(())
}

unsafe fn functional(spec: *const c_char) -> FfiResult<FunctionalSpec> {
    if spec.is_null() {
        return Err(Failure::Null("spec"));
    }
    let text = CStr::from_ptr(spec).to_str().map_err(|e| Error::config("spec", e.to_string()))?;
    Ok(covbvm::config::from_json(text)?)
}

fn spd(m: &CovbvmMatrix) -> FfiResult<SpdMatrix> {
    Ok(SpdMatrix::new(m.0.clone())?)
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length in bytes.
///
/// # Safety
/// `buf` must point to `len` writable bytes or be null.
#[no_mangle]
pub unsafe extern "C" fn covbvm_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn covbvm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Creates a `dim × dim` symmetric matrix from row-major `data`
/// (symmetrized as `(A + Aᵀ)/2`).
///
/// # Safety
/// `data` must point to `dim * dim` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn covbvm_matrix_new(dim: usize, data: *const f64, out: *mut *mut CovbvmMatrix) -> CovbvmStatus {
    guard(|| {
        let d = slice(data, dim * dim, "data")?;
        let m = SymMatrix::new(dim, d.to_vec())?;
        write(out, Box::into_raw(Box::new(CovbvmMatrix(m))), "out")
    })
}

/// # Safety
/// `m` must come from this library and not be freed twice; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn covbvm_matrix_free(m: *mut CovbvmMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// # Safety
/// `m` must be a valid handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn covbvm_matrix_dim(m: *const CovbvmMatrix, out: *mut usize) -> CovbvmStatus {
    guard(|| write(out, borrow(m, "m")?.0.dim(), "out"))
}

/// Entry `(i, j)`, 0-based.
///
/// # Safety
/// `m` must be a valid handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn covbvm_matrix_get(m: *const CovbvmMatrix, i: usize, j: usize, out: *mut f64) -> CovbvmStatus {
    guard(|| {
        let m = &borrow(m, "m")?.0;
        if i >= m.dim() || j >= m.dim() {
            return Err(Failure::Index(format!("({i}, {j}) outside a {0}x{0} matrix", m.dim())));
        }
        write(out, m.get(i, j), "out")
    })
}

/// Copies the row-major entries into `buf` (`dim * dim` doubles).
///
/// # Safety
/// `m` must be a valid handle; `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn covbvm_matrix_copy(m: *const CovbvmMatrix, buf: *mut f64, len: usize) -> CovbvmStatus {
    guard(|| {
        let m = &borrow(m, "m")?.0;
        let data = m.as_slice();
        if len < data.len() {
            return Err(Error::DimensionMismatch { expected: data.len(), found: len }.into());
        }
        if buf.is_null() {
            return Err(Failure::Null("buf"));
        }
        ptr::copy_nonoverlapping(data.as_ptr(), buf, data.len());
        Ok(())
    })
}

/// `log det` of a positive definite matrix.
///
/// # Safety
/// `m` must be a valid handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn covbvm_matrix_log_det(m: *const CovbvmMatrix, out: *mut f64) -> CovbvmStatus {
    guard(|| write(out, spd(borrow(m, "m")?)?.log_det(), "out"))
}

/// Inverse of a positive definite matrix as a new handle.
///
/// # Safety
/// `m` must be a valid handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn covbvm_matrix_inverse(m: *const CovbvmMatrix, out: *mut *mut CovbvmMatrix) -> CovbvmStatus {
    guard(|| {
        let inv = spd(borrow(m, "m")?)?.inverse().into_sym();
        write(out, Box::into_raw(Box::new(CovbvmMatrix(inv))), "out")
    })
}

/// Eigenvalues in nonincreasing order into `values` (`len ≥ dim`).
///
/// # Safety
/// `m` must be a valid handle; `values` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn covbvm_matrix_eigenvalues(m: *const CovbvmMatrix, values: *mut f64, len: usize) -> CovbvmStatus {
    guard(|| {
        let m = &borrow(m, "m")?.0;
        if len < m.dim() {
            return Err(Error::DimensionMismatch { expected: m.dim(), found: len }.into());
        }
        if values.is_null() {
            return Err(Failure::Null("values"));
        }
        let eig = m.eig()?;
        ptr::copy_nonoverlapping(eig.values.as_ptr(), values, eig.values.len());
        Ok(())
    })
}

/// Dataset of `n` rows of length `p` from row-major `rows`.
///
/// # Safety
/// `rows` must point to `n * p` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn covbvm_dataset_new(n: usize, p: usize, rows: *const f64, out: *mut *mut CovbvmDataset) -> CovbvmStatus {
    guard(|| {
        let d = Dataset::new(n, p, slice(rows, n * p, "rows")?.to_vec())?;
        write(out, Box::into_raw(Box::new(CovbvmDataset(d))), "out")
    })
}

/// # Safety
/// `d` must come from this library and not be freed twice; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn covbvm_dataset_free(d: *mut CovbvmDataset) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// `(1/n) Σ x xᵀ`, or about the sample mean when `centered` is nonzero.
///
/// # Safety
/// `d` must be a valid handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn covbvm_sample_covariance(d: *const CovbvmDataset, centered: i32, out: *mut *mut CovbvmMatrix) -> CovbvmStatus {
    guard(|| {
        let s = sample_covariance(&borrow(d, "d")?.0, centered != 0);
        write(out, Box::into_raw(Box::new(CovbvmMatrix(s))), "out")
    })
}

/// Draws from the Wishart-prior posterior of the precision matrix.
///
/// # Safety
/// `d` must be a valid handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn covbvm_conjugate_draws(
    d: *const CovbvmDataset,
    b: usize,
    n_draws: usize,
    seed: u64,
    stream: u64,
    out: *mut *mut CovbvmDraws,
) -> CovbvmStatus {
    guard(|| {
        let draws = conjugate_posterior_draws(&borrow(d, "d")?.0, b, n_draws, RngStream::new(seed, stream))?;
        write(out, Box::into_raw(Box::new(CovbvmDraws(draws))), "out")
    })
}

/// # Safety
/// `d` must come from this library and not be freed twice; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn covbvm_draws_free(d: *mut CovbvmDraws) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// # Safety
/// `d` must be a valid handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn covbvm_draws_len(d: *const CovbvmDraws, out: *mut usize) -> CovbvmStatus {
    guard(|| write(out, borrow(d, "draws")?.0.len(), "out"))
}

/// Copy of draw `k` (0-based) as a new matrix handle.
///
/// # Safety
/// `d` must be a valid handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn covbvm_draws_get(d: *const CovbvmDraws, k: usize, out: *mut *mut CovbvmMatrix) -> CovbvmStatus {
    guard(|| {
        let draws = &borrow(d, "draws")?.0;
        let m = draws.draws.get(k).ok_or_else(|| Failure::Index(format!("draw {k} of {}", draws.len())))?;
        write(out, Box::into_raw(Box::new(CovbvmMatrix(m.as_sym().clone()))), "out")
    })
}

/// Functional value at covariance `sigma`.
///
/// # Safety
/// `spec` must be a NUL-terminated string; `sigma` a valid handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn covbvm_functional_evaluate(spec: *const c_char, sigma: *const CovbvmMatrix, out: *mut f64) -> CovbvmStatus {
    guard(|| {
        let f = functional(spec)?;
        write(out, evaluate(&f, &spd(borrow(sigma, "sigma")?)?)?, "out")
    })
}

/// Closed-form asymptotic variance of the functional at truth `sigma`.
///
/// # Safety
/// `spec` must be a NUL-terminated string; `sigma` a valid handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn covbvm_functional_variance(spec: *const c_char, sigma: *const CovbvmMatrix, out: *mut f64) -> CovbvmStatus {
    guard(|| {
        let f = functional(spec)?;
        let truth = TruthSpec::new(spd(borrow(sigma, "sigma")?)?);
        write(out, asymptotic_variance(&f, &truth)?, "out")
    })
}

/// `P(Z ≤ t)` for a standard normal `Z`.
#[no_mangle]
pub extern "C" fn covbvm_std_normal_cdf(t: f64) -> f64 {
    std_normal_cdf(t)
}

/// Kolmogorov–Smirnov distance of `samples` to the standard normal.
///
/// # Safety
/// `samples` must point to `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn covbvm_ks_normal(samples: *const f64, len: usize, out: *mut f64) -> CovbvmStatus {
    guard(|| write(out, ks_statistic(slice(samples, len, "samples")?, std_normal_cdf)?, "out"))
}

/// Order-`k` Kato term for eigenvalue `m` (1-based) of `diag(values) + delta`,
/// with `delta` expressed in the eigenbasis of the diagonal.
///
/// # Safety
/// `values` must point to `p` doubles; `delta` a valid handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn covbvm_kato_term(
    values: *const f64,
    p: usize,
    delta: *const CovbvmMatrix,
    m: usize,
    k: usize,
    out: *mut f64,
) -> CovbvmStatus {
    guard(|| {
        let ctx = KatoContext::new(slice(values, p, "values")?.to_vec(), borrow(delta, "delta")?.0.clone(), m)?;
        let value = if k == 1 { covbvm::perturbation::kato_first_order(&ctx) } else { kato_term(&ctx, k)? };
        write(out, value, "out")
    })
}
