//! C ABI over `bellcheck`.
//!
//! Objects are opaque handles created by `bc_*` constructors and released with the
//! matching `*_free`. Every fallible call returns a [`BcStatus`]; on failure a
//! message is available from [`bc_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use bellcheck::bell::{bell_value_gamma, pair_state};
use bellcheck::circuit::{circuit_unitary, embed_double, parse_circuit, Circuit};
use bellcheck::distance::{circuit_distance, distance_bounds_from_value, distance_from_embedded_value};
use bellcheck::linalg::random_real_orthogonal;
use bellcheck::sampler::{estimate_distance, plan_shots, ShotPlan};
use bellcheck::{Error, RngStream, UnitaryMatrix};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Shape = 4,
    Range = 5,
    Numerical = 6,
    Io = 7,
    Panic = 8,
}

/// Parsed gate-list circuit.
pub struct BcCircuit(Circuit);

/// Dense unitary matrix.
pub struct BcUnitary(UnitaryMatrix);

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BcBounds {
    pub lower: f64,
    pub upper: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BcEstimate {
    pub shots: u64,
    pub seed: u64,
    /// Sample mean of the normalized Bell value, in [0, 1] up to noise.
    pub normalized: f64,
    pub bell_value: f64,
    pub distance: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> BcStatus {
    match err {
        Error::Parse { .. } | Error::Width { .. } => BcStatus::Parse,
        Error::Shape(_) | Error::InvalidDimension(_) => BcStatus::Shape,
        Error::Range(_) | Error::SettingOutOfRange { .. } | Error::PowerOutOfRange { .. } => BcStatus::Range,
        Error::NumericalInconsistency(_) => BcStatus::Numerical,
        Error::Io(_) | Error::Csv(_) => BcStatus::Io,
        Error::File { source, .. } => status_of(source),
        Error::InvalidParameter(_) | Error::IncompleteInput { .. } | Error::Unsupported(_) | Error::Schema(_) => {
            BcStatus::InvalidArgument
        }
    }
}

struct Failure(BcStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(BcStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> BcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            BcStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            BcStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(BcStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

/// Message for the last failed call on this thread, or NULL after a success.
/// The pointer stays valid until the next `bc_*` call on the same thread.
#[no_mangle]
pub extern "C" fn bc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses circuit text (`qubits n` header followed by one gate per line).
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bc_circuit_parse(text: *const c_char, out: *mut *mut BcCircuit) -> BcStatus {
    guard(|| {
        let c = parse_circuit(c_str(text, "text")?)?;
        write_out(out, Box::into_raw(Box::new(BcCircuit(c))))
    })
}

/// Reads and parses a circuit file; errors carry the path and line.
///
/// # Safety
/// `path` must be a NUL-terminated UTF-8 string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bc_circuit_from_file(path: *const c_char, out: *mut *mut BcCircuit) -> BcStatus {
    guard(|| {
        let c = Circuit::from_file(c_str(path, "path")?)?;
        write_out(out, Box::into_raw(Box::new(BcCircuit(c))))
    })
}

/// # Safety
/// `c` must be NULL or a handle from `bc_circuit_parse` / `bc_circuit_from_file` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bc_circuit_free(c: *mut BcCircuit) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Number of qubits, or 0 for NULL.
///
/// # Safety
/// `c` must be NULL or a live circuit handle.
#[no_mangle]
pub unsafe extern "C" fn bc_circuit_n_qubits(c: *const BcCircuit) -> usize {
    c.as_ref().map_or(0, |c| c.0.n_qubits())
}

/// # Safety
/// `c` must be a live circuit handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bc_circuit_unitary(c: *const BcCircuit, out: *mut *mut BcUnitary) -> BcStatus {
    guard(|| {
        let c = borrow(c, "circuit")?;
        write_out(out, Box::into_raw(Box::new(BcUnitary(circuit_unitary(&c.0)))))
    })
}

/// Builds a unitary from `dim * dim` real entries in row-major order.
///
/// # Safety
/// `data` must point to `dim * dim` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bc_unitary_from_real(dim: usize, data: *const f64, out: *mut *mut BcUnitary) -> BcStatus {
    guard(|| {
        if data.is_null() {
            return Err(null("data"));
        }
        let len = dim
            .checked_mul(dim)
            .ok_or_else(|| Failure(BcStatus::Shape, format!("dimension {dim} too large")))?;
        let entries = std::slice::from_raw_parts(data, len);
        let u = UnitaryMatrix::from_real(dim, entries)?;
        write_out(out, Box::into_raw(Box::new(BcUnitary(u))))
    })
}

/// Haar-random real orthogonal matrix drawn from stream `stream` of `seed`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bc_unitary_random_orthogonal(
    dim: usize,
    seed: u64,
    stream: u64,
    out: *mut *mut BcUnitary,
) -> BcStatus {
    guard(|| {
        let mut rng = RngStream::new(seed, stream);
        let u = random_real_orthogonal(dim, &mut rng)?;
        write_out(out, Box::into_raw(Box::new(BcUnitary(u))))
    })
}

/// The doubled `2n`-qubit circuit whose Bell value determines the distance exactly.
///
/// # Safety
/// `u` must be a live unitary handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bc_unitary_embed_double(u: *const BcUnitary, out: *mut *mut BcUnitary) -> BcStatus {
    guard(|| {
        let u = borrow(u, "unitary")?;
        write_out(out, Box::into_raw(Box::new(BcUnitary(embed_double(&u.0)?))))
    })
}

/// Matrix dimension, or 0 for NULL.
///
/// # Safety
/// `u` must be NULL or a live unitary handle.
#[no_mangle]
pub unsafe extern "C" fn bc_unitary_dim(u: *const BcUnitary) -> usize {
    u.as_ref().map_or(0, |u| u.0.dim())
}

/// Copies entry `(row, col)` into `re` / `im`.
///
/// # Safety
/// `u` must be a live unitary handle; `re` and `im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bc_unitary_get(
    u: *const BcUnitary,
    row: usize,
    col: usize,
    re: *mut f64,
    im: *mut f64,
) -> BcStatus {
    guard(|| {
        let u = borrow(u, "unitary")?;
        let d = u.0.dim();
        if row >= d || col >= d {
            return Err(Failure(
                BcStatus::Range,
                format!("entry ({row}, {col}) outside {d}x{d}"),
            ));
        }
        let z = u.0.get(row, col);
        write_out(re, z.re)?;
        write_out(im, z.im)
    })
}

/// # Safety
/// `u` must be NULL or a unitary handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bc_unitary_free(u: *mut BcUnitary) {
    if !u.is_null() {
        drop(Box::from_raw(u));
    }
}

/// `D(U1, U2) = sqrt(1 - |Tr(U1^T U2) / d|^2)`.
///
/// # Safety
/// `u1`, `u2` must be live unitary handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bc_circuit_distance(u1: *const BcUnitary, u2: *const BcUnitary, out: *mut f64) -> BcStatus {
    guard(|| {
        let (a, b) = (borrow(u1, "u1")?, borrow(u2, "u2")?);
        write_out(out, circuit_distance(&a.0, &b.0)?)
    })
}

/// Exact Bell value of `(U1 ⊗ U2)|Φ_d>` with `m` settings.
///
/// # Safety
/// `u1`, `u2` must be live unitary handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bc_bell_value(
    u1: *const BcUnitary,
    u2: *const BcUnitary,
    m: usize,
    out: *mut f64,
) -> BcStatus {
    guard(|| {
        let (a, b) = (borrow(u1, "u1")?, borrow(u2, "u2")?);
        let psi = pair_state(&a.0, &b.0)?;
        write_out(out, bell_value_gamma(&psi, a.0.dim(), m)?)
    })
}

/// Two-sided distance bounds implied by a Bell value on a plain pair.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bc_distance_bounds(value: f64, d: usize, m: usize, out: *mut BcBounds) -> BcStatus {
    guard(|| {
        let b = distance_bounds_from_value(value, d, m)?;
        write_out(
            out,
            BcBounds {
                lower: b.lower,
                upper: b.upper,
            },
        )
    })
}

/// Exact distance from a Bell value measured on doubled circuits (`d = 4^n`).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bc_distance_from_embedded_value(value: f64, d: usize, m: usize, out: *mut f64) -> BcStatus {
    guard(|| write_out(out, distance_from_embedded_value(value, d, m)?))
}

/// Shots needed to estimate the normalized Bell value within `epsilon` with
/// probability at least `1 - delta`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bc_plan_shots(epsilon: f64, delta: f64, out: *mut u64) -> BcStatus {
    guard(|| write_out(out, plan_shots(epsilon, delta)?.shots))
}

/// Finite-shot estimate of `D(U1, U2)` through the doubled circuits. Replays
/// exactly for a given `seed`.
///
/// # Safety
/// `u1`, `u2` must be live unitary handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bc_estimate_distance(
    u1: *const BcUnitary,
    u2: *const BcUnitary,
    m: usize,
    shots: u64,
    seed: u64,
    out: *mut BcEstimate,
) -> BcStatus {
    guard(|| {
        let (a, b) = (borrow(u1, "u1")?, borrow(u2, "u2")?);
        let r = estimate_distance(&a.0, &b.0, m, &ShotPlan::fixed(shots)?, seed)?;
        write_out(
            out,
            BcEstimate {
                shots: r.shots,
                seed: r.seed,
                normalized: r.estimate,
                bell_value: r.bell_estimate(),
                distance: r.distance_estimate,
            },
        )
    })
}
