//! C ABI for the nthcoeff engine.
//!
//! The surface is deliberately small: parse an instance file into an opaque
//! handle, compute coefficients against it, free what you were given.  Every
//! entry point returns an `NcStatus`; on failure a human-readable message is
//! stored per thread and can be read back with `nc_last_error` until the next
//! call on the same thread.  Strings returned through out-pointers are owned
//! by the caller and must be released with `nc_string_free`.
//!
//! The matching header `include/nthcoeff.h` is regenerated by the build
//! script on every compile.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use nthcoeff::cli::{self, Algorithm, InstanceFile, RunConfig};
use nthcoeff::error::{Error, ErrorClass};
use num_bigint::BigUint;

/// ABI revision; bumped on any breaking change to this surface.
pub const NC_ABI_VERSION: u32 = 1;

/// Result of every fallible entry point.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum NcStatus {
    /// The call succeeded.
    Ok = 0,
    /// The instance file or target index was rejected.
    Input = 1,
    /// An internal invariant failed; the result cannot be trusted.
    Internal = 2,
    /// Every randomized fallback for the requested engine was exhausted.
    Unsupported = 3,
    /// A null pointer or malformed argument was passed in.
    Argument = 4,
}

/// Engine selector; `Auto` picks by field size exactly like the CLI.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum NcAlgorithm {
    Auto = 0,
    Bivariate = 1,
    Matrix = 2,
    HermitePade = 3,
    Recurrence = 4,
}

impl NcAlgorithm {
    fn to_cli(self) -> Algorithm {
        match self {
            NcAlgorithm::Auto => Algorithm::Auto,
            NcAlgorithm::Bivariate => Algorithm::Bivariate,
            NcAlgorithm::Matrix => Algorithm::Matrix,
            NcAlgorithm::HermitePade => Algorithm::HermitePade,
            NcAlgorithm::Recurrence => Algorithm::Recurrence,
        }
    }
}

/// Opaque parsed instance: the defining data plus the file's target index.
pub struct NcInstance {
    file: InstanceFile,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let sanitized: String = msg.chars().map(|c| if c == '\0' { ' ' } else { c }).collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).expect("NUL stripped above");
    });
}

fn clear_error() {
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::default();
    });
}

fn status_of(e: &Error) -> NcStatus {
    match e.class() {
        ErrorClass::Input => NcStatus::Input,
        ErrorClass::Internal => NcStatus::Internal,
        ErrorClass::Fallback => NcStatus::Unsupported,
    }
}

fn fail(e: &Error) -> NcStatus {
    set_error(&e.to_string());
    status_of(e)
}

fn fail_argument(msg: &str) -> NcStatus {
    set_error(msg);
    NcStatus::Argument
}

/// Run `body` with panics converted into `Internal`, clearing the error slot
/// on entry so `nc_last_error` only reflects the most recent call.
fn guarded(body: impl FnOnce() -> NcStatus) -> NcStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            NcStatus::Internal
        }
    }
}

/// # Safety
/// `s` must be null or a NUL-terminated string.
unsafe fn utf8_arg<'a>(s: *const c_char, what: &str) -> Result<&'a str, NcStatus> {
    if s.is_null() {
        return Err(fail_argument(&format!("{what} must not be null")));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail_argument(&format!("{what} is not valid UTF-8")))
}

fn give_string(s: String, out: *mut *mut c_char) -> NcStatus {
    let sanitized: String = s.chars().map(|c| if c == '\0' { ' ' } else { c }).collect();
    let c = CString::new(sanitized).expect("NUL stripped above");
    unsafe { *out = c.into_raw() };
    NcStatus::Ok
}

fn give_instance(file: InstanceFile, out: *mut *mut NcInstance) -> NcStatus {
    let handle = Box::new(NcInstance { file });
    unsafe { *out = Box::into_raw(handle) };
    NcStatus::Ok
}

/// ABI revision of this library.
#[no_mangle]
pub extern "C" fn nc_abi_version() -> u32 {
    NC_ABI_VERSION
}

/// Message describing the most recent failure on this thread, as a
/// NUL-terminated string.  Empty when the last call succeeded.  The pointer
/// is invalidated by the next nthcoeff call on the same thread; copy the
/// contents if you need to keep them.
#[no_mangle]
pub extern "C" fn nc_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Parse instance text (the `.nth` file format) into a handle.
///
/// On success writes a freshly allocated handle to `*out`; release it with
/// `nc_instance_free`.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nc_parse(
    text: *const c_char,
    out: *mut *mut NcInstance,
) -> NcStatus {
    guarded(|| {
        if out.is_null() {
            return fail_argument("out must not be null");
        }
        let text = match utf8_arg(text, "text") {
            Ok(t) => t,
            Err(status) => return status,
        };
        match cli::parse_instance_str(text) {
            Ok(file) => give_instance(file, out),
            Err(e) => fail(&e),
        }
    })
}

/// Read and parse an instance file from disk.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nc_parse_file(
    path: *const c_char,
    out: *mut *mut NcInstance,
) -> NcStatus {
    guarded(|| {
        if out.is_null() {
            return fail_argument("out must not be null");
        }
        let path = match utf8_arg(path, "path") {
            Ok(p) => p,
            Err(status) => return status,
        };
        match cli::parse_instance(Path::new(path)) {
            Ok(file) => give_instance(file, out),
            Err(e) => fail(&e),
        }
    })
}

/// Release a handle obtained from `nc_parse` or `nc_parse_file`.  Null is
/// ignored.
///
/// # Safety
/// `handle` must have come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn nc_instance_free(handle: *mut NcInstance) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Basic shape of a parsed instance.  Each out-pointer may be null if the
/// caller does not need that field: `p`/`s` describe the coefficient field
/// F_{p^s}, `d`/`h` the `y`- and `t`-degrees of the defining polynomial.
///
/// # Safety
/// `handle` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn nc_instance_shape(
    handle: *const NcInstance,
    p: *mut u64,
    s: *mut usize,
    d: *mut usize,
    h: *mut usize,
) -> NcStatus {
    guarded(|| {
        let Some(handle) = handle.as_ref() else {
            return fail_argument("handle must not be null");
        };
        let inst = &handle.file.inst;
        if !p.is_null() {
            *p = inst.field.p;
        }
        if !s.is_null() {
            *s = inst.field.s;
        }
        if !d.is_null() {
            *d = inst.d;
        }
        if !h.is_null() {
            *h = inst.h;
        }
        NcStatus::Ok
    })
}

fn compute_report(
    handle: &NcInstance,
    n_decimal: Option<&str>,
    algorithm: NcAlgorithm,
    seed: u64,
) -> Result<cli::Report, NcStatus> {
    let n = match n_decimal {
        None => handle.file.n.clone(),
        Some(text) => match BigUint::parse_bytes(text.as_bytes(), 10) {
            Some(n) => n,
            None => {
                return Err(fail_argument(&format!(
                    "index '{text}' is not a decimal natural number"
                )))
            }
        },
    };
    let cfg = RunConfig {
        algorithm: algorithm.to_cli(),
        seed,
        ..RunConfig::default()
    };
    cli::run_compute_at(&handle.file.inst, &n, &cfg).map_err(|e| fail(&e))
}

/// Compute the coefficient at index `n` (a decimal string; pass null to use
/// the index stored in the instance file).  On success writes the value to
/// `*out_value` as `s` space-separated residues, least-significant basis
/// coordinate first — the same rendering the CLI prints.  Free the string
/// with `nc_string_free`.
///
/// `seed` drives the randomized choices some engines make; any fixed value
/// gives reproducible runs.
///
/// # Safety
/// `handle` must be a live handle; `n` null or NUL-terminated; `out_value`
/// a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nc_compute(
    handle: *const NcInstance,
    n: *const c_char,
    algorithm: NcAlgorithm,
    seed: u64,
    out_value: *mut *mut c_char,
) -> NcStatus {
    guarded(|| {
        let Some(handle) = handle.as_ref() else {
            return fail_argument("handle must not be null");
        };
        if out_value.is_null() {
            return fail_argument("out_value must not be null");
        }
        let n = if n.is_null() {
            None
        } else {
            match utf8_arg(n, "n") {
                Ok(t) => Some(t),
                Err(status) => return status,
            }
        };
        match compute_report(handle, n, algorithm, seed) {
            Ok(report) => give_string(report.value, out_value),
            Err(status) => status,
        }
    })
}

/// Like `nc_compute`, but writes the full run report as a compact JSON
/// object (engine, field, degrees, index, digit count, value).  The JSON is
/// byte-for-byte reproducible for identical inputs.
///
/// # Safety
/// Same contract as `nc_compute`.
#[no_mangle]
pub unsafe extern "C" fn nc_compute_json(
    handle: *const NcInstance,
    n: *const c_char,
    algorithm: NcAlgorithm,
    seed: u64,
    out_json: *mut *mut c_char,
) -> NcStatus {
    guarded(|| {
        let Some(handle) = handle.as_ref() else {
            return fail_argument("handle must not be null");
        };
        if out_json.is_null() {
            return fail_argument("out_json must not be null");
        }
        let n = if n.is_null() {
            None
        } else {
            match utf8_arg(n, "n") {
                Ok(t) => Some(t),
                Err(status) => return status,
            }
        };
        match compute_report(handle, n, algorithm, seed) {
            Ok(report) => give_string(report.to_json(), out_json),
            Err(status) => status,
        }
    })
}

/// Release a string returned through any out-pointer of this library.  Null
/// is ignored.
///
/// # Safety
/// `s` must have come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn nc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
