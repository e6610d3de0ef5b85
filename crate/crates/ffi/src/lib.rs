//! C ABI over the statsub engine.
//!
//! Every function returns an `int32_t` status (`STATSUB_OK` on success) and
//! writes results through out-pointers. On failure the message is kept per
//! thread and read with [`statsub_last_error`]. Handles are opaque and must be
//! released with the matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use statsub::builtins::builtin_example;
use statsub::geometry::{ricci_and_scalar, ConnectionChoice, Convention};
use statsub::manifest::Manifest;
use statsub::report::{render, run, Format, Report, RunOptions};
use statsub::{ManifestError, NumericError};

pub const STATSUB_OK: i32 = 0;
pub const STATSUB_ERR_NULL: i32 = 1;
pub const STATSUB_ERR_UTF8: i32 = 2;
pub const STATSUB_ERR_MANIFEST: i32 = 3;
pub const STATSUB_ERR_UNKNOWN_EXAMPLE: i32 = 4;
pub const STATSUB_ERR_NUMERIC: i32 = 5;
pub const STATSUB_ERR_ARGUMENT: i32 = 6;
pub const STATSUB_ERR_PANIC: i32 = 7;

pub const STATSUB_FORMAT_JSON: i32 = 0;
pub const STATSUB_FORMAT_MARKDOWN: i32 = 1;

/// Use the manifest's curvature conventions.
pub const STATSUB_CONVENTION_MANIFEST: i32 = 0;
pub const STATSUB_CONVENTION_PLUS: i32 = 1;
pub const STATSUB_CONVENTION_MINUS: i32 = -1;
pub const STATSUB_CONVENTION_BOTH: i32 = 2;

/// A validated manifest.
pub struct StatsubManifest {
    inner: Manifest,
}

/// A finished report.
pub struct StatsubReport {
    inner: Report,
}

/// Run overrides; zero-initialized means "use the manifest".
#[repr(C)]
pub struct StatsubRunOptions {
    /// Random sample count; 0 keeps the manifest's.
    pub points: u64,
    pub seed: u64,
    /// Nonzero to apply `seed`.
    pub has_seed: u8,
    /// Tolerance multiplier; values ≤ 0 mean 1.
    pub tol_scale: f64,
    /// One of the `STATSUB_CONVENTION_*` values.
    pub convention: i32,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure(i32, String);

impl From<ManifestError> for Failure {
    fn from(e: ManifestError) -> Self {
        let code = match e {
            ManifestError::UnknownExample(_) => STATSUB_ERR_UNKNOWN_EXAMPLE,
            _ => STATSUB_ERR_MANIFEST,
        };
        Failure(code, e.to_string())
    }
}

impl From<NumericError> for Failure {
    fn from(e: NumericError) -> Self {
        Failure(STATSUB_ERR_NUMERIC, e.to_string())
    }
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> i32 {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            STATSUB_OK
        }
        Ok(Err(Failure(code, msg))) => {
            set_error(&msg);
            code
        }
        Err(_) => {
            set_error("internal panic");
            STATSUB_ERR_PANIC
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(STATSUB_ERR_NULL, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(STATSUB_ERR_UTF8, format!("{what} is not UTF-8")))
}

fn null(what: &str) -> Failure {
    Failure(STATSUB_ERR_NULL, format!("{what} is null"))
}

fn conventions(code: i32) -> Result<Option<Vec<Convention>>, Failure> {
    match code {
        STATSUB_CONVENTION_MANIFEST => Ok(None),
        STATSUB_CONVENTION_PLUS => Ok(Some(vec![Convention::Plus])),
        STATSUB_CONVENTION_MINUS => Ok(Some(vec![Convention::Minus])),
        STATSUB_CONVENTION_BOTH => Ok(Some(vec![Convention::Plus, Convention::Minus])),
        other => Err(Failure(STATSUB_ERR_ARGUMENT, format!("unknown convention code {other}"))),
    }
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn statsub_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Parses and validates a JSON manifest.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn statsub_manifest_from_json(json: *const c_char, out: *mut *mut StatsubManifest) -> i32 {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = Manifest::from_json(text(json, "json")?)?;
        *out = Box::into_raw(Box::new(StatsubManifest { inner }));
        Ok(())
    })
}

/// Loads a shipped example with its printed values.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn statsub_manifest_builtin(name: *const c_char, out: *mut *mut StatsubManifest) -> i32 {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = builtin_example(text(name, "name")?)?;
        *out = Box::into_raw(Box::new(StatsubManifest { inner }));
        Ok(())
    })
}

/// # Safety
/// `manifest` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn statsub_manifest_free(manifest: *mut StatsubManifest) {
    if !manifest.is_null() {
        drop(Box::from_raw(manifest));
    }
}

/// Chart dimension of the source manifold.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn statsub_manifest_dimension(manifest: *const StatsubManifest, out: *mut usize) -> i32 {
    guard(|| {
        let m = manifest.as_ref().ok_or_else(|| null("manifest"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = m.inner.dim();
        Ok(())
    })
}

/// Scalar curvature of the source connection at `point` under `convention`
/// (`STATSUB_CONVENTION_PLUS` or `_MINUS`).
///
/// # Safety
/// `point` must hold `dim` doubles; other pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn statsub_scalar_curvature(
    manifest: *const StatsubManifest,
    point: *const f64,
    dim: usize,
    convention: i32,
    out: *mut f64,
) -> i32 {
    guard(|| {
        let m = manifest.as_ref().ok_or_else(|| null("manifest"))?;
        if point.is_null() || out.is_null() {
            return Err(null("point or out"));
        }
        let conv = match conventions(convention)? {
            Some(v) if v.len() == 1 => v[0],
            _ => return Err(Failure(STATSUB_ERR_ARGUMENT, "convention must be +1 or -1".into())),
        };
        if dim != m.inner.dim() {
            return Err(Failure(
                STATSUB_ERR_ARGUMENT,
                format!("point has {dim} coordinates, chart has {}", m.inner.dim()),
            ));
        }
        let p = std::slice::from_raw_parts(point, dim);
        let s = m.inner.source.clone().with_convention(conv);
        *out = ricci_and_scalar(&s, ConnectionChoice::Nabla, p)?.1;
        Ok(())
    })
}

/// Runs every analysis the manifest requests. `options` may be null.
///
/// # Safety
/// Pointers must be valid; `out` receives a handle to free with
/// [`statsub_report_free`].
#[no_mangle]
pub unsafe extern "C" fn statsub_run(
    manifest: *const StatsubManifest,
    options: *const StatsubRunOptions,
    out: *mut *mut StatsubReport,
) -> i32 {
    guard(|| {
        let m = manifest.as_ref().ok_or_else(|| null("manifest"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let opts = match options.as_ref() {
            None => RunOptions::default(),
            Some(o) => RunOptions {
                points: (o.points > 0).then_some(o.points as usize),
                seed: (o.has_seed != 0).then_some(o.seed),
                tol_scale: (o.tol_scale > 0.0).then_some(o.tol_scale),
                conventions: conventions(o.convention)?,
            },
        };
        let inner = run(&m.inner, &opts)?;
        *out = Box::into_raw(Box::new(StatsubReport { inner }));
        Ok(())
    })
}

/// # Safety
/// `report` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn statsub_report_free(report: *mut StatsubReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Number of warnings in the report.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn statsub_report_warning_count(report: *const StatsubReport, out: *mut usize) -> i32 {
    guard(|| {
        let r = report.as_ref().ok_or_else(|| null("report"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = r.inner.warnings.len();
        Ok(())
    })
}

/// Renders the report as JSON or markdown into a new string, released with
/// [`statsub_string_free`].
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn statsub_report_render(
    report: *const StatsubReport,
    format: i32,
    out: *mut *mut c_char,
) -> i32 {
    guard(|| {
        let r = report.as_ref().ok_or_else(|| null("report"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let f = match format {
            STATSUB_FORMAT_JSON => Format::Json,
            STATSUB_FORMAT_MARKDOWN => Format::Markdown,
            other => return Err(Failure(STATSUB_ERR_ARGUMENT, format!("unknown format code {other}"))),
        };
        let s = CString::new(render(&r.inner, f)).map_err(|_| Failure(STATSUB_ERR_UTF8, "interior NUL".into()))?;
        *out = s.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn statsub_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn statsub_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}
