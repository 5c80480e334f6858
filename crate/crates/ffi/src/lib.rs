//! C ABI over `momentkit`.
//!
//! Models are opaque `MkModel` handles. Every entry point returns an
//! `MkStatus`; reports come back as JSON strings (schema 1) that the caller
//! releases with `mk_string_free`. On any status other than `MK_OK` and
//! `MK_VERIFY_FAILED`, `mk_last_error_message` describes the failure.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use momentkit::cli::{self, CliError, Context, RunReport, Space};
use momentkit::instance::InstanceParams;
use momentkit::model::{parse_model, Model};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MkStatus {
    MkOk = 0,
    /// The command ran and a check failed; the report is still returned.
    MkVerifyFailed = 1,
    MkParseError = 2,
    MkInvalidArgument = 3,
    MkPanic = 4,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MkSpace {
    MkSpaceBase = 0,
    MkSpaceTot = 1,
}

/// Opaque parsed model.
pub struct MkModel {
    model: Model,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(CString::new(msg).expect("nul bytes removed")));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn fail(status: MkStatus, msg: impl Into<String>) -> MkStatus {
    set_error(msg);
    status
}

fn from_cli(e: CliError) -> MkStatus {
    let status = match e {
        CliError::Parse(_) => MkStatus::MkParseError,
        _ => MkStatus::MkInvalidArgument,
    };
    fail(status, e.to_string())
}

/// Runs `f`, turning panics into `MK_PANIC`.
fn guard(f: impl FnOnce() -> MkStatus) -> MkStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            fail(MkStatus::MkPanic, msg)
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, MkStatus> {
    if p.is_null() {
        return Err(fail(MkStatus::MkInvalidArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(MkStatus::MkInvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn model_ref<'a>(m: *const MkModel) -> Result<&'a Model, MkStatus> {
    m.as_ref()
        .map(|h| &h.model)
        .ok_or_else(|| fail(MkStatus::MkInvalidArgument, "model handle is null"))
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> MkStatus {
    if out.is_null() {
        return fail(MkStatus::MkInvalidArgument, "output pointer is null");
    }
    match CString::new(s) {
        Ok(c) => {
            *out = c.into_raw();
            MkStatus::MkOk
        }
        Err(_) => fail(MkStatus::MkInvalidArgument, "output contains a nul byte"),
    }
}

unsafe fn write_report(out: *mut *mut c_char, r: Result<RunReport, CliError>) -> MkStatus {
    match r {
        Ok(report) => {
            let passed = report.passed;
            match write_string(out, report.to_json()) {
                MkStatus::MkOk if !passed => MkStatus::MkVerifyFailed,
                s => s,
            }
        }
        Err(e) => from_cli(e),
    }
}

macro_rules! try_ffi {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(s) => return s,
        }
    };
}

/// Parses model text into a new handle stored in `*out`.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mk_model_parse(text: *const c_char, out: *mut *mut MkModel) -> MkStatus {
    guard(|| {
        if out.is_null() {
            return fail(MkStatus::MkInvalidArgument, "output pointer is null");
        }
        let text = try_ffi!(read_str(text, "text"));
        match parse_model(text) {
            Ok(model) => {
                *out = Box::into_raw(Box::new(MkModel { model }));
                MkStatus::MkOk
            }
            Err(e) => fail(MkStatus::MkParseError, e.to_string()),
        }
    })
}

/// Releases a handle from `mk_model_parse` or `mk_generate`. Null is a no-op.
///
/// # Safety
/// `model` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn mk_model_free(model: *mut MkModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Canonical model text.
///
/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mk_model_render(model: *const MkModel, out: *mut *mut c_char) -> MkStatus {
    guard(|| {
        let m = try_ffi!(model_ref(model));
        write_string(out, m.render())
    })
}

/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mk_verify(model: *const MkModel, out: *mut *mut c_char) -> MkStatus {
    guard(|| {
        let m = try_ffi!(model_ref(model));
        write_report(out, cli::verify(m, &Context::default()))
    })
}

/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mk_trivialize(model: *const MkModel, out: *mut *mut c_char) -> MkStatus {
    guard(|| {
        let m = try_ffi!(model_ref(model));
        write_report(out, cli::trivialize(m, &Context::default()))
    })
}

/// Bracket of two total-space expressions such as `x*s^2`.
///
/// # Safety
/// `model` must be a live handle, `left`/`right` NUL-terminated strings and
/// `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mk_tot_bracket(
    model: *const MkModel,
    left: *const c_char,
    right: *const c_char,
    out: *mut *mut c_char,
) -> MkStatus {
    guard(|| {
        let m = try_ffi!(model_ref(model));
        let l = try_ffi!(read_str(left, "left"));
        let r = try_ffi!(read_str(right, "right"));
        write_report(out, cli::tot(m, l, r, &Context::default()))
    })
}

/// Rank at a point declared in the model.
///
/// # Safety
/// `model` must be a live handle, `point` a NUL-terminated string and `out`
/// a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mk_rank(
    model: *const MkModel,
    point: *const c_char,
    space: MkSpace,
    out: *mut *mut c_char,
) -> MkStatus {
    guard(|| {
        let m = try_ffi!(model_ref(model));
        let p = try_ffi!(read_str(point, "point"));
        let space = match space {
            MkSpace::MkSpaceBase => Space::Base,
            MkSpace::MkSpaceTot => Space::Tot,
        };
        write_report(out, cli::rank(m, p, space, &Context::default()))
    })
}

/// Extends every conformal field declared in the model.
///
/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mk_conformal(model: *const MkModel, out: *mut *mut c_char) -> MkStatus {
    guard(|| {
        let m = try_ffi!(model_ref(model));
        write_report(out, cli::conformal(m, None, &Context::default()))
    })
}

/// Twist-then-trivialize suite over `cases` seeds starting at `seed`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mk_roundtrip(cases: u64, seed: u64, out: *mut *mut c_char) -> MkStatus {
    guard(|| write_report(out, cli::roundtrip(cases, seed, InstanceParams::default())))
}

/// Seeded random model with default bounds.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mk_generate(seed: u64, out: *mut *mut MkModel) -> MkStatus {
    guard(|| {
        if out.is_null() {
            return fail(MkStatus::MkInvalidArgument, "output pointer is null");
        }
        match cli::generate(seed, InstanceParams::default(), &Context::default()) {
            Ok((_, model)) => {
                *out = Box::into_raw(Box::new(MkModel { model }));
                MkStatus::MkOk
            }
            Err(e) => from_cli(e),
        }
    })
}

/// Message for the most recent failure on this thread, or null. Valid until
/// the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn mk_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. Null is a no-op.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn mk_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
