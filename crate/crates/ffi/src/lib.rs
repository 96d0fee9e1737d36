//! C interface: parse a model, run a check, read back the verdict.
//!
//! Handles are opaque and owned by the caller until passed to the matching
//! `*_free`. Strings returned by the library are freed with [`topaq_string_free`].
//! After a non-OK status, [`topaq_last_error`] describes the failure.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use topaq::cli::{check, classify, verdict_code};
use topaq::deciders::{DecideError, Engine, Mode, OpacityVerdict};
use topaq::model::parse_model;
use topaq::observers::TimeSelection;
use topaq::oracle::OracleParams;
use topaq::ta::TimedAutomaton;

/// Status returned by every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TopaqStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    BadArgument = 4,
    /// The question is outside every implemented engine.
    Refused = 5,
    Failed = 6,
    Panic = 7,
}

/// A parsed timed automaton.
pub struct TopaqModel(TimedAutomaton);

/// The outcome of a check.
pub struct TopaqVerdict(OpacityVerdict);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn guarded(f: impl FnOnce() -> Result<(), (TopaqStatus, String)>) -> TopaqStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TopaqStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            TopaqStatus::Panic
        }
    }
}

/// # Safety
/// `p` is null or a NUL-terminated string.
unsafe fn opt_str<'a>(p: *const c_char, what: &str) -> Result<Option<&'a str>, (TopaqStatus, String)> {
    if p.is_null() {
        return Ok(None);
    }
    CStr::from_ptr(p)
        .to_str()
        .map(Some)
        .map_err(|_| (TopaqStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

/// # Safety
/// `p` is null or a NUL-terminated string.
unsafe fn req_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (TopaqStatus, String)> {
    opt_str(p, what)?.ok_or_else(|| (TopaqStatus::NullArgument, format!("{what} is null")))
}

fn to_c(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).map_or(ptr::null_mut(), CString::into_raw)
}

/// Parses model text into `*out`.
///
/// # Safety
/// `text` is a NUL-terminated string and `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn topaq_model_parse(text: *const c_char, out: *mut *mut TopaqModel) -> TopaqStatus {
    guarded(|| {
        if out.is_null() {
            return Err((TopaqStatus::NullArgument, "out is null".into()));
        }
        *out = ptr::null_mut();
        let text = req_str(text, "text")?;
        let ta = parse_model(text).map_err(|e| (TopaqStatus::Parse, e.to_string()))?;
        *out = Box::into_raw(Box::new(TopaqModel(ta)));
        Ok(())
    })
}

/// # Safety
/// `model` is null or came from [`topaq_model_parse`] and is not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn topaq_model_free(model: *mut TopaqModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Classification report as text; null if `model` is null.
///
/// # Safety
/// `model` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn topaq_model_classify(model: *const TopaqModel) -> *mut c_char {
    match model.as_ref() {
        Some(m) => to_c(classify(&m.0)),
        None => ptr::null_mut(),
    }
}

/// Runs a check. `mode` is `exists`, `weak` or `full`; `obs` is null or an observer
/// spec such as `first:2`; `engine` is null (auto) or an engine name.
///
/// # Safety
/// String arguments are null or NUL-terminated, `model` is a live handle, `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn topaq_check(
    model: *const TopaqModel,
    mode: *const c_char,
    obs: *const c_char,
    engine: *const c_char,
    out: *mut *mut TopaqVerdict,
) -> TopaqStatus {
    guarded(|| {
        if out.is_null() {
            return Err((TopaqStatus::NullArgument, "out is null".into()));
        }
        *out = ptr::null_mut();
        let m = model.as_ref().ok_or((TopaqStatus::NullArgument, "model is null".to_string()))?;
        let mode_s = req_str(mode, "mode")?;
        let mode = Mode::parse(mode_s).ok_or((TopaqStatus::BadArgument, format!("unknown mode `{mode_s}`")))?;
        let engine = match opt_str(engine, "engine")? {
            None => Engine::Auto,
            Some(e) => Engine::parse(e).ok_or((TopaqStatus::BadArgument, format!("unknown engine `{e}`")))?,
        };
        let sel = opt_str(obs, "obs")?
            .map(TimeSelection::parse)
            .transpose()
            .map_err(|e| (TopaqStatus::BadArgument, e.to_string()))?;
        let v = check(&m.0, mode, sel.as_ref(), engine, &OracleParams::default()).map_err(|e| {
            let status = match e {
                DecideError::Undecidable(_) | DecideError::NotDiscrete | DecideError::NotOera => TopaqStatus::Refused,
                _ => TopaqStatus::Failed,
            };
            (status, e.to_string())
        })?;
        *out = Box::into_raw(Box::new(TopaqVerdict(v)));
        Ok(())
    })
}

/// # Safety
/// `v` is null or came from [`topaq_check`] and is not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn topaq_verdict_free(v: *mut TopaqVerdict) {
    if !v.is_null() {
        drop(Box::from_raw(v));
    }
}

/// 1 if the property holds, 0 if not, -1 for a null handle.
///
/// # Safety
/// `v` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn topaq_verdict_holds(v: *const TopaqVerdict) -> i32 {
    v.as_ref().map_or(-1, |v| v.0.holds as i32)
}

/// 1 if the answer is exact, 0 if it comes from an exhausted bounded search.
///
/// # Safety
/// `v` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn topaq_verdict_definitive(v: *const TopaqVerdict) -> i32 {
    v.as_ref().map_or(-1, |v| v.0.definitive as i32)
}

/// Command-line exit code for this verdict: 0 holds, 1 violated, 2 inconclusive.
///
/// # Safety
/// `v` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn topaq_verdict_exit_code(v: *const TopaqVerdict) -> i32 {
    v.as_ref().map_or(-1, |v| verdict_code(&v.0))
}

/// Witness word such as `(a, 0)(b, 1/2)`, or null when there is none.
///
/// # Safety
/// `v` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn topaq_verdict_witness(v: *const TopaqVerdict) -> *mut c_char {
    match v.as_ref().and_then(|v| v.0.witness.as_ref()) {
        Some(w) => to_c(w.to_string()),
        None => ptr::null_mut(),
    }
}

/// Message for the last failure on this thread, or null. Valid until the next call.
#[no_mangle]
pub extern "C" fn topaq_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// # Safety
/// `s` is null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn topaq_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_arguments() {
        unsafe {
            let mut m = ptr::null_mut();
            assert_eq!(topaq_model_parse(ptr::null(), &mut m), TopaqStatus::NullArgument);
            assert!(m.is_null());
            assert!(!topaq_last_error().is_null());
            assert_eq!(topaq_verdict_holds(ptr::null()), -1);
            topaq_model_free(ptr::null_mut());
            topaq_string_free(ptr::null_mut());
        }
    }
}
