//! C ABI for the pastsearch engine.
//!
//! Conventions:
//! - Every fallible function returns a `PsStatus`. On anything but
//!   `PS_STATUS_OK`, `ps_last_error_message()` describes the failure.
//! - Results are UTF-8 JSON strings written to `*out_json`. The caller owns
//!   them and releases them with `ps_string_free`.
//! - Request arguments are NUL-terminated UTF-8. JSON request bodies have
//!   the same shape as the HTTP API.
//! - A `PsEngine` may be shared between threads.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use pastsearch::config::ServiceConfig;
use pastsearch::engine::{AssertionRequest, DecisionRequest, Engine, EngineError, ErrorKind};
use pastsearch::session::NewSession;
use serde::Serialize;

/// Opaque engine handle.
pub struct PsEngine {
    engine: Engine,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsStatus {
    Ok = 0,
    /// A NULL pointer, invalid UTF-8, malformed JSON or a rejected value.
    InvalidArgument = 1,
    /// Unknown session, category, target or fragment.
    NotFound = 2,
    /// The fragment is not in the session's current result set.
    Conflict = 3,
    /// Config, graph or corpus could not be loaded.
    StartupFailed = 4,
    /// I/O failure or a corrupt session file.
    Internal = 5,
    /// A panic was caught at the boundary.
    Panic = 6,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Failure(PsStatus, String);

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        let status = match e.kind {
            ErrorKind::Invalid => PsStatus::InvalidArgument,
            ErrorKind::NotFound => PsStatus::NotFound,
            ErrorKind::Conflict => PsStatus::Conflict,
            ErrorKind::Internal => PsStatus::Internal,
        };
        Failure(status, format!("{}: {}", e.code, e.message))
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure(PsStatus::InvalidArgument, message.into())
}

/// Runs `f`, turning errors and panics into a status plus last error.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> PsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            PsStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(&message);
            status
        }
        Err(_) => {
            set_error("internal panic");
            PsStatus::Panic
        }
    }
}

/// # Safety
/// `p` is NULL or a valid NUL-terminated string.
unsafe fn arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(invalid(format!("{name} is NULL")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| invalid(format!("{name} is not valid UTF-8")))
}

/// # Safety
/// `p` is NULL or a pointer returned by `ps_engine_open`.
unsafe fn handle<'a>(p: *const PsEngine) -> Result<&'a Engine, Failure> {
    p.as_ref().map(|h| &h.engine).ok_or_else(|| invalid("engine is NULL"))
}

fn parse<T: serde::de::DeserializeOwned>(json: &str, name: &str) -> Result<T, Failure> {
    serde_json::from_str(json).map_err(|e| invalid(format!("{name}: {e}")))
}

/// # Safety
/// `out` is NULL or valid for writes.
unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    if out.is_null() {
        return Err(invalid("out_json is NULL"));
    }
    let c = CString::new(s).map_err(|_| Failure(PsStatus::Internal, "result contains NUL".into()))?;
    *out = c.into_raw();
    Ok(())
}

/// # Safety
/// `out` is NULL or valid for writes.
unsafe fn write_json(out: *mut *mut c_char, value: &impl Serialize) -> Result<(), Failure> {
    let s = serde_json::to_string(value).map_err(|e| Failure(PsStatus::Internal, e.to_string()))?;
    write_string(out, s)
}

fn optional(n: usize) -> Option<usize> {
    (n != 0).then_some(n)
}

/// Loads the config file and everything it names. On success `*out` holds
/// a handle to release with `ps_engine_free`.
///
/// # Safety
/// `config_path` is a NUL-terminated string; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ps_engine_open(config_path: *const c_char, out: *mut *mut PsEngine) -> PsStatus {
    guard(|| {
        if out.is_null() {
            return Err(invalid("out is NULL"));
        }
        *out = ptr::null_mut();
        let path = arg(config_path, "config_path")?;
        let config = ServiceConfig::load(path).map_err(|e| Failure(PsStatus::StartupFailed, e.to_string()))?;
        let engine = Engine::from_config(&config).map_err(|e| Failure(PsStatus::StartupFailed, e.to_string()))?;
        *out = Box::into_raw(Box::new(PsEngine { engine }));
        Ok(())
    })
}

/// Releases an engine. NULL is ignored.
///
/// # Safety
/// `engine` is NULL or a handle from `ps_engine_open` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ps_engine_free(engine: *mut PsEngine) {
    if !engine.is_null() {
        drop(Box::from_raw(engine));
    }
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` is NULL or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ps_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last failed call on this thread; empty after a
/// success. Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn ps_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Category typeahead. `k == 0` uses the default of 10.
///
/// # Safety
/// Pointers as in the conventions at the top of this header.
#[no_mangle]
pub unsafe extern "C" fn ps_category_search(
    engine: *const PsEngine,
    query: *const c_char,
    k: usize,
    out_json: *mut *mut c_char,
) -> PsStatus {
    guard(|| {
        let engine = handle(engine)?;
        let matches = engine.search_categories(arg(query, "query")?, optional(k));
        write_json(out_json, &matches)
    })
}

/// Creates a session from `{motivation, period, roots, max_depth?}`.
///
/// # Safety
/// Pointers as in the conventions at the top of this header.
#[no_mangle]
pub unsafe extern "C" fn ps_session_create(
    engine: *const PsEngine,
    request_json: *const c_char,
    out_json: *mut *mut c_char,
) -> PsStatus {
    guard(|| {
        let engine = handle(engine)?;
        let request: NewSession = parse(arg(request_json, "request_json")?, "request_json")?;
        write_json(out_json, &engine.create_session(request)?)
    })
}

/// # Safety
/// Pointers as in the conventions at the top of this header.
#[no_mangle]
pub unsafe extern "C" fn ps_session_assessment(
    engine: *const PsEngine,
    session_id: *const c_char,
    out_json: *mut *mut c_char,
) -> PsStatus {
    guard(|| {
        let engine = handle(engine)?;
        write_json(out_json, &engine.assessment(arg(session_id, "session_id")?)?)
    })
}

/// Records `{action, target_kind, target}`.
///
/// # Safety
/// Pointers as in the conventions at the top of this header.
#[no_mangle]
pub unsafe extern "C" fn ps_session_decide(
    engine: *const PsEngine,
    session_id: *const c_char,
    decision_json: *const c_char,
    out_json: *mut *mut c_char,
) -> PsStatus {
    guard(|| {
        let engine = handle(engine)?;
        let request: DecisionRequest = parse(arg(decision_json, "decision_json")?, "decision_json")?;
        write_json(out_json, &engine.decide(arg(session_id, "session_id")?, request)?)
    })
}

/// One page of results. `page` is 1-based; 0 for either argument uses the
/// default.
///
/// # Safety
/// Pointers as in the conventions at the top of this header.
#[no_mangle]
pub unsafe extern "C" fn ps_session_results(
    engine: *const PsEngine,
    session_id: *const c_char,
    page: usize,
    page_size: usize,
    out_json: *mut *mut c_char,
) -> PsStatus {
    guard(|| {
        let engine = handle(engine)?;
        let results = engine.results(arg(session_id, "session_id")?, optional(page), optional(page_size))?;
        write_json(out_json, &results)
    })
}

/// Counts grouped by `year` or `meta:<key>`.
///
/// # Safety
/// Pointers as in the conventions at the top of this header.
#[no_mangle]
pub unsafe extern "C" fn ps_session_analytics(
    engine: *const PsEngine,
    session_id: *const c_char,
    group_by: *const c_char,
    out_json: *mut *mut c_char,
) -> PsStatus {
    guard(|| {
        let engine = handle(engine)?;
        let analytics = engine.analytics(arg(session_id, "session_id")?, arg(group_by, "group_by")?)?;
        write_json(out_json, &analytics)
    })
}

/// Asserts that a sentence of the result set is relevant.
///
/// # Safety
/// Pointers as in the conventions at the top of this header.
#[no_mangle]
pub unsafe extern "C" fn ps_session_assert(
    engine: *const PsEngine,
    session_id: *const c_char,
    doc_id: *const c_char,
    sentence_index: usize,
    out_json: *mut *mut c_char,
) -> PsStatus {
    guard(|| {
        let engine = handle(engine)?;
        let request = AssertionRequest { doc_id: arg(doc_id, "doc_id")?.to_owned(), sentence_index };
        write_json(out_json, &engine.assert_relevance(arg(session_id, "session_id")?, &request)?)
    })
}

/// The session's export document, byte-identical to the session file.
///
/// # Safety
/// Pointers as in the conventions at the top of this header.
#[no_mangle]
pub unsafe extern "C" fn ps_session_export(
    engine: *const PsEngine,
    session_id: *const c_char,
    out_json: *mut *mut c_char,
) -> PsStatus {
    guard(|| {
        let engine = handle(engine)?;
        let bytes = engine.export(arg(session_id, "session_id")?)?;
        let text = String::from_utf8(bytes).map_err(|e| Failure(PsStatus::Internal, e.to_string()))?;
        write_string(out_json, text)
    })
}
