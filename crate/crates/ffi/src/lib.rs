//! C bindings for the decision engine.
//!
//! Every function returns a [`DecisionStatus`]. On failure the message is
//! kept per thread and can be read with [`decision_last_error`]. Strings
//! handed out by the library must be released with [`decision_string_free`];
//! handles with their matching `_free` function. Structured data crosses the
//! boundary as JSON in the same shape the model files and HTTP service use.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use decision_core::formulation::{Attribute, ProblemStatement};
use decision_core::model::{load_model, save_model, solve_model, ModelDocument};
use decision_core::process::{apply_step, init_session_with, OracleAnswer, Session, SessionConfig, Status};
use decision_core::solvers::{optimize_covering, CoveringInstance, SearchMode};
use decision_core::Error;

/// Result of every call. `DECISION_STATUS_OK` is zero.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecisionStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Panic = 3,
    InvalidJson = 4,

    MalformedRelation = 10,
    CapExceeded = 11,
    CyclicStrictPart = 12,
    NoDecisionProblem = 20,
    MissingNorms = 21,
    NotEnumerable = 22,
    EvaluationFailure = 23,
    NoDecomposition = 24,
    NotAggregable = 25,
    InvalidFormulation = 26,
    Expression = 27,
    UnknownReference = 30,
    InconsistentStatements = 31,
    DependentDimensions = 32,
    ConflictingImportance = 33,
    IntransitiveSwaps = 34,
    IncompleteElicitation = 35,
    Inconclusive = 36,
    NoAdmissibleArchetype = 40,
    CarrierMismatch = 41,
    NotCommensurable = 42,
    NotTotalImportance = 43,
    NotRepresentable = 44,
    UnconfiguredNode = 45,
    InvalidArgument = 46,
    MalformedNorms = 50,
    AmbiguousAssignment = 51,
    BadK = 52,
    Infeasible = 53,
    InvalidFixture = 54,
    ProtocolViolation = 60,
    UnsupportedStatement = 61,
    UnsupportedVersion = 70,
    ParseError = 71,
    Io = 72,
    StartupError = 73,
}

impl From<&Error> for DecisionStatus {
    fn from(e: &Error) -> Self {
        use DecisionStatus as S;
        match e {
            Error::MalformedRelation(_) => S::MalformedRelation,
            Error::CapExceeded { .. } => S::CapExceeded,
            Error::CyclicStrictPart(_) => S::CyclicStrictPart,
            Error::NoDecisionProblem => S::NoDecisionProblem,
            Error::MissingNorms(_) => S::MissingNorms,
            Error::NotEnumerable(_) => S::NotEnumerable,
            Error::EvaluationFailure(_) => S::EvaluationFailure,
            Error::NoDecomposition(_) => S::NoDecomposition,
            Error::NotAggregable(_) => S::NotAggregable,
            Error::InvalidFormulation(_) => S::InvalidFormulation,
            Error::Expression(_) => S::Expression,
            Error::UnknownReference(_) => S::UnknownReference,
            Error::InconsistentStatements(_) => S::InconsistentStatements,
            Error::DependentDimensions(_) => S::DependentDimensions,
            Error::ConflictingImportance(_) => S::ConflictingImportance,
            Error::IntransitiveSwaps(_) => S::IntransitiveSwaps,
            Error::IncompleteElicitation(_) => S::IncompleteElicitation,
            Error::Inconclusive(_) => S::Inconclusive,
            Error::NoAdmissibleArchetype(_) => S::NoAdmissibleArchetype,
            Error::CarrierMismatch(_) => S::CarrierMismatch,
            Error::NotCommensurable => S::NotCommensurable,
            Error::NotTotalImportance(_) => S::NotTotalImportance,
            Error::NotRepresentable(_) => S::NotRepresentable,
            Error::UnconfiguredNode(_) => S::UnconfiguredNode,
            Error::InvalidArgument(_) => S::InvalidArgument,
            Error::MalformedNorms(_) => S::MalformedNorms,
            Error::AmbiguousAssignment { .. } => S::AmbiguousAssignment,
            Error::BadK { .. } => S::BadK,
            Error::Infeasible(_) => S::Infeasible,
            Error::InvalidFixture(_) => S::InvalidFixture,
            Error::ProtocolViolation(_) => S::ProtocolViolation,
            Error::UnsupportedStatement(_) => S::UnsupportedStatement,
            Error::UnsupportedVersion { .. } => S::UnsupportedVersion,
            Error::ParseError { .. } => S::ParseError,
            Error::Io(_) => S::Io,
            Error::StartupError(_) => S::StartupError,
        }
    }
}

/// Elicitation state as reported by [`decision_session_status`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecisionSessionState {
    Running = 0,
    Satisfied = 1,
    Exhausted = 2,
}

/// A loaded model document.
pub struct DecisionModel(ModelDocument);

/// An elicitation session.
pub struct DecisionSession(Session);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(DecisionStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(DecisionStatus::from(&e), format!("error[{}]: {e}", e.code()))
    }
}

fn set_last_error(message: &str) {
    // Interior NULs would truncate the message; replace them.
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

/// Runs `body`, recording any failure or panic as the thread's last error.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> DecisionStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            DecisionStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_last_error(&message);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            DecisionStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(DecisionStatus::NullPointer, format!("`{what}` is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(DecisionStatus::InvalidUtf8, format!("`{what}` is not valid UTF-8")))
}

fn parse_json<T: serde::de::DeserializeOwned>(text: &str, what: &str) -> Result<T, Failure> {
    serde_json::from_str(text).map_err(|e| Failure(DecisionStatus::InvalidJson, format!("`{what}`: {e}")))
}

fn out_ptr<'a, T>(out: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    // SAFETY: callers pass either null (rejected here) or a writable slot.
    unsafe { out.as_mut() }.ok_or_else(|| Failure(DecisionStatus::NullPointer, format!("`{what}` is null")))
}

fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    // SAFETY: non-null handles come from this library and are not yet freed.
    unsafe { p.as_ref() }.ok_or_else(|| Failure(DecisionStatus::NullPointer, format!("`{what}` is null")))
}

fn handle_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    // SAFETY: as for `handle`, and the caller holds no other reference.
    unsafe { p.as_mut() }.ok_or_else(|| Failure(DecisionStatus::NullPointer, format!("`{what}` is null")))
}

fn emit_json<T: serde::Serialize>(value: &T, out: *mut *mut c_char) -> Result<(), Failure> {
    let slot = out_ptr(out, "out")?;
    let text = serde_json::to_string(value).map_err(|e| Failure(DecisionStatus::InvalidJson, e.to_string()))?;
    *slot = CString::new(text).map_err(|e| Failure(DecisionStatus::InvalidJson, e.to_string()))?.into_raw();
    Ok(())
}

/// The message of the last failed call on this thread, or null after a
/// success. The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn decision_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. Null is a no-op.
///
/// # Safety
/// `s` must come from this library and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn decision_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version as a static string; do not free.
#[no_mangle]
pub extern "C" fn decision_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a model document from JSON text.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` a writable pointer slot.
#[no_mangle]
pub unsafe extern "C" fn decision_model_from_json(json: *const c_char, out: *mut *mut DecisionModel) -> DecisionStatus {
    guard(|| {
        let text = read_str(json, "json")?;
        let slot = out_ptr(out, "out")?;
        let doc = ModelDocument::from_json(text, "<ffi>")?;
        *slot = Box::into_raw(Box::new(DecisionModel(doc)));
        Ok(())
    })
}

/// Loads a model document from a file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` a writable pointer slot.
#[no_mangle]
pub unsafe extern "C" fn decision_model_load(path: *const c_char, out: *mut *mut DecisionModel) -> DecisionStatus {
    guard(|| {
        let path = read_str(path, "path")?;
        let slot = out_ptr(out, "out")?;
        *slot = Box::into_raw(Box::new(DecisionModel(load_model(Path::new(path))?)));
        Ok(())
    })
}

/// Writes a model document to a file, replacing it atomically.
///
/// # Safety
/// `model` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn decision_model_save(model: *const DecisionModel, path: *const c_char) -> DecisionStatus {
    guard(|| {
        let m = handle(model, "model")?;
        let path = read_str(path, "path")?;
        save_model(Path::new(path), &m.0)?;
        Ok(())
    })
}

/// Serializes a model as canonical JSON into a new string.
///
/// # Safety
/// `model` must be a live handle; `out` a writable pointer slot.
#[no_mangle]
pub unsafe extern "C" fn decision_model_to_json(model: *const DecisionModel, out: *mut *mut c_char) -> DecisionStatus {
    guard(|| {
        let m = handle(model, "model")?;
        let slot = out_ptr(out, "out")?;
        let text = m.0.to_json()?;
        *slot = CString::new(text).map_err(|e| Failure(DecisionStatus::InvalidJson, e.to_string()))?.into_raw();
        Ok(())
    })
}

/// Solves a model and writes the outcome as JSON into a new string.
///
/// # Safety
/// `model` must be a live handle; `out` a writable pointer slot.
#[no_mangle]
pub unsafe extern "C" fn decision_model_solve(
    model: *const DecisionModel,
    seed: u64,
    out: *mut *mut c_char,
) -> DecisionStatus {
    guard(|| {
        let m = handle(model, "model")?;
        let outcome = solve_model(&m.0, seed)?;
        emit_json(&outcome, out)
    })
}

/// # Safety
/// `model` must be null or a handle that is not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn decision_model_free(model: *mut DecisionModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Solves a covering instance given as a 0/1 matrix, one row per line.
/// `exact` selects branch-and-bound over the greedy heuristic.
///
/// # Safety
/// `matrix` must be a NUL-terminated string; `out` a writable pointer slot.
#[no_mangle]
pub unsafe extern "C" fn decision_covering_solve(
    matrix: *const c_char,
    exact: bool,
    out: *mut *mut c_char,
) -> DecisionStatus {
    guard(|| {
        let inst = CoveringInstance::from_matrix_text(read_str(matrix, "matrix")?)?;
        let mode = if exact { SearchMode::Exact } else { SearchMode::Greedy };
        emit_json(&optimize_covering(&inst, mode)?, out)
    })
}

/// Starts a session from a seed attribute and a problem statement, both as
/// JSON. A `max_iter` of zero keeps the default budget.
///
/// # Safety
/// Both strings must be NUL-terminated; `out` a writable pointer slot.
#[no_mangle]
pub unsafe extern "C" fn decision_session_new(
    seed_attribute_json: *const c_char,
    statement_json: *const c_char,
    max_iter: u32,
    seed: u64,
    out: *mut *mut DecisionSession,
) -> DecisionStatus {
    guard(|| {
        let attr: Attribute = parse_json(read_str(seed_attribute_json, "seed_attribute_json")?, "seed_attribute_json")?;
        let statement: ProblemStatement = parse_json(read_str(statement_json, "statement_json")?, "statement_json")?;
        let slot = out_ptr(out, "out")?;
        let mut config = SessionConfig { seed, ..Default::default() };
        if max_iter > 0 {
            config.max_iter = max_iter as usize;
        }
        *slot = Box::into_raw(Box::new(DecisionSession(init_session_with(&attr, statement, config)?)));
        Ok(())
    })
}

/// Restores a session from its JSON form.
///
/// # Safety
/// `json` must be NUL-terminated; `out` a writable pointer slot.
#[no_mangle]
pub unsafe extern "C" fn decision_session_from_json(
    json: *const c_char,
    out: *mut *mut DecisionSession,
) -> DecisionStatus {
    guard(|| {
        let session: Session = parse_json(read_str(json, "json")?, "json")?;
        *out_ptr(out, "out")? = Box::into_raw(Box::new(DecisionSession(session)));
        Ok(())
    })
}

/// The full session state as JSON.
///
/// # Safety
/// `session` must be a live handle; `out` a writable pointer slot.
#[no_mangle]
pub unsafe extern "C" fn decision_session_to_json(
    session: *const DecisionSession,
    out: *mut *mut c_char,
) -> DecisionStatus {
    guard(|| emit_json(&handle(session, "session")?.0, out))
}

/// The next query awaiting an answer as JSON, or `null` once finished.
///
/// # Safety
/// `session` must be a live handle; `out` a writable pointer slot.
#[no_mangle]
pub unsafe extern "C" fn decision_session_pending(
    session: *const DecisionSession,
    out: *mut *mut c_char,
) -> DecisionStatus {
    guard(|| emit_json(&handle(session, "session")?.0.pending.front(), out))
}

/// Applies one JSON-encoded answer. On failure the session is unchanged.
///
/// # Safety
/// `session` must be a live handle; `answer_json` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn decision_session_answer(
    session: *mut DecisionSession,
    answer_json: *const c_char,
) -> DecisionStatus {
    guard(|| {
        let s = handle_mut(session, "session")?;
        let answer: OracleAnswer = parse_json(read_str(answer_json, "answer_json")?, "answer_json")?;
        apply_step(&mut s.0, answer)?;
        Ok(())
    })
}

/// # Safety
/// `session` must be a live handle; `out` a writable slot.
#[no_mangle]
pub unsafe extern "C" fn decision_session_status(
    session: *const DecisionSession,
    out: *mut DecisionSessionState,
) -> DecisionStatus {
    guard(|| {
        let s = handle(session, "session")?;
        *out_ptr(out, "out")? = match s.0.status {
            Status::Running => DecisionSessionState::Running,
            Status::Satisfied => DecisionSessionState::Satisfied,
            Status::Exhausted => DecisionSessionState::Exhausted,
        };
        Ok(())
    })
}

/// The latest partition shown to the client as JSON, or `null`.
///
/// # Safety
/// `session` must be a live handle; `out` a writable pointer slot.
#[no_mangle]
pub unsafe extern "C" fn decision_session_partition(
    session: *const DecisionSession,
    out: *mut *mut c_char,
) -> DecisionStatus {
    guard(|| emit_json(&handle(session, "session")?.0.current, out))
}

/// # Safety
/// `session` must be null or a handle that is not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn decision_session_free(session: *mut DecisionSession) {
    if !session.is_null() {
        drop(Box::from_raw(session));
    }
}
