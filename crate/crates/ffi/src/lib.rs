//! C interface to the belief tracker, the story generators and the oracle.
//!
//! Every function returns a [`BtkStatus`]. On failure the message is kept in
//! a per-thread slot readable with [`btk_last_error`]. Strings handed out by
//! this library must be released with [`btk_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use belieftrack::domain::{decode_story, encode_corpus, Story};
use belieftrack::oracle::simulate;
use belieftrack::qa::answer_question;
use belieftrack::semantics::{RuleBackend, TemplateBank};
use belieftrack::storygen::{generate, GenConfig, GenSet};
use belieftrack::tracker::{BeliefState, KeyMode, Tracker, TrackerOptions};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BtkStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidInput = 3,
    TrackingFailed = 4,
    NoAnswer = 5,
    GenerationFailed = 6,
    OracleFailed = 7,
    Panic = 99,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let c = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(BtkStatus, String);

fn fail<T>(status: BtkStatus, msg: impl ToString) -> Result<T, Failure> {
    Err(Failure(status, msg.to_string()))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> BtkStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BtkStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside belieftrack");
            BtkStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return fail(BtkStatus::NullPointer, format!("{what} is null"));
    }
    CStr::from_ptr(p).to_str().or_else(|_| fail(BtkStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    let c = CString::new(s).or_else(|e| fail(BtkStatus::InvalidInput, e))?;
    *out = c.into_raw();
    Ok(())
}

fn check_out<T>(out: *mut T) -> Result<(), Failure> {
    if out.is_null() {
        return fail(BtkStatus::NullPointer, "output pointer is null");
    }
    Ok(())
}

/// A tracked story ready to answer questions.
pub struct BtkSession {
    story: Story,
    state: BeliefState,
    backend: RuleBackend,
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn btk_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses one story record (a corpus line) and runs the tracker over it
/// with belief depth `m`.
///
/// # Safety
/// `story_json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn btk_session_new(story_json: *const c_char, m: u32, out: *mut *mut BtkSession) -> BtkStatus {
    guard(|| {
        check_out(out)?;
        let text = str_arg(story_json, "story_json")?;
        if m == 0 {
            return fail(BtkStatus::InvalidInput, "m must be at least 1");
        }
        let backend = RuleBackend::default();
        let story = decode_story(text, 1, backend.bank()).or_else(|e| fail(BtkStatus::InvalidInput, e))?;
        let options = TrackerOptions { m: m as usize, keys: KeyMode::All, trace: false };
        let state = Tracker::new(&backend, options).run(&story).or_else(|e| fail(BtkStatus::TrackingFailed, e))?;
        *out = Box::into_raw(Box::new(BtkSession { story, state, backend }));
        Ok(())
    })
}

/// Answers a question about the session's story. The answer is a container
/// name to be freed with `btk_string_free`.
///
/// # Safety
/// `session` must come from `btk_session_new`, `question` must be a
/// NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn btk_session_answer(
    session: *const BtkSession,
    question: *const c_char,
    out: *mut *mut c_char,
) -> BtkStatus {
    guard(|| {
        check_out(out)?;
        let Some(s) = session.as_ref() else { return fail(BtkStatus::NullPointer, "session is null") };
        let q = str_arg(question, "question")?;
        let a = answer_question(&s.state, &s.story, q, &s.backend, true).or_else(|e| fail(BtkStatus::NoAnswer, e))?;
        put_string(out, a.prediction)
    })
}

/// # Safety
/// `session` must come from `btk_session_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn btk_session_free(session: *mut BtkSession) {
    if !session.is_null() {
        drop(Box::from_raw(session));
    }
}

/// Generates `n` stories of `set` (`tomi`, `d1`, `d2` or `d3`) as JSONL.
///
/// # Safety
/// `set` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn btk_generate(
    set: *const c_char,
    n: u32,
    seed: u64,
    paraphrase: bool,
    out: *mut *mut c_char,
) -> BtkStatus {
    guard(|| {
        check_out(out)?;
        let set: GenSet = str_arg(set, "set")?.parse().or_else(|e| fail(BtkStatus::InvalidInput, e))?;
        let mut cfg = GenConfig::new(seed, n as usize);
        cfg.paraphrase = paraphrase;
        let stories =
            generate(set, &cfg, &TemplateBank::shipped()).or_else(|e| fail(BtkStatus::GenerationFailed, e))?;
        put_string(out, encode_corpus(&stories).or_else(|e| fail(BtkStatus::GenerationFailed, e))?)
    })
}

/// Gold answers of every question in a story record, as a JSON array of
/// container names in question order.
///
/// # Safety
/// `story_json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn btk_oracle_solve(story_json: *const c_char, out: *mut *mut c_char) -> BtkStatus {
    guard(|| {
        check_out(out)?;
        let text = str_arg(story_json, "story_json")?;
        let story = decode_story(text, 1, &TemplateBank::shipped()).or_else(|e| fail(BtkStatus::InvalidInput, e))?;
        let trace = simulate(&story).or_else(|e| fail(BtkStatus::OracleFailed, e))?;
        let golds = story
            .questions
            .iter()
            .map(|q| trace.gold_answer(q).map(str::to_string))
            .collect::<Result<Vec<_>, _>>()
            .or_else(|e| fail(BtkStatus::OracleFailed, e))?;
        put_string(out, serde_json::to_string(&golds).or_else(|e| fail(BtkStatus::OracleFailed, e))?)
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, freed only once.
#[no_mangle]
pub unsafe extern "C" fn btk_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
