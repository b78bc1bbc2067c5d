//! C interface to the auction library.
//!
//! Every function returns an `int32_t` status (`SCA_OK` on success) and
//! writes results through out-pointers. Objects are opaque handles released
//! with their `_free` function; strings returned by the library are released
//! with `sca_string_free`. After a failure `sca_last_error` describes it.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use scauction::domain::instance_file::InstanceFile;
use scauction::domain::AuctionInstance;
use scauction::mechanism::{telescoping_payments, threshold_payments, Mechanism, MechanismKind, MechanismResult};
use scauction::rational::{self, Rational};
use scauction::verify::suites::{run_suite, SuiteOptions};
use scauction::Error;

pub const SCA_OK: i32 = 0;
pub const SCA_ERR_INVALID_ARGUMENT: i32 = 1;
pub const SCA_ERR_PARSE: i32 = 2;
pub const SCA_ERR_CAPACITY: i32 = 3;
pub const SCA_ERR_INTEGRITY: i32 = 4;
pub const SCA_ERR_INTERNAL: i32 = 5;

/// A validated auction instance.
pub struct ScaInstance {
    inner: AuctionInstance,
}

/// Outcome of one mechanism run, with payments when requested.
pub struct ScaResult {
    inner: MechanismResult,
    payments: Option<Vec<Rational>>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn code_of(e: &Error) -> i32 {
    match e {
        Error::Parse(_) => SCA_ERR_PARSE,
        Error::Capacity(_) => SCA_ERR_CAPACITY,
        Error::Integrity(_) | Error::Degenerate(_) => SCA_ERR_INTEGRITY,
        Error::Range(_) | Error::Parameter(_) | Error::InvalidDomain(_) => SCA_ERR_INVALID_ARGUMENT,
    }
}

struct Failure(i32, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(code_of(&e), e.to_string())
    }
}

fn invalid(msg: &str) -> Failure {
    Failure(SCA_ERR_INVALID_ARGUMENT, msg.to_owned())
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> i32 {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SCA_OK,
        Ok(Err(Failure(code, msg))) => {
            set_error(msg);
            code
        }
        Err(_) => {
            set_error("internal panic".into());
            SCA_ERR_INTERNAL
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(invalid(&format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(SCA_ERR_PARSE, format!("{what} is not UTF-8")))
}

unsafe fn opt_str_arg<'a>(p: *const c_char, what: &str) -> Result<Option<&'a str>, Failure> {
    if p.is_null() {
        Ok(None)
    } else {
        str_arg(p, what).map(Some)
    }
}

fn out_string(s: String) -> *mut c_char {
    CString::new(s).expect("no interior nul").into_raw()
}

fn mechanism_kind(name: &str) -> Result<MechanismKind, Failure> {
    match name {
        "kminded" => Ok(MechanismKind::KMinded),
        "general" => Ok(MechanismKind::General),
        "singleminded" => Ok(MechanismKind::SingleMinded),
        "vcg" => Ok(MechanismKind::Vcg),
        other => Err(invalid(&format!("unknown mechanism {other:?}"))),
    }
}

/// Message for the calling thread's last failure, or null. Owned by the
/// library and valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn sca_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn sca_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn sca_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses an instance from JSON text.
///
/// # Safety
/// `json` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sca_instance_from_json(json: *const c_char, out: *mut *mut ScaInstance) -> i32 {
    guard(|| {
        if out.is_null() {
            return Err(invalid("out is null"));
        }
        let text = str_arg(json, "json")?;
        let inner = InstanceFile::from_json(text)?.to_instance()?;
        *out = Box::into_raw(Box::new(ScaInstance { inner }));
        Ok(())
    })
}

/// # Safety
/// `instance` must be null or a handle from `sca_instance_from_json`.
#[no_mangle]
pub unsafe extern "C" fn sca_instance_free(instance: *mut ScaInstance) {
    if !instance.is_null() {
        drop(Box::from_raw(instance));
    }
}

/// # Safety
/// `instance` must be a live handle and the out-pointers valid.
#[no_mangle]
pub unsafe extern "C" fn sca_instance_shape(instance: *const ScaInstance, players: *mut usize, items: *mut u64) -> i32 {
    guard(|| {
        let inst = instance.as_ref().ok_or_else(|| invalid("instance is null"))?;
        if players.is_null() || items.is_null() {
            return Err(invalid("out is null"));
        }
        *players = inst.inner.n();
        *items = inst.inner.m();
        Ok(())
    })
}

/// Runs `mechanism` ("kminded", "general", "singleminded" or "vcg") with
/// accuracy `epsilon` ("p/q"). When `payments` is "threshold" or "exact"
/// the result also carries payments; pass null to skip them.
///
/// # Safety
/// Pointers must be valid; strings nul-terminated.
#[no_mangle]
pub unsafe extern "C" fn sca_solve(
    instance: *const ScaInstance,
    mechanism: *const c_char,
    epsilon: *const c_char,
    payments: *const c_char,
    out: *mut *mut ScaResult,
) -> i32 {
    guard(|| {
        let inst = &instance.as_ref().ok_or_else(|| invalid("instance is null"))?.inner;
        if out.is_null() {
            return Err(invalid("out is null"));
        }
        let kind = mechanism_kind(str_arg(mechanism, "mechanism")?)?;
        let eps = rational::parse_epsilon(str_arg(epsilon, "epsilon")?)?;
        let mech = Mechanism::new(kind, inst.domains(), &eps)?;
        let inner = mech.run(inst)?;
        let payments = match opt_str_arg(payments, "payments")? {
            None => None,
            Some("threshold") => Some(threshold_payments(&mech, inst)?),
            Some("exact") => Some(telescoping_payments(&mech, inst)?),
            Some(other) => return Err(invalid(&format!("unknown payment method {other:?}"))),
        };
        *out = Box::into_raw(Box::new(ScaResult { inner, payments }));
        Ok(())
    })
}

/// # Safety
/// `result` must be null or a handle from `sca_solve`.
#[no_mangle]
pub unsafe extern "C" fn sca_result_free(result: *mut ScaResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Items allocated to `player`.
///
/// # Safety
/// `result` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn sca_result_quantity(result: *const ScaResult, player: usize, out: *mut u64) -> i32 {
    guard(|| {
        let r = result.as_ref().ok_or_else(|| invalid("result is null"))?;
        if out.is_null() {
            return Err(invalid("out is null"));
        }
        let q = r.inner.allocation.quantities();
        *out = *q
            .get(player)
            .ok_or_else(|| invalid(&format!("player {player} outside 0..{}", q.len())))?;
        Ok(())
    })
}

/// Welfare as a decimal string; free with `sca_string_free`.
///
/// # Safety
/// `result` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn sca_result_welfare(result: *const ScaResult, out: *mut *mut c_char) -> i32 {
    guard(|| {
        let r = result.as_ref().ok_or_else(|| invalid("result is null"))?;
        if out.is_null() {
            return Err(invalid("out is null"));
        }
        *out = out_string(r.inner.welfare.to_string());
        Ok(())
    })
}

/// `player`'s payment as "p/q"; free with `sca_string_free`.
///
/// # Safety
/// `result` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn sca_result_payment(result: *const ScaResult, player: usize, out: *mut *mut c_char) -> i32 {
    guard(|| {
        let r = result.as_ref().ok_or_else(|| invalid("result is null"))?;
        if out.is_null() {
            return Err(invalid("out is null"));
        }
        let pays = r
            .payments
            .as_ref()
            .ok_or_else(|| invalid("result was computed without payments"))?;
        let p = pays
            .get(player)
            .ok_or_else(|| invalid(&format!("player {player} outside 0..{}", pays.len())))?;
        *out = out_string(rational::format(p));
        Ok(())
    })
}

/// Runs a verification suite with default options and the given seed.
/// `passed` is set to 1 or 0 and `report` receives the JSON report (free
/// with `sca_string_free`).
///
/// # Safety
/// `suite` must be nul-terminated; out-pointers valid.
#[no_mangle]
pub unsafe extern "C" fn sca_verify(
    suite: *const c_char,
    seed: u64,
    passed: *mut i32,
    report: *mut *mut c_char,
) -> i32 {
    guard(|| {
        if passed.is_null() || report.is_null() {
            return Err(invalid("out is null"));
        }
        let name = str_arg(suite, "suite")?;
        let opts = SuiteOptions { seed, ..SuiteOptions::default() };
        let r = run_suite(name, &opts)?;
        *passed = i32::from(r.passed());
        *report = out_string(serde_json::to_string(&r).expect("report serializes"));
        Ok(())
    })
}
