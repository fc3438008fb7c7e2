//! C ABI over `cubex`.
//!
//! Objects cross the boundary as opaque pointers that the caller releases
//! with the matching `*_free` function. Every fallible call returns a
//! [`CubexStatus`] and writes its result through an out-pointer; on failure
//! the out-pointer is left untouched and [`cubex_last_error_message`]
//! describes what went wrong. Rationals are returned as `"num/den"` strings
//! owned by the caller and released with [`cubex_string_free`].

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use cubex::boolfn::{degree, omega_member, rm_distance, BoolFn};
use cubex::constructions::{hyperplane_measure, HyperplaneParams};
use cubex::dmt::{dmt_fraction, DmtMode, DmtQuery, FiniteContext};
use cubex::io::{load_measure, measure_to_string, parse_measure, save_measure};
use cubex::joinings::dbar_distance;
use cubex::measures::{is_invariant, ExactMeasure};
use cubex::rational;
use cubex::testability::exact_pass_probability;
use cubex::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CubexStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    ResourceLimit = 4,
    Parse = 5,
    InvalidMeasure = 6,
    NotInvariant = 7,
    Io = 8,
    Internal = 9,
}

/// A Boolean function on `F_2^n`.
pub struct CubexBoolFn(BoolFn);

/// A finitely supported measure with exact rational weights.
pub struct CubexMeasure(ExactMeasure);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> CubexStatus {
    match e {
        Error::DimensionMismatch { .. } | Error::AlphabetMismatch { .. } => CubexStatus::DimensionMismatch,
        Error::InvalidArgument(_) => CubexStatus::InvalidArgument,
        Error::ResourceLimit(_) => CubexStatus::ResourceLimit,
        Error::NotInvariant => CubexStatus::NotInvariant,
        Error::InvalidMeasure(_) => CubexStatus::InvalidMeasure,
        Error::Parse { .. } => CubexStatus::Parse,
        Error::Io(_) => CubexStatus::Io,
        _ => CubexStatus::Internal,
    }
}

enum Failure {
    Null(&'static str),
    Lib(Error),
    Arg(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

/// Runs `body`, converting errors and panics into a status and a message.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> CubexStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_error("");
            CubexStatus::Ok
        }
        Ok(Err(Failure::Null(what))) => {
            set_error(&format!("null pointer: {what}"));
            CubexStatus::NullPointer
        }
        Ok(Err(Failure::Arg(msg))) => {
            set_error(&msg);
            CubexStatus::InvalidArgument
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal error: panic inside cubex");
            CubexStatus::Internal
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(what))
}

unsafe fn text<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure::Arg(format!("{what} is not valid UTF-8")))
}

fn owned_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s).map(CString::into_raw).map_err(|_| Failure::Arg("string contains a NUL byte".into()))
}

fn dim(n: u32) -> usize {
    n as usize
}

/// Message for the most recent failing call on this thread; empty after a
/// successful call. The pointer stays valid until the next cubex call on the
/// same thread.
#[no_mangle]
pub extern "C" fn cubex_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

#[no_mangle]
pub unsafe extern "C" fn cubex_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a hex truth table (highest point first) on `F_2^n`.
#[no_mangle]
pub unsafe extern "C" fn cubex_boolfn_from_hex(n: u32, hex: *const c_char, result: *mut *mut CubexBoolFn) -> CubexStatus {
    guard(|| {
        let hex = text(hex, "hex")?;
        let slot = out(result, "result")?;
        let f = BoolFn::from_hex(dim(n), hex)?;
        *slot = Box::into_raw(Box::new(CubexBoolFn(f)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cubex_boolfn_free(f: *mut CubexBoolFn) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

#[no_mangle]
pub unsafe extern "C" fn cubex_boolfn_to_hex(f: *const CubexBoolFn, result: *mut *mut c_char) -> CubexStatus {
    guard(|| {
        let f = borrow(f, "f")?;
        let slot = out(result, "result")?;
        *slot = owned_string(f.0.to_hex())?;
        Ok(())
    })
}

/// Algebraic degree; `-1` for the zero function.
#[no_mangle]
pub unsafe extern "C" fn cubex_boolfn_degree(f: *const CubexBoolFn, result: *mut i32) -> CubexStatus {
    guard(|| {
        let f = borrow(f, "f")?;
        *out(result, "result")? = degree(&f.0);
        Ok(())
    })
}

/// Whether every `r`-face of the cube sums to zero.
#[no_mangle]
pub unsafe extern "C" fn cubex_boolfn_omega_member(f: *const CubexBoolFn, r: u32, result: *mut bool) -> CubexStatus {
    guard(|| {
        let f = borrow(f, "f")?;
        let slot = out(result, "result")?;
        *slot = omega_member(&f.0, r as usize)?;
        Ok(())
    })
}

/// Hamming distance to the nearest function of degree at most `r`.
#[no_mangle]
pub unsafe extern "C" fn cubex_boolfn_rm_distance(f: *const CubexBoolFn, r: u32, result: *mut u64) -> CubexStatus {
    guard(|| {
        let f = borrow(f, "f")?;
        let slot = out(result, "result")?;
        *slot = rm_distance(&f.0, r as usize)?;
        Ok(())
    })
}

fn boxed(mu: ExactMeasure, slot: &mut *mut CubexMeasure) {
    *slot = Box::into_raw(Box::new(CubexMeasure(mu)));
}

/// Parses the `cubex-measure` text format.
#[no_mangle]
pub unsafe extern "C" fn cubex_measure_from_text(source: *const c_char, result: *mut *mut CubexMeasure) -> CubexStatus {
    guard(|| {
        let source = text(source, "text")?;
        let slot = out(result, "result")?;
        boxed(parse_measure(source)?, slot);
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cubex_measure_load(path: *const c_char, result: *mut *mut CubexMeasure) -> CubexStatus {
    guard(|| {
        let path = text(path, "path")?;
        let slot = out(result, "result")?;
        boxed(load_measure(path)?, slot);
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cubex_measure_save(mu: *const CubexMeasure, path: *const c_char) -> CubexStatus {
    guard(|| {
        let mu = borrow(mu, "mu")?;
        save_measure(&mu.0, text(path, "path")?)?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cubex_measure_to_text(mu: *const CubexMeasure, result: *mut *mut c_char) -> CubexStatus {
    guard(|| {
        let mu = borrow(mu, "mu")?;
        let slot = out(result, "result")?;
        *slot = owned_string(measure_to_string(&mu.0))?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cubex_measure_free(mu: *mut CubexMeasure) {
    if !mu.is_null() {
        drop(Box::from_raw(mu));
    }
}

#[no_mangle]
pub unsafe extern "C" fn cubex_measure_support_size(mu: *const CubexMeasure, result: *mut usize) -> CubexStatus {
    guard(|| {
        let mu = borrow(mu, "mu")?;
        *out(result, "result")? = mu.0.len();
        Ok(())
    })
}

/// Whether the measure is invariant under every isometry of the cube.
#[no_mangle]
pub unsafe extern "C" fn cubex_measure_is_invariant(mu: *const CubexMeasure, result: *mut bool) -> CubexStatus {
    guard(|| {
        let mu = borrow(mu, "mu")?;
        *out(result, "result")? = is_invariant(&mu.0);
        Ok(())
    })
}

/// The sparse-hyperplane measure on `F_2^n` with density `p` given as `"num/den"`.
#[no_mangle]
pub unsafe extern "C" fn cubex_hyperplane_measure(n: u32, p: *const c_char, result: *mut *mut CubexMeasure) -> CubexStatus {
    guard(|| {
        let p = rational::parse(text(p, "p")?)?;
        let slot = out(result, "result")?;
        boxed(hyperplane_measure(&HyperplaneParams::new(dim(n), p)?), slot);
        Ok(())
    })
}

/// The d-bar distance between two invariant measures, as `"num/den"`.
#[no_mangle]
pub unsafe extern "C" fn cubex_dbar(mu: *const CubexMeasure, nu: *const CubexMeasure, result: *mut *mut c_char) -> CubexStatus {
    guard(|| {
        let (mu, nu) = (borrow(mu, "mu")?, borrow(nu, "nu")?);
        let slot = out(result, "result")?;
        *slot = owned_string(rational::format(&dbar_distance(&mu.0, &nu.0)?))?;
        Ok(())
    })
}

/// Probability that `x_1 ⋯ x_d` restricted to a uniform random `j`-face of
/// `F_2^n` has degree at most `r`, as `"num/den"`.
#[no_mangle]
pub unsafe extern "C" fn cubex_exact_pass_probability(n: u32, d: u32, j: u32, r: u32, result: *mut *mut c_char) -> CubexStatus {
    guard(|| {
        let slot = out(result, "result")?;
        let monomial: Vec<usize> = (1..=d as usize).collect();
        *slot = owned_string(rational::format(&exact_pass_probability(&monomial, dim(n), dim(j), dim(r))?))?;
        Ok(())
    })
}

unsafe fn points(p: *const u32, len: usize, what: &'static str) -> Result<Vec<usize>, Failure> {
    if len == 0 {
        return Ok(Vec::new());
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len).iter().map(|&x| x as usize).collect())
}

/// Exhaustive DMT fraction for the `k`-subsets of `{1..n}` with `I = {i}`
/// and `J = {j}`, each given as `k` points from `1..=n`. Returns `"num/den"`.
#[no_mangle]
pub unsafe extern "C" fn cubex_dmt_fraction_hypergraph(
    n: u32,
    k: u32,
    i: *const u32,
    i_len: usize,
    j: *const u32,
    j_len: usize,
    result: *mut *mut c_char,
) -> CubexStatus {
    guard(|| {
        let slot = out(result, "result")?;
        let context = FiniteContext::hypergraph(dim(n), dim(k))?;
        let i = vec![context.subset(&points(i, i_len, "i")?)?];
        let j = vec![context.subset(&points(j, j_len, "j")?)?];
        let r = dmt_fraction(&DmtQuery { context, i, j, mode: DmtMode::Exhaustive })?;
        *slot = owned_string(rational::format(&r.fraction()))?;
        Ok(())
    })
}
