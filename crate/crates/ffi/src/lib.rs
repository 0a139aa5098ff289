//! C ABI over the exact geometry of `typeset-lab`.
//!
//! Every function returns a [`TslStatus`]; on failure a message is available from
//! [`tsl_last_error`] until the next call on the same thread. Handles are opaque and
//! must be released with the matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_traits::ToPrimitive;
use typeset_lab::estimates::{achievable_margin, check_regime, theorem_hull, Catalog, Mode};
use typeset_lab::exponents::{named_vertex, DimensionParams, Vertex};
use typeset_lab::geometry::{export_mesh, parse_rational, MeshFormat, Polytope3, Rational, Triple};
use typeset_lab::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TslStatus {
    Ok = 0,
    NullPointer = 1,
    Parse = 2,
    InvalidParams = 3,
    VanishingDenominator = 4,
    Degenerate = 5,
    Regime = 6,
    OutOfRange = 7,
    Overflow = 8,
    Index = 9,
    Utf8 = 10,
    Other = 11,
    Panic = 12,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TslMode {
    Main = 0,
    Ls = 1,
    D2ls = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TslMeshFormat {
    Obj = 0,
    Ply = 1,
}

/// `num / den` in lowest terms with `den > 0`.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TslRational {
    pub num: i64,
    pub den: i64,
}

/// `(1/p, 1/q, 1/r)`.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TslTriple {
    pub ip: TslRational,
    pub iq: TslRational,
    pub ir: TslRational,
}

/// Opaque dimension parameters `(d, β, γ)`.
pub struct TslParams(DimensionParams);

/// Opaque convex polytope with exact vertices.
pub struct TslPolytope(Polytope3);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> TslStatus {
    match e {
        Error::Parse(_) => TslStatus::Parse,
        Error::InvalidParams(_) | Error::DimensionMismatch(_) => TslStatus::InvalidParams,
        Error::VanishingDenominator(_) => TslStatus::VanishingDenominator,
        Error::Degenerate(_) => TslStatus::Degenerate,
        Error::Regime(_) => TslStatus::Regime,
        Error::OutOfRange(_) => TslStatus::OutOfRange,
        _ => TslStatus::Other,
    }
}

#[derive(Debug)]
struct Fail(TslStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard<F: FnOnce() -> Result<(), Fail>>(f: F) -> TslStatus {
    set_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TslStatus::Ok,
        Ok(Err(Fail(s, msg))) => {
            set_error(&msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            TslStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(TslStatus::NullPointer, format!("{what} is null"))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(TslStatus::Utf8, format!("{what} is not UTF-8")))
}

fn to_c(x: &Rational) -> Result<TslRational, Fail> {
    match (x.numer().to_i64(), x.denom().to_i64()) {
        (Some(num), Some(den)) => Ok(TslRational { num, den }),
        _ => Err(Fail(TslStatus::Overflow, format!("{x} does not fit in 64 bits"))),
    }
}

fn from_c(x: &TslRational) -> Result<Rational, Fail> {
    if x.den == 0 {
        return Err(Fail(TslStatus::InvalidParams, "zero denominator".into()));
    }
    Ok(Rational::new(x.num.into(), x.den.into()))
}

fn triple_to_c(t: &Triple) -> Result<TslTriple, Fail> {
    Ok(TslTriple { ip: to_c(&t.ip)?, iq: to_c(&t.iq)?, ir: to_c(&t.ir)? })
}

fn mode_of(m: TslMode) -> Mode {
    match m {
        TslMode::Main => Mode::Main,
        TslMode::Ls => Mode::LS,
        TslMode::D2ls => Mode::D2LS,
    }
}

/// Message for the last failing call on this thread; empty after success.
#[no_mangle]
pub extern "C" fn tsl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Static version string.
#[no_mangle]
pub extern "C" fn tsl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Parameters from rational strings such as `"7/10"`; requires `d >= 2`, `0 < beta <= gamma <= 1`.
///
/// # Safety
/// `beta` and `gamma` must be NUL-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tsl_params_new(
    d: u32,
    beta: *const c_char,
    gamma: *const c_char,
    out: *mut *mut TslParams,
) -> TslStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let b = parse_rational(read_str(beta, "beta")?)?;
        let g = parse_rational(read_str(gamma, "gamma")?)?;
        let p = DimensionParams::new(d, b, g)?;
        *out = Box::into_raw(Box::new(TslParams(p)));
        Ok(())
    })
}

/// As [`tsl_params_new`] with numeric rationals.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tsl_params_new_rational(
    d: u32,
    beta: TslRational,
    gamma: TslRational,
    out: *mut *mut TslParams,
) -> TslStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let p = DimensionParams::new(d, from_c(&beta)?, from_c(&gamma)?)?;
        *out = Box::into_raw(Box::new(TslParams(p)));
        Ok(())
    })
}

/// # Safety
/// `p` must come from `tsl_params_new*` and not be used afterwards; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn tsl_params_free(p: *mut TslParams) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Exact named vertex, e.g. `"Q2"` or `"QD1"`; `flagged` (optional) reports coordinates outside `[0,1]`.
///
/// # Safety
/// `p` must be a live handle, `name` a NUL-terminated string, `out` writable; `flagged` may be null.
#[no_mangle]
pub unsafe extern "C" fn tsl_named_vertex(
    p: *const TslParams,
    name: *const c_char,
    out: *mut TslTriple,
    flagged: *mut bool,
) -> TslStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(|| null("params"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let v: Vertex = read_str(name, "name")?.parse()?;
        let nv = named_vertex(v, &p.0)?;
        *out = triple_to_c(&nv.value)?;
        if !flagged.is_null() {
            *flagged = nv.flagged;
        }
        Ok(())
    })
}

/// Largest uniform decay margin at `x` over the estimates of `mode`; `feasible` is false when none exists.
///
/// # Safety
/// `p` must be a live handle; `x`, `out` and `feasible` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn tsl_margin(
    p: *const TslParams,
    mode: TslMode,
    x: *const TslTriple,
    out: *mut TslRational,
    feasible: *mut bool,
) -> TslStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(|| null("params"))?;
        let x = x.as_ref().ok_or_else(|| null("x"))?;
        if out.is_null() || feasible.is_null() {
            return Err(null("out"));
        }
        let t = Triple::new(from_c(&x.ip)?, from_c(&x.iq)?, from_c(&x.ir)?);
        if !t.in_unit_cube() {
            return Err(Fail(TslStatus::OutOfRange, format!("{t} outside [0,1]^3")));
        }
        let cat = Catalog::new(mode_of(mode), &p.0)?;
        match achievable_margin(&t, &cat)? {
            Some(m) => {
                *out = to_c(&m)?;
                *feasible = true;
            }
            None => {
                *out = TslRational { num: 0, den: 1 };
                *feasible = false;
            }
        }
        Ok(())
    })
}

/// Convex hull of the theorem vertex list for `mode`.
///
/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tsl_theorem_hull(p: *const TslParams, mode: TslMode, out: *mut *mut TslPolytope) -> TslStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(|| null("params"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let m = mode_of(mode);
        check_regime(m, &p.0)?;
        let h = theorem_hull(m, &p.0)?;
        *out = Box::into_raw(Box::new(TslPolytope(h)));
        Ok(())
    })
}

/// # Safety
/// `h` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn tsl_polytope_vertex_count(h: *const TslPolytope) -> usize {
    h.as_ref().map_or(0, |h| h.0.vertices.len())
}

/// # Safety
/// `h` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn tsl_polytope_facet_count(h: *const TslPolytope) -> usize {
    h.as_ref().map_or(0, |h| h.0.facets.len())
}

/// # Safety
/// `h` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tsl_polytope_vertex(h: *const TslPolytope, i: usize, out: *mut TslTriple) -> TslStatus {
    guard(|| {
        let h = h.as_ref().ok_or_else(|| null("polytope"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let v = h
            .0
            .vertices
            .get(i)
            .ok_or_else(|| Fail(TslStatus::Index, format!("vertex {i} of {}", h.0.vertices.len())))?;
        *out = triple_to_c(v)?;
        Ok(())
    })
}

/// Triangulated OBJ or PLY text; release it with [`tsl_string_free`].
///
/// # Safety
/// `h` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tsl_polytope_export(h: *const TslPolytope, format: TslMeshFormat, out: *mut *mut c_char) -> TslStatus {
    guard(|| {
        let h = h.as_ref().ok_or_else(|| null("polytope"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let fmt = match format {
            TslMeshFormat::Obj => MeshFormat::Obj,
            TslMeshFormat::Ply => MeshFormat::Ply,
        };
        let bytes = export_mesh(&h.0, fmt)?;
        let s = CString::new(bytes).map_err(|_| Fail(TslStatus::Other, "mesh text contains NUL".into()))?;
        *out = s.into_raw();
        Ok(())
    })
}

/// # Safety
/// `h` must come from `tsl_theorem_hull` and not be used afterwards; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn tsl_polytope_free(h: *mut TslPolytope) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// # Safety
/// `s` must come from this library and not be used afterwards; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn tsl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_round_trip() {
        let r = Rational::new(30.into(), 37.into());
        let c = to_c(&r).unwrap();
        assert_eq!(c, TslRational { num: 30, den: 37 });
        assert_eq!(from_c(&c).unwrap(), r);
        assert!(from_c(&TslRational { num: 1, den: 0 }).is_err());
    }

    #[test]
    fn overflow_reported() {
        let big = Rational::new(num_bigint::BigInt::from(1) << 80, 3.into());
        assert!(matches!(to_c(&big), Err(Fail(TslStatus::Overflow, _))));
    }
}
