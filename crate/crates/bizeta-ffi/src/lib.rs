//! C ABI for the bizeta library: opaque lattice handles, status codes, and
//! JSON-string results.  Every returned string must be released with
//! `bizeta_string_free`, every handle with `bizeta_lattice_free`.

use std::ffi::{c_char, CStr, CString};
use std::ptr;

use bizeta::domain::{parse_rational, wc_domain, SparseExponentPolynomial};
use bizeta::lattice::{corpus, profile, LatticeProfile, LieLattice};
use bizeta::orbit::OrbitError;
use bizeta::quotient::{Bounds, QuotientError};
use bizeta::series::{
    local_factor_truncated, specialize_class_number, Method, SeriesError, ZetaKind,
};

/// Status codes returned by every fallible function; they mirror the CLI
/// exit codes where the same contract is violated.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum BizetaStatus {
    Ok = 0,
    /// null pointer, malformed UTF-8 or malformed JSON
    InvalidArgument = 1,
    /// input violates a mathematical precondition
    Validation = 2,
    /// refused because an enumeration bound was exceeded
    SizeBound = 3,
    /// brute-force and orbit-linear routes disagree
    OracleMismatch = 4,
}

/// Opaque handle to a validated lattice together with its derived profile.
pub struct BizetaLattice {
    profile: LatticeProfile,
}

fn status_of(e: &SeriesError) -> BizetaStatus {
    match e {
        SeriesError::Quotient(QuotientError::SizeBound { .. })
        | SeriesError::Orbit(OrbitError::SizeBound { .. }) => BizetaStatus::SizeBound,
        SeriesError::OracleMismatch { .. } => BizetaStatus::OracleMismatch,
        _ => BizetaStatus::Validation,
    }
}

unsafe fn read_str<'a>(s: *const c_char) -> Option<&'a str> {
    if s.is_null() {
        return None;
    }
    CStr::from_ptr(s).to_str().ok()
}

fn emit(out: *mut *mut c_char, text: String) -> BizetaStatus {
    if out.is_null() {
        return BizetaStatus::InvalidArgument;
    }
    match CString::new(text) {
        Ok(cs) => {
            unsafe { *out = cs.into_raw() };
            BizetaStatus::Ok
        }
        Err(_) => BizetaStatus::InvalidArgument,
    }
}

fn make_handle(lattice: LieLattice, out: *mut *mut BizetaLattice) -> BizetaStatus {
    if out.is_null() {
        return BizetaStatus::InvalidArgument;
    }
    if lattice.validate().is_err() {
        return BizetaStatus::Validation;
    }
    match profile(&lattice) {
        Ok(p) => {
            let handle = Box::new(BizetaLattice { profile: p });
            unsafe { *out = Box::into_raw(handle) };
            BizetaStatus::Ok
        }
        Err(_) => BizetaStatus::Validation,
    }
}

/// Creates a lattice handle from a built-in name (heisenberg, abelian_z2,
/// heisenberg_plus_z, free_class2_rank3, free_class3_rank2).
///
/// # Safety
/// `name` must be a valid NUL-terminated string; `out` must be a valid
/// pointer to receive the handle.
#[no_mangle]
pub unsafe extern "C" fn bizeta_lattice_builtin(
    name: *const c_char,
    out: *mut *mut BizetaLattice,
) -> BizetaStatus {
    let Some(name) = read_str(name) else {
        return BizetaStatus::InvalidArgument;
    };
    match corpus::by_name(name) {
        Some(l) => make_handle(l, out),
        None => BizetaStatus::Validation,
    }
}

/// Creates a lattice handle from lattice JSON.
///
/// # Safety
/// `json` must be a valid NUL-terminated string; `out` must be a valid
/// pointer to receive the handle.
#[no_mangle]
pub unsafe extern "C" fn bizeta_lattice_from_json(
    json: *const c_char,
    out: *mut *mut BizetaLattice,
) -> BizetaStatus {
    let Some(text) = read_str(json) else {
        return BizetaStatus::InvalidArgument;
    };
    let Ok(value) = serde_json::from_str::<serde_json::Value>(text) else {
        return BizetaStatus::InvalidArgument;
    };
    match LieLattice::from_json(&value) {
        Ok(l) => make_handle(l, out),
        Err(_) => BizetaStatus::Validation,
    }
}

/// Releases a lattice handle.  Passing NULL is a no-op.
///
/// # Safety
/// `handle` must have been returned by a bizeta_lattice_* constructor and
/// not freed before.
#[no_mangle]
pub unsafe extern "C" fn bizeta_lattice_free(handle: *mut BizetaLattice) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Structural profile of the lattice as a JSON string.
///
/// # Safety
/// `handle` must be a live lattice handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn bizeta_lattice_profile_json(
    handle: *const BizetaLattice,
    out: *mut *mut c_char,
) -> BizetaStatus {
    let Some(h) = handle.as_ref() else {
        return BizetaStatus::InvalidArgument;
    };
    let p = &h.profile;
    let doc = serde_json::json!({
        "name": p.lattice.name,
        "rank": p.h,
        "class": p.lattice.class_c,
        "a": p.a, "b": p.b, "r": p.r, "z": p.z,
        "bad_index_primes": p.bad_index_primes,
    });
    emit(out, doc.to_string())
}

fn kind_from(kind: u32) -> Option<ZetaKind> {
    match kind {
        0 => Some(ZetaKind::Cc),
        1 => Some(ZetaKind::Irr),
        _ => None,
    }
}

fn method_from(method: u32) -> Option<Method> {
    match method {
        0 => Some(Method::Brute),
        1 => Some(Method::Linear),
        2 => Some(Method::Both),
        _ => None,
    }
}

/// Truncated local factor at (p, f) up to level n_max as series JSON.
/// `kind`: 0 = cc, 1 = irr.  `method`: 0 = brute, 1 = linear, 2 = both.
///
/// # Safety
/// `handle` must be a live lattice handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn bizeta_local_factor(
    handle: *const BizetaLattice,
    p: u64,
    f: u32,
    n_max: u32,
    kind: u32,
    method: u32,
    out: *mut *mut c_char,
) -> BizetaStatus {
    let Some(h) = handle.as_ref() else {
        return BizetaStatus::InvalidArgument;
    };
    let (Some(kind), Some(method)) = (kind_from(kind), method_from(method)) else {
        return BizetaStatus::InvalidArgument;
    };
    match local_factor_truncated(&h.profile, p, f, n_max, kind, method, &Bounds::default()) {
        Ok(z) => emit(out, z.to_json().to_string()),
        Err(e) => status_of(&e),
    }
}

/// Class-number specialization (s1 = 0) of the truncated local factor, as a
/// JSON map from level to coefficient string.
///
/// # Safety
/// `handle` must be a live lattice handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn bizeta_class_number_series(
    handle: *const BizetaLattice,
    p: u64,
    f: u32,
    n_max: u32,
    method: u32,
    out: *mut *mut c_char,
) -> BizetaStatus {
    let Some(h) = handle.as_ref() else {
        return BizetaStatus::InvalidArgument;
    };
    let Some(method) = method_from(method) else {
        return BizetaStatus::InvalidArgument;
    };
    match local_factor_truncated(
        &h.profile,
        p,
        f,
        n_max,
        ZetaKind::Cc,
        method,
        &Bounds::default(),
    ) {
        Ok(z) => {
            let spec = specialize_class_number(&z);
            let doc: serde_json::Value = spec
                .iter()
                .map(|(m, c)| (m.to_string(), serde_json::json!(c.to_string())))
                .collect::<serde_json::Map<String, serde_json::Value>>()
                .into();
            emit(out, doc.to_string())
        }
        Err(e) => status_of(&e),
    }
}

/// W_c(delta) of a sparse exponent polynomial given as JSON
/// {c, terms:[{coeff, e1, e2, e3}]}; delta is a rational string like "1" or
/// "1/2".  Returns the canonical half-plane list as JSON.
///
/// # Safety
/// `poly_json` and `delta` must be valid NUL-terminated strings; `out` must
/// be valid.
#[no_mangle]
pub unsafe extern "C" fn bizeta_wc_domain(
    poly_json: *const c_char,
    delta: *const c_char,
    out: *mut *mut c_char,
) -> BizetaStatus {
    let (Some(text), Some(delta)) = (read_str(poly_json), read_str(delta)) else {
        return BizetaStatus::InvalidArgument;
    };
    let Ok(value) = serde_json::from_str::<serde_json::Value>(text) else {
        return BizetaStatus::InvalidArgument;
    };
    let Ok((h, c)) = SparseExponentPolynomial::from_json(&value) else {
        return BizetaStatus::InvalidArgument;
    };
    let Ok(delta) = parse_rational(delta) else {
        return BizetaStatus::InvalidArgument;
    };
    match wc_domain(&h, c, &delta) {
        Ok(d) => emit(out, d.to_json().to_string()),
        Err(_) => BizetaStatus::Validation,
    }
}

/// Releases a string returned by this library.  Passing NULL is a no-op.
///
/// # Safety
/// `s` must have been returned by a bizeta_* function and not freed before.
#[no_mangle]
pub unsafe extern "C" fn bizeta_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version as a static string; do not free.
#[no_mangle]
pub extern "C" fn bizeta_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

// silence the unused warning for ptr used in doc examples of null handling
const _: *const u8 = ptr::null();

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CString;

    unsafe fn builtin(name: &str) -> *mut BizetaLattice {
        let cname = CString::new(name).unwrap();
        let mut handle: *mut BizetaLattice = std::ptr::null_mut();
        let st = bizeta_lattice_builtin(cname.as_ptr(), &mut handle);
        assert!(st == BizetaStatus::Ok);
        handle
    }

    #[test]
    fn local_factor_roundtrip() {
        unsafe {
            let h = builtin("heisenberg");
            let mut out: *mut c_char = std::ptr::null_mut();
            let st = bizeta_local_factor(h, 3, 1, 1, 0, 2, &mut out);
            assert!(st == BizetaStatus::Ok);
            let text = CStr::from_ptr(out).to_str().unwrap();
            let v: serde_json::Value = serde_json::from_str(text).unwrap();
            assert_eq!(v["base_q"], 3);
            bizeta_string_free(out);
            bizeta_lattice_free(h);
        }
    }

    #[test]
    fn class_number_series_values() {
        unsafe {
            let h = builtin("heisenberg");
            let mut out: *mut c_char = std::ptr::null_mut();
            let st = bizeta_class_number_series(h, 3, 1, 2, 1, &mut out);
            assert!(st == BizetaStatus::Ok);
            let text = CStr::from_ptr(out).to_str().unwrap();
            let v: serde_json::Value = serde_json::from_str(text).unwrap();
            assert_eq!(v["1"], "11");
            assert_eq!(v["2"], "105");
            bizeta_string_free(out);
            bizeta_lattice_free(h);
        }
    }

    #[test]
    fn error_codes() {
        unsafe {
            let h = builtin("heisenberg");
            let mut out: *mut c_char = std::ptr::null_mut();
            // p = 2 is inadmissible for class 2
            let st = bizeta_local_factor(h, 2, 1, 1, 0, 0, &mut out);
            assert!(st == BizetaStatus::Validation);
            // bad kind selector
            let st = bizeta_local_factor(h, 3, 1, 1, 9, 0, &mut out);
            assert!(st == BizetaStatus::InvalidArgument);
            bizeta_lattice_free(h);

            let bad = CString::new("no_such_lattice").unwrap();
            let mut handle: *mut BizetaLattice = std::ptr::null_mut();
            let st = bizeta_lattice_builtin(bad.as_ptr(), &mut handle);
            assert!(st == BizetaStatus::Validation);
        }
    }

    #[test]
    fn size_bound_code() {
        unsafe {
            let h = builtin("free_class2_rank3");
            let mut out: *mut c_char = std::ptr::null_mut();
            let st = bizeta_local_factor(h, 7, 2, 1, 0, 1, &mut out);
            assert!(st == BizetaStatus::SizeBound);
            bizeta_lattice_free(h);
        }
    }

    #[test]
    fn wc_domain_ffi() {
        unsafe {
            let poly = CString::new(
                r#"{"c":1,"terms":[{"coeff":1,"e1":2,"e2":1,"e3":1},{"coeff":-1,"e1":1,"e2":2,"e3":2}]}"#,
            )
            .unwrap();
            let delta = CString::new("1").unwrap();
            let mut out: *mut c_char = std::ptr::null_mut();
            let st = bizeta_wc_domain(poly.as_ptr(), delta.as_ptr(), &mut out);
            assert!(st == BizetaStatus::Ok);
            let text = CStr::from_ptr(out).to_str().unwrap();
            assert!(text.contains("\"a1\""));
            bizeta_string_free(out);
        }
    }

    #[test]
    fn version_string() {
        unsafe {
            let v = CStr::from_ptr(bizeta_version()).to_str().unwrap();
            assert!(!v.is_empty());
        }
    }
}
