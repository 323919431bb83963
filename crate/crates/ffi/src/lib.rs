//! C ABI for the anticyclo library. Opaque handles own their Rust data;
//! every fallible entry point returns an `int32_t` status code and writes
//! results through out-pointers. The matching header is
//! `include/anticyclo.h` (kept in sync by the `header_lists_every_symbol`
//! test).

use std::ffi::c_char;
use std::ptr;

use anticyclo::classgroup::{enumerate, frobenius_exponent};
use anticyclo::iwasawa::{euler_factor, euler_mu_lambda, mu_lambda, IwasawaSeries};
use anticyclo::padic::{PadicRing, Ring, ZpInt};
use anticyclo::qexp::heegner_validate;
use anticyclo::Error;

/// Success.
pub const ANTICYCLO_OK: i32 = 0;
/// A verification-style predicate evaluated to false.
pub const ANTICYCLO_FAIL: i32 = 1;
/// A required pointer argument was null.
pub const ANTICYCLO_ERR_NULL: i32 = -1;
/// Invalid parameters (bad prime, discriminant, precision, …).
pub const ANTICYCLO_ERR_DOMAIN: i32 = -2;
/// The requested invariants are undecidable at this precision.
pub const ANTICYCLO_ERR_UNDECIDABLE: i32 = -3;

static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");

fn status(e: &Error) -> i32 {
    match e {
        Error::Undecidable(_) => ANTICYCLO_ERR_UNDECIDABLE,
        _ => ANTICYCLO_ERR_DOMAIN,
    }
}

/// Opaque truncated p-adic ring handle.
pub struct AnticycloRing {
    ring: Ring,
}

/// Returns the library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn anticyclo_version() -> *const c_char {
    VERSION.as_ptr() as *const c_char
}

/// Creates the ring Z_p mod p^precision. On success writes a handle the
/// caller must release with `anticyclo_ring_free`.
#[no_mangle]
pub extern "C" fn anticyclo_ring_new_zp(
    p: u64,
    precision: u32,
    out: *mut *mut AnticycloRing,
) -> i32 {
    if out.is_null() {
        return ANTICYCLO_ERR_NULL;
    }
    match PadicRing::zp(p, precision) {
        Ok(ring) => {
            let handle = Box::new(AnticycloRing { ring });
            unsafe { *out = Box::into_raw(handle) };
            ANTICYCLO_OK
        }
        Err(e) => {
            unsafe { *out = ptr::null_mut() };
            status(&e)
        }
    }
}

/// Releases a ring handle. Null is a no-op.
///
/// # Safety
/// `ring` must have come from `anticyclo_ring_new_zp` and must not be
/// used afterwards.
#[no_mangle]
pub unsafe extern "C" fn anticyclo_ring_free(ring: *mut AnticycloRing) {
    if !ring.is_null() {
        drop(unsafe { Box::from_raw(ring) });
    }
}

/// μ/λ invariants of Σ coeffs[i]·T^i viewed in Z_p⟦T⟧ truncated to
/// `window` coefficients. Returns `ANTICYCLO_ERR_UNDECIDABLE` when the
/// working precision cannot decide them.
///
/// # Safety
/// `ring` must be a live handle; `coeffs` must point to `len` values;
/// `out_mu` and `out_lambda` must be writable.
#[no_mangle]
pub unsafe extern "C" fn anticyclo_iwasawa_invariants(
    ring: *const AnticycloRing,
    coeffs: *const u64,
    len: usize,
    window: usize,
    out_mu: *mut u32,
    out_lambda: *mut u32,
) -> i32 {
    if ring.is_null() || coeffs.is_null() || out_mu.is_null() || out_lambda.is_null() {
        return ANTICYCLO_ERR_NULL;
    }
    let ring = unsafe { &(*ring).ring };
    let coeffs = unsafe { std::slice::from_raw_parts(coeffs, len) };
    let f = IwasawaSeries::from_u64_coeffs(ring, coeffs, window.max(len));
    let rep = mu_lambda(&f);
    match (rep.mu, rep.lambda) {
        (Some(mu), Some(lambda)) => {
            unsafe {
                *out_mu = mu;
                *out_lambda = lambda;
            }
            ANTICYCLO_OK
        }
        _ => ANTICYCLO_ERR_UNDECIDABLE,
    }
}

/// μ/λ of the stabilizing Euler factor for (ℓ, a_ℓ, r, a_v).
///
/// # Safety
/// `ring` must be a live handle; out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn anticyclo_euler_invariants(
    ring: *const AnticycloRing,
    ell: u64,
    a_ell: i64,
    r: u32,
    a_v: u64,
    divides_level: bool,
    window: usize,
    out_mu: *mut u32,
    out_lambda: *mut u32,
) -> i32 {
    if ring.is_null() || out_mu.is_null() || out_lambda.is_null() {
        return ANTICYCLO_ERR_NULL;
    }
    let ring = unsafe { &(*ring).ring };
    let a_v = ZpInt::from_i64(ring.p(), ring.precision(), a_v as i64);
    let factor = match euler_factor(ell, &ring.from_i64(a_ell), r, &a_v, divides_level, window)
    {
        Ok(f) => f,
        Err(e) => return status(&e),
    };
    let rep = euler_mu_lambda(&factor);
    match (rep.mu, rep.lambda) {
        (Some(mu), Some(lambda)) => {
            unsafe {
                *out_mu = mu;
                *out_lambda = lambda;
            }
            ANTICYCLO_OK
        }
        _ => ANTICYCLO_ERR_UNDECIDABLE,
    }
}

/// Class number h(Δ) of the imaginary quadratic order of discriminant Δ.
///
/// # Safety
/// `out_h` must be writable.
#[no_mangle]
pub unsafe extern "C" fn anticyclo_class_number(delta: i64, out_h: *mut u64) -> i32 {
    if out_h.is_null() {
        return ANTICYCLO_ERR_NULL;
    }
    match enumerate(delta, 0) {
        Ok(data) => {
            unsafe { *out_h = data.h };
            ANTICYCLO_OK
        }
        Err(e) => status(&e),
    }
}

/// Frobenius exponent a_v (mod p^k) of the prime above ℓ at tower level
/// n over the field of discriminant −D_K.
///
/// # Safety
/// `out_a_v` and `out_k` must be writable.
#[no_mangle]
pub unsafe extern "C" fn anticyclo_frobenius_exponent(
    d_k: u64,
    p: u64,
    ell: u64,
    n: u32,
    out_a_v: *mut u64,
    out_k: *mut u32,
) -> i32 {
    if out_a_v.is_null() || out_k.is_null() {
        return ANTICYCLO_ERR_NULL;
    }
    match frobenius_exponent(d_k, p, ell, n) {
        Ok(frob) => {
            unsafe {
                *out_a_v = frob.a_v;
                *out_k = frob.k;
            }
            ANTICYCLO_OK
        }
        Err(e) => status(&e),
    }
}

/// Heegner-hypothesis check for (level N, weight 2r, D_K, p): returns
/// `ANTICYCLO_OK` when every condition holds, `ANTICYCLO_FAIL` when the
/// data is well-formed but some condition fails.
#[no_mangle]
pub extern "C" fn anticyclo_heegner_validate(level: u64, weight: u32, d_k: u64, p: u64) -> i32 {
    match heegner_validate(level, weight, d_k, p) {
        Ok(v) if v.pass => ANTICYCLO_OK,
        Ok(_) => ANTICYCLO_FAIL,
        Err(e) => status(&e),
    }
}
