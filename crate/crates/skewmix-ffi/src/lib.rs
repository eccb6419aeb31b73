//! C ABI for the skewmix library.
//!
//! The surface is deliberately small: parse a distribution from JSON into
//! an opaque handle, run one of the pipeline stages against the handle,
//! and get the result back as a JSON string in the same schema the
//! `skewmix` CLI prints. Strings returned by this library are heap
//! allocations owned by the caller and must be released with
//! [`smx_string_free`]; handles with [`smx_dist_free`].
//!
//! Error reporting: functions that return a pointer return null on
//! failure, and `smx_sample` returns a nonzero status. The status code and
//! a human-readable message for the most recent failed call are kept per
//! thread and read with [`smx_last_status`] / [`smx_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use skewmix::canonical::CanonicalMethod;
use skewmix::distributions::ScaleMixtureSN;
use skewmix::io as sio;
use skewmix::{Error, ErrorClass};

/// Success.
pub const SMX_OK: i32 = 0;
/// Malformed input: bad JSON, invalid parameters, null or non-UTF-8
/// pointers, or an out-of-range argument.
pub const SMX_ERR_INVALID: i32 = 2;
/// The operation is undefined for this distribution (for example a
/// required mixing moment does not exist).
pub const SMX_ERR_UNSUPPORTED: i32 = 3;
/// A numerical procedure failed, or the library panicked internally.
pub const SMX_ERR_NUMERICAL: i32 = 4;

/// Canonicalization via the Cholesky factor of the scale matrix.
pub const SMX_METHOD_CP: i32 = 0;
/// Canonicalization via joint diagonalization of scale and covariance.
pub const SMX_METHOD_OMEGA_SIGMA: i32 = 1;
/// Canonicalization via covariance and a fourth-moment scatter.
pub const SMX_METHOD_SIGMA_KAPPA: i32 = 2;

/// Opaque distribution handle.
pub struct SmxDist {
    inner: ScaleMixtureSN,
}

thread_local! {
    static LAST: RefCell<(i32, Option<CString>)> = const { RefCell::new((SMX_OK, None)) };
}

fn clear_last() {
    LAST.with(|l| *l.borrow_mut() = (SMX_OK, None));
}

fn set_failure(code: i32, message: String) {
    let message = CString::new(message)
        .unwrap_or_else(|_| CString::new("error message contained a NUL byte").unwrap());
    LAST.with(|l| *l.borrow_mut() = (code, Some(message)));
}

fn set_error(e: &Error) {
    let code = match e.class() {
        ErrorClass::InvalidInput => SMX_ERR_INVALID,
        ErrorClass::Unsupported => SMX_ERR_UNSUPPORTED,
        ErrorClass::Numerical => SMX_ERR_NUMERICAL,
    };
    set_failure(code, e.to_string());
}

/// Runs a fallible body with panic containment and last-error bookkeeping,
/// mapping failure to the given sentinel.
fn guarded<T>(sentinel: T, body: impl FnOnce() -> Result<T, Error>) -> T {
    clear_last();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(v)) => v,
        Ok(Err(e)) => {
            set_error(&e);
            sentinel
        }
        Err(_) => {
            set_failure(SMX_ERR_NUMERICAL, "internal panic".to_string());
            sentinel
        }
    }
}

/// # Safety
/// `dist` must be null or a pointer previously returned by
/// [`smx_dist_parse_json`] and not yet freed.
unsafe fn dist_ref<'a>(dist: *const SmxDist) -> Result<&'a ScaleMixtureSN, Error> {
    // SAFETY: non-null pointers are required by the contract above to
    // point at a live handle this library allocated.
    unsafe { dist.as_ref() }
        .map(|d| &d.inner)
        .ok_or_else(|| Error::InvalidArgument {
            what: "distribution handle is null".to_string(),
        })
}

/// # Safety
/// `s` must be null or a NUL-terminated string valid for reads.
unsafe fn str_arg<'a>(s: *const c_char) -> Result<&'a str, Error> {
    if s.is_null() {
        return Err(Error::InvalidArgument {
            what: "string argument is null".to_string(),
        });
    }
    // SAFETY: the caller guarantees a readable NUL-terminated string.
    unsafe { CStr::from_ptr(s) }
        .to_str()
        .map_err(|_| Error::InvalidArgument {
            what: "string argument is not valid UTF-8".to_string(),
        })
}

fn json_ptr(json: String) -> Result<*mut c_char, Error> {
    // Serialized reports never contain NUL bytes, but fail safe anyway.
    CString::new(json)
        .map(CString::into_raw)
        .map_err(|_| Error::InvalidArgument {
            what: "report contained a NUL byte".to_string(),
        })
}

/// Parses a distribution specification (the same JSON schema the CLI
/// reads) into a handle, or returns null with the error retrievable via
/// `smx_last_status` / `smx_last_error`.
///
/// # Safety
/// `json` must be null or a NUL-terminated string valid for reads.
#[no_mangle]
pub unsafe extern "C" fn smx_dist_parse_json(json: *const c_char) -> *mut SmxDist {
    guarded(std::ptr::null_mut(), || {
        let text = unsafe { str_arg(json) }?;
        let inner = sio::parse_spec(text)?.to_distribution()?;
        Ok(Box::into_raw(Box::new(SmxDist { inner })))
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `dist` must be null or a pointer returned by [`smx_dist_parse_json`]
/// that has not already been freed.
#[no_mangle]
pub unsafe extern "C" fn smx_dist_free(dist: *mut SmxDist) {
    if !dist.is_null() {
        // SAFETY: the contract guarantees this is a live Box we allocated.
        drop(unsafe { Box::from_raw(dist) });
    }
}

/// Dimension of the distribution, or 0 for a null handle.
///
/// # Safety
/// `dist` must be null or a live handle from [`smx_dist_parse_json`].
#[no_mangle]
pub unsafe extern "C" fn smx_dist_dim(dist: *const SmxDist) -> usize {
    guarded(0, || Ok(unsafe { dist_ref(dist) }?.dim()))
}

/// Parameters and derived summaries as JSON (see the CLI `describe`
/// report). Returns null on failure; free with [`smx_string_free`].
///
/// # Safety
/// `dist` must be null or a live handle from [`smx_dist_parse_json`].
#[no_mangle]
pub unsafe extern "C" fn smx_describe_json(dist: *const SmxDist) -> *mut c_char {
    guarded(std::ptr::null_mut(), || {
        let smsn = unsafe { dist_ref(dist) }?;
        json_ptr(sio::to_json(&sio::describe_report(smsn)?)?)
    })
}

/// Canonicalizing transform and canonical form as JSON (see the CLI
/// `canonicalize` report). `method` is one of the `SMX_METHOD_*` values;
/// `kappa_exponent` selects the fourth-moment scatter weight (1 or 2) and
/// only matters for `SMX_METHOD_SIGMA_KAPPA`; `verify` embeds a
/// verification block. Returns null on failure; free with
/// [`smx_string_free`].
///
/// # Safety
/// `dist` must be null or a live handle from [`smx_dist_parse_json`].
#[no_mangle]
pub unsafe extern "C" fn smx_canonicalize_json(
    dist: *const SmxDist,
    method: i32,
    kappa_exponent: u32,
    verify: bool,
) -> *mut c_char {
    guarded(std::ptr::null_mut(), || {
        let smsn = unsafe { dist_ref(dist) }?;
        let method = match method {
            SMX_METHOD_CP => CanonicalMethod::Cp,
            SMX_METHOD_OMEGA_SIGMA => CanonicalMethod::IcsOmegaSigma,
            SMX_METHOD_SIGMA_KAPPA => CanonicalMethod::IcsSigmaKappa,
            other => {
                return Err(Error::InvalidArgument {
                    what: format!("unknown canonicalization method {other}"),
                })
            }
        };
        json_ptr(sio::to_json(&sio::canonicalize_report(
            smsn,
            method,
            kappa_exponent,
            verify,
        )?)?)
    })
}

/// Skewness/kurtosis indices as JSON (see the CLI `indices` report).
/// `mc_n` of 0 skips the Monte-Carlo block; otherwise `mc_n` samples are
/// drawn with `seed` and `bootstrap_resamples` resamples (0 skips the
/// standard errors). Returns null on failure; free with
/// [`smx_string_free`].
///
/// # Safety
/// `dist` must be null or a live handle from [`smx_dist_parse_json`].
#[no_mangle]
pub unsafe extern "C" fn smx_indices_json(
    dist: *const SmxDist,
    mc_n: usize,
    seed: u64,
    bootstrap_resamples: usize,
) -> *mut c_char {
    guarded(std::ptr::null_mut(), || {
        let smsn = unsafe { dist_ref(dist) }?;
        let mc = (mc_n > 0).then_some((mc_n, seed, bootstrap_resamples));
        json_ptr(sio::to_json(&sio::indices_report(smsn, mc)?)?)
    })
}

/// Mode report as JSON (see the CLI `mode` report). Returns null on
/// failure; free with [`smx_string_free`].
///
/// # Safety
/// `dist` must be null or a live handle from [`smx_dist_parse_json`].
#[no_mangle]
pub unsafe extern "C" fn smx_mode_json(dist: *const SmxDist) -> *mut c_char {
    guarded(std::ptr::null_mut(), || {
        let smsn = unsafe { dist_ref(dist) }?;
        json_ptr(sio::to_json(&sio::mode_report(smsn)?)?)
    })
}

/// Draws `n` samples into `out`, written row-major as `n` rows of
/// `smx_dist_dim(dist)` columns. Returns `SMX_OK` or an error status.
///
/// # Safety
/// `dist` must be null or a live handle from [`smx_dist_parse_json`];
/// `out` must be null or valid for writes of `n * smx_dist_dim(dist)`
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn smx_sample(
    dist: *const SmxDist,
    n: usize,
    seed: u64,
    out: *mut f64,
) -> i32 {
    let status = guarded(-1, || {
        let smsn = unsafe { dist_ref(dist) }?;
        if out.is_null() {
            return Err(Error::InvalidArgument {
                what: "output buffer is null".to_string(),
            });
        }
        let d = smsn.dim();
        n.checked_mul(d).ok_or_else(|| Error::InvalidArgument {
            what: format!("sample request {n} x {d} overflows"),
        })?;
        let samples = smsn.sample(n, seed)?;
        for i in 0..n {
            for j in 0..d {
                // SAFETY: the caller guarantees n * d writable doubles.
                unsafe { out.add(i * d + j).write(samples[(i, j)]) };
            }
        }
        Ok(0)
    });
    if status == 0 {
        SMX_OK
    } else {
        smx_last_status()
    }
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a pointer returned by one of the `*_json`
/// functions that has not already been freed.
#[no_mangle]
pub unsafe extern "C" fn smx_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: the contract guarantees this is a CString we leaked.
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Status code of the most recent call on this thread: `SMX_OK` or one of
/// the `SMX_ERR_*` values.
#[no_mangle]
pub extern "C" fn smx_last_status() -> i32 {
    LAST.with(|l| l.borrow().0)
}

/// Message for the most recent failure on this thread, or null after a
/// success. The pointer is owned by the library and valid until the next
/// skewmix call on the same thread; do not free it.
#[no_mangle]
pub extern "C" fn smx_last_error() -> *const c_char {
    LAST.with(|l| {
        l.borrow()
            .1
            .as_ref()
            .map_or(std::ptr::null(), |m| m.as_ptr())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    const SPEC: &str = r#"{
        "xi": [0.3, -0.7],
        "Omega": [[2.0, 0.6], [0.6, 1.0]],
        "alpha": [3.0, -1.5],
        "mixing": {"type": "skew_t", "nu": 5.0}
    }"#;

    fn cstr(s: &str) -> CString {
        CString::new(s).unwrap()
    }

    fn take_json(p: *mut c_char) -> Value {
        assert!(!p.is_null(), "call failed: {}", last_message());
        let text = unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string();
        unsafe { smx_string_free(p) };
        serde_json::from_str(&text).unwrap()
    }

    fn last_message() -> String {
        let p = smx_last_error();
        if p.is_null() {
            String::new()
        } else {
            unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
        }
    }

    #[test]
    fn parse_describe_free_round_trip() {
        let dist = unsafe { smx_dist_parse_json(cstr(SPEC).as_ptr()) };
        assert!(!dist.is_null());
        assert_eq!(smx_last_status(), SMX_OK);
        assert_eq!(unsafe { smx_dist_dim(dist) }, 2);
        let report = take_json(unsafe { smx_describe_json(dist) });
        assert_eq!(report["d"], 2);
        assert!(report["alpha_star"].as_f64().unwrap() > 2.7);
        unsafe { smx_dist_free(dist) };
    }

    #[test]
    fn parse_failures_set_status_and_message() {
        let dist = unsafe { smx_dist_parse_json(cstr("{ nope").as_ptr()) };
        assert!(dist.is_null());
        assert_eq!(smx_last_status(), SMX_ERR_INVALID);
        assert!(last_message().contains("JSON"));
        let dist = unsafe { smx_dist_parse_json(std::ptr::null()) };
        assert!(dist.is_null());
        assert_eq!(smx_last_status(), SMX_ERR_INVALID);
        // A success clears the error state.
        let dist = unsafe { smx_dist_parse_json(cstr(SPEC).as_ptr()) };
        assert!(!dist.is_null());
        assert_eq!(smx_last_status(), SMX_OK);
        assert!(smx_last_error().is_null());
        unsafe { smx_dist_free(dist) };
    }

    #[test]
    fn canonicalize_and_mode_reports() {
        let dist = unsafe { smx_dist_parse_json(cstr(SPEC).as_ptr()) };
        let report = take_json(unsafe {
            smx_canonicalize_json(dist, SMX_METHOD_OMEGA_SIGMA, 1, true)
        });
        assert_eq!(report["method"], "ics_omega_sigma");
        assert!(
            report["verification"]["max_shape_deviation"]
                .as_f64()
                .unwrap()
                < 1e-8
        );
        let bad = unsafe { smx_canonicalize_json(dist, 99, 1, false) };
        assert!(bad.is_null());
        assert_eq!(smx_last_status(), SMX_ERR_INVALID);
        let mode = take_json(unsafe { smx_mode_json(dist) });
        assert!(mode["residual_gradient_norm"].as_f64().unwrap() < 1e-8);
        unsafe { smx_dist_free(dist) };
    }

    #[test]
    fn unsupported_operations_report_code_3() {
        let heavy = SPEC.replace("5.0}", "3.5}");
        let dist = unsafe { smx_dist_parse_json(cstr(&heavy).as_ptr()) };
        let p = unsafe { smx_canonicalize_json(dist, SMX_METHOD_SIGMA_KAPPA, 1, false) };
        assert!(p.is_null());
        assert_eq!(smx_last_status(), SMX_ERR_UNSUPPORTED);
        assert!(last_message().contains("nu > 4"));
        // The indices report itself still succeeds, with the blocked index
        // as null.
        let report = take_json(unsafe { smx_indices_json(dist, 0, 0, 0) });
        assert!(report["gamma1"].is_f64());
        assert!(report["gamma2"].is_null());
        unsafe { smx_dist_free(dist) };
    }

    #[test]
    fn sampling_fills_row_major_buffer() {
        let dist = unsafe { smx_dist_parse_json(cstr(SPEC).as_ptr()) };
        let n = 16usize;
        let mut buf = vec![f64::NAN; n * 2];
        let status = unsafe { smx_sample(dist, n, 9, buf.as_mut_ptr()) };
        assert_eq!(status, SMX_OK);
        assert!(buf.iter().all(|v| v.is_finite()));
        // Matches the library's own sampler, row by row.
        let spec = sio::parse_spec(SPEC).unwrap().to_distribution().unwrap();
        let direct = spec.sample(n, 9).unwrap();
        for i in 0..n {
            for j in 0..2 {
                assert_eq!(buf[i * 2 + j], direct[(i, j)]);
            }
        }
        assert_eq!(
            unsafe { smx_sample(dist, n, 9, std::ptr::null_mut()) },
            SMX_ERR_INVALID
        );
        assert_eq!(
            unsafe { smx_sample(std::ptr::null(), n, 9, buf.as_mut_ptr()) },
            SMX_ERR_INVALID
        );
        unsafe { smx_dist_free(dist) };
    }

    #[test]
    fn null_frees_are_harmless() {
        unsafe {
            smx_dist_free(std::ptr::null_mut());
            smx_string_free(std::ptr::null_mut());
        }
        assert_eq!(unsafe { smx_dist_dim(std::ptr::null()) }, 0);
        assert_eq!(smx_last_status(), SMX_ERR_INVALID);
    }

    #[test]
    fn generated_header_covers_the_surface() {
        let header = std::fs::read_to_string(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/include/skewmix.h"
        ))
        .expect("header generated at build time");
        for symbol in [
            "typedef struct SmxDist SmxDist;",
            "smx_dist_parse_json",
            "smx_dist_free",
            "smx_dist_dim",
            "smx_describe_json",
            "smx_canonicalize_json",
            "smx_indices_json",
            "smx_mode_json",
            "smx_sample",
            "smx_string_free",
            "smx_last_status",
            "smx_last_error",
            "SMX_ERR_UNSUPPORTED",
            "SMX_METHOD_SIGMA_KAPPA",
        ] {
            assert!(header.contains(symbol), "header is missing {symbol}");
        }
    }
}
