//! C interface to the schoenflies extension library.
//!
//! Handles are opaque heap objects released with the matching `*_free`.
//! Every fallible call returns an `SfStatus`; on failure the message is kept
//! in a thread-local slot readable through [`sf_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use schoenflies::curves::{make_embedding, CircleEmbedding, CurveSpec};
use schoenflies::extend::{extend_plane_symmetric, Extension, GridSpec};
use schoenflies::symmetrize::{extend_plane_general, symmetrize};
use schoenflies::verify::{run_verify, VerifyConfig};
use schoenflies::{Error, C64};

/// Status codes; the numeric values match the CLI exit codes where they overlap.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SfStatus {
    Ok = 0,
    NullPointer = 1,
    Input = 3,
    Numerical = 4,
    Panic = 5,
}

/// A validated circle embedding.
pub struct SfCurve(CircleEmbedding);

/// A plane extension of a curve.
pub struct SfExtension(Box<dyn Extension>);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(err: &Error) -> SfStatus {
    if err.is_input_error() {
        SfStatus::Input
    } else {
        SfStatus::Numerical
    }
}

fn guard(f: impl FnOnce() -> Result<(), (SfStatus, String)>) -> SfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SfStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside schoenflies".into());
            SfStatus::Panic
        }
    }
}

fn lib_err(err: Error) -> (SfStatus, String) {
    (status_of(&err), err.to_string())
}

fn null_err(what: &str) -> (SfStatus, String) {
    (SfStatus::NullPointer, format!("{what} is null"))
}

unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, (SfStatus, String)> {
    if s.is_null() {
        return Err(null_err(what));
    }
    CStr::from_ptr(s).to_str().map_err(|e| (SfStatus::Input, format!("{what} is not UTF-8: {e}")))
}

/// Message of the last failed call on this thread, or null. Valid until the next failing call.
#[no_mangle]
pub extern "C" fn sf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Forget the last error on this thread.
#[no_mangle]
pub extern "C" fn sf_clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

/// Build a curve from its JSON description (named family or node list).
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sf_curve_from_json(json: *const c_char, out: *mut *mut SfCurve) -> SfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null_err("out"));
        }
        let text = read_str(json, "json")?;
        let spec: CurveSpec = serde_json::from_str(text).map_err(|e| (SfStatus::Input, e.to_string()))?;
        let curve = make_embedding(&spec).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(SfCurve(curve)));
        Ok(())
    })
}

/// # Safety
/// `curve` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn sf_curve_free(curve: *mut SfCurve) {
    if !curve.is_null() {
        drop(Box::from_raw(curve));
    }
}

/// Number of nodes, or 0 for a null handle.
///
/// # Safety
/// `curve` must be a valid handle or null.
#[no_mangle]
pub unsafe extern "C" fn sf_curve_len(curve: *const SfCurve) -> usize {
    curve.as_ref().map_or(0, |c| c.0.len())
}

/// Copy node `index` as `(t, re, im)`.
///
/// # Safety
/// `curve` must be a valid handle and `out` point to three doubles.
#[no_mangle]
pub unsafe extern "C" fn sf_curve_node(curve: *const SfCurve, index: usize, out: *mut f64) -> SfStatus {
    guard(|| {
        let curve = curve.as_ref().ok_or_else(|| null_err("curve"))?;
        if out.is_null() {
            return Err(null_err("out"));
        }
        let (t, p) = curve
            .0
            .nodes()
            .nth(index)
            .ok_or_else(|| (SfStatus::Input, format!("node {index} out of range")))?;
        std::slice::from_raw_parts_mut(out, 3).copy_from_slice(&[t, p.re, p.im]);
        Ok(())
    })
}

/// Winding symmetrization of `curve - w0`; `out` receives the symmetric curve g.
///
/// # Safety
/// `curve` must be a valid handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sf_symmetrize(
    curve: *const SfCurve,
    w0_re: f64,
    w0_im: f64,
    out: *mut *mut SfCurve,
) -> SfStatus {
    guard(|| {
        let curve = curve.as_ref().ok_or_else(|| null_err("curve"))?;
        if out.is_null() {
            return Err(null_err("out"));
        }
        let sym = symmetrize(&curve.0, C64::new(w0_re, w0_im)).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(SfCurve(sym.g)));
        Ok(())
    })
}

/// Extend `curve` to the plane: directly if it is centrally symmetric, otherwise
/// through winding symmetrization about its incenter.
///
/// # Safety
/// `curve` must be a valid handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sf_extend(curve: *const SfCurve, out: *mut *mut SfExtension) -> SfStatus {
    guard(|| {
        let curve = curve.as_ref().ok_or_else(|| null_err("curve"))?;
        if out.is_null() {
            return Err(null_err("out"));
        }
        let ext: Box<dyn Extension> = if curve.0.is_symmetric() {
            Box::new(extend_plane_symmetric(&curve.0).map_err(lib_err)?)
        } else {
            let grid = GridSpec::default();
            Box::new(extend_plane_general(&curve.0, grid).map_err(lib_err)?.0)
        };
        *out = Box::into_raw(Box::new(SfExtension(ext)));
        Ok(())
    })
}

/// # Safety
/// `ext` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn sf_extension_free(ext: *mut SfExtension) {
    if !ext.is_null() {
        drop(Box::from_raw(ext));
    }
}

/// Evaluate `F(z)`; `out` receives `(re, im)`.
///
/// # Safety
/// `ext` must be a valid handle and `out` point to two doubles.
#[no_mangle]
pub unsafe extern "C" fn sf_extension_eval(ext: *const SfExtension, re: f64, im: f64, out: *mut f64) -> SfStatus {
    guard(|| {
        let ext = ext.as_ref().ok_or_else(|| null_err("extension"))?;
        if out.is_null() {
            return Err(null_err("out"));
        }
        let w = ext.0.eval(C64::new(re, im)).map_err(lib_err)?;
        std::slice::from_raw_parts_mut(out, 2).copy_from_slice(&[w.re, w.im]);
        Ok(())
    })
}

/// Evaluate `F(z)` and `DF(z)`; `out` receives `(re, im, a, b, c, d)` with
/// `DF = [[a, b], [c, d]]` acting on `(x, y)`.
///
/// # Safety
/// `ext` must be a valid handle and `out` point to six doubles.
#[no_mangle]
pub unsafe extern "C" fn sf_extension_jacobian(
    ext: *const SfExtension,
    re: f64,
    im: f64,
    out: *mut f64,
) -> SfStatus {
    guard(|| {
        let ext = ext.as_ref().ok_or_else(|| null_err("extension"))?;
        if out.is_null() {
            return Err(null_err("out"));
        }
        let (w, j) = ext.0.eval_with_jacobian(C64::new(re, im)).map_err(lib_err)?;
        std::slice::from_raw_parts_mut(out, 6).copy_from_slice(&[w.re, w.im, j.a, j.b, j.c, j.d]);
        Ok(())
    })
}

/// Run the inequality verification suite; `out` receives the JSON report,
/// to be released with [`sf_string_free`]. `passed` (optional) receives 1 or 0.
///
/// # Safety
/// `out` must be a valid pointer; `passed` may be null.
#[no_mangle]
pub unsafe extern "C" fn sf_verify(seed: u64, walks: u64, passed: *mut i32, out: *mut *mut c_char) -> SfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null_err("out"));
        }
        let config = VerifyConfig::new(seed, walks).map_err(lib_err)?;
        let report = run_verify(&config).map_err(lib_err)?;
        let json = serde_json::to_string(&report).map_err(|e| (SfStatus::Numerical, e.to_string()))?;
        if !passed.is_null() {
            *passed = report.pass as i32;
        }
        *out = CString::new(json).map_err(|e| (SfStatus::Numerical, e.to_string()))?.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn sf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
