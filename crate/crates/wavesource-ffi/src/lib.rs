//! C ABI over the wavesource experiment runner.
//!
//! The surface follows the usual opaque-handle pattern: parse a JSON config
//! into a [`WsConfig`] handle, run it, free it. Every fallible call returns
//! an `int32_t` status (`WS_OK` on success); after a failure,
//! [`ws_last_error_message`] yields a human-readable description. Strings
//! returned by this library must be released with [`ws_string_free`], and
//! handles with [`ws_config_free`]. All calls are thread-safe in the sense
//! that the error slot is thread-local; a single handle must not be freed
//! twice or used after free.
//!
//! The matching header is generated into `include/wavesource.h` at build
//! time.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::path::{Path, PathBuf};
use wavesource::cli::{run_experiment, ExperimentConfig};
use wavesource::levy_inverse::compute_i;
use wavesource::Error;

/// Success.
pub const WS_OK: i32 = 0;
/// Null pointer or malformed UTF-8 handed across the boundary.
pub const WS_ERR_MISUSE: i32 = 1;
/// Invalid configuration or out-of-domain parameter.
pub const WS_ERR_CONFIG: i32 = 2;
/// Structurally degenerate problem (unrecoverable modes, no noise, …).
pub const WS_ERR_DEGENERATE: i32 = 3;
/// Filesystem failure while reading configs or writing artifacts.
pub const WS_ERR_IO: i32 = 4;

/// Opaque handle to a validated experiment configuration.
pub struct WsConfig {
    inner: ExperimentConfig,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = Some(CString::new(sanitized).expect("NULs removed"));
    });
}

fn clear_last_error() {
    LAST_ERROR.with(|slot| slot.borrow_mut().take());
}

fn code_of(err: &Error) -> i32 {
    err.exit_code()
}

fn fail(err: &Error) -> i32 {
    set_last_error(&err.to_string());
    code_of(err)
}

fn misuse(message: &str) -> i32 {
    set_last_error(message);
    WS_ERR_MISUSE
}

/// # Safety
/// `ptr` must be null or a valid NUL-terminated C string.
unsafe fn read_c_str<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, i32> {
    if ptr.is_null() {
        return Err(misuse(&format!("{what} pointer is null")));
    }
    unsafe { CStr::from_ptr(ptr) }
        .to_str()
        .map_err(|_| misuse(&format!("{what} is not valid UTF-8")))
}

/// Parses a JSON experiment config.
///
/// On success writes a fresh handle to `out` and returns `WS_OK`; the caller
/// owns the handle and must release it with `ws_config_free`. On failure
/// `out` is untouched and the return code classifies the problem.
///
/// # Safety
/// `json` must be a valid NUL-terminated C string and `out` a valid pointer
/// to writable memory for one pointer.
#[no_mangle]
pub unsafe extern "C" fn ws_config_parse(
    json: *const c_char,
    out: *mut *mut WsConfig,
) -> i32 {
    if out.is_null() {
        return misuse("output handle pointer is null");
    }
    let text = match unsafe { read_c_str(json, "config JSON") } {
        Ok(t) => t,
        Err(code) => return code,
    };
    match ExperimentConfig::from_json(text) {
        Ok(inner) => {
            clear_last_error();
            unsafe { out.write(Box::into_raw(Box::new(WsConfig { inner }))) };
            WS_OK
        }
        Err(e) => fail(&e),
    }
}

/// Reads and parses a JSON experiment config from a file path.
///
/// # Safety
/// `path` must be a valid NUL-terminated C string and `out` a valid pointer
/// to writable memory for one pointer.
#[no_mangle]
pub unsafe extern "C" fn ws_config_parse_file(
    path: *const c_char,
    out: *mut *mut WsConfig,
) -> i32 {
    if out.is_null() {
        return misuse("output handle pointer is null");
    }
    let path = match unsafe { read_c_str(path, "config path") } {
        Ok(p) => p,
        Err(code) => return code,
    };
    match ExperimentConfig::from_file(Path::new(path)) {
        Ok(inner) => {
            clear_last_error();
            unsafe { out.write(Box::into_raw(Box::new(WsConfig { inner }))) };
            WS_OK
        }
        Err(e) => fail(&e),
    }
}

/// Releases a handle obtained from one of the parse functions. Passing null
/// is a no-op; passing the same handle twice is undefined behavior.
///
/// # Safety
/// `cfg` must be null or a handle previously returned by this library that
/// has not been freed.
#[no_mangle]
pub unsafe extern "C" fn ws_config_free(cfg: *mut WsConfig) {
    if !cfg.is_null() {
        drop(unsafe { Box::from_raw(cfg) });
    }
}

/// Runs the experiment held by `cfg`.
///
/// `output_dir` (nullable) overrides the config's artifact directory and
/// `seed` (nullable) overrides its master seed. On success, the primary
/// reconstruction error is written through `primary_error` and the secondary
/// one through `secondary_error` (NaN when the experiment kind has only one
/// metric); both pointers may be null when the caller does not need them.
///
/// # Safety
/// `cfg` must be a live handle from this library; `output_dir` null or a
/// valid NUL-terminated C string; `seed` null or a valid pointer to a u64;
/// the error out-pointers null or valid for one f64 write each.
#[no_mangle]
pub unsafe extern "C" fn ws_run(
    cfg: *const WsConfig,
    output_dir: *const c_char,
    seed: *const u64,
    primary_error: *mut f64,
    secondary_error: *mut f64,
) -> i32 {
    if cfg.is_null() {
        return misuse("config handle is null");
    }
    let config = unsafe { &(*cfg).inner };
    let dir: Option<PathBuf> = if output_dir.is_null() {
        None
    } else {
        match unsafe { read_c_str(output_dir, "output directory") } {
            Ok(d) => Some(PathBuf::from(d)),
            Err(code) => return code,
        }
    };
    let seed = if seed.is_null() { None } else { Some(unsafe { seed.read() }) };
    match run_experiment(config, seed, dir.as_deref()) {
        Ok(summary) => {
            clear_last_error();
            if !primary_error.is_null() {
                unsafe { primary_error.write(summary.primary_error) };
            }
            if !secondary_error.is_null() {
                unsafe { secondary_error.write(summary.secondary_error.unwrap_or(f64::NAN)) };
            }
            WS_OK
        }
        Err(e) => fail(&e),
    }
}

/// Exact cross integral ∫₀ᵀ A_k(t)·A_l(t) dt of two Duhamel kernels with
/// temporal frequencies `omega_k` and `omega_l` — a dependency-free numeric
/// smoke test for bindings.
#[no_mangle]
pub extern "C" fn ws_compute_i(omega_k: f64, omega_l: f64, t_horizon: f64) -> f64 {
    compute_i(omega_k, omega_l, t_horizon)
}

/// Returns the message of the most recent failure on this thread as a fresh
/// string the caller must release with `ws_string_free`, or null when the
/// last call succeeded.
#[no_mangle]
pub extern "C" fn ws_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|slot| match &*slot.borrow() {
        Some(msg) => msg.clone().into_raw(),
        None => std::ptr::null_mut(),
    })
}

/// Releases a string returned by this library. Passing null is a no-op.
///
/// # Safety
/// `s` must be null or a string previously returned by this library that has
/// not been freed.
#[no_mangle]
pub unsafe extern "C" fn ws_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}
