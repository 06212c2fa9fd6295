//! Exercises the C ABI from outside the crate, the way a foreign caller
//! linking against the generated header would: handles, status codes, and
//! the thread-local error channel.

use std::ffi::{CStr, CString};
use wavesource_ffi::{
    ws_compute_i, ws_config_free, ws_config_parse, ws_config_parse_file,
    ws_last_error_message, ws_run, ws_string_free, WsConfig, WS_ERR_CONFIG,
    WS_ERR_DEGENERATE, WS_ERR_IO, WS_ERR_MISUSE, WS_OK,
};

fn take_error() -> Option<String> {
    let ptr = ws_last_error_message();
    if ptr.is_null() {
        return None;
    }
    let msg = unsafe { CStr::from_ptr(ptr) }.to_str().unwrap().to_string();
    unsafe { ws_string_free(ptr) };
    Some(msg)
}

#[test]
fn full_experiment_through_the_abi() {
    let dir = tempfile::tempdir().unwrap();
    let json = CString::new(
        r#"{"kind": "levy",
            "levy": {"true_f": "sin", "true_g": "sin",
                     "k_modes": 3, "n_x": 30, "n_t": 80, "n_samples": 40}}"#,
    )
    .unwrap();
    let mut cfg: *mut WsConfig = std::ptr::null_mut();
    assert_eq!(unsafe { ws_config_parse(json.as_ptr(), &mut cfg) }, WS_OK);

    let out_dir = CString::new(dir.path().to_str().unwrap()).unwrap();
    let seed = 9u64;
    let mut eps_f = f64::NAN;
    let mut eps_g = f64::NAN;
    let code = unsafe { ws_run(cfg, out_dir.as_ptr(), &seed, &mut eps_f, &mut eps_g) };
    assert_eq!(code, WS_OK, "{:?}", take_error());
    assert!(eps_f.is_finite() && eps_g.is_finite());
    assert!(dir.path().join("errors.json").is_file());
    assert!(take_error().is_none(), "success must clear the error slot");
    unsafe { ws_config_free(cfg) };
}

#[test]
fn every_error_class_maps_to_its_code() {
    let mut cfg: *mut WsConfig = std::ptr::null_mut();

    // Misuse: null input pointer.
    assert_eq!(
        unsafe { ws_config_parse(std::ptr::null(), &mut cfg) },
        WS_ERR_MISUSE
    );

    // Config: syntactically valid JSON, semantically broken experiment.
    let bad = CString::new(r#"{"kind": "helmholtz"}"#).unwrap();
    assert_eq!(unsafe { ws_config_parse(bad.as_ptr(), &mut cfg) }, WS_ERR_CONFIG);
    assert!(take_error().is_some());

    // I/O: config path that does not exist.
    let missing = CString::new("/definitely/not/here.json").unwrap();
    assert_eq!(
        unsafe { ws_config_parse_file(missing.as_ptr(), &mut cfg) },
        WS_ERR_IO
    );

    // Degenerate: a driver with no stochastic component cannot identify g.
    let degenerate = CString::new(
        r#"{"kind": "levy",
            "levy": {"true_f": "sin", "true_g": "sin",
                     "k_modes": 2, "n_x": 20, "n_t": 50, "n_samples": 16,
                     "levy": {"sigma": 0.0, "lambda_p": 0.0, "sigma_j": 0.0}}}"#,
    )
    .unwrap();
    assert_eq!(unsafe { ws_config_parse(degenerate.as_ptr(), &mut cfg) }, WS_OK);
    let dir = tempfile::tempdir().unwrap();
    let out_dir = CString::new(dir.path().to_str().unwrap()).unwrap();
    let code = unsafe {
        ws_run(cfg, out_dir.as_ptr(), std::ptr::null(), std::ptr::null_mut(), std::ptr::null_mut())
    };
    assert_eq!(code, WS_ERR_DEGENERATE);
    assert!(take_error().unwrap().contains("no stochastic component"));
    unsafe { ws_config_free(cfg) };
}

#[test]
fn kernel_integral_is_callable_without_a_handle() {
    assert!((ws_compute_i(1.0, 1.0, 1.0) - 0.272_675_64).abs() <= 1e-8);
    assert!(ws_compute_i(1.0, 2.0, std::f64::consts::PI).abs() <= 1e-12);
}
