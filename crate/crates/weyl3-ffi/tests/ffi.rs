//! Exercises the C entry points from Rust, the way a foreign caller would.

use std::ffi::{c_char, CStr, CString};
use std::ptr;

use weyl3_ffi::*;

unsafe fn take_string(ptr: *mut c_char) -> String {
    assert!(!ptr.is_null());
    let s = CStr::from_ptr(ptr).to_str().unwrap().to_string();
    weyl3_string_free(ptr);
    s
}

fn build(spec: &str) -> *mut Weyl3Structure {
    let spec = CString::new(spec).unwrap();
    let mut handle: *mut Weyl3Structure = ptr::null_mut();
    let mut err: *mut c_char = ptr::null_mut();
    let status = unsafe { weyl3_structure_new(spec.as_ptr(), &mut handle, &mut err) };
    assert_eq!(status, Weyl3Status::Ok, "build failed: {}", unsafe {
        take_string(err)
    });
    assert!(!handle.is_null());
    handle
}

#[test]
fn version_is_a_static_string() {
    let v = unsafe { CStr::from_ptr(weyl3_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn build_check_classify_roundtrip() {
    let handle = build(r#"{"family":"Bq","q":0.7,"fields":{"K":"1 + z^2 + x*y/4"}}"#);

    let mut out: *mut c_char = ptr::null_mut();
    let status = unsafe { weyl3_check(handle, 40, 42, 0.0, &mut out) };
    assert_eq!(status, Weyl3Status::Ok);
    let report: serde_json::Value =
        serde_json::from_str(&unsafe { take_string(out) }).unwrap();
    assert_eq!(report["verdict"], "pass");
    assert!(report["checks"].as_array().unwrap().len() >= 5);

    let mut out: *mut c_char = ptr::null_mut();
    let status = unsafe { weyl3_classify(handle, 10, 42, &mut out) };
    assert_eq!(status, Weyl3Status::Ok);
    let classified: serde_json::Value =
        serde_json::from_str(&unsafe { take_string(out) }).unwrap();
    let q = classified["classified"]["Bq"].as_f64().unwrap();
    assert!((q - 0.7).abs() < 1e-6, "fitted q = {q}");
    assert_eq!(classified["algebra_label"], "a_1");

    unsafe { weyl3_structure_free(handle) };
}

#[test]
fn dkp_entry_point() {
    let k = CString::new("x*y + (x^2-2)/2 * z^2").unwrap();
    let mut out: *mut c_char = ptr::null_mut();
    let status = unsafe { weyl3_dkp(k.as_ptr(), 60, 42, 0.0, &mut out) };
    assert_eq!(status, Weyl3Status::Ok);
    let check: serde_json::Value = serde_json::from_str(&unsafe { take_string(out) }).unwrap();
    assert_eq!(check["verdict"], "BothZero");
}

#[test]
fn invalid_inputs_are_reported() {
    // Bad JSON.
    let spec = CString::new("not json").unwrap();
    let mut handle: *mut Weyl3Structure = ptr::null_mut();
    let mut err: *mut c_char = ptr::null_mut();
    let status = unsafe { weyl3_structure_new(spec.as_ptr(), &mut handle, &mut err) };
    assert_eq!(status, Weyl3Status::InvalidInput);
    let message = unsafe { take_string(err) };
    assert!(message.contains("error"), "got {message}");

    // Guarded parameter.
    let spec = CString::new(r#"{"family":"Bq","q":0,"fields":{"K":"y"}}"#).unwrap();
    let mut err: *mut c_char = ptr::null_mut();
    let status = unsafe { weyl3_structure_new(spec.as_ptr(), &mut handle, &mut err) };
    assert_eq!(status, Weyl3Status::InvalidInput);
    unsafe { weyl3_string_free(err) };

    // Null pointers.
    let status = unsafe { weyl3_structure_new(ptr::null(), &mut handle, ptr::null_mut()) };
    assert_eq!(status, Weyl3Status::NullPointer);
    let status = unsafe { weyl3_check(ptr::null(), 10, 42, 0.0, ptr::null_mut()) };
    assert_eq!(status, Weyl3Status::NullPointer);

    // Expression error through the dkp entry point.
    let k = CString::new("x + * y").unwrap();
    let mut out: *mut c_char = ptr::null_mut();
    let status = unsafe { weyl3_dkp(k.as_ptr(), 10, 42, 0.0, &mut out) };
    assert_eq!(status, Weyl3Status::InvalidInput);
    let message = unsafe { take_string(out) };
    assert!(message.contains("syntax error"), "got {message}");
}

#[test]
fn generated_header_contains_the_api() {
    let header = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("include/weyl3.h");
    let text = std::fs::read_to_string(&header)
        .unwrap_or_else(|e| panic!("header missing at {header:?}: {e}"));
    for symbol in [
        "WEYL3_H",
        "Weyl3Status",
        "Weyl3Structure",
        "weyl3_version",
        "weyl3_structure_new",
        "weyl3_structure_free",
        "weyl3_check",
        "weyl3_classify",
        "weyl3_dkp",
        "weyl3_suite",
        "weyl3_string_free",
    ] {
        assert!(text.contains(symbol), "header lacks {symbol}");
    }
}
