//! C ABI over the weyl3 toolkit.
//!
//! Structures are built from a JSON spec and passed around as opaque
//! handles; results come back as JSON strings that the caller frees with
//! [`weyl3_string_free`]. Every entry point returns a [`Weyl3Status`];
//! on an error status the output string, when requested, holds
//! `{"error": "..."}` instead of a report.
//!
//! The build spec mirrors the CLI flags:
//!
//! ```json
//! {
//!   "family": "Bq",
//!   "q": 0.7,
//!   "sign": "+",
//!   "fields": { "K": "1 + z^2" },
//!   "box": [-0.35, 0.35, -0.35, 0.35, -0.35, 0.35]
//! }
//! ```

use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use serde::Deserialize;

use weyl3::families::{FamilyFields, FamilySpec, FamilyTag, MetricSign};
use weyl3::fields::ScalarField;
use weyl3::holonomy::{classify, ClassifyOptions};
use weyl3::sample::{points_in_box, rng};
use weyl3::suite::{self, Tolerances};
use weyl3::weyl::DomainBox;

/// Status codes of every C entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weyl3Status {
    /// Success; all checks passed where checks were run.
    Ok = 0,
    /// The computation ran but at least one verification check failed.
    CheckFailed = 1,
    /// Malformed input: JSON, expression syntax, family guards.
    InvalidInput = 2,
    /// A required pointer argument was null.
    NullPointer = 3,
    /// An input string was not valid UTF-8.
    InvalidUtf8 = 4,
    /// Internal failure (a panic was caught at the boundary).
    Internal = 5,
}

/// Opaque handle over a built canonical structure.
pub struct Weyl3Structure {
    spec: FamilySpec,
}

#[derive(Deserialize)]
struct SpecJson {
    family: String,
    #[serde(default)]
    q: Option<f64>,
    #[serde(default)]
    sign: Option<String>,
    #[serde(default)]
    fields: std::collections::BTreeMap<String, String>,
    #[serde(default, rename = "box")]
    domain: Option<[f64; 6]>,
}

fn parse_spec(src: &str) -> Result<FamilySpec, String> {
    let json: SpecJson = serde_json::from_str(src).map_err(|e| format!("bad spec JSON: {e}"))?;
    let tag = FamilyTag::parse(&json.family)
        .ok_or_else(|| format!("unknown family {:?}", json.family))?;
    let mut spec = FamilySpec::new(tag);
    spec.q = json.q;
    if let Some(sign) = &json.sign {
        spec.sign =
            MetricSign::parse(sign).ok_or_else(|| format!("bad sign {sign:?} (use + or -)"))?;
    }
    if let Some(b) = json.domain {
        spec.domain = DomainBox {
            min: [b[0], b[2], b[4]],
            max: [b[1], b[3], b[5]],
        };
    }
    let mut fields = FamilyFields::default();
    for (name, expr) in &json.fields {
        let parsed =
            ScalarField::parse(expr).map_err(|e| format!("in field {name}: {e}"))?;
        match name.as_str() {
            "H" => fields.h = Some(parsed),
            "K" => fields.k = Some(parsed),
            "L" => fields.l = Some(parsed),
            "F" => fields.f_upper = Some(parsed),
            "G" => fields.g_upper = Some(parsed),
            "f" => fields.f_lower = Some(parsed),
            other => return Err(format!("unknown field name {other:?}")),
        }
    }
    spec.fields = fields;
    Ok(spec)
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " "))
        .expect("no interior nul after replacement")
        .into_raw()
}

fn emit(out_json: *mut *mut c_char, payload: String) {
    if !out_json.is_null() {
        unsafe { *out_json = to_c_string(payload) };
    }
}

fn emit_error(out_json: *mut *mut c_char, message: &str) {
    emit(
        out_json,
        serde_json::json!({ "error": message }).to_string(),
    );
}

/// Shield the boundary from panics; they become `Internal`.
fn guarded(out_json: *mut *mut c_char, f: impl FnOnce() -> Weyl3Status) -> Weyl3Status {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            emit_error(out_json, "internal panic");
            Weyl3Status::Internal
        }
    }
}

unsafe fn read_str<'a>(
    ptr: *const c_char,
    out_json: *mut *mut c_char,
) -> Result<&'a str, Weyl3Status> {
    if ptr.is_null() {
        emit_error(out_json, "null string argument");
        return Err(Weyl3Status::NullPointer);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        emit_error(out_json, "string is not valid UTF-8");
        Weyl3Status::InvalidUtf8
    })
}

/// Library version as a static string; do not free.
#[no_mangle]
pub extern "C" fn weyl3_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Build a structure from a JSON spec. On success `*out` owns the handle;
/// release it with [`weyl3_structure_free`].
///
/// # Safety
/// `spec_json` must be a valid NUL-terminated string and `out` a valid
/// pointer to a pointer slot.
#[no_mangle]
pub unsafe extern "C" fn weyl3_structure_new(
    spec_json: *const c_char,
    out: *mut *mut Weyl3Structure,
    out_error: *mut *mut c_char,
) -> Weyl3Status {
    guarded(out_error, || {
        if out.is_null() {
            emit_error(out_error, "null output handle");
            return Weyl3Status::NullPointer;
        }
        let src = match read_str(spec_json, out_error) {
            Ok(s) => s,
            Err(status) => return status,
        };
        match parse_spec(src) {
            Ok(spec) => {
                // Surface build errors (missing fields, guards) now rather
                // than at first use.
                if let Err(e) = weyl3::families::build(&spec) {
                    emit_error(out_error, &e.to_string());
                    return Weyl3Status::InvalidInput;
                }
                *out = Box::into_raw(Box::new(Weyl3Structure { spec }));
                Weyl3Status::Ok
            }
            Err(e) => {
                emit_error(out_error, &e);
                Weyl3Status::InvalidInput
            }
        }
    })
}

/// Release a structure handle. Null is ignored.
///
/// # Safety
/// `handle` must come from [`weyl3_structure_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn weyl3_structure_free(handle: *mut Weyl3Structure) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Release a string returned through any `out_json` parameter.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn weyl3_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Run the verification battery of a built structure. `*out_json` receives
/// the JSON report (checks, classification, notes).
///
/// # Safety
/// `handle` must be a live handle from [`weyl3_structure_new`].
#[no_mangle]
pub unsafe extern "C" fn weyl3_check(
    handle: *const Weyl3Structure,
    points: usize,
    seed: u64,
    tol: f64,
    out_json: *mut *mut c_char,
) -> Weyl3Status {
    guarded(out_json, || {
        if handle.is_null() {
            emit_error(out_json, "null structure handle");
            return Weyl3Status::NullPointer;
        }
        let structure = &*handle;
        let tolerances = Tolerances::with_base(if tol > 0.0 { tol } else { 1e-9 });
        match suite::check_family(&structure.spec, points, seed, &tolerances, 3) {
            Ok(outcome) => {
                let passed = outcome.checks.iter().all(|c| c.pass);
                let payload = serde_json::json!({
                    "checks": outcome.checks,
                    "notes": outcome.notes,
                    "classification": outcome.classification,
                    "verdict": if passed { "pass" } else { "fail" },
                });
                emit(out_json, payload.to_string());
                if passed {
                    Weyl3Status::Ok
                } else {
                    Weyl3Status::CheckFailed
                }
            }
            Err(e) => {
                emit_error(out_json, &e);
                Weyl3Status::InvalidInput
            }
        }
    })
}

/// Classify the holonomy subalgebra of a built structure.
///
/// # Safety
/// `handle` must be a live handle from [`weyl3_structure_new`].
#[no_mangle]
pub unsafe extern "C" fn weyl3_classify(
    handle: *const Weyl3Structure,
    points: usize,
    seed: u64,
    out_json: *mut *mut c_char,
) -> Weyl3Status {
    guarded(out_json, || {
        if handle.is_null() {
            emit_error(out_json, "null structure handle");
            return Weyl3Status::NullPointer;
        }
        let structure = &*handle;
        let instance = match weyl3::families::build(&structure.spec) {
            Ok(i) => i,
            Err(e) => {
                emit_error(out_json, &e.to_string());
                return Weyl3Status::InvalidInput;
            }
        };
        let mut r = rng(seed);
        let sample = points_in_box(&structure.spec.domain, points.clamp(1, 50), &mut r);
        let options = ClassifyOptions {
            q_hint: structure.spec.q,
            ..ClassifyOptions::default()
        };
        match classify(&instance.structure, &sample, 3, &options) {
            Ok(report) => {
                emit(
                    out_json,
                    serde_json::to_string(&report).expect("report serializes"),
                );
                Weyl3Status::Ok
            }
            Err(e) => {
                emit_error(out_json, &e.to_string());
                Weyl3Status::InvalidInput
            }
        }
    })
}

/// Einstein-Weyl / dKP equivalence for a coefficient expression K.
///
/// # Safety
/// `k_expr` must be a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn weyl3_dkp(
    k_expr: *const c_char,
    points: usize,
    seed: u64,
    tol: f64,
    out_json: *mut *mut c_char,
) -> Weyl3Status {
    guarded(out_json, || {
        let src = match read_str(k_expr, out_json) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let k = match ScalarField::parse(src) {
            Ok(k) => k,
            Err(e) => {
                emit_error(out_json, &e.to_string());
                return Weyl3Status::InvalidInput;
            }
        };
        let tolerances = Tolerances::with_base(if tol > 0.0 { tol } else { 1e-9 });
        let mut r = rng(seed);
        let sample = points_in_box(&weyl3::sample::default_box(), points.max(1), &mut r);
        match weyl3::dkp::verify_equivalence(&k, &sample, tolerances.dkp_ew) {
            Ok(check) => {
                let mismatch = check.verdict == weyl3::dkp::DkpVerdict::Mismatch;
                emit(
                    out_json,
                    serde_json::to_string(&check).expect("check serializes"),
                );
                if mismatch {
                    Weyl3Status::CheckFailed
                } else {
                    Weyl3Status::Ok
                }
            }
            Err(e) => {
                emit_error(out_json, &e.to_string());
                Weyl3Status::InvalidInput
            }
        }
    })
}

/// Run the full verification battery.
///
/// # Safety
/// `out_json`, when non-null, must be a valid pointer slot.
#[no_mangle]
pub unsafe extern "C" fn weyl3_suite(
    seed: u64,
    tol: f64,
    out_json: *mut *mut c_char,
) -> Weyl3Status {
    guarded(out_json, || {
        let tolerances = Tolerances::with_base(if tol > 0.0 { tol } else { 1e-9 });
        let outcome = suite::run_all(seed, &tolerances, 3);
        let passed = outcome.checks.iter().all(|c| c.pass);
        let payload = serde_json::json!({
            "checks": outcome.checks,
            "notes": outcome.notes,
            "verdict": if passed { "pass" } else { "fail" },
        });
        emit(out_json, payload.to_string());
        if passed {
            Weyl3Status::Ok
        } else {
            Weyl3Status::CheckFailed
        }
    })
}
