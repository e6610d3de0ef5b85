use std::ffi::{CStr, CString};
use std::ptr;

use statsub_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(statsub_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn builtin_scalar_curvature_under_both_signs() {
    let name = CString::new("paper-example-4-7").unwrap();
    let mut m = ptr::null_mut();
    unsafe {
        assert_eq!(statsub_manifest_builtin(name.as_ptr(), &mut m), STATSUB_OK);
        let mut d = 0usize;
        assert_eq!(statsub_manifest_dimension(m, &mut d), STATSUB_OK);
        assert_eq!(d, 6);
        let p = [0.1, 0.2, -0.3, 0.4, 0.0, 0.5];
        let mut r = 0.0;
        assert_eq!(statsub_scalar_curvature(m, p.as_ptr(), 6, STATSUB_CONVENTION_PLUS, &mut r), STATSUB_OK);
        assert!((r - 20.0).abs() < 1e-9);
        assert_eq!(statsub_scalar_curvature(m, p.as_ptr(), 6, STATSUB_CONVENTION_MINUS, &mut r), STATSUB_OK);
        assert!((r + 20.0).abs() < 1e-9);
        assert_eq!(
            statsub_scalar_curvature(m, p.as_ptr(), 5, STATSUB_CONVENTION_MINUS, &mut r),
            STATSUB_ERR_ARGUMENT
        );
        statsub_manifest_free(m);
    }
}

#[test]
fn run_and_render_json() {
    let json = CString::new(r#"{"source": {"dimension": 2}, "evaluation": {"points": [[0.1, 0.2]]}}"#).unwrap();
    let mut m = ptr::null_mut();
    let mut r = ptr::null_mut();
    let mut s = ptr::null_mut();
    unsafe {
        assert_eq!(statsub_manifest_from_json(json.as_ptr(), &mut m), STATSUB_OK);
        let opts = StatsubRunOptions {
            points: 0,
            seed: 0,
            has_seed: 0,
            tol_scale: 0.0,
            convention: STATSUB_CONVENTION_BOTH,
        };
        assert_eq!(statsub_run(m, &opts, &mut r), STATSUB_OK);
        let mut w = 99usize;
        assert_eq!(statsub_report_warning_count(r, &mut w), STATSUB_OK);
        assert_eq!(w, 0);
        assert_eq!(statsub_report_render(r, STATSUB_FORMAT_JSON, &mut s), STATSUB_OK);
        let text = CStr::from_ptr(s).to_str().unwrap();
        let v: serde_json::Value = serde_json::from_str(text).unwrap();
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["structure"]["curvature"].as_array().unwrap().len(), 2);
        statsub_string_free(s);
        statsub_report_free(r);
        statsub_manifest_free(m);
    }
}

#[test]
fn errors_carry_codes_and_messages() {
    let mut m = ptr::null_mut();
    unsafe {
        let bad = CString::new(r#"{"source": {"dimension": 6, "metric": {"g_17": "1"}}}"#).unwrap();
        assert_eq!(statsub_manifest_from_json(bad.as_ptr(), &mut m), STATSUB_ERR_MANIFEST);
        assert!(last_error().contains("g_17"), "{}", last_error());
        let unknown = CString::new("no-such-example").unwrap();
        assert_eq!(statsub_manifest_builtin(unknown.as_ptr(), &mut m), STATSUB_ERR_UNKNOWN_EXAMPLE);
        assert_eq!(statsub_manifest_from_json(ptr::null(), &mut m), STATSUB_ERR_NULL);
        assert!(m.is_null());
        let ok = CString::new(r#"{"source": {"dimension": 1}}"#).unwrap();
        assert_eq!(statsub_manifest_from_json(ok.as_ptr(), &mut m), STATSUB_OK);
        assert_eq!(last_error(), "");
        let mut r = ptr::null_mut();
        let opts = StatsubRunOptions {
            points: 0,
            seed: 0,
            has_seed: 0,
            tol_scale: 0.0,
            convention: 7,
        };
        assert_eq!(statsub_run(m, &opts, &mut r), STATSUB_ERR_ARGUMENT);
        statsub_manifest_free(m);
    }
}

#[test]
fn header_declares_the_api() {
    let header = include_str!("../include/statsub.h");
    for f in [
        "statsub_manifest_from_json",
        "statsub_manifest_builtin",
        "statsub_run",
        "statsub_report_render",
        "statsub_last_error",
        "typedef struct StatsubManifest StatsubManifest",
        "StatsubRunOptions",
        "STATSUB_ERR_NUMERIC",
    ] {
        assert!(header.contains(f), "{f}");
    }
}
