use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use cornerlab_ffi::*;

fn last_error() -> String {
    let p = cornerlab_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn builtin(name: &str, params: &[f64]) -> *mut CornerlabModel {
    let name = CString::new(name).unwrap();
    let mut m = ptr::null_mut();
    let s = unsafe { cornerlab_model_builtin(name.as_ptr(), params.as_ptr(), params.len(), &mut m) };
    assert_eq!(s, CornerlabStatus::Ok, "{}", last_error());
    m
}

fn class_of(m: *const CornerlabModel) -> String {
    let mut c: *const c_char = ptr::null();
    assert_eq!(unsafe { cornerlab_model_class(m, &mut c) }, CornerlabStatus::Ok);
    unsafe { CStr::from_ptr(c) }.to_str().unwrap().to_owned()
}

#[test]
fn product_corner_through_c_api() {
    let a = builtin("ssh", &[0.4, 1.0]);
    let mut ab = ptr::null_mut();
    unsafe {
        assert_eq!(cornerlab_product(a, a, &mut ab), CornerlabStatus::Ok);
        let (mut dim, mut orb) = (0, 0);
        assert_eq!(cornerlab_model_shape(ab, &mut dim, &mut orb), CornerlabStatus::Ok);
        assert_eq!((dim, orb), (2, 4));
        assert_eq!(class_of(ab), "BDI");
        let mut inv = std::mem::zeroed::<CornerlabInvariant>();
        assert_eq!(cornerlab_corner_invariant(ab, 2, 16, &mut inv), CornerlabStatus::Ok, "{}", last_error());
        assert_eq!(inv.value.abs(), 1);
        assert_eq!(inv.group, CornerlabGroup::Z);
        assert!(inv.face_gap > 0.1);
        cornerlab_model_free(ab);
        cornerlab_model_free(a);
    }
    assert!(cornerlab_last_error().is_null());
}

#[test]
fn json_round_trip() {
    let a = builtin("kitaev", &[0.0, 0.5, 0.5]);
    unsafe {
        let mut text = ptr::null_mut();
        assert_eq!(cornerlab_model_to_json(a, &mut text), CornerlabStatus::Ok);
        let mut b = ptr::null_mut();
        assert_eq!(cornerlab_model_from_json(text, &mut b), CornerlabStatus::Ok, "{}", last_error());
        assert_eq!(class_of(b), "D");
        cornerlab_string_free(text);
        cornerlab_model_free(b);
        cornerlab_model_free(a);
    }
}

#[test]
fn strong_group() {
    let class = CString::new("DIII").unwrap();
    let mut out = ptr::null_mut();
    unsafe {
        assert_eq!(cornerlab_strong_group(class.as_ptr(), 2, 1, &mut out), CornerlabStatus::Ok);
        assert_eq!(CStr::from_ptr(out).to_str().unwrap(), "Z2");
        cornerlab_string_free(out);
        assert_eq!(cornerlab_strong_group(class.as_ptr(), 1, 2, &mut out), CornerlabStatus::InvalidInput);
    }
    assert!(last_error().contains("k"));
}

#[test]
fn error_codes() {
    let mut m = ptr::null_mut();
    unsafe {
        assert_eq!(cornerlab_model_from_json(ptr::null(), &mut m), CornerlabStatus::NullPointer);
        let bad = CString::new("{\"dim\": 1}").unwrap();
        assert_ne!(cornerlab_model_from_json(bad.as_ptr(), &mut m), CornerlabStatus::Ok);
        assert!(m.is_null());
        let name = CString::new("ssh").unwrap();
        assert_eq!(cornerlab_model_builtin(name.as_ptr(), [1.0].as_ptr(), 1, &mut m), CornerlabStatus::InvalidInput);
        assert!(last_error().contains("2 parameters"));
        let missing = CString::new("/nonexistent/model.json").unwrap();
        assert_eq!(cornerlab_model_load(missing.as_ptr(), &mut m), CornerlabStatus::Io);
        cornerlab_model_free(ptr::null_mut());
    }
    // gapless face
    let crit = builtin("ssh", &[1.0, 1.0]);
    let mut sq = ptr::null_mut();
    unsafe {
        assert_eq!(cornerlab_product(crit, crit, &mut sq), CornerlabStatus::Ok);
        let mut inv = std::mem::zeroed::<CornerlabInvariant>();
        assert_eq!(cornerlab_corner_invariant(sq, 2, 12, &mut inv), CornerlabStatus::Assumption);
        cornerlab_model_free(sq);
        cornerlab_model_free(crit);
    }
}

#[test]
fn version_is_set() {
    let v = unsafe { CStr::from_ptr(cornerlab_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles_as_c() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = std::fs::read_to_string(dir.join("include/cornerlab.h")).unwrap();
    for f in ["cornerlab_model_free", "cornerlab_corner_invariant", "cornerlab_last_error", "CORNERLAB_STATUS_ASSUMPTION"] {
        assert!(header.contains(f), "{f} missing from header");
    }
    let Ok(status) = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(dir.join("include"))
        .arg(dir.join("tests/c/smoke.c"))
        .status()
    else {
        eprintln!("no C compiler; skipping syntax check");
        return;
    };
    assert!(status.success());
}
