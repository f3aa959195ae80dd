//! C interface to cornerlab.
//!
//! Every fallible function returns a [`CornerlabStatus`]; on failure the
//! message is available from [`cornerlab_last_error`] on the same thread.
//! Models are opaque handles owned by the caller and released with
//! [`cornerlab_model_free`]. Strings returned through `char **` must be
//! released with [`cornerlab_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cornerlab::classification::{strong_group_lookup, AzClass};
use cornerlab::invariants::{corner_invariant, CornerQuery, GroupTag};
use cornerlab::model::ModelSpec;
use cornerlab::{models, Error};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CornerlabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Model = 3,
    Symmetry = 4,
    Unsupported = 5,
    Assumption = 6,
    Resolution = 7,
    Numerical = 8,
    Io = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CornerlabGroup {
    Z = 0,
    Z2 = 1,
    TwoZ = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CornerlabInvariant {
    pub value: i64,
    pub group: CornerlabGroup,
    /// Spatial dimension of the model.
    pub n: usize,
    /// Codimension of the corner.
    pub k: usize,
    pub l: i64,
    /// Smallest face-compression gap seen while checking the corner.
    pub face_gap: f64,
}

/// Opaque model handle.
pub struct CornerlabModel {
    spec: ModelSpec,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> CornerlabStatus {
    match err {
        Error::Input(_) | Error::Ordering(_) | Error::Window(_) | Error::Json(_) => CornerlabStatus::InvalidInput,
        Error::Dimension(_) | Error::Model(_) => CornerlabStatus::Model,
        Error::Symmetry(_) | Error::Classification(_) => CornerlabStatus::Symmetry,
        Error::Unsupported(_) => CornerlabStatus::Unsupported,
        Error::Assumption { .. } => CornerlabStatus::Assumption,
        Error::Resolution(_) | Error::Inconsistent(_) => CornerlabStatus::Resolution,
        Error::Numerical(_) => CornerlabStatus::Numerical,
        Error::Io(_) => CornerlabStatus::Io,
    }
}

enum Fail {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> CornerlabStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CornerlabStatus::Ok,
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            CornerlabStatus::NullPointer
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            CornerlabStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail::Lib(Error::Input(format!("{what} is not valid UTF-8"))))
}

unsafe fn model_arg<'a>(p: *const CornerlabModel, what: &'static str) -> Result<&'a ModelSpec, Fail> {
    p.as_ref().map(|m| &m.spec).ok_or(Fail::Null(what))
}

unsafe fn put<T>(out: *mut T, v: T, what: &'static str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null(what));
    }
    out.write(v);
    Ok(())
}

fn boxed(spec: ModelSpec) -> *mut CornerlabModel {
    Box::into_raw(Box::new(CornerlabModel { spec }))
}

fn owned_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).unwrap_or_default().into_raw()
}

fn class_cstr(c: AzClass) -> &'static CStr {
    match c {
        AzClass::A => c"A",
        AzClass::AIII => c"AIII",
        AzClass::AI => c"AI",
        AzClass::BDI => c"BDI",
        AzClass::D => c"D",
        AzClass::DIII => c"DIII",
        AzClass::AII => c"AII",
        AzClass::CII => c"CII",
        AzClass::C => c"C",
        AzClass::CI => c"CI",
    }
}

/// Message of the last failed call on this thread, or NULL. The pointer stays
/// valid until the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn cornerlab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub extern "C" fn cornerlab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a model document.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cornerlab_model_from_json(json: *const c_char, out: *mut *mut CornerlabModel) -> CornerlabStatus {
    guard(|| {
        let spec = ModelSpec::from_json(str_arg(json, "json")?)?;
        put(out, boxed(spec), "out")
    })
}

/// Reads a model document from a file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cornerlab_model_load(path: *const c_char, out: *mut *mut CornerlabModel) -> CornerlabStatus {
    guard(|| {
        let spec = ModelSpec::load(str_arg(path, "path")?)?;
        put(out, boxed(spec), "out")
    })
}

/// Builds one of the bundled models: `ssh` (v, w), `kitaev`, `pwave`,
/// `helical_diii`, `class_c` (mu, t, delta) or `cii_chain` (v, w, c).
///
/// # Safety
/// `name` must be a NUL-terminated string, `params` must point to `nparams`
/// doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cornerlab_model_builtin(
    name: *const c_char,
    params: *const f64,
    nparams: usize,
    out: *mut *mut CornerlabModel,
) -> CornerlabStatus {
    guard(|| {
        let name = str_arg(name, "name")?;
        let p: &[f64] = match nparams {
            0 => &[],
            _ if params.is_null() => return Err(Fail::Null("params")),
            _ => std::slice::from_raw_parts(params, nparams),
        };
        let want = |n: usize| {
            if p.len() == n {
                Ok(())
            } else {
                Err(Error::Input(format!("model {name} takes {n} parameters, got {}", p.len())))
            }
        };
        let spec = match name {
            "ssh" => want(2).and_then(|_| models::ssh(p[0], p[1])),
            "kitaev" => want(3).and_then(|_| models::kitaev(p[0], p[1], p[2])),
            "pwave" => want(3).and_then(|_| models::pwave(p[0], p[1], p[2])),
            "helical_diii" => want(3).and_then(|_| models::helical_diii(p[0], p[1], p[2])),
            "class_c" => want(3).and_then(|_| models::class_c(p[0], p[1], p[2])),
            "cii_chain" => want(3).and_then(|_| models::cii_chain(p[0], p[1], p[2])),
            _ => Err(Error::Input(format!("unknown model {name}"))),
        }?;
        put(out, boxed(spec), "out")
    })
}

/// Releases a model handle. NULL is ignored.
///
/// # Safety
/// `model` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cornerlab_model_free(model: *mut CornerlabModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Serializes a model; release the result with `cornerlab_string_free`.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cornerlab_model_to_json(model: *const CornerlabModel, out: *mut *mut c_char) -> CornerlabStatus {
    guard(|| {
        let text = model_arg(model, "model")?.to_json()?;
        put(out, owned_string(text), "out")
    })
}

/// Spatial dimension and orbitals per site.
///
/// # Safety
/// `model` must be a live handle; either output may be NULL.
#[no_mangle]
pub unsafe extern "C" fn cornerlab_model_shape(
    model: *const CornerlabModel,
    dim: *mut usize,
    orbitals: *mut usize,
) -> CornerlabStatus {
    guard(|| {
        let m = &model_arg(model, "model")?.model;
        if !dim.is_null() {
            dim.write(m.dim());
        }
        if !orbitals.is_null() {
            orbitals.write(m.orbitals());
        }
        Ok(())
    })
}

/// Altland-Zirnbauer class of a model. The string is static.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cornerlab_model_class(model: *const CornerlabModel, out: *mut *const c_char) -> CornerlabStatus {
    guard(|| {
        let class = model_arg(model, "model")?.class()?.class;
        put(out, class_cstr(class).as_ptr(), "out")
    })
}

/// Product Hamiltonian of two models, in the first form whose class the
/// search settles on.
///
/// # Safety
/// `a`, `b` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cornerlab_product(
    a: *const CornerlabModel,
    b: *const CornerlabModel,
    out: *mut *mut CornerlabModel,
) -> CornerlabStatus {
    guard(|| {
        let p = models::product_hamiltonian(model_arg(a, "a")?, model_arg(b, "b")?)?;
        put(out, boxed(p.spec), "out")
    })
}

/// Corner invariant on the orthant window of side `l` with the default
/// thresholds.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cornerlab_corner_invariant(
    model: *const CornerlabModel,
    k: usize,
    l: i64,
    out: *mut CornerlabInvariant,
) -> CornerlabStatus {
    guard(|| {
        let r = corner_invariant(model_arg(model, "model")?, &CornerQuery::new(k, l))?;
        let group = match r.value.group {
            GroupTag::Z => CornerlabGroup::Z,
            GroupTag::Z2 => CornerlabGroup::Z2,
            GroupTag::TwoZ => CornerlabGroup::TwoZ,
        };
        let inv = CornerlabInvariant { value: r.value.value, group, n: r.n, k: r.k, l: r.l, face_gap: r.face_gap };
        put(out, inv, "out")
    })
}

/// Strong corner invariant group, e.g. `Z2` or `0`. Release the result with
/// `cornerlab_string_free`.
///
/// # Safety
/// `class` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cornerlab_strong_group(
    class: *const c_char,
    n: usize,
    k: usize,
    out: *mut *mut c_char,
) -> CornerlabStatus {
    guard(|| {
        let class: AzClass = str_arg(class, "class")?.parse()?;
        let g = strong_group_lookup(class, n, k)?;
        put(out, owned_string(g.to_string()), "out")
    })
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cornerlab_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
