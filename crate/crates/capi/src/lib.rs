//! C ABI over the core library.
//!
//! Structures travel as opaque handles created by [`rk_structure_parse`] and
//! released by [`rk_structure_free`]. Every function returns an [`RkStatus`];
//! results go through out-parameters. Strings handed out by this library are
//! NUL-terminated, owned by the caller, and must be released with
//! [`rk_string_free`]. On any non-OK status, [`rk_last_error_message`]
//! returns a description valid until the next failing call on the same
//! thread.
//!
//! The generated header lives at `include/ramseykit.h`.

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use ramseykit::classes::parse_class_spec;
use ramseykit::{
    canonical_form, check_arrow, check_sap, count_embeddings, full_product, is_isomorphic,
    parse_structure, render_structure, ArrowInstance, ArrowVerdict, Error, PropertyCheck,
    Structure,
};

/// Status code of every C-API call.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum RkStatus {
    /// The call completed; out-parameters are valid.
    Ok = 0,
    /// A required pointer argument was NULL.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// Malformed textual input (structure, class spec, formula, map).
    ParseError = 3,
    /// An operation precondition was violated.
    Precondition = 4,
    /// An internal panic was caught; the handle states are unchanged.
    Internal = 5,
}

/// Opaque handle to a finite relational structure.
pub struct RkStructure {
    inner: Structure,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let sanitized: String = message.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).expect("NUL bytes removed");
    });
}

fn status_of(error: &Error) -> RkStatus {
    if error.is_input_format() {
        RkStatus::ParseError
    } else {
        RkStatus::Precondition
    }
}

fn fail(error: Error) -> RkStatus {
    let status = status_of(&error);
    set_error(&error.to_string());
    status
}

/// Runs a fallible body under a panic guard.
fn guarded(body: impl FnOnce() -> RkStatus) -> RkStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            RkStatus::Internal
        }
    }
}

unsafe fn str_arg<'a>(ptr: *const c_char) -> Result<&'a str, RkStatus> {
    if ptr.is_null() {
        set_error("NULL string argument");
        return Err(RkStatus::NullArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8");
        RkStatus::InvalidUtf8
    })
}

unsafe fn structure_arg<'a>(ptr: *const RkStructure) -> Result<&'a Structure, RkStatus> {
    if ptr.is_null() {
        set_error("NULL structure handle");
        return Err(RkStatus::NullArgument);
    }
    Ok(&(*ptr).inner)
}

fn give_string(text: String, out: *mut *mut c_char) -> RkStatus {
    let sanitized: String = text.chars().filter(|&c| c != '\0').collect();
    let cstring = CString::new(sanitized).expect("NUL bytes removed");
    unsafe {
        *out = cstring.into_raw();
    }
    RkStatus::Ok
}

/// A human-readable description of the most recent failure on this thread.
/// The pointer stays valid until the next failing call on the same thread;
/// do not free it.
#[no_mangle]
pub extern "C" fn rk_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Releases a string allocated by this library.
///
/// # Safety
/// `ptr` must come from a `char**` out-parameter of this library and must
/// not have been freed already. NULL is accepted and ignored.
#[no_mangle]
pub unsafe extern "C" fn rk_string_free(ptr: *mut c_char) {
    if !ptr.is_null() {
        drop(CString::from_raw(ptr));
    }
}

/// Parses a structure from its text format into a fresh handle.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rk_structure_parse(
    text: *const c_char,
    out: *mut *mut RkStructure,
) -> RkStatus {
    guarded(|| {
        if out.is_null() {
            set_error("NULL out-parameter");
            return RkStatus::NullArgument;
        }
        let text = match str_arg(text) {
            Ok(t) => t,
            Err(status) => return status,
        };
        match parse_structure(text) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(RkStructure { inner }));
                RkStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Releases a structure handle.
///
/// # Safety
/// `ptr` must come from this library and must not have been freed already.
/// NULL is accepted and ignored.
#[no_mangle]
pub unsafe extern "C" fn rk_structure_free(ptr: *mut RkStructure) {
    if !ptr.is_null() {
        drop(Box::from_raw(ptr));
    }
}

/// Deep-copies a structure handle.
///
/// # Safety
/// `s` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rk_structure_clone(
    s: *const RkStructure,
    out: *mut *mut RkStructure,
) -> RkStatus {
    guarded(|| {
        if out.is_null() {
            set_error("NULL out-parameter");
            return RkStatus::NullArgument;
        }
        let s = match structure_arg(s) {
            Ok(s) => s,
            Err(status) => return status,
        };
        *out = Box::into_raw(Box::new(RkStructure { inner: s.clone() }));
        RkStatus::Ok
    })
}

/// Renders a structure in the text format.
///
/// # Safety
/// `s` must be a live handle; `out` receives an owned string (release with
/// [`rk_string_free`]).
#[no_mangle]
pub unsafe extern "C" fn rk_structure_render(
    s: *const RkStructure,
    out: *mut *mut c_char,
) -> RkStatus {
    guarded(|| {
        if out.is_null() {
            set_error("NULL out-parameter");
            return RkStatus::NullArgument;
        }
        let s = match structure_arg(s) {
            Ok(s) => s,
            Err(status) => return status,
        };
        give_string(render_structure(s), out)
    })
}

/// The domain size of a structure.
///
/// # Safety
/// `s` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rk_structure_size(s: *const RkStructure, out: *mut usize) -> RkStatus {
    guarded(|| {
        if out.is_null() {
            set_error("NULL out-parameter");
            return RkStatus::NullArgument;
        }
        match structure_arg(s) {
            Ok(s) => {
                *out = s.size();
                RkStatus::Ok
            }
            Err(status) => status,
        }
    })
}

/// The canonical code of the structure's isomorphism type, as a hex string.
/// Equal strings mean isomorphic structures.
///
/// # Safety
/// `s` must be a live handle; `out` receives an owned string.
#[no_mangle]
pub unsafe extern "C" fn rk_canonical_code_hex(
    s: *const RkStructure,
    out: *mut *mut c_char,
) -> RkStatus {
    guarded(|| {
        if out.is_null() {
            set_error("NULL out-parameter");
            return RkStatus::NullArgument;
        }
        match structure_arg(s) {
            Ok(s) => give_string(canonical_form(s).to_hex(), out),
            Err(status) => status,
        }
    })
}

/// Whether two structures are isomorphic (1) or not (0).
///
/// # Safety
/// `a` and `b` must be live handles; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rk_isomorphic(
    a: *const RkStructure,
    b: *const RkStructure,
    out: *mut i32,
) -> RkStatus {
    guarded(|| {
        if out.is_null() {
            set_error("NULL out-parameter");
            return RkStatus::NullArgument;
        }
        let a = match structure_arg(a) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let b = match structure_arg(b) {
            Ok(s) => s,
            Err(status) => return status,
        };
        *out = is_isomorphic(a, b) as i32;
        RkStatus::Ok
    })
}

/// The number of embeddings of `a` into `c`.
///
/// # Safety
/// `a` and `c` must be live handles; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rk_embedding_count(
    a: *const RkStructure,
    c: *const RkStructure,
    out: *mut usize,
) -> RkStatus {
    guarded(|| {
        if out.is_null() {
            set_error("NULL out-parameter");
            return RkStatus::NullArgument;
        }
        let a = match structure_arg(a) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let c = match structure_arg(c) {
            Ok(s) => s,
            Err(status) => return status,
        };
        match count_embeddings(a, c) {
            Ok(n) => {
                *out = n;
                RkStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Decides the partition arrow C → (B)^A_r. `verdict_out` receives 1 when
/// the arrow holds and 0 otherwise; on 0, `certificate_out` (when non-NULL)
/// receives the bad coloring as comma-separated colors in embedding order
/// (release with [`rk_string_free`]); on 1 it receives NULL.
///
/// # Safety
/// `a`, `b`, `c` must be live handles; `verdict_out` must be valid;
/// `certificate_out` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn rk_check_arrow(
    a: *const RkStructure,
    b: *const RkStructure,
    c: *const RkStructure,
    colors: u32,
    verdict_out: *mut i32,
    certificate_out: *mut *mut c_char,
) -> RkStatus {
    guarded(|| {
        if verdict_out.is_null() {
            set_error("NULL out-parameter");
            return RkStatus::NullArgument;
        }
        let a = match structure_arg(a) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let b = match structure_arg(b) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let c = match structure_arg(c) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let instance = match ArrowInstance::new(a.clone(), b.clone(), c.clone(), colors) {
            Ok(i) => i,
            Err(e) => return fail(e),
        };
        match check_arrow(&instance) {
            Ok(certificate) => {
                match certificate.verdict {
                    ArrowVerdict::Holds { .. } => {
                        *verdict_out = 1;
                        if !certificate_out.is_null() {
                            *certificate_out = std::ptr::null_mut();
                        }
                    }
                    ArrowVerdict::Fails { coloring } => {
                        *verdict_out = 0;
                        if !certificate_out.is_null() {
                            let csv: Vec<String> =
                                coloring.iter().map(u32::to_string).collect();
                            let status = give_string(csv.join(","), certificate_out);
                            if status != RkStatus::Ok {
                                return status;
                            }
                        }
                    }
                }
                RkStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Membership of a structure in a class given by the class-spec DSL
/// (`LO`, `G`, `T`, `F(3)`, `PLE`, `perm`, `wedge(…)`, `rename(…)`,
/// `forget(…)`). `out` receives 1 or 0.
///
/// # Safety
/// `spec` must be NUL-terminated; `s` must be a live handle; `out` must be
/// a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rk_class_membership(
    spec: *const c_char,
    s: *const RkStructure,
    out: *mut i32,
) -> RkStatus {
    guarded(|| {
        if out.is_null() {
            set_error("NULL out-parameter");
            return RkStatus::NullArgument;
        }
        let spec = match str_arg(spec) {
            Ok(t) => t,
            Err(status) => return status,
        };
        let s = match structure_arg(s) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let class = match parse_class_spec(spec) {
            Ok(c) => c,
            Err(e) => return fail(e),
        };
        match class.membership(s) {
            Ok(member) => {
                *out = member as i32;
                RkStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// The number of members of the class at the given size, one per
/// isomorphism class.
///
/// # Safety
/// `spec` must be NUL-terminated; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rk_member_count(
    spec: *const c_char,
    size: usize,
    out: *mut usize,
) -> RkStatus {
    guarded(|| {
        if out.is_null() {
            set_error("NULL out-parameter");
            return RkStatus::NullArgument;
        }
        let spec = match str_arg(spec) {
            Ok(t) => t,
            Err(status) => return status,
        };
        let class = match parse_class_spec(spec) {
            Ok(c) => c,
            Err(e) => return fail(e),
        };
        *out = class.enumerate_members(size).len();
        RkStatus::Ok
    })
}

/// Bounded strong-amalgamation check for a class. `out` receives 1 when
/// every diagram up to the bound has a strong amalgam, 0 otherwise.
///
/// # Safety
/// `spec` must be NUL-terminated; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rk_check_sap(
    spec: *const c_char,
    max_size: usize,
    out: *mut i32,
) -> RkStatus {
    guarded(|| {
        if out.is_null() {
            set_error("NULL out-parameter");
            return RkStatus::NullArgument;
        }
        let spec = match str_arg(spec) {
            Ok(t) => t,
            Err(status) => return status,
        };
        let class = match parse_class_spec(spec) {
            Ok(c) => c,
            Err(e) => return fail(e),
        };
        match check_sap(&class, max_size) {
            Ok(PropertyCheck::Ok) => {
                *out = 1;
                RkStatus::Ok
            }
            Ok(PropertyCheck::Counterexample(_)) => {
                *out = 0;
                RkStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// The full product of two structures with disjoint signatures, as a fresh
/// handle.
///
/// # Safety
/// `left` and `right` must be live handles; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rk_full_product(
    left: *const RkStructure,
    right: *const RkStructure,
    out: *mut *mut RkStructure,
) -> RkStatus {
    guarded(|| {
        if out.is_null() {
            set_error("NULL out-parameter");
            return RkStatus::NullArgument;
        }
        let left = match structure_arg(left) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let right = match structure_arg(right) {
            Ok(s) => s,
            Err(status) => return status,
        };
        match full_product(left, right) {
            Ok(product) => {
                *out = Box::into_raw(Box::new(RkStructure {
                    inner: product.into_structure(),
                }));
                RkStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// The reduct of a structure to a comma-separated list of symbol names, as
/// a fresh handle.
///
/// # Safety
/// `s` must be a live handle; `keep` must be NUL-terminated; `out` must be
/// a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rk_reduct(
    s: *const RkStructure,
    keep: *const c_char,
    out: *mut *mut RkStructure,
) -> RkStatus {
    guarded(|| {
        if out.is_null() {
            set_error("NULL out-parameter");
            return RkStatus::NullArgument;
        }
        let s = match structure_arg(s) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let keep = match str_arg(keep) {
            Ok(t) => t,
            Err(status) => return status,
        };
        let names: BTreeSet<String> = keep
            .split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(String::from)
            .collect();
        match s.reduct(&names) {
            Ok(reduced) => {
                *out = Box::into_raw(Box::new(RkStructure { inner: reduced }));
                RkStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}
