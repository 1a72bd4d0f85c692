//! Exercises the C ABI from Rust: handle lifecycle, status codes, and the
//! stringly surfaces.

use std::ffi::{c_char, CStr, CString};
use std::ptr;

use ramseykit_capi::*;

fn parse(text: &str) -> *mut RkStructure {
    let ctext = CString::new(text).unwrap();
    let mut handle: *mut RkStructure = ptr::null_mut();
    let status = unsafe { rk_structure_parse(ctext.as_ptr(), &mut handle) };
    assert_eq!(status, RkStatus::Ok);
    assert!(!handle.is_null());
    handle
}

fn take_string(ptr: *mut c_char) -> String {
    assert!(!ptr.is_null());
    let out = unsafe { CStr::from_ptr(ptr) }.to_str().unwrap().to_string();
    unsafe { rk_string_free(ptr) };
    out
}

fn chain_text(n: usize) -> String {
    let mut tuples = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            tuples.push(format!("{i} {j}"));
        }
    }
    if tuples.is_empty() {
        format!("signature: </2\nsize: {n}\n")
    } else {
        format!("signature: </2\nsize: {n}\n<: {}\n", tuples.join("; "))
    }
}

#[test]
fn parse_render_round_trip() {
    let text = "signature: E/2\nsize: 3\nE: 0 1; 1 0\n";
    let handle = parse(text);
    let mut size = 0usize;
    assert_eq!(unsafe { rk_structure_size(handle, &mut size) }, RkStatus::Ok);
    assert_eq!(size, 3);

    let mut rendered: *mut c_char = ptr::null_mut();
    assert_eq!(
        unsafe { rk_structure_render(handle, &mut rendered) },
        RkStatus::Ok
    );
    assert_eq!(take_string(rendered), text);
    unsafe { rk_structure_free(handle) };
}

#[test]
fn parse_errors_set_the_message() {
    let bad = CString::new("signature: E/2\nsize: 2\nE: 0 9\n").unwrap();
    let mut handle: *mut RkStructure = ptr::null_mut();
    let status = unsafe { rk_structure_parse(bad.as_ptr(), &mut handle) };
    assert_eq!(status, RkStatus::ParseError);
    assert!(handle.is_null());
    let message = unsafe { CStr::from_ptr(rk_last_error_message()) }
        .to_str()
        .unwrap();
    assert!(message.contains("line 3"), "got {message:?}");
}

#[test]
fn null_arguments_are_rejected() {
    let mut handle: *mut RkStructure = ptr::null_mut();
    assert_eq!(
        unsafe { rk_structure_parse(ptr::null(), &mut handle) },
        RkStatus::NullArgument
    );
    let mut size = 0usize;
    assert_eq!(
        unsafe { rk_structure_size(ptr::null(), &mut size) },
        RkStatus::NullArgument
    );
    unsafe {
        rk_structure_free(ptr::null_mut());
        rk_string_free(ptr::null_mut());
    }
}

#[test]
fn embedding_counts_and_isomorphism() {
    let chain2 = parse(&chain_text(2));
    let chain4 = parse(&chain_text(4));
    let mut count = 0usize;
    assert_eq!(
        unsafe { rk_embedding_count(chain2, chain4, &mut count) },
        RkStatus::Ok
    );
    assert_eq!(count, 6);

    let relabeled = parse("signature: </2\nsize: 2\n<: 0 1\n");
    let mut iso = 0i32;
    assert_eq!(
        unsafe { rk_isomorphic(chain2, relabeled, &mut iso) },
        RkStatus::Ok
    );
    assert_eq!(iso, 1);

    let mut code_a: *mut c_char = ptr::null_mut();
    let mut code_b: *mut c_char = ptr::null_mut();
    unsafe {
        assert_eq!(rk_canonical_code_hex(chain2, &mut code_a), RkStatus::Ok);
        assert_eq!(rk_canonical_code_hex(relabeled, &mut code_b), RkStatus::Ok);
    }
    assert_eq!(take_string(code_a), take_string(code_b));

    unsafe {
        rk_structure_free(chain2);
        rk_structure_free(chain4);
        rk_structure_free(relabeled);
    }
}

#[test]
fn arrow_verdicts_and_certificates() {
    let a = parse(&chain_text(2));
    let b = parse(&chain_text(3));
    let c6 = parse(&chain_text(6));
    let c5 = parse(&chain_text(5));

    let mut verdict = -1i32;
    let mut certificate: *mut c_char = ptr::null_mut();
    assert_eq!(
        unsafe { rk_check_arrow(a, b, c6, 2, &mut verdict, &mut certificate) },
        RkStatus::Ok
    );
    assert_eq!(verdict, 1);
    assert!(certificate.is_null());

    assert_eq!(
        unsafe { rk_check_arrow(a, b, c5, 2, &mut verdict, &mut certificate) },
        RkStatus::Ok
    );
    assert_eq!(verdict, 0);
    let coloring = take_string(certificate);
    assert_eq!(coloring.split(',').count(), 10);

    // signature mismatch is a precondition violation
    let graph = parse("signature: E/2\nsize: 2\nE: 0 1; 1 0\n");
    assert_eq!(
        unsafe { rk_check_arrow(a, b, graph, 2, &mut verdict, ptr::null_mut()) },
        RkStatus::Precondition
    );

    unsafe {
        rk_structure_free(a);
        rk_structure_free(b);
        rk_structure_free(c6);
        rk_structure_free(c5);
        rk_structure_free(graph);
    }
}

#[test]
fn class_membership_and_sap() {
    let chain3 = parse(&chain_text(3));
    let spec = CString::new("LO").unwrap();
    let mut member = 0i32;
    assert_eq!(
        unsafe { rk_class_membership(spec.as_ptr(), chain3, &mut member) },
        RkStatus::Ok
    );
    assert_eq!(member, 1);

    let bad_spec = CString::new("wedge(G,G)").unwrap();
    assert_eq!(
        unsafe { rk_class_membership(bad_spec.as_ptr(), chain3, &mut member) },
        RkStatus::ParseError
    );

    let mut sap = 0i32;
    assert_eq!(
        unsafe { rk_check_sap(spec.as_ptr(), 3, &mut sap) },
        RkStatus::Ok
    );
    assert_eq!(sap, 1);

    let graphs = CString::new("G").unwrap();
    let mut count = 0usize;
    assert_eq!(
        unsafe { rk_member_count(graphs.as_ptr(), 3, &mut count) },
        RkStatus::Ok
    );
    assert_eq!(count, 4);

    unsafe { rk_structure_free(chain3) };
}

#[test]
fn product_and_reduct_handles() {
    let chain = parse(&chain_text(2));
    let graph = parse("signature: E/2\nsize: 2\nE: 0 1; 1 0\n");
    let mut product: *mut RkStructure = ptr::null_mut();
    assert_eq!(
        unsafe { rk_full_product(chain, graph, &mut product) },
        RkStatus::Ok
    );
    let mut size = 0usize;
    assert_eq!(unsafe { rk_structure_size(product, &mut size) }, RkStatus::Ok);
    assert_eq!(size, 4);

    let keep = CString::new("E").unwrap();
    let mut reduced: *mut RkStructure = ptr::null_mut();
    assert_eq!(
        unsafe { rk_reduct(product, keep.as_ptr(), &mut reduced) },
        RkStatus::Ok
    );
    let mut rendered: *mut c_char = ptr::null_mut();
    assert_eq!(
        unsafe { rk_structure_render(reduced, &mut rendered) },
        RkStatus::Ok
    );
    assert!(take_string(rendered).starts_with("signature: E/2"));

    let missing = CString::new("nope").unwrap();
    let mut fail_out: *mut RkStructure = ptr::null_mut();
    assert_eq!(
        unsafe { rk_reduct(product, missing.as_ptr(), &mut fail_out) },
        RkStatus::Precondition
    );

    unsafe {
        rk_structure_free(chain);
        rk_structure_free(graph);
        rk_structure_free(product);
        rk_structure_free(reduced);
    }
}

#[test]
fn clone_is_independent() {
    let original = parse(&chain_text(3));
    let mut copy: *mut RkStructure = ptr::null_mut();
    assert_eq!(
        unsafe { rk_structure_clone(original, &mut copy) },
        RkStatus::Ok
    );
    unsafe { rk_structure_free(original) };
    // the copy still works after the original is gone
    let mut size = 0usize;
    assert_eq!(unsafe { rk_structure_size(copy, &mut size) }, RkStatus::Ok);
    assert_eq!(size, 3);
    unsafe { rk_structure_free(copy) };
}
