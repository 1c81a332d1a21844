use std::ffi::{c_char, CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use approval_nash_ffi::*;
use serde_json::Value;

fn fixture(name: &str) -> CString {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name);
    CString::new(p.to_str().unwrap()).unwrap()
}

fn load(name: &str) -> *mut ApprovalInstance {
    let mut inst = ptr::null_mut();
    assert_eq!(unsafe { approval_instance_load(fixture(name).as_ptr(), &mut inst) }, ApprovalStatus::Ok);
    assert!(!inst.is_null());
    inst
}

// Takes ownership of a returned string.
fn take(s: *mut c_char) -> String {
    assert!(!s.is_null());
    let out = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_owned();
    unsafe { approval_string_free(s) };
    out
}

fn last_error() -> String {
    let p = approval_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned()
}

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

#[test]
fn lazy_equilibria_of_example_two() {
    let inst = load("ex2.txt");
    let (mut m, mut n, mut k) = (0, 0, 0);
    assert_eq!(unsafe { approval_instance_size(inst, &mut m, &mut n, &mut k) }, ApprovalStatus::Ok);
    assert_eq!((m, n, k), (4, 3, 2));

    let mut out = ptr::null_mut();
    let st = unsafe { approval_find_pne(inst, ptr::null(), ApprovalEquilibriumKind::Lazy as u32, true, &mut out) };
    assert_eq!(st, ApprovalStatus::Ok);
    let doc: Value = serde_json::from_str(&take(out)).unwrap();
    assert_eq!(doc["committees"], serde_json::json!(["{a,c}"]));
    assert_eq!(doc["kind"], "lazy");

    let st = unsafe { approval_find_pne(inst, ptr::null(), ApprovalEquilibriumKind::Sincere as u32, true, &mut out) };
    assert_eq!(st, ApprovalStatus::InvalidArgument);
    let st = unsafe { approval_find_pne(inst, ptr::null(), 7, false, &mut out) };
    assert_eq!(st, ApprovalStatus::InvalidArgument);
    assert!(last_error().contains("7"));
    unsafe { approval_instance_free(inst) };
}

#[test]
fn non_existence_is_an_empty_answer() {
    let inst = load("k1_cycle.txt");
    let mut out = ptr::null_mut();
    let st = unsafe { approval_find_pne(inst, ptr::null(), ApprovalEquilibriumKind::Lazy as u32, false, &mut out) };
    assert_eq!(st, ApprovalStatus::Ok);
    let doc: Value = serde_json::from_str(&take(out)).unwrap();
    assert_eq!(doc["committees"].as_array().unwrap().len(), 0);
    unsafe { approval_instance_free(inst) };
}

#[test]
fn elect_utility_and_best_response() {
    let inst = load("ex2.txt");
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { approval_elect(inst, ptr::null(), c(";;c").as_ptr(), &mut out) }, ApprovalStatus::Ok);
    let doc: Value = serde_json::from_str(&take(out)).unwrap();
    assert_eq!(doc["committee"], "{b,c}");
    assert_eq!(doc["counts"], serde_json::json!([0, 0, 1, 0]));

    let weights = c("1,1,1/3,1");
    assert_eq!(unsafe { approval_elect(inst, weights.as_ptr(), c(";;c").as_ptr(), &mut out) }, ApprovalStatus::Ok);
    let doc: Value = serde_json::from_str(&take(out)).unwrap();
    assert_eq!(doc["committee"], "{b,c}");

    assert_eq!(unsafe { approval_owa_utility(inst, 1, c("a,c").as_ptr(), &mut out) }, ApprovalStatus::Ok);
    assert_eq!(take(out), "6");

    let st = unsafe { approval_best_response(inst, ptr::null(), 0, c(";;").as_ptr(), usize::MAX, &mut out) };
    assert_eq!(st, ApprovalStatus::Ok);
    let doc: Value = serde_json::from_str(&take(out)).unwrap();
    assert_eq!(doc["mbr_size"], 0);
    assert_eq!(doc["achievable_utility"], "4");
    assert!(doc["restricted"].is_null());
    unsafe { approval_instance_free(inst) };
}

#[test]
fn constructions() {
    let mut inst = ptr::null_mut();
    let text = c("format approval-instance/1\nsize 2 3 1\ncandidates a b\npriority a b\n\
                  voter b a ; 1 2 ; 1\nvoter b a ; 1 2 ; 1\nvoter a b ; 2 1 ; 1\n");
    assert_eq!(unsafe { approval_instance_parse(text.as_ptr(), &mut inst) }, ApprovalStatus::Ok);
    let mut out = ptr::null_mut();
    let st = unsafe { approval_construct_pne(inst, ApprovalConstruction::Sincere as u32, true, ptr::null(), &mut out) };
    assert_eq!(st, ApprovalStatus::Ok);
    let doc: Value = serde_json::from_str(&take(out)).unwrap();
    assert_eq!(doc["outcome"], "certified");
    assert_eq!(doc["committee"], "{b}");

    let st = unsafe { approval_construct_pne(inst, ApprovalConstruction::Containment as u32, false, ptr::null(), &mut out) };
    assert_eq!(st, ApprovalStatus::Precondition, "|W*| = 2 > k = 1");
    unsafe { approval_instance_free(inst) };

    let ex1 = load("ex1.txt");
    let st =
        unsafe { approval_construct_pne(ex1, ApprovalConstruction::Containment as u32, false, c("b").as_ptr(), &mut out) };
    assert_eq!(st, ApprovalStatus::Ok);
    let doc: Value = serde_json::from_str(&take(out)).unwrap();
    assert_eq!((doc["outcome"].as_str(), doc["committee"].as_str()), (Some("certified"), Some("{b}")));
    let st =
        unsafe { approval_construct_pne(ex1, ApprovalConstruction::Containment as u32, false, c("a").as_ptr(), &mut out) };
    assert_eq!(st, ApprovalStatus::Precondition, "{{a}} does not contain W* = {{b}}");
    unsafe { approval_instance_free(ex1) };

    // k = 2: in {b,c} the non-ideal c is outranked by the excluded a
    let text = c("format approval-instance/1\nsize 3 2 2\ncandidates a b c\npriority a b c\n\
                  voter b a c ; 2 3 1 ; 1 0\nvoter b a c ; 2 3 1 ; 1 0\n");
    assert_eq!(unsafe { approval_instance_parse(text.as_ptr(), &mut inst) }, ApprovalStatus::Ok);
    let st = unsafe {
        approval_construct_pne(inst, ApprovalConstruction::Containment as u32, false, c("b,c").as_ptr(), &mut out)
    };
    assert_eq!(st, ApprovalStatus::Ok);
    let doc: Value = serde_json::from_str(&take(out)).unwrap();
    assert_eq!(doc["outcome"], "impossible");
    assert_eq!((doc["member"].as_str(), doc["excluded"].as_str()), (Some("c"), Some("a")));
    unsafe { approval_instance_free(inst) };
}

#[test]
fn error_codes() {
    let mut inst = ptr::null_mut();
    assert_eq!(unsafe { approval_instance_parse(ptr::null(), &mut inst) }, ApprovalStatus::NullPointer);
    assert_eq!(unsafe { approval_instance_parse(c("size 1").as_ptr(), ptr::null_mut()) }, ApprovalStatus::NullPointer);
    assert_eq!(unsafe { approval_instance_parse(c("size x\n").as_ptr(), &mut inst) }, ApprovalStatus::Parse);
    assert!(last_error().contains("line 1"));
    let bad_utf8 = [0xffu8, 0xfe, 0];
    assert_eq!(
        unsafe { approval_instance_parse(bad_utf8.as_ptr().cast(), &mut inst) },
        ApprovalStatus::InvalidUtf8
    );
    assert_eq!(unsafe { approval_instance_load(c("/nonexistent/x").as_ptr(), &mut inst) }, ApprovalStatus::Io);
    assert!(inst.is_null());

    let ex2 = load("ex2.txt");
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { approval_owa_utility(ex2, 9, c("a,b").as_ptr(), &mut out) }, ApprovalStatus::Contract);
    assert_eq!(unsafe { approval_elect(ex2, ptr::null(), c("z;;").as_ptr(), &mut out) }, ApprovalStatus::Contract);
    assert_eq!(unsafe { approval_elect(ex2, c("1,x").as_ptr(), c(";;").as_ptr(), &mut out) }, ApprovalStatus::Contract);
    assert!(out.is_null());
    assert_eq!(unsafe { approval_instance_size(ptr::null(), &mut 0, &mut 0, &mut 0) }, ApprovalStatus::NullPointer);
    unsafe {
        approval_instance_free(ex2);
        approval_instance_free(ptr::null_mut());
        approval_string_free(ptr::null_mut());
    }
}

#[test]
fn serialize_round_trips_through_parse() {
    let inst = load("constraining.txt");
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { approval_instance_serialize(inst, &mut out) }, ApprovalStatus::Ok);
    let text = take(out);
    let mut again = ptr::null_mut();
    assert_eq!(unsafe { approval_instance_parse(c(&text).as_ptr(), &mut again) }, ApprovalStatus::Ok);
    assert_eq!(unsafe { approval_instance_serialize(again, &mut out) }, ApprovalStatus::Ok);
    assert_eq!(take(out), text);
    unsafe {
        approval_instance_free(inst);
        approval_instance_free(again);
    }
    let v = unsafe { CStr::from_ptr(approval_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn generated_header_declares_the_api_and_compiles() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header = std::fs::read_to_string(dir.join("include/approval_nash.h")).unwrap();
    for name in [
        "approval_instance_parse",
        "approval_instance_load",
        "approval_instance_free",
        "approval_elect",
        "approval_owa_utility",
        "approval_best_response",
        "approval_find_pne",
        "approval_construct_pne",
        "approval_last_error",
        "approval_string_free",
        "typedef struct ApprovalInstance ApprovalInstance",
        "APPROVAL_STATUS_PRECONDITION = 4",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let obj = std::env::temp_dir().join(format!("approval_nash_smoke_{}.o", std::process::id()));
    let status = Command::new(&cc)
        .args(["-std=c11", "-Wall", "-Wextra", "-Werror", "-c"])
        .arg("-I")
        .arg(dir.join("include"))
        .arg(dir.join("tests/c/smoke.c"))
        .arg("-o")
        .arg(&obj)
        .status()
        .unwrap_or_else(|e| panic!("running {cc}: {e}"));
    let _ = std::fs::remove_file(&obj);
    assert!(status.success(), "C smoke program failed to compile against the header");
}
