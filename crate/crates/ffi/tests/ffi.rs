use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use momentkit_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

unsafe fn take(s: *mut std::ffi::c_char) -> String {
    assert!(!s.is_null());
    let out = CStr::from_ptr(s).to_str().unwrap().to_owned();
    mk_string_free(s);
    out
}

unsafe fn last_error() -> String {
    let p = mk_last_error_message();
    assert!(!p.is_null());
    CStr::from_ptr(p).to_string_lossy().into_owned()
}

const WORKED: &str = "ring x, y; order 1; bracket {x,y} = 1; alpha y = x;\n\
                      point p = (x = 1, y = 2, s = 1, t = 0);\n\
                      conformal euler: x -> x, y -> y; weight -2;";

#[test]
fn parse_render_and_free() {
    unsafe {
        let mut m = ptr::null_mut();
        assert_eq!(mk_model_parse(c(WORKED).as_ptr(), &mut m), MkStatus::MkOk);
        let mut out = ptr::null_mut();
        assert_eq!(mk_model_render(m, &mut out), MkStatus::MkOk);
        let text = take(out);
        assert!(text.contains("alpha y = x;"));
        let mut again = ptr::null_mut();
        assert_eq!(mk_model_parse(c(&text).as_ptr(), &mut again), MkStatus::MkOk);
        mk_model_free(again);
        mk_model_free(m);
        mk_model_free(ptr::null_mut());
        mk_string_free(ptr::null_mut());
    }
}

#[test]
fn parse_errors_carry_locations() {
    unsafe {
        let mut m = ptr::null_mut();
        let st = mk_model_parse(c("ring x, y; order 1;\nbracket {x,y} = z;").as_ptr(), &mut m);
        assert_eq!(st, MkStatus::MkParseError);
        assert!(m.is_null());
        assert_eq!(last_error(), "2:17: undeclared generator z");
    }
}

#[test]
fn commands_return_json_reports() {
    unsafe {
        let mut m = ptr::null_mut();
        assert_eq!(mk_model_parse(c(WORKED).as_ptr(), &mut m), MkStatus::MkOk);
        let mut out = ptr::null_mut();

        assert_eq!(mk_verify(m, &mut out), MkStatus::MkOk);
        assert!(take(out).contains("\"schema\": 1"));
        assert_eq!(mk_trivialize(m, &mut out), MkStatus::MkOk);
        assert!(take(out).contains("\"y\": \"y - t*x\""));
        assert_eq!(mk_tot_bracket(m, c("t").as_ptr(), c("x*s^2").as_ptr(), &mut out), MkStatus::MkOk);
        assert!(take(out).contains("\"bracket\": \"2*x*s^2\""));
        assert_eq!(mk_rank(m, c("p").as_ptr(), MkSpace::MkSpaceTot, &mut out), MkStatus::MkOk);
        assert!(take(out).contains("\"rank\": 4"));
        assert_eq!(mk_conformal(m, &mut out), MkStatus::MkOk);
        assert!(take(out).contains("\"mu\": \"2\""));

        assert_eq!(mk_rank(m, c("nowhere").as_ptr(), MkSpace::MkSpaceBase, &mut out), MkStatus::MkInvalidArgument);
        assert!(last_error().contains("unknown point"));
        assert_eq!(mk_tot_bracket(m, c("x*").as_ptr(), c("s").as_ptr(), &mut out), MkStatus::MkParseError);
        mk_model_free(m);
    }
}

#[test]
fn verification_failures_still_report() {
    unsafe {
        let mut m = ptr::null_mut();
        let text = c("ring x, y; order 1; bracket {x,y} = 1; alpha y = y;");
        assert_eq!(mk_model_parse(text.as_ptr(), &mut m), MkStatus::MkOk);
        let mut out = ptr::null_mut();
        assert_eq!(mk_verify(m, &mut out), MkStatus::MkVerifyFailed);
        assert!(take(out).contains("\"passed\": false"));
        mk_model_free(m);
    }
}

#[test]
fn null_arguments_rejected() {
    unsafe {
        let mut out = ptr::null_mut();
        assert_eq!(mk_verify(ptr::null(), &mut out), MkStatus::MkInvalidArgument);
        assert_eq!(mk_model_parse(ptr::null(), ptr::null_mut()), MkStatus::MkInvalidArgument);
        let mut m = ptr::null_mut();
        assert_eq!(mk_generate(3, &mut m), MkStatus::MkOk);
        assert_eq!(mk_verify(m, ptr::null_mut()), MkStatus::MkInvalidArgument);
        mk_model_free(m);
    }
}

#[test]
fn generate_and_roundtrip_are_deterministic() {
    unsafe {
        let render = |seed| {
            let mut m = ptr::null_mut();
            assert_eq!(mk_generate(seed, &mut m), MkStatus::MkOk);
            let mut out = ptr::null_mut();
            assert_eq!(mk_model_render(m, &mut out), MkStatus::MkOk);
            mk_model_free(m);
            take(out)
        };
        assert_eq!(render(21), render(21));
        let mut a = ptr::null_mut();
        let mut b = ptr::null_mut();
        assert_eq!(mk_roundtrip(15, 4, &mut a), MkStatus::MkOk);
        assert_eq!(mk_roundtrip(15, 4, &mut b), MkStatus::MkOk);
        assert_eq!(take(a), take(b));
    }
}

fn target_dir() -> PathBuf {
    // tests run from target/<profile>/deps
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_header() {
    let crate_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header_dir = crate_dir.join("include");
    let lib = target_dir().join("libmomentkit_ffi.a");
    assert!(header_dir.join("momentkit.h").exists());
    assert!(lib.exists(), "static library missing at {}", lib.display());
    let dir = tempfile_dir();
    let src = dir.join("smoke.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include <string.h>
#include "momentkit.h"

int main(void) {
    MkModel *m = NULL;
    if (mk_model_parse("ring x, y; order 1; bracket {x,y} = 1; alpha y = x;", &m) != MK_OK) return 10;
    char *report = NULL;
    if (mk_trivialize(m, &report) != MK_OK) return 11;
    int ok = strstr(report, "\"y\": \"y - t*x\"") != NULL;
    mk_string_free(report);
    mk_model_free(m);
    if (mk_model_parse("ring x; order 0;", &m) != MK_PARSE_ERROR) return 12;
    if (mk_last_error_message() == NULL) return 13;
    puts(ok ? "ok" : "bad");
    return ok ? 0 : 14;
}
"#,
    )
    .unwrap();
    let exe = dir.join("smoke");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(&header_dir)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("a C compiler is available");
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok");
    let _ = std::fs::remove_dir_all(&dir);
}

fn tempfile_dir() -> PathBuf {
    let d = std::env::temp_dir().join(format!("momentkit-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}
