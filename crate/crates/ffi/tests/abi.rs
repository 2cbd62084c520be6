use std::ffi::{c_void, CStr, CString};
use std::ptr;

use faber_ffi::*;

extern "C" fn product(x: *const f64, dim: usize, user_data: *mut c_void) -> f64 {
    let calls = unsafe { &mut *(user_data as *mut u64) };
    *calls += 1;
    let x = unsafe { std::slice::from_raw_parts(x, dim) };
    x.iter().map(|v| 1.0 + v).product()
}

extern "C" fn nan_at_half(x: *const f64, dim: usize, _: *mut c_void) -> f64 {
    let x = unsafe { std::slice::from_raw_parts(x, dim) };
    if x[0] == 0.5 {
        f64::NAN
    } else {
        x[0]
    }
}

fn last_error() -> String {
    let p = faber_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn analyze_product(dim: usize, n: u32) -> (*mut FaberSeriesHandle, u64) {
    let mut calls = 0u64;
    let mut h = ptr::null_mut();
    let status = unsafe {
        faber_analyze(
            dim,
            n,
            Some(product),
            &mut calls as *mut u64 as *mut c_void,
            &mut h,
        )
    };
    assert_eq!(status, FaberStatus::Ok);
    (h, calls)
}

#[test]
fn analyze_evaluate_integrate() {
    let (h, calls) = analyze_product(2, 3);
    assert!(calls >= 113);
    let mut v = 0.0;
    let x = [0.25, 0.8];
    assert_eq!(
        unsafe { faber_series_evaluate(h, x.as_ptr(), 2, &mut v) },
        FaberStatus::Ok
    );
    assert!((v - 1.25 * 1.8).abs() < 1e-14);
    let mut integral = 0.0;
    assert_eq!(
        unsafe { faber_series_integrate(h, &mut integral) },
        FaberStatus::Ok
    );
    assert!((integral - 2.25).abs() < 1e-14);

    let (mut dim, mut budget, mut count) = (0usize, 0u32, 0usize);
    assert_eq!(
        unsafe { faber_series_shape(h, &mut dim, &mut budget, &mut count) },
        FaberStatus::Ok
    );
    assert_eq!((dim, budget), (2, 3));
    assert!(count >= 113);

    let mut c = 0.0;
    let (j, k) = ([-1i32, -1], [1u64, 1]);
    assert_eq!(
        unsafe { faber_series_coefficient(h, j.as_ptr(), k.as_ptr(), 2, &mut c) },
        FaberStatus::Ok
    );
    assert_eq!(c, 4.0);

    let mut norm = 0.0;
    assert_eq!(
        unsafe { faber_series_seq_norm(h, 0.5, 2.0, f64::INFINITY, &mut norm) },
        FaberStatus::Ok
    );
    assert!(norm > 0.0);
    unsafe { faber_series_free(h) };
}

#[test]
fn text_round_trip() {
    let (h, _) = analyze_product(1, 4);
    let mut text = ptr::null_mut();
    assert_eq!(
        unsafe { faber_series_to_text(h, &mut text) },
        FaberStatus::Ok
    );
    let mut back = ptr::null_mut();
    assert_eq!(
        unsafe { faber_series_from_text(text, &mut back) },
        FaberStatus::Ok
    );
    let mut again = ptr::null_mut();
    assert_eq!(
        unsafe { faber_series_to_text(back, &mut again) },
        FaberStatus::Ok
    );
    assert_eq!(unsafe { CStr::from_ptr(text) }, unsafe {
        CStr::from_ptr(again)
    });
    unsafe {
        faber_string_free(text);
        faber_string_free(again);
        faber_series_free(h);
        faber_series_free(back);
    }
}

#[test]
fn error_codes_and_messages() {
    let mut h = ptr::null_mut();
    assert_eq!(
        unsafe { faber_analyze(1, 3, Some(nan_at_half), ptr::null_mut(), &mut h) },
        FaberStatus::ComputationError
    );
    assert!(h.is_null());
    assert!(last_error().contains("0.5"));

    assert_eq!(
        unsafe { faber_analyze(1, 3, None, ptr::null_mut(), &mut h) },
        FaberStatus::NullPointer
    );
    assert_eq!(
        unsafe { faber_analyze(0, 3, Some(product), ptr::null_mut(), &mut h) },
        FaberStatus::InvalidArgument
    );

    let bad = CString::new("dim 1 budget 1\n0 0 oops\n").unwrap();
    assert_eq!(
        unsafe { faber_series_from_text(bad.as_ptr(), &mut h) },
        FaberStatus::ParseError
    );
    assert!(!last_error().is_empty());

    let mut v = 0.0;
    assert_eq!(
        unsafe { faber_series_integrate(ptr::null(), &mut v) },
        FaberStatus::NullPointer
    );

    let (h, _) = analyze_product(1, 2);
    let outside = [1.5];
    assert_eq!(
        unsafe { faber_series_evaluate(h, outside.as_ptr(), 1, &mut v) },
        FaberStatus::InvalidArgument
    );
    assert_eq!(
        unsafe { faber_series_seq_norm(h, 0.5, 0.5, 1.0, &mut v) },
        FaberStatus::InvalidArgument
    );
    unsafe { faber_series_free(h) };

    // a successful call clears the message
    let mut m = 0u64;
    assert_eq!(unsafe { faber_node_count(3, 2, &mut m) }, FaberStatus::Ok);
    assert!(faber_last_error().is_null());
}

#[test]
fn node_counts() {
    let mut m = 0u64;
    for n in 0..=8u32 {
        assert_eq!(unsafe { faber_node_count(n, 1, &mut m) }, FaberStatus::Ok);
        assert_eq!(m, (1u64 << (n + 1)) + 1);
    }
    assert_eq!(unsafe { faber_node_count(4, 3, &mut m) }, FaberStatus::Ok);
    assert_eq!(m, 1505);
}

#[test]
fn header_declares_every_export() {
    let header =
        std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/faber.h")).unwrap();
    for name in [
        "faber_last_error",
        "faber_analyze",
        "faber_series_free",
        "faber_series_evaluate",
        "faber_series_integrate",
        "faber_series_shape",
        "faber_series_coefficient",
        "faber_series_seq_norm",
        "faber_series_to_text",
        "faber_series_from_text",
        "faber_string_free",
        "faber_node_count",
        "FABER_STATUS_OK",
        "typedef struct FaberSeriesHandle FaberSeriesHandle",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}

#[test]
fn c_program_links_against_the_shared_library() {
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let manifest = std::path::Path::new(env!("CARGO_MANIFEST_DIR"));
    // target/<profile>/deps/abi-* -> target/<profile>
    let lib_dir = std::env::current_exe()
        .unwrap()
        .parent()
        .unwrap()
        .parent()
        .unwrap()
        .to_path_buf();
    if !lib_dir.join("libfaber_ffi.so").exists() {
        eprintln!("shared library not built on this platform; skipping");
        return;
    }
    let out_dir = tempfile_dir();
    let exe = out_dir.join("smoke");
    let status = std::process::Command::new(cc)
        .arg(manifest.join("examples/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg("-L")
        .arg(&lib_dir)
        .args(["-lfaber_ffi", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let output = std::process::Command::new(&exe)
        .env("LD_LIBRARY_PATH", &lib_dir)
        .output()
        .unwrap();
    assert!(
        output.status.success(),
        "{}",
        String::from_utf8_lossy(&output.stderr)
    );
    assert!(String::from_utf8_lossy(&output.stdout).contains("nodes 1281"));
}

fn which_cc() -> Result<&'static str, ()> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| {
            std::process::Command::new(c)
                .arg("--version")
                .output()
                .is_ok()
        })
        .ok_or(())
}

fn tempfile_dir() -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("faber-ffi-smoke-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
