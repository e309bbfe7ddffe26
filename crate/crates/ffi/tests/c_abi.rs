use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use mixbvp_ffi::*;

fn problem(name: &str, n: usize) -> *mut BvpProblem {
    let name = CString::new(name).unwrap();
    let mut p = ptr::null_mut();
    let status = unsafe { mixbvp_problem_new(name.as_ptr(), 0, 1.0, n, &mut p) };
    assert_eq!(status, BvpStatus::Ok);
    assert!(!p.is_null());
    p
}

fn last_error() -> String {
    let msg = mixbvp_last_error();
    assert!(!msg.is_null());
    unsafe { CStr::from_ptr(msg) }.to_string_lossy().into_owned()
}

#[test]
fn solve_and_copy_manufactured() {
    let p = problem("mms-bc3", 400);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { mixbvp_solve(p, &mut s) }, BvpStatus::Ok);
    let len = unsafe { mixbvp_solution_len(s) };
    assert_eq!(len, 401);
    let (mut t, mut u, mut du) = (vec![0.0; len], vec![0.0; len], vec![0.0; len]);
    let status = unsafe { mixbvp_solution_copy(s, t.as_mut_ptr(), u.as_mut_ptr(), du.as_mut_ptr(), len) };
    assert_eq!(status, BvpStatus::Ok);
    assert_eq!(t[len - 1], 1.0);
    for i in 0..len {
        let x = t[i];
        assert!((u[i] - (1.0 + x * x * (1.0 - x))).abs() < 1e-4);
    }
    let mut small = vec![0.0; 3];
    let status = unsafe { mixbvp_solution_copy(s, ptr::null_mut(), small.as_mut_ptr(), ptr::null_mut(), 3) };
    assert_eq!(status, BvpStatus::BufferTooSmall);

    let mut sum = BvpSolveSummary::default();
    assert_eq!(unsafe { mixbvp_solution_summary(s, &mut sum) }, BvpStatus::Ok);
    assert!(sum.converged && sum.residual <= 1e-4);

    let mut cert = BvpPositivity {
        verdict: BvpVerdict::Fails,
        meets_claim: false,
        min_value: 0.0,
        min_location: 0.0,
        margin_interior: 0.0,
    };
    assert_eq!(unsafe { mixbvp_solution_positivity(s, 1e-6, &mut cert) }, BvpStatus::Ok);
    assert_eq!(cert.verdict, BvpVerdict::PositiveClosed);
    assert!(cert.meets_claim);
    unsafe {
        mixbvp_solution_free(s);
        mixbvp_problem_free(p);
    }
}

#[test]
fn kernel_map_and_nagumo_bound() {
    let p = problem("logistic-bc1", 100);
    let mut h = 0.0;
    assert_eq!(unsafe { mixbvp_kernel_h(p, 1.0, &mut h) }, BvpStatus::Ok);
    assert!((h - 5.0 / 6.0).abs() < 1e-12);
    let mut m = 0.0;
    assert_eq!(unsafe { mixbvp_nagumo_bound(p, 0.5, &mut m) }, BvpStatus::Ok);
    assert!(m > 0.5);
    assert_eq!(unsafe { mixbvp_nagumo_bound(p, -1.0, &mut m) }, BvpStatus::InvalidArgument);
    assert!(last_error().contains("positive"));
    unsafe { mixbvp_problem_free(p) };
}

#[test]
fn degree_bookkeeping() {
    let p = problem("superlinear-bc3", 200);
    let mut d = BvpDegreeSummary::default();
    assert_eq!(unsafe { mixbvp_degree(p, 0.5, 2.0, 1.0, &mut d) }, BvpStatus::Ok);
    assert!(d.has_omega_r && d.has_omega_big_r && d.has_annulus);
    assert_eq!((d.deg_omega_r, d.deg_omega_big_r, d.deg_annulus), (1, 0, -1));
    assert!(d.theorem_applicable);
    unsafe { mixbvp_problem_free(p) };
}

#[test]
fn error_paths() {
    let mut p = ptr::null_mut();
    let bad = CString::new("nope-bc1").unwrap();
    assert_eq!(unsafe { mixbvp_problem_new(bad.as_ptr(), 0, 1.0, 100, &mut p) }, BvpStatus::UnknownProblem);
    assert!(p.is_null());
    assert!(last_error().contains("nope"));
    let good = CString::new("mms-bc1").unwrap();
    assert_eq!(unsafe { mixbvp_problem_new(good.as_ptr(), 0, 1.0, 1, &mut p) }, BvpStatus::InvalidArgument);
    assert_eq!(unsafe { mixbvp_problem_new(good.as_ptr(), 7, 1.0, 100, &mut p) }, BvpStatus::InvalidArgument);
    assert_eq!(unsafe { mixbvp_problem_new(ptr::null(), 0, 1.0, 100, &mut p) }, BvpStatus::NullPointer);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { mixbvp_solve(ptr::null(), &mut s) }, BvpStatus::NullPointer);
    assert_eq!(unsafe { mixbvp_solution_len(ptr::null()) }, 0);
    unsafe {
        mixbvp_problem_free(ptr::null_mut());
        mixbvp_solution_free(ptr::null_mut());
    }
}

#[test]
fn header_compiles_and_links_from_c() {
    let Ok(cc) = Command::new("cc").arg("--version").output() else {
        eprintln!("no C compiler; skipping");
        return;
    };
    assert!(cc.status.success());
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("libmixbvp_ffi.a");
    if !lib.exists() {
        eprintln!("static library not built at {}; skipping", lib.display());
        return;
    }
    let exe = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("mixbvp_smoke");
    let status = Command::new("cc")
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "smoke exit {:?}", out.status);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("401 "), "{text}");
}
