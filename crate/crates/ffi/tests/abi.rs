use std::ffi::{CStr, CString};
use std::ptr;

use subseries_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(ss_last_error_message()) }.to_string_lossy().into_owned()
}

#[test]
fn scalar_functions_match_closed_forms() {
    let mut v = 0.0;
    unsafe {
        assert_eq!(ss_phi(1.0, &mut v), SsStatus::Ok);
        assert!((v - (std::f64::consts::E - 1.0)).abs() < 1e-12);
        assert_eq!(ss_phi_inv(v, &mut v), SsStatus::Ok);
        assert!((v - 1.0).abs() < 1e-12);
        assert_eq!(ss_tail_bound_nd(2.0, 1.0, &mut v), SsStatus::Ok);
        assert!((v - 2.0 * (-1.0_f64).exp()).abs() < 1e-12);
        assert_eq!(ss_tail_bound_cs(2.0, 1.0, &mut v), SsStatus::Ok);
        assert!((v - 2.0 * (-2.0_f64).exp()).abs() < 1e-12);
        assert_eq!(ss_decoupling_ar1(0.5, &mut v), SsStatus::Ok);
        assert!((v - 2.0).abs() < 1e-12);
    }
}

#[test]
fn constant_routes_agree() {
    let (mut a, mut b, mut u) = (0.0, 0.0, 0.0);
    unsafe {
        assert_eq!(ss_constant_c(0.5, &mut a), SsStatus::Ok);
        assert_eq!(ss_constant_c_quadrature(0.5, &mut b), SsStatus::Ok);
        assert_eq!(ss_constant_c_upper(0.5, &mut u), SsStatus::Ok);
    }
    assert!((a - b).abs() < 1e-8);
    assert!(a <= u);
}

#[test]
fn errors_set_status_and_message() {
    let mut v = 0.0;
    unsafe {
        assert_eq!(ss_phi_inv(-1.0, &mut v), SsStatus::Domain);
        assert!(last_error().contains("domain"));
        assert_eq!(ss_phi(1.0, ptr::null_mut()), SsStatus::NullPointer);
        assert_eq!(ss_orlicz_norm(ptr::null(), 3, 1e-9, &mut v), SsStatus::NullPointer);
        assert_eq!(ss_orlicz_norm([1.0, f64::NAN].as_ptr(), 2, 1e-9, &mut v), SsStatus::Domain);
    }
}

#[test]
fn orlicz_and_tau_of_constant_batch() {
    let ones = [1.0; 8];
    let (mut norm, mut tau) = (0.0, 0.0);
    unsafe {
        assert_eq!(ss_orlicz_norm(ones.as_ptr(), ones.len(), 1e-12, &mut norm), SsStatus::Ok);
        assert_eq!(ss_tau_empirical([0.0; 4].as_ptr(), 4, &mut tau), SsStatus::Ok);
    }
    assert!((norm - 1.0 / 2f64.ln().sqrt()).abs() < 1e-6);
    assert_eq!(tau, 0.0);
}

#[test]
fn metric_handle_lifecycle() {
    let w = [1.0, 1.0, 1.0, 1.0];
    let mut m: *mut SsMetric = ptr::null_mut();
    unsafe {
        assert_eq!(ss_metric_new(w.as_ptr(), w.len(), 1.0, &mut m), SsStatus::Ok);
        assert!(!m.is_null());
        let mut d = 0.0;
        assert_eq!(ss_metric_eval(m, 0, 3, &mut d), SsStatus::Ok);
        assert!((d - 3.0).abs() < 1e-12);
        let mut count = 0usize;
        assert_eq!(ss_metric_covering(m, 1.5, 4, &mut count), SsStatus::Ok);
        assert_eq!(count, 2);
        let mut integral = 0.0;
        assert_eq!(ss_metric_dudley(m, 4, &mut integral), SsStatus::Ok);
        assert!(integral.is_finite() && integral > 0.0);
        ss_metric_free(m);
        ss_metric_free(ptr::null_mut());

        assert_eq!(ss_metric_new(w.as_ptr(), w.len(), 0.0, &mut m), SsStatus::Domain);
        assert_eq!(ss_metric_eval(ptr::null(), 0, 1, &mut d), SsStatus::NullPointer);
    }
}

#[test]
fn suite_handle_runs_json_checks() {
    let checks = CString::new(r#"[{"check":"constants","alphas":[0.5,1.0]},{"check":"exponential_gap","corr":{"type":"ar1","rho":0.5},"n_max":64}]"#).unwrap();
    let mut s: *mut SsSuite = ptr::null_mut();
    unsafe {
        assert_eq!(ss_suite_run(checks.as_ptr(), 42, &mut s), SsStatus::Ok, "{}", last_error());
        assert!(ss_suite_all_passed(s));
        let json = CStr::from_ptr(ss_suite_json(s)).to_str().unwrap();
        let parsed: serde_json::Value = serde_json::from_str(json).unwrap();
        assert_eq!(parsed.as_array().unwrap().len(), 2);
        let csv = CStr::from_ptr(ss_suite_csv(s)).to_str().unwrap();
        assert!(csv.starts_with("check_id,n,m,"));
        ss_suite_free(s);

        let bad = CString::new("[{\"check\":\"nope\"}]").unwrap();
        assert_eq!(ss_suite_run(bad.as_ptr(), 42, &mut s), SsStatus::Config);
        assert!(!ss_suite_all_passed(ptr::null()));
        assert!(ss_suite_json(ptr::null()).is_null());
    }
}

#[test]
fn header_declares_every_export() {
    let header = include_str!("../include/subseries.h");
    for sym in [
        "SsStatus",
        "SS_STATUS_OK",
        "SS_STATUS_UNBOUNDED",
        "typedef struct SsMetric SsMetric",
        "typedef struct SsSuite SsSuite",
        "ss_last_error_message",
        "ss_version",
        "ss_phi(",
        "ss_phi_inv(",
        "ss_constant_c(",
        "ss_constant_c_quadrature(",
        "ss_constant_c_upper(",
        "ss_orlicz_norm(",
        "ss_tau_empirical(",
        "ss_tail_bound_nd(",
        "ss_tail_bound_cs(",
        "ss_decoupling_ar1(",
        "ss_metric_new(",
        "ss_metric_free(",
        "ss_metric_eval(",
        "ss_metric_covering(",
        "ss_metric_dudley(",
        "ss_suite_run(",
        "ss_suite_json(",
        "ss_suite_csv(",
        "ss_suite_all_passed(",
        "ss_suite_free(",
    ] {
        assert!(header.contains(sym), "header lacks {sym}");
    }
}

#[test]
fn version_is_nonempty() {
    let v = unsafe { CStr::from_ptr(ss_version()) }.to_str().unwrap();
    assert!(!v.is_empty());
}

/// The header compiles as C11 when a C compiler is on PATH.
#[test]
fn header_compiles_as_c() {
    let dir = tempfile_dir();
    let src = dir.join("probe.c");
    std::fs::write(
        &src,
        "#include \"subseries.h\"\nint main(void) { double v; SsMetric *m = 0; return ss_phi(1.0, &v) == SS_STATUS_OK && m == 0 ? 0 : 1; }\n",
    )
    .unwrap();
    let include = concat!(env!("CARGO_MANIFEST_DIR"), "/include");
    let status = match std::process::Command::new("cc").args(["-std=c11", "-Wall", "-Werror", "-fsyntax-only", "-I", include]).arg(&src).status() {
        Ok(s) => s,
        Err(_) => {
            eprintln!("no C compiler; skipping");
            return;
        }
    };
    assert!(status.success());
}

fn tempfile_dir() -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("subseries-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
