use std::ffi::{CStr, CString};
use std::ptr;

use qreset_ffi::*;

fn last_error() -> String {
    let p = qreset_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn spec(omega_s: f64, omega_b: f64, j: f64) -> *mut QresetSpec {
    let mut s = ptr::null_mut();
    assert_eq!(
        unsafe { qreset_spec_two_level(omega_s, omega_b, j, 1.0, &mut s) },
        QresetStatus::Ok
    );
    s
}

#[test]
fn tmin_for_both_classes() {
    let s = spec(1.0, 3.0, 0.1);
    let mut t = 0.0;
    unsafe {
        assert_eq!(qreset_tmin(s, &mut t), QresetStatus::Ok);
        assert!((t - 46.9).abs() < 0.05, "{t}");
        assert_eq!(qreset_spec_set_case(s, 1, 1, 3), QresetStatus::Ok);
        assert_eq!(qreset_tmin(s, &mut t), QresetStatus::Ok);
        assert!((t - std::f64::consts::PI / 0.2).abs() < 1e-6, "{t}");
        qreset_spec_free(s);
    }
}

#[test]
fn not_purifiable_case_reports_status() {
    let s = spec(1.0, 3.0, 0.1);
    let mut t = 0.0;
    unsafe {
        assert_eq!(qreset_spec_set_case(s, 3, 3, 3), QresetStatus::Ok);
        assert_eq!(qreset_tmin(s, &mut t), QresetStatus::NoPurification);
        qreset_spec_free(s);
    }
    assert!(last_error().contains("s3s3:s3"));
}

#[test]
fn null_and_invalid_inputs() {
    let mut t = 0.0;
    unsafe {
        assert_eq!(qreset_tmin(ptr::null(), &mut t), QresetStatus::NullPointer);
        assert!(last_error().contains("spec"));
        let s = spec(1.0, 3.0, 0.1);
        assert_eq!(qreset_spec_set_case(s, 4, 1, 1), QresetStatus::InvalidInput);
        assert_eq!(qreset_tmin(s, ptr::null_mut()), QresetStatus::NullPointer);
        qreset_spec_free(s);
        let mut bad = ptr::null_mut();
        assert_eq!(
            qreset_spec_two_level(1.0, 3.0, 0.1, -1.0, &mut bad),
            QresetStatus::InvalidInput
        );
        assert!(bad.is_null());
        qreset_spec_free(ptr::null_mut());
    }
    qreset_clear_last_error();
    assert!(qreset_last_error_message().is_null());
}

#[test]
fn malformed_json_spec() {
    let text = CString::new("{\"omega_s\": 1.0,").unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(
        unsafe { qreset_spec_from_json(text.as_ptr(), &mut s) },
        QresetStatus::MalformedJson
    );
    assert!(s.is_null());
}

#[test]
fn json_spec_matches_two_level() {
    let s = spec(1.0, 3.0, 0.1);
    let json = serde_free_json();
    let text = CString::new(json).unwrap();
    let mut from_json = ptr::null_mut();
    unsafe {
        let status = qreset_spec_from_json(text.as_ptr(), &mut from_json);
        assert_eq!(status, QresetStatus::Ok, "{}", last_error());
        let (mut a, mut b) = (0.0, 0.0);
        assert_eq!(qreset_resonant_amplitude(s, &mut a), QresetStatus::Ok);
        assert_eq!(
            qreset_resonant_amplitude(from_json, &mut b),
            QresetStatus::Ok
        );
        assert!((a - b).abs() < 1e-12);
        qreset_spec_free(s);
        qreset_spec_free(from_json);
    }
}

fn serde_free_json() -> String {
    qreset::model::SystemSpec::two_level(1.0, 3.0, 0.1, 1.0).to_json_string()
}

#[test]
fn device_times_match_table() {
    let expected = [
        [191.0, 81.1, 402.3],
        [151.8, 49.3, 394.8],
        [250.3, 62.2, 2054.6],
    ];
    let cases = [(1, 1, 1), (1, 1, 3), (3, 1, 1)];
    for (case, row) in cases.iter().zip(expected) {
        for (k, want) in row.iter().enumerate() {
            let mut t = 0.0;
            let st = unsafe {
                qreset_device_reset_time(
                    case.0,
                    case.1,
                    case.2,
                    k as u32,
                    QresetConvention::TableI,
                    &mut t,
                )
            };
            assert_eq!(st, QresetStatus::Ok, "{}", last_error());
            assert!((t - want).abs() <= 0.1, "{case:?} set {k}: {t} vs {want}");
        }
    }
    let mut t = 0.0;
    let st = unsafe { qreset_device_reset_time(1, 1, 1, 3, QresetConvention::TableI, &mut t) };
    assert_eq!(st, QresetStatus::InvalidInput);
}

#[test]
fn classify_all_counts() {
    let s = spec(1.0, 3.0, 0.1);
    let mut buf = [0u32; 135];
    unsafe {
        assert_eq!(
            qreset_classify_all(s, buf.as_mut_ptr(), 10),
            QresetStatus::BufferTooSmall
        );
        assert_eq!(
            qreset_classify_all(s, buf.as_mut_ptr(), buf.len()),
            QresetStatus::Ok
        );
        qreset_spec_free(s);
    }
    let purifiable = buf.chunks(5).filter(|r| r[4] == 1).count();
    assert_eq!(purifiable, 16);
    assert!(buf.chunks(5).all(|r| r[0] >= 1 && r[0] <= 15));
}

#[test]
fn simulate_curve_roundtrip() {
    let s = spec(1.0, 3.0, 0.1);
    let mut c = ptr::null_mut();
    unsafe {
        let st = qreset_simulate_constant(s, 60.0, 121, &mut c);
        assert_eq!(st, QresetStatus::Ok, "{}", last_error());
        let n = qreset_curve_len(c);
        assert_eq!(n, 121);
        let (mut ts, mut vs) = (vec![0.0; n], vec![0.0; n]);
        assert_eq!(
            qreset_curve_copy(c, ts.as_mut_ptr(), vs.as_mut_ptr(), n - 1),
            QresetStatus::BufferTooSmall
        );
        assert_eq!(
            qreset_curve_copy(c, ts.as_mut_ptr(), vs.as_mut_ptr(), n),
            QresetStatus::Ok
        );
        let (mut pt, mut pv) = (0.0, 0.0);
        assert_eq!(qreset_curve_peak(c, &mut pt, &mut pv), QresetStatus::Ok);
        assert!(vs.iter().all(|v| *v <= pv + 1e-15));
        assert!((ts[n - 1] - 60.0).abs() < 1e-12);
        assert!((pt - 46.9).abs() < 1.0, "{pt}");
        assert!(pv > vs[0] && pv < 0.9097);
        qreset_curve_free(c);
        qreset_spec_free(s);
    }
}

#[test]
fn max_purity_and_validation() {
    let s = [0.8807970779778823, 0.11920292202211769];
    let b = [0.9525741268224334, 0.04742587317756678];
    let mut p = 0.0;
    unsafe {
        assert_eq!(
            qreset_max_purity(s.as_ptr(), 2, b.as_ptr(), 2, &mut p),
            QresetStatus::Ok
        );
        assert!((p - (b[0] * b[0] + b[1] * b[1])).abs() < 1e-12);
        let bad = [0.5, 0.6];
        assert_eq!(
            qreset_max_purity(s.as_ptr(), 2, bad.as_ptr(), 2, &mut p),
            QresetStatus::InvalidInput
        );
    }
}

#[test]
fn epsilon_check() {
    let b = [0.7, 0.3 - 1e-5, 5e-6, 5e-6];
    let (mut ok, mut inf) = (false, 0.0);
    unsafe {
        assert_eq!(
            qreset_epsilon_check(b.as_ptr(), 4, 2, 1e-3, &mut ok, &mut inf),
            QresetStatus::Ok
        );
        assert!(ok && inf <= 1e-3);
        assert_eq!(
            qreset_epsilon_check(b.as_ptr(), 4, 2, 0.0, &mut ok, &mut inf),
            QresetStatus::InvalidInput
        );
    }
}

#[test]
fn weyl_of_cnot() {
    let mut u = [0.0; 32];
    for (i, j) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
        u[8 * i + 2 * j] = 1.0;
    }
    let mut c = [0.0; 3];
    unsafe {
        assert_eq!(
            qreset_weyl_coordinates(u.as_ptr(), c.as_mut_ptr()),
            QresetStatus::Ok
        )
    };
    let want = [std::f64::consts::FRAC_PI_2, 0.0, 0.0];
    for k in 0..3 {
        assert!((c[k] - want[k]).abs() < 1e-9, "{c:?}");
    }
    u[0] = 2.0;
    unsafe {
        assert_eq!(
            qreset_weyl_coordinates(u.as_ptr(), c.as_mut_ptr()),
            QresetStatus::InvalidInput
        )
    };
}

#[test]
fn qsl_thermal_ancilla() {
    let mut a = 0.0;
    let pe = 1.0 / (1.0 + 3f64.exp());
    let st = unsafe { qreset_qsl_min_total_angle(pe, 1.0 - pe, 0.0, 0.0, 64, &mut a) };
    assert_eq!(st, QresetStatus::Ok, "{}", last_error());
    assert!((a - std::f64::consts::PI).abs() < 1e-3, "{a}");
}

#[test]
fn optimize_improves_guess() {
    let s = spec(1.0, 3.0, 0.1);
    let mut r = ptr::null_mut();
    unsafe {
        let st = qreset_optimize(s, 30.0, 10, 10, &mut r);
        assert_eq!(st, QresetStatus::Ok, "{}", last_error());
        let (mut g, mut f) = (0.0, 0.0);
        assert_eq!(
            qreset_optimization_purities(r, &mut g, &mut f),
            QresetStatus::Ok
        );
        assert!(f >= g - 1e-12 && f <= 0.9097);
        let mut amps = [0.0; 10];
        assert_eq!(
            qreset_optimization_amplitudes(r, amps.as_mut_ptr(), 9),
            QresetStatus::BufferTooSmall
        );
        assert_eq!(
            qreset_optimization_amplitudes(r, amps.as_mut_ptr(), 10),
            QresetStatus::Ok
        );
        assert!(amps.iter().all(|a| a.is_finite()));
        qreset_optimization_free(r);
        qreset_spec_free(s);
    }
}

#[test]
fn header_is_valid_c() {
    let dir = env!("CARGO_MANIFEST_DIR");
    let header = format!("{dir}/include/qreset.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in [
        "qreset_tmin",
        "qreset_last_error_message",
        "qreset_spec_free",
        "QRESET_STATUS_OK",
    ] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let Ok(out) = std::process::Command::new("cc")
        .args([
            "-fsyntax-only",
            "-std=c99",
            "-Wall",
            "-Werror",
            "-x",
            "c",
            &header,
        ])
        .output()
    else {
        eprintln!("cc not available; syntax check skipped");
        return;
    };
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}
