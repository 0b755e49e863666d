mod common;

use std::f64::consts::{FRAC_PI_2, PI};

use proptest::prelude::*;
use qreset::model::*;
use qreset::operator::*;
use qreset::QresetError;

fn diag(v: &[f64]) -> Operator {
    Operator::from_diagonal(&nalgebra::DVector::from_iterator(
        v.len(),
        v.iter().map(|&x| re(x)),
    ))
}

#[test]
fn selector_axes() {
    let s = |phi, theta| operator_of(&OperatorSelector::Bloch { phi, theta });
    assert!(max_abs_diff(&s(0.0, FRAC_PI_2), &pauli(1)) < 1e-15);
    assert!(max_abs_diff(&s(1.3, 0.0), &pauli(3)) < 1e-15);
    assert!(max_abs_diff(&s(FRAC_PI_2, FRAC_PI_2), &pauli(2)) < 1e-15);
    for k in 1..=3u8 {
        let (phi, theta) = OperatorSelector::Pauli(k).angles();
        assert!(max_abs_diff(&s(phi, theta), &operator_of(&OperatorSelector::Pauli(k))) < 1e-15);
    }
    assert!(OperatorSelector::Pauli(4).validate().is_err());
    assert!(OperatorSelector::Bloch {
        phi: 0.0,
        theta: f64::NAN
    }
    .validate()
    .is_err());
}

#[test]
fn thermal_examples() {
    let h = pauli(3) * re(1.5);
    let r = thermal_state(&h, 1.0).unwrap();
    assert!((r[(0, 0)].re - 0.047426).abs() < 1e-6);
    assert!((r[(1, 1)].re - 0.952574).abs() < 1e-6);
    assert!((purity(&r).unwrap() - 0.909651).abs() < 1e-5);
    let r0 = thermal_state(&diag(&[2.0, 0.0, -3.0]), 0.0).unwrap();
    assert!(max_abs_diff(&r0, &(identity(3) * re(1.0 / 3.0))) < 1e-15);
    let cold = thermal_state(&h, 1e3).unwrap();
    assert!(max_abs_diff(&cold, &diag(&[0.0, 1.0])) < 1e-10);
    assert!(matches!(
        thermal_state(&h, -1.0),
        Err(QresetError::NegativeBeta(_))
    ));
}

#[test]
fn two_level_hamiltonian() {
    let spec = SystemSpec::two_level(1.0, 3.0, 0.1, 1.0);
    let h = build_hamiltonian(&spec, 0.0).unwrap();
    let mut want = diag(&[2.0, -1.0, 1.0, -2.0]);
    for (i, j) in [(0, 3), (1, 2), (2, 1), (3, 0)] {
        want[(i, j)] = re(0.1);
    }
    assert!(max_abs_diff(&h, &want) < 1e-15);
    let free = SystemSpec::two_level(1.0, 3.0, 0.0, 1.0);
    assert!(
        max_abs_diff(
            &build_hamiltonian(&free, 0.0).unwrap(),
            &diag(&[2.0, -1.0, 1.0, -2.0])
        ) < 1e-15
    );
    assert!(hermiticity_defect(&build_hamiltonian(&spec, 0.7).unwrap()) < 1e-12);
    let q = SystemSpec::qudit(1.0, &[3.0, 2.0], 0.1, 1.0);
    assert!(matches!(
        build_hamiltonian(&q, 0.0),
        Err(QresetError::WrongAncillaDim { .. })
    ));
}

#[test]
fn qudit_hamiltonian() {
    let a = lowering(3);
    let mut want = Operator::zeros(3, 3);
    want[(1, 0)] = re(2f64.sqrt());
    want[(2, 1)] = re(1.0);
    assert!(max_abs_diff(&a, &want) < 1e-15);
    let spec = SystemSpec::qudit(1.0, &[3.0, 2.0], 0.1, 1.0);
    assert!(max_abs_diff(&spec.ancilla_hamiltonian(), &diag(&[2.0, 0.0, -3.0])) < 1e-15);
    assert_eq!(spec.omega_b(), 3.0);
    let free = SystemSpec::qudit(1.0, &[3.0, 2.0], 0.0, 1.0);
    let (vals, _) = hermitian_eig(&build_qudit_hamiltonian(&free, 0.0).unwrap()).unwrap();
    let mut want: Vec<f64> = [0.5, -0.5]
        .iter()
        .flat_map(|s| [2.0, 0.0, -3.0].map(|b| s + b))
        .collect();
    want.sort_by(f64::total_cmp);
    for (x, y) in vals.iter().zip(&want) {
        assert!((x - y).abs() < 1e-12);
    }
    let two = SystemSpec::two_level(1.0, 3.0, 0.1, 1.0);
    assert!(matches!(
        build_qudit_hamiltonian(&two, 0.0),
        Err(QresetError::WrongAncillaDim { .. })
    ));
}

#[test]
fn resonance_examples() {
    let spec = SystemSpec::two_level(1.0, 3.0, 0.1, 1.0);
    assert!((resonant_amplitude(&spec).unwrap() - 2f64.sqrt()).abs() < 1e-10);
    let s3 = spec.clone().with_operators(1, 1, 3);
    assert!((resonant_amplitude(&s3).unwrap() - 1.0).abs() < 1e-10);
    let same = SystemSpec::two_level(1.0, 1.0, 0.1, 1.0);
    assert!(resonant_amplitude(&same).unwrap().abs() < 1e-10);
    let s2 = spec.clone().with_operators(1, 1, 2);
    assert!((resonant_amplitude(&s2).unwrap() - 2f64.sqrt()).abs() < 1e-10);
    let below = SystemSpec::two_level(3.0, 1.0, 0.1, 1.0).with_operators(1, 1, 3);
    assert!(matches!(
        resonant_amplitude(&below),
        Err(QresetError::NoResonance(_))
    ));
}

#[test]
fn json_roundtrip_and_errors() {
    let mut spec = SystemSpec::two_level(1.0, 3.0, 0.1, 1.0);
    spec.o_c = OperatorSelector::Bloch {
        phi: 0.3,
        theta: 1.1,
    };
    let back = SystemSpec::from_json_str(&spec.to_json_string()).unwrap();
    assert_eq!(back, spec);
    let text = r#"{"omega_s": 1, "ancilla_levels": [-1.5, 1.5], "j": 0.1, "beta": 1,
        "o_s": {"pauli": 1}, "o_b": {"pauli": 1}, "o_c": {"phi": 0, "theta": 1.5707963267948966}}"#;
    let s = SystemSpec::from_json_str(text).unwrap();
    assert_eq!(s.omega_b(), 3.0);
    match SystemSpec::from_json_str("{\n  \"omega_s\": ,\n}") {
        Err(QresetError::MalformedJson { line, .. }) => assert_eq!(line, 2),
        other => panic!("{other:?}"),
    }
    let bad = text.replace("[-1.5, 1.5]", "[1.5, -1.5]");
    assert!(SystemSpec::from_json_str(&bad).is_err());
}

fn selector() -> impl Strategy<Value = OperatorSelector> {
    prop_oneof![
        (1u8..=3).prop_map(OperatorSelector::Pauli),
        (0.0..2.0 * PI, 0.0..PI).prop_map(|(phi, theta)| OperatorSelector::Bloch { phi, theta }),
    ]
}

proptest! {
    #[test]
    fn selectors_square_to_identity(sel in selector()) {
        let o = operator_of(&sel);
        prop_assert!(max_abs_diff(&(&o * &o), &identity(2)) < 1e-14);
    }

    #[test]
    fn thermal_commutes(ws in 0.1..5.0f64, wb in 0.1..5.0f64, j in 0.0..1.0f64, beta in 0.0..5.0f64) {
        let spec = SystemSpec::two_level(ws, wb, j, beta);
        let h = build_hamiltonian(&spec, 0.4).unwrap();
        let r = thermal_state(&h, beta).unwrap();
        prop_assert!(max_abs(&commutator(&r, &h)) < 1e-12);
    }

    #[test]
    fn hamiltonian_linear_in_field(e1 in -3.0..3.0f64, e2 in -3.0..3.0f64, sel in selector()) {
        let mut spec = SystemSpec::two_level(1.0, 3.0, 0.1, 1.0);
        spec.o_c = sel;
        let h = |e| build_hamiltonian(&spec, e).unwrap();
        prop_assert!(max_abs_diff(&(h(e1) + h(e2) - h(0.0)), &h(e1 + e2)) < 1e-12);
    }

    #[test]
    fn resonance_hits_target(ws in 0.2..3.0f64, extra in 0.01..4.0f64, sel in selector()) {
        let wb = ws + extra;
        match resonant_amplitude_for(ws, wb, &sel) {
            Ok(e) => {
                prop_assert!(e >= 0.0);
                prop_assert!((dressed_splitting(ws, &sel, e) - wb).abs() < 1e-9);
            }
            Err(QresetError::NoResonance(_)) => {
                let [x, y, _] = sel.bloch_vector();
                prop_assert!(x.hypot(y) < 1e-9);
            }
            Err(e) => prop_assert!(false, "{e}"),
        }
    }
}
