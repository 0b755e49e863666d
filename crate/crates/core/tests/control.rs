mod common;

use qreset::control::*;
use qreset::dynamics::{
    approx_purity, case_parameters, dressed_product_state, eta_and_tmin, thermal_product, QubitInit,
};
use qreset::model::{
    ancilla_thermal, qubit_thermal, resonant_amplitude, OperatorSelector, SystemSpec,
};
use qreset::operator::{c, kron, purity};
use qreset::QresetError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn reference_spec() -> SystemSpec {
    SystemSpec::two_level(1.0, 3.0, 0.1, 1.0).with_operators(1, 1, 3)
}

fn t_min() -> f64 {
    let p = case_parameters(1, 1, 3, &reference_spec()).unwrap();
    eta_and_tmin(p.params().unwrap()).unwrap().t_min
}

fn ancilla_purity(spec: &SystemSpec) -> f64 {
    purity(&ancilla_thermal(spec).unwrap()).unwrap()
}

fn fixed_purity_state(rng: &mut impl Rng, spec: &SystemSpec) -> qreset::operator::Operator {
    let th = qubit_thermal(spec).unwrap();
    let r = (th[(0, 0)].re - th[(1, 1)].re).abs();
    kron(
        &common::random_qubit_with_radius(rng, r),
        &ancilla_thermal(spec).unwrap(),
    )
}

#[test]
fn schedule_validation() {
    assert!(PulseSchedule::new(0.0, vec![1.0]).is_err());
    assert!(PulseSchedule::new(1.0, vec![]).is_err());
    assert!(PulseSchedule::new(1.0, vec![f64::NAN]).is_err());
    assert!(PulseSchedule::new(1.0, vec![2.0])
        .unwrap()
        .with_bound(1.0)
        .is_err());
    let p = PulseSchedule::new(2.0, vec![0.5, -0.5]).unwrap();
    assert!(p
        .clone()
        .with_second_channel(OperatorSelector::Pauli(1), vec![0.0])
        .is_err());
    assert_eq!(p.segment_length(), 1.0);
    assert_eq!(p.to_csv(), "t,eps\n0,0.5\n1,-0.5\n");
    let q = p
        .with_second_channel(OperatorSelector::Pauli(1), vec![0.25, 0.0])
        .unwrap();
    assert_eq!(q.to_csv(), "t,eps,eps2\n0,0.5,0.25\n1,-0.5,0\n");
    let back: PulseSchedule = serde_json::from_str(&serde_json::to_string(&q).unwrap()).unwrap();
    assert_eq!(back, q);
}

#[test]
fn fmt12_uses_twelve_significant_digits() {
    assert_eq!(fmt12(std::f64::consts::PI), "3.14159265359");
    assert_eq!(fmt12(0.1 + 0.2), "0.3");
    assert_eq!(fmt12(1.0), "1");
}

fn finite_difference(
    spec: &SystemSpec,
    rho: &qreset::operator::Operator,
    pulse: &PulseSchedule,
) -> Vec<f64> {
    let h = 1e-6;
    let x = pulse.all_amplitudes();
    let n = pulse.n_segments();
    (0..x.len())
        .map(|i| {
            let shifted = |d: f64| {
                let mut p = pulse.clone();
                let k = i % n;
                if i < n {
                    p.amplitudes[k] += d;
                } else {
                    p.second.as_mut().unwrap().amplitudes[k] += d;
                }
                final_purity(spec, rho, &p).unwrap()
            };
            (shifted(h) - shifted(-h)) / (2.0 * h)
        })
        .collect()
}

#[test]
fn adjoint_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for trial in 0..20 {
        let mut spec = SystemSpec::two_level(1.0, 3.0, rng.gen_range(0.05..0.5), 1.0)
            .with_operators(
                rng.gen_range(1..=3),
                rng.gen_range(1..=3),
                rng.gen_range(1..=3),
            );
        if trial % 4 == 3 {
            spec = SystemSpec::qudit(1.0, &[3.0, 2.0], 0.2, 1.0).with_operators(1, 1, 3);
        }
        let d = spec.ancilla_dim();
        let n = rng.gen_range(2..8);
        let amps: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let mut pulse = PulseSchedule::new(rng.gen_range(2.0..20.0), amps).unwrap();
        if trial % 2 == 1 {
            let second: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            pulse = pulse
                .with_second_channel(OperatorSelector::Pauli(1), second)
                .unwrap();
        }
        let rho = common::random_density(&mut rng, 2 * d);
        let g = pulse_gradient(&spec, &rho, &pulse).unwrap();
        let fd = finite_difference(&spec, &rho, &pulse);
        let scale = fd.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-8);
        let err = g
            .iter()
            .zip(&fd)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(
            err / scale < 1e-5,
            "trial {trial}: relative error {:.3e}",
            err / scale
        );
    }
}

#[test]
fn no_coupling_means_no_gradient() {
    let spec = SystemSpec::two_level(1.0, 3.0, 0.0, 1.0).with_operators(1, 1, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let rho = common::random_density(&mut rng, 4);
    let pulse = PulseSchedule::new(5.0, vec![0.3, -1.2, 0.8]).unwrap();
    let g = pulse_gradient(&spec, &rho, &pulse).unwrap();
    assert!(g.iter().all(|v| v.abs() < 1e-13));
}

fn resonant_gradient(j: f64, n: usize) -> f64 {
    let spec = SystemSpec::two_level(1.0, 3.0, j, 1.0).with_operators(1, 1, 3);
    let p = case_parameters(1, 1, 3, &spec).unwrap();
    let tm = eta_and_tmin(p.params().unwrap()).unwrap().t_min;
    let eps = resonant_amplitude(&spec).unwrap();
    let pulse = PulseSchedule::constant(tm, eps, n).unwrap();
    let g = pulse_gradient(&spec, &thermal_product(&spec).unwrap(), &pulse).unwrap();
    g.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

#[test]
fn resonant_pulse_is_nearly_stationary_at_the_reset_time() {
    let weak = resonant_gradient(0.01, 50);
    assert!(weak < 1e-6, "{weak:.3e}");
    let g = resonant_gradient(0.1, 200);
    assert!(g < 2e-5, "{g:.3e}");
}

#[test]
fn optimizer_keeps_the_resonant_guess_at_the_reset_time() {
    let spec = reference_spec();
    let rho = thermal_product(&spec).unwrap();
    let opts = OptimizeOptions {
        max_iter: 50,
        ..Default::default()
    };
    let r = optimize_pulse(&spec, &rho, t_min(), 40, &opts).unwrap();
    assert!(r.final_purity - r.guess_purity <= 1e-4);
    assert!(r.final_purity >= r.guess_purity - 1e-12);
    assert!(r.final_purity <= ancilla_purity(&spec) + 1e-9);
}

#[test]
fn optimizer_improves_coherent_inputs_before_the_reset_time() {
    let spec = reference_spec();
    let q = QubitInit {
        p_g: 0.6,
        p_e: 0.4,
        gamma: c(0.3, 0.1),
    };
    let eps = resonant_amplitude(&spec).unwrap();
    let rho = dressed_product_state(&spec, eps, &q).unwrap();
    let tau = 0.5 * t_min();
    let opts = OptimizeOptions {
        max_iter: 100,
        ..Default::default()
    };
    let r = optimize_pulse(&spec, &rho, tau, 40, &opts).unwrap();
    let resonant =
        final_purity(&spec, &rho, &PulseSchedule::constant(tau, eps, 1).unwrap()).unwrap();
    assert!(
        r.final_purity > resonant + 1e-4,
        "{} vs {}",
        r.final_purity,
        resonant
    );
    assert!(r.purity_history.windows(2).all(|w| w[1] >= w[0] - 1e-12));
    assert!(r.final_purity <= ancilla_purity(&spec) + 1e-9);
}

#[test]
fn incoherent_inputs_stay_below_the_approximate_evolution() {
    let spec = reference_spec();
    let th = qubit_thermal(&spec).unwrap();
    let q = QubitInit {
        p_g: th[(1, 1)].re,
        p_e: th[(0, 0)].re,
        gamma: c(0.0, 0.0),
    };
    let eps = resonant_amplitude(&spec).unwrap();
    let rho = dressed_product_state(&spec, eps, &q).unwrap();
    let tau = 0.5 * t_min();
    let opts = OptimizeOptions {
        max_iter: 100,
        ..Default::default()
    };
    let r = optimize_pulse(&spec, &rho, tau, 40, &opts).unwrap();
    assert!(r.final_purity <= approx_purity(tau, &spec, &q).unwrap() + 5e-3);
}

#[test]
fn guess_dominance_for_random_orientations() {
    let spec = reference_spec();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let rho = fixed_purity_state(&mut rng, &spec);
        let opts = OptimizeOptions {
            max_iter: 25,
            ..Default::default()
        };
        let r = optimize_pulse(&spec, &rho, t_min(), 20, &opts).unwrap();
        assert!(
            r.final_purity - r.guess_purity <= 1e-3,
            "{}",
            r.final_purity - r.guess_purity
        );
    }
}

#[test]
fn bounded_guess_is_clamped_with_warning() {
    let spec = reference_spec();
    let rho = thermal_product(&spec).unwrap();
    let opts = OptimizeOptions {
        max_iter: 10,
        eps_max: Some(0.5),
        ..Default::default()
    };
    let r = optimize_pulse(&spec, &rho, t_min(), 10, &opts).unwrap();
    assert!(r.bound_warning);
    assert!(r.pulse.amplitudes.iter().all(|x| x.abs() <= 0.5));
    let json = r.to_json_string();
    let back: OptimizationResult = serde_json::from_str(&json).unwrap();
    assert_eq!(back.pulse, r.pulse);
}

#[test]
fn second_channel_optimization_runs() {
    let spec = reference_spec();
    let q = QubitInit {
        p_g: 0.6,
        p_e: 0.4,
        gamma: c(0.3, 0.1),
    };
    let eps = resonant_amplitude(&spec).unwrap();
    let rho = dressed_product_state(&spec, eps, &q).unwrap();
    let opts = OptimizeOptions {
        max_iter: 20,
        second_channel: Some(OperatorSelector::Pauli(1)),
        ..Default::default()
    };
    let r = optimize_pulse(&spec, &rho, 0.5 * t_min(), 20, &opts).unwrap();
    assert_eq!(r.pulse.second.as_ref().unwrap().amplitudes.len(), 20);
    assert!(r.final_purity >= r.guess_purity);
}

#[test]
fn optimizer_input_errors() {
    let spec = reference_spec();
    let rho = thermal_product(&spec).unwrap();
    let opts = OptimizeOptions {
        guess: Some(vec![1.0; 3]),
        ..Default::default()
    };
    assert!(matches!(
        optimize_pulse(&spec, &rho, 1.0, 4, &opts),
        Err(QresetError::DimensionMismatch(_))
    ));
    assert!(optimize_pulse(&spec, &rho, 1.0, 0, &OptimizeOptions::default()).is_err());
    assert!(optimize_pulse(&spec, &rho, -1.0, 4, &OptimizeOptions::default()).is_err());
    let bad = qreset::operator::identity(4);
    assert!(optimize_pulse(&spec, &bad, 1.0, 4, &OptimizeOptions::default()).is_err());
}
