use approx::assert_abs_diff_eq;
use passage_core::dynamics::{passage_consistency, passage_tracking_error};
use passage_core::passage::{
    dark_state, drag_correct, evaluate_passage, intermediate_population_profile, rr_amplitude, rr_waveform,
    synthesize_pulses, BetaShape, GShape, MixingAngle, PassageSpec, TimeGrid,
};
use passage_core::qstate::{fidelity, C64};
use proptest::prelude::*;

#[test]
fn endpoint_drives_are_finite_for_every_shape() {
    let grid = TimeGrid::with_default_spacing(44.0).unwrap();
    for g in [GShape::constant(0.11), GShape::gauss_bump(0.11, 2.0, 5.0), GShape::hyper_gauss_bump(0.11, 0.3, 2.0)] {
        let w = synthesize_pulses(&PassageSpec::sigmoid(44.0, g), &grid).unwrap();
        for k in [0, w.len() - 1] {
            let s = w.sample(k);
            assert!(s.pump.norm().is_finite() && s.stokes.norm().is_finite());
        }
        assert!(w.peak_amplitude() < 1.0);
    }
}

#[test]
fn cosine_rotation_starts_and_ends_on_basis_states() {
    let spec = PassageSpec::new(30.0, BetaShape::Cosine, GShape::constant(0.2));
    let start = evaluate_passage(&spec, 0.0).unwrap();
    let end = evaluate_passage(&spec, 30.0).unwrap();
    assert_abs_diff_eq!(start.amplitudes()[0].norm_sqr(), 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(end.amplitudes()[2].norm_sqr(), 1.0, epsilon = 1e-12);
}

#[test]
fn larger_bump_lowers_intermediate_population() {
    let grid = TimeGrid::with_default_spacing(44.0).unwrap();
    let peak = |a: f64| {
        let spec = PassageSpec::sigmoid(44.0, GShape::hyper_gauss_bump(0.11, a, 3.0));
        intermediate_population_profile(&spec, &grid).unwrap().into_iter().fold(0.0, f64::max)
    };
    assert!(peak(1.0) < peak(0.0));
    assert!(peak(3.0) < peak(1.0));
}

#[test]
fn dark_state_limits() {
    let s = dark_state(MixingAngle::from_drives(C64::new(0.0, 0.0), C64::new(1.0, 0.0)));
    assert_abs_diff_eq!(s.amplitudes()[0].norm_sqr(), 1.0, epsilon = 1e-15);
    let s = dark_state(MixingAngle::from_drives(C64::new(1.0, 0.0), C64::new(0.0, 0.0)));
    assert_abs_diff_eq!(s.amplitudes()[2].norm_sqr(), 1.0, epsilon = 1e-15);
}

#[test]
fn drag_with_zero_coefficients_is_identity() {
    let grid = TimeGrid::with_default_spacing(44.0).unwrap();
    let w = synthesize_pulses(&PassageSpec::sigmoid(44.0, GShape::constant(0.11)), &grid).unwrap();
    assert_eq!(drag_correct(&w, -1.57, 0.0, 0.0).unwrap(), w);
}

#[test]
fn rr_halves_carry_pi_area() {
    let grid = TimeGrid::new(44.0, 0.001).unwrap();
    let w = rr_waveform(&grid).unwrap();
    let area = |v: Vec<f64>| v.windows(2).map(|p| 0.5 * (p[0] + p[1]) * w.dt()).sum::<f64>();
    let pump = area((0..w.len()).map(|k| w.sample(k).pump.norm()).collect());
    let stokes = area((0..w.len()).map(|k| w.sample(k).stokes.norm()).collect());
    assert_abs_diff_eq!(pump, std::f64::consts::PI, epsilon = 1e-3);
    assert_abs_diff_eq!(stokes, std::f64::consts::PI, epsilon = 1e-3);
    assert!(rr_amplitude(44.0).unwrap() > 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn synthesized_pulses_drive_the_designed_state(
        omega0 in 0.05f64..0.4,
        a in 0.0f64..4.0,
        b in 2.0f64..12.0,
        duration in 20.0f64..80.0,
    ) {
        let grid = TimeGrid::with_default_spacing(duration).unwrap();
        let spec = PassageSpec::sigmoid(duration, GShape::hyper_gauss_bump(omega0, a, b));
        prop_assert!(passage_consistency(&spec, &grid).unwrap() <= 1e-6);
        let w = synthesize_pulses(&spec, &grid).unwrap();
        prop_assert!(passage_tracking_error(&spec, &w).unwrap() <= 1e-6);
    }

    #[test]
    fn designed_state_is_normalized(t in 0.0f64..50.0, omega0 in 0.01f64..1.0, a in 0.0f64..5.0) {
        let spec = PassageSpec::sigmoid(50.0, GShape::gauss_bump(omega0, a, 4.0));
        let psi = evaluate_passage(&spec, t).unwrap();
        prop_assert!((fidelity(&psi, &psi).unwrap() - 1.0).abs() < 1e-12);
    }
}
