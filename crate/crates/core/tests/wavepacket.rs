use homdip::units;
use homdip::wavepacket::{
    apply_dispersion, broadened_width_closed_form, gaussian_spectral_amplitude, to_temporal_profile,
    DispersiveElement, FrequencyGrid, GaussianPulse, TemporalField,
};
use num_complex::Complex;
use proptest::prelude::*;

const T0: f64 = 0.732 / 1.665_109_222_315_395_5;

fn lab_pulse(n: f64) -> GaussianPulse<f64> {
    GaussianPulse::new(T0, 1565.0, n, 1.0).unwrap()
}

fn gdd_element(gdd: f64) -> DispersiveElement<f64> {
    // 1 km so that beta2 (ps^2/km) equals the accumulated GDD.
    DispersiveElement::new(1000.0, 0.0, gdd).unwrap()
}

#[test]
fn unbroadened_pulse_has_the_lab_width() {
    let spec = gaussian_spectral_amplitude(&lab_pulse(1.0), &FrequencyGrid::for_pulse_width(T0).unwrap()).unwrap();
    let profile = to_temporal_profile(&spec);
    let fwhm = profile.fwhm().unwrap();
    assert!((fwhm - 0.732).abs() < 1e-6, "{fwhm}");
    assert!((profile.total() - 1.0).abs() < 1e-6);
    assert!(profile.intensity.iter().all(|&v| v >= 0.0));
}

#[test]
fn temporal_round_trip() {
    let spec = gaussian_spectral_amplitude(&lab_pulse(2.0), &FrequencyGrid::for_pulse_width(T0).unwrap()).unwrap();
    let chirped = apply_dispersion(&spec, &[gdd_element(3.0), DispersiveElement::delay_line(1.5).unwrap()]).unwrap();
    let field = TemporalField::from_spectral(&chirped);
    let back = field.to_spectral();
    let again = TemporalField::from_spectral(&back);
    let worst = field
        .values()
        .iter()
        .zip(again.values())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    assert!(worst < 1e-9, "{worst}");
    let spectral_err = chirped
        .values()
        .iter()
        .zip(back.values())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    assert!(spectral_err < 1e-9, "{spectral_err}");
}

#[test]
fn odd_grid_transforms_consistently() {
    let grid = FrequencyGrid::new(1023, 16.0 / T0).unwrap();
    let spec = gaussian_spectral_amplitude(&lab_pulse(1.0), &grid).unwrap();
    let shifted = apply_dispersion(&spec, &[DispersiveElement::delay_line(3.0).unwrap()]).unwrap();
    let profile = to_temporal_profile(&shifted);
    assert!((profile.centroid().unwrap() - 3.0).abs() < 1e-9);
    let fwhm = profile.fwhm().unwrap();
    assert!((fwhm - 0.732).abs() < 1e-5, "{fwhm}");
    let back = TemporalField::from_spectral(&shifted).to_spectral();
    let err = shifted
        .values()
        .iter()
        .zip(back.values())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    assert!(err < 1e-12, "{err}");
}

#[test]
fn empty_chain_is_identity() {
    let spec = gaussian_spectral_amplitude(&lab_pulse(1.0), &FrequencyGrid::for_pulse_width(T0).unwrap()).unwrap();
    assert_eq!(apply_dispersion(&spec, &[]).unwrap(), spec);
}

#[test]
fn non_finite_elements_are_rejected() {
    let spec = gaussian_spectral_amplitude(&lab_pulse(1.0), &FrequencyGrid::for_pulse_width(T0).unwrap()).unwrap();
    let bad = DispersiveElement {
        length: 1.0,
        beta1: f64::NAN,
        beta2: 0.0,
    };
    assert!(apply_dispersion(&spec, &[bad]).is_err());
}

#[test]
fn group_delay_translates_without_reshaping() {
    let grid = FrequencyGrid::for_pulse_width(T0).unwrap();
    let spec = gaussian_spectral_amplitude(&lab_pulse(1.0), &grid).unwrap();
    let lag_samples = 40;
    let delay = lag_samples as f64 * grid.time_step();
    // 2 m at delay/2 per metre.
    let element = DispersiveElement::new(2.0, delay / 2.0, 0.0).unwrap();
    let input = to_temporal_profile(&spec);
    let output = to_temporal_profile(&apply_dispersion(&spec, &[element]).unwrap());

    // Cross-correlation peak by brute force over integer lags.
    let n = input.len();
    let best_lag = (0..200)
        .max_by(|&x, &y| {
            let corr = |lag: usize| (0..n - lag).map(|k| input.intensity[k] * output.intensity[k + lag]).sum::<f64>();
            corr(x).partial_cmp(&corr(y)).unwrap()
        })
        .unwrap();
    assert_eq!(best_lag, lag_samples);

    let l2: f64 = (0..n - lag_samples)
        .map(|k| (input.intensity[k] - output.intensity[k + lag_samples]).powi(2))
        .sum::<f64>()
        .sqrt();
    assert!(l2 < 1e-6, "{l2}");
    assert!((output.centroid().unwrap() - input.centroid().unwrap() - delay).abs() < 1e-9);
}

#[test]
fn broadening_matches_closed_form() {
    for &gdd in &[0.0, 10.0, 100.0, 1000.0] {
        let grid = FrequencyGrid::for_propagation(T0, gdd).unwrap();
        let spec = gaussian_spectral_amplitude(&lab_pulse(1.0), &grid).unwrap();
        let out = apply_dispersion(&spec, &[gdd_element(gdd)]).unwrap();
        let profile = to_temporal_profile(&out);
        let measured = profile.fwhm().unwrap();
        let expected = broadened_width_closed_form(T0, gdd).unwrap();
        assert!(
            (measured - expected).abs() / expected < 1e-3,
            "gdd {gdd}: measured {measured}, closed form {expected}"
        );
        // Independent width route: second moment of a Gaussian flux.
        let rms = profile.rms_width().unwrap() * 2.0 * (2.0 * 2f64.ln()).sqrt();
        assert!((rms - expected).abs() / expected < 1e-3, "gdd {gdd}: rms {rms}");
        assert!((profile.total() - 1.0).abs() < 1e-6);
    }
}

#[test]
fn broadening_example_from_dispersion_module() {
    // T0 pulse through 1085 ps^2 of GDD.
    let gdd = 1085.0;
    let grid = FrequencyGrid::for_propagation(T0, gdd).unwrap();
    let spec = gaussian_spectral_amplitude(&lab_pulse(1.0), &grid).unwrap();
    let profile = to_temporal_profile(&apply_dispersion(&spec, &[gdd_element(-gdd)]).unwrap());
    let measured = profile.fwhm().unwrap();
    let expected = 2.0 * 2f64.ln().sqrt() * (T0.powi(4) + gdd * gdd).sqrt() / T0;
    assert!((measured - expected).abs() / expected < 1e-3, "{measured} vs {expected}");
}

#[test]
fn fifty_km_fiber_broadens_to_nanoseconds() {
    let beta2 = units::dispersion_parameter_to_beta2(17.1, 1565.0);
    let fiber = DispersiveElement::new(50_000.0, 0.0, beta2).unwrap();
    let grid = FrequencyGrid::for_propagation(T0, fiber.gdd()).unwrap();
    let spec = gaussian_spectral_amplitude(&lab_pulse(1.0), &grid).unwrap();
    let width = to_temporal_profile(&apply_dispersion(&spec, &[fiber]).unwrap())
        .fwhm()
        .unwrap();
    // Paper quotes about 3.9 ns before detector jitter.
    assert!((width - 3900.0).abs() / 3900.0 < 0.15, "{width}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn dispersion_conserves_photon_number(
        n in 0.01f64..5.0,
        chain in prop::collection::vec((0.0f64..2000.0, -5.0f64..5.0, -50.0f64..50.0), 0..4),
    ) {
        let grid = FrequencyGrid::new(1024, 16.0 / T0).unwrap();
        let spec = gaussian_spectral_amplitude(&lab_pulse(n), &grid).unwrap();
        let chain: Vec<_> = chain.into_iter().map(|(l, b1, b2)| DispersiveElement::new(l, b1, b2).unwrap()).collect();
        let out = apply_dispersion(&spec, &chain).unwrap();
        prop_assert!((out.norm() - spec.norm()).abs() <= 1e-12 * spec.norm());
    }

    #[test]
    fn broadening_is_even_in_gdd(gdd in 0.0f64..200.0) {
        let grid = FrequencyGrid::for_propagation(T0, gdd).unwrap();
        let spec = gaussian_spectral_amplitude(&lab_pulse(1.0), &grid).unwrap();
        let plus = to_temporal_profile(&apply_dispersion(&spec, &[gdd_element(gdd)]).unwrap());
        let minus = to_temporal_profile(&apply_dispersion(&spec, &[gdd_element(-gdd)]).unwrap());
        let (wp, wm) = (plus.fwhm().unwrap(), minus.fwhm().unwrap());
        prop_assert!((wp - wm).abs() <= 1e-9 * wp, "{} vs {}", wp, wm);
    }

    #[test]
    fn samples_are_finite(re in -1.0f64..1.0, im in -1.0f64..1.0) {
        let grid = FrequencyGrid::new(16, 40.0).unwrap();
        let values = vec![Complex::new(re, im); 16];
        let spec = homdip::wavepacket::SpectralAmplitude::from_samples(grid, values, 1565.0).unwrap();
        prop_assert!(to_temporal_profile(&spec).intensity.iter().all(|v| v.is_finite()));
    }
}
