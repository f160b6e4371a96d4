//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails other than those listed in
//! `EXPECTED_FAILURES`.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use homdip::experiment::{jitter_convolved_profile, propagated_profile};
use homdip::fitting::{fwhm_per_sigma, pulse_width_from_dip};
use homdip::hom::{
    coincidence_probability_gaussian, dip_fwhm, ArmConfig, DetectionModel, DipParameters, Interferometer, TermOptions,
};
use homdip::units;
use homdip::wavepacket::{gaussian_spectral_amplitude, DispersiveElement, FrequencyGrid, GaussianPulse};
use homdip_cli::curve_file::CurveFile;
use homdip_cli::experiment_file::ExperimentFile;
use homdip_cli::report::{DispersionReport, FitReport};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PULSE_FWHM: f64 = 0.732;
const REPORTED_DIP_FWHM: f64 = 1.035;
const WAVELENGTH: f64 = 1565.0;

// Pinned tolerances and time budgets.
const C1_REL: f64 = 0.005;
const C1_TIME: Duration = Duration::from_secs(1);
const C2_CLOSED_REL: f64 = 1e-6;
const C2_QUAD_REL: f64 = 1e-4;
const C2_TIME: Duration = Duration::from_secs(10);
const C3_REL: f64 = 0.005;
const C4_SEEDS: u64 = 50;
const C4_MIN_COVERED: usize = 45;
const C4_REPORTED_D: f64 = 15.04;
const C4_REPORTED_REL: f64 = 0.10;
const C4_TIME: Duration = Duration::from_secs(60);
const C5_SAMPLES: usize = 200;
const C5_ABS: f64 = 1e-6;
const C5_TIME: Duration = Duration::from_secs(10);
const C6_CASES: usize = 100;
const C6_REL: f64 = 1e-9;
const C7_RANGE_NS: (f64, f64) = (3.3, 4.3);
const C7_TIME: Duration = Duration::from_secs(5);
const C8_RATIO_REL: f64 = 0.20;

/// Criteria that cannot be met as stated, with the reason. They still run
/// and still print FAIL; only the unattainable part is waived.
const EXPECTED_FAILURES: &[(u32, &str)] = &[(
    4,
    "an unbiased estimator with correct 1-sigma errors covers the truth ~68% of the time, not >= 90%",
)];

struct Outcome {
    pass: bool,
    detail: String,
    /// Whether a failure is confined to the part named in `EXPECTED_FAILURES`.
    waivable: bool,
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn homdip(args: &[&str]) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_homdip"))
        .args(args)
        .output()
        .expect("homdip runs");
    if !out.status.success() {
        panic!(
            "homdip {} failed ({:?}): {}",
            args.join(" "),
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        );
    }
    out
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn fit_json(curve: &Path, extra: &[&str]) -> FitReport {
    let mut args = vec!["fit", p(curve), "--report", "json"];
    args.extend_from_slice(extra);
    serde_json::from_slice(&homdip(&args).stdout).expect("fit report parses")
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn t0() -> f64 {
    units::t0_from_fwhm(PULSE_FWHM)
}

fn criterion_1(dir: &Path) -> Outcome {
    let start = Instant::now();
    let curve = dir.join("balanced-expected.tsv");
    homdip(&["simulate", p(&configs().join("balanced.toml")), "--out", p(&curve)]);
    let fit = fit_json(&curve, &[]);
    let elapsed = start.elapsed();
    let err = rel(fit.fwhm_ps.value, REPORTED_DIP_FWHM);
    Outcome {
        pass: err < C1_REL && elapsed < C1_TIME,
        detail: format!(
            "fitted FWHM {:.5} ps vs {REPORTED_DIP_FWHM} (rel {err:.2e} < {C1_REL}), {elapsed:.2?} < {C1_TIME:?}",
            fit.fwhm_ps.value
        ),
        waivable: false,
    }
}

fn criterion_2(dir: &Path) -> Outcome {
    let start = Instant::now();
    let fiber = DispersiveElement::from_dispersion_parameter(50_000.0, 4.9, 17.1, WAVELENGTH).unwrap();
    let plain = DipParameters::from_arms(&ArmConfig::default(), &ArmConfig::default(), t0()).unwrap();
    let module = DipParameters::from_arms(&ArmConfig::new(vec![fiber]), &ArmConfig::new(vec![fiber]), t0()).unwrap();
    let closed = rel(dip_fwhm(&module).unwrap(), dip_fwhm(&plain).unwrap());

    let plain_curve = dir.join("plain.tsv");
    let module_curve = dir.join("module.tsv");
    homdip(&["simulate", p(&configs().join("balanced.toml")), "--out", p(&plain_curve)]);
    homdip(&["simulate", p(&configs().join("module_50km.toml")), "--out", p(&module_curve)]);
    let a = fit_json(&plain_curve, &["--mc-trials", "0"]).fwhm_ps.value;
    let b = fit_json(&module_curve, &["--mc-trials", "0"]).fwhm_ps.value;
    let quad = rel(b, a);
    let elapsed = start.elapsed();
    Outcome {
        pass: closed < C2_CLOSED_REL && quad < C2_QUAD_REL && elapsed < C2_TIME,
        detail: format!(
            "closed-form change {closed:.1e} < {C2_CLOSED_REL:.0e}, quadrature fit {b:.6} vs {a:.6} ps \
             (rel {quad:.1e} < {C2_QUAD_REL:.0e}), {elapsed:.2?} < {C2_TIME:?}"
        ),
        waivable: false,
    }
}

fn criterion_3() -> Outcome {
    let t = pulse_width_from_dip(REPORTED_DIP_FWHM).unwrap();
    let err = rel(t, PULSE_FWHM);
    Outcome {
        pass: err < C3_REL,
        detail: format!("pulse width {t:.5} ps vs {PULSE_FWHM} (rel {err:.2e} < {C3_REL})"),
        waivable: false,
    }
}

fn criterion_4(dir: &Path) -> Outcome {
    let start = Instant::now();
    let base = ExperimentFile::parse(&std::fs::read_to_string(configs().join("unbalanced_80m.toml")).unwrap()).unwrap();
    let mut covered = 0;
    let mut worst_pull: f64 = 0.0;
    for seed in 0..C4_SEEDS {
        let d_true = 14.0 + 3.0 * seed as f64 / (C4_SEEDS - 1) as f64;
        let mut experiment = base.clone();
        experiment.arm_a.elements[0].dispersion_ps_per_nm_km = Some(d_true);
        let config = dir.join(format!("c4-{seed}.toml"));
        std::fs::write(&config, experiment.to_toml()).unwrap();
        let curve = dir.join(format!("c4-{seed}.tsv"));
        let seed_arg = (1000 + seed).to_string();
        homdip(&["synth", p(&config), "--seed", &seed_arg, "--out", p(&curve)]);
        let out = homdip(&[
            "extract-dispersion",
            p(&curve),
            "--t0-fwhm",
            "0.732",
            "--t0-fwhm-sigma",
            "0.006",
            "--length",
            "80",
            "--wavelength",
            "1565",
        ]);
        let report: DispersionReport = serde_json::from_slice(&out.stdout).unwrap();
        let d = report.dispersion_abs_ps_per_nm_km;
        let pull = (d.value - d_true) / d.sigma;
        worst_pull = worst_pull.max(pull.abs());
        if pull.abs() <= 1.0 {
            covered += 1;
        }
    }

    let out = homdip(&[
        "extract-dispersion",
        "--dip-fwhm",
        "4.123",
        "--t0-fwhm",
        "0.732",
        "--length",
        "80",
        "--wavelength",
        "1565",
    ]);
    let reported: DispersionReport = serde_json::from_slice(&out.stdout).unwrap();
    let reported_d = reported.dispersion_abs_ps_per_nm_km.value;
    let reported_err = rel(reported_d, C4_REPORTED_D);
    let elapsed = start.elapsed();

    let coverage_ok = covered >= C4_MIN_COVERED;
    let reported_ok = reported_err < C4_REPORTED_REL;
    Outcome {
        pass: coverage_ok && reported_ok && elapsed < C4_TIME,
        detail: format!(
            "coverage {covered}/{C4_SEEDS} within 1 sigma (need {C4_MIN_COVERED}, worst pull {worst_pull:.2}) [{}]; \
             reported numbers D = {reported_d:.3} vs {C4_REPORTED_D} (rel {reported_err:.3} < {C4_REPORTED_REL}) [{}]; \
             {elapsed:.2?} < {C4_TIME:?}",
            verdict(coverage_ok),
            verdict(reported_ok),
        ),
        waivable: reported_ok && elapsed < C4_TIME,
    }
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let det = DetectionModel::ideal();
    let grid = FrequencyGrid::for_pulse_width(t0()).unwrap();
    let pulse = GaussianPulse::new(t0(), WAVELENGTH, 1.0, 1.0).unwrap();
    let spec = gaussian_spectral_amplitude(&pulse, &grid).unwrap();
    let mut worst: f64 = 0.0;
    let per_config = 10;
    for _ in 0..C5_SAMPLES / per_config {
        let alpha = rng.random_range(-10.0..10.0);
        let delta_tau = rng.random_range(-5.0..5.0);
        let arm = ArmConfig::new(vec![DispersiveElement::new(1000.0, delta_tau / 1000.0, alpha).unwrap()]);
        let inter = Interferometer::new(spec.clone(), spec.clone(), arm, ArmConfig::default()).unwrap();
        let params = DipParameters::new(delta_tau, alpha, t0()).unwrap();
        let d = dip_fwhm(&params).unwrap();
        for _ in 0..per_config {
            let tau = delta_tau + rng.random_range(-3.0..3.0) * d;
            let quad = inter.normalized_probability(tau, &det);
            let closed = coincidence_probability_gaussian(&params, tau).unwrap();
            worst = worst.max((quad - closed).abs());
        }
    }
    let elapsed = start.elapsed();
    Outcome {
        pass: worst < C5_ABS && elapsed < C5_TIME,
        detail: format!("max |quadrature - closed form| {worst:.1e} < {C5_ABS:.0e} over {C5_SAMPLES} samples, {elapsed:.2?} < {C5_TIME:?}"),
        waivable: false,
    }
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let averaged = TermOptions::default();
    let resolved = TermOptions {
        average_oscillating: false,
        ..TermOptions::default()
    };
    let (mut worst_sum, mut worst_78, mut worst_envelope): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..C6_CASES {
        let ta: f64 = rng.random_range(0.3..0.8);
        let tb: f64 = rng.random_range(0.3..0.8);
        let grid = FrequencyGrid::new(2048, 16.0 / ta.min(tb)).unwrap();
        let spec = |t0: f64, n: f64| gaussian_spectral_amplitude(&GaussianPulse::new(t0, WAVELENGTH, n, 1.0).unwrap(), &grid);
        let sa = spec(ta, rng.random_range(0.01..3.0)).unwrap();
        let sb = spec(tb, rng.random_range(0.01..3.0)).unwrap();
        let mut arm = || {
            let delay: f64 = rng.random_range(-5.0..5.0);
            ArmConfig::new(vec![DispersiveElement::new(1000.0, delay / 1000.0, rng.random_range(-20.0..20.0)).unwrap()])
        };
        let (aa, ab) = (arm(), arm());
        let det = DetectionModel::new(
            rng.random_range(0.05..1.0),
            rng.random_range(0.05..1.0),
            rng.random_range(0.0..2.0),
            rng.random_range(0.0..2.0),
        )
        .unwrap();
        let inter = Interferometer::new(sa, sb, aa, ab).unwrap();
        let tau = inter.delta_tau() + rng.random_range(-6.0..6.0);

        let terms = inter.terms(tau, &det, &averaged);
        let rate = inter.coincidence_rate(tau, &det);
        worst_sum = worst_sum.max((terms.sum() - rate).abs() / rate);
        worst_78 = worst_78.max((terms.n7 - terms.n8).abs() / terms.n7.abs().max(1e-300));
        let full = inter.terms(tau, &det, &resolved);
        let scale = inter.baseline_rate(&det);
        worst_sum = worst_sum.max((full.sum() - inter.coincidence_rate_resolved(tau, &det)).abs() / scale);
    }

    // With a real overlap the oscillating pair is exactly -(η_Cη_D/2)cos(2ω0τ)J².
    let grid = FrequencyGrid::for_pulse_width(t0()).unwrap();
    let spec = gaussian_spectral_amplitude(&GaussianPulse::new(t0(), WAVELENGTH, 1.0, 1.0).unwrap(), &grid).unwrap();
    let arm = ArmConfig::new(vec![DispersiveElement::delay_line(0.3).unwrap()]);
    let inter = Interferometer::new(spec.clone(), spec, arm, ArmConfig::default()).unwrap();
    let det = DetectionModel::coherent(0.68, 0.68).unwrap();
    let omega0 = units::angular_frequency(WAVELENGTH);
    for i in 0..200 {
        let tau = -0.2 + 1e-3 * i as f64;
        let j = inter.overlap(tau);
        let expected = -(0.68 * 0.68 / 2.0) * (2.0 * omega0 * tau).cos() * j.norm_sqr();
        let pair = inter.terms(tau, &det, &resolved).oscillating_pair();
        worst_envelope = worst_envelope.max((pair - expected).abs() / inter.baseline_rate(&det));
    }
    Outcome {
        pass: worst_sum < C6_REL && worst_78 < C6_REL && worst_envelope < C6_REL,
        detail: format!(
            "{C6_CASES} configs: sum vs rate {worst_sum:.1e}, |n7 - n8| {worst_78:.1e}, \
             n3 + n4 vs carrier envelope {worst_envelope:.1e} (all < {C6_REL:.0e})"
        ),
        waivable: false,
    }
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let pulse = GaussianPulse::coherent_from_fwhm(PULSE_FWHM, WAVELENGTH, 1.0).unwrap();
    let fiber = DispersiveElement::from_dispersion_parameter(50_000.0, 4.9, 17.1, WAVELENGTH).unwrap();
    let profile = propagated_profile(&pulse, fiber.gdd()).unwrap();
    let width_ns = jitter_convolved_profile(&profile, 270.0).unwrap().fwhm().unwrap() / 1000.0;
    let elapsed = start.elapsed();
    Outcome {
        pass: (C7_RANGE_NS.0..=C7_RANGE_NS.1).contains(&width_ns) && elapsed < C7_TIME,
        detail: format!("50 km + 270 ps jitter FWHM {width_ns:.3} ns in {C7_RANGE_NS:?}, {elapsed:.2?} < {C7_TIME:?}"),
        waivable: false,
    }
}

fn criterion_8(dir: &Path) -> Outcome {
    let base = ExperimentFile::parse(&std::fs::read_to_string(configs().join("balanced.toml")).unwrap()).unwrap();
    let sigma_at = |seconds: f64, seed: u64| {
        let mut experiment = base.clone();
        experiment.scan.integration_time_s = seconds;
        let config = dir.join(format!("c8-{seconds}.toml"));
        std::fs::write(&config, experiment.to_toml()).unwrap();
        let curve = dir.join(format!("c8-{seconds}-{seed}.tsv"));
        homdip(&["synth", p(&config), "--seed", &seed.to_string(), "--out", p(&curve)]);
        fit_json(&curve, &[]).fwhm_ps.sigma
    };
    let seeds = [11, 12, 13];
    let short: f64 = seeds.iter().map(|&s| sigma_at(12.5, s)).sum::<f64>() / seeds.len() as f64;
    let long: f64 = seeds.iter().map(|&s| sigma_at(50.0, s)).sum::<f64>() / seeds.len() as f64;
    let ratio = short / long;
    let scaling_ok = rel(ratio, 2.0) < C8_RATIO_REL;

    let config = configs().join("unbalanced_80m.toml");
    let files: Vec<Vec<u8>> = (0..2)
        .flat_map(|i| {
            let curve = dir.join(format!("c8-repeat-{i}.tsv"));
            homdip(&["synth", p(&config), "--seed", "99", "--out", p(&curve)]);
            let report = homdip(&["fit", p(&curve), "--seed", "5"]).stdout;
            [std::fs::read(&curve).unwrap(), report]
        })
        .collect();
    let identical = files[0] == files[2] && files[1] == files[3];
    let recorded = CurveFile::parse(std::str::from_utf8(&files[0]).unwrap()).unwrap().curve.metadata.seed == Some(99);
    Outcome {
        pass: scaling_ok && identical && recorded,
        detail: format!(
            "sigma_FWHM 12.5 s / 50 s = {ratio:.3} (2 within {C8_RATIO_REL}) [{}]; \
             repeated synth + fit byte-identical [{}], seed recorded [{}]",
            verdict(scaling_ok),
            verdict(identical),
            verdict(recorded)
        ),
        waivable: false,
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn main() {
    // Sanity of the Gaussian width conversion used throughout.
    assert!((fwhm_per_sigma() - 2.0 * (2.0 * 2f64.ln()).sqrt()).abs() < 1e-15);

    let dir = tempfile::tempdir().unwrap();
    let dir = dir.path();
    let results = [
        (1, criterion_1(dir)),
        (2, criterion_2(dir)),
        (3, criterion_3()),
        (4, criterion_4(dir)),
        (5, criterion_5()),
        (6, criterion_6()),
        (7, criterion_7()),
        (8, criterion_8(dir)),
    ];
    let mut unexpected = 0;
    for (n, outcome) in &results {
        println!("criterion {n}: {} — {}", verdict(outcome.pass), outcome.detail);
        if !outcome.pass {
            match EXPECTED_FAILURES.iter().find(|(k, _)| k == n) {
                Some((_, why)) if outcome.waivable => println!("    expected failure: {why}"),
                _ => unexpected += 1,
            }
        }
    }
    for (n, _) in EXPECTED_FAILURES {
        if results.iter().any(|(k, o)| k == n && o.pass) {
            println!("criterion {n}: listed as an expected failure but passed");
        }
    }
    if unexpected > 0 {
        println!("{unexpected} criteria failed");
        std::process::exit(1);
    }
}
