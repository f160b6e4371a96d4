//! Synthetic delay scans: expected coincidence counts, Poisson sampling,
//! detector timing jitter and singles rates.

use std::collections::BTreeMap;

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rustfft::FftPlanner;

use crate::error::{ensure_non_negative, ensure_positive, ensure_unit_interval, HomError, Result};
use crate::hom::{dip_fwhm, ArmConfig, DetectionModel, DipParameters, Interferometer};
use crate::wavepacket::{gaussian_spectral_amplitude, FrequencyGrid, GaussianPulse, TemporalProfile, DEFAULT_GRID_POINTS, DEFAULT_SPAN_T0};
use crate::Scalar;

pub const DEFAULT_MEAN_PHOTON_NUMBER: f64 = 0.015;
pub const DEFAULT_REPETITION_RATE_HZ: f64 = 5.0e6;
pub const DEFAULT_INTEGRATION_TIME_S: f64 = 10.0;
pub const DEFAULT_DETECTOR_EFFICIENCY: f64 = 0.68;
pub const DEFAULT_COINCIDENCE_WINDOW_PS: f64 = 1000.0;
pub const DEFAULT_TIMING_JITTER_PS: f64 = 270.0;
pub const DEFAULT_DELAY_POINTS: usize = 41;
/// Half-range of the default delay grid in dip widths.
pub const DEFAULT_DELAY_HALF_RANGE: f64 = 3.0;

/// Largest quadrature grid `expected_curve` will allocate.
const MAX_GRID_POINTS: usize = 1 << 22;
/// Overlap envelope widths kept clear of the quadrature's periodic images.
const ALIAS_GUARD_WIDTHS: f64 = 12.0;

/// One delay scan of the interferometer.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanConfig {
    pub arm_a: ArmConfig<f64>,
    pub arm_b: ArmConfig<f64>,
    pub pulse_a: GaussianPulse<f64>,
    pub pulse_b: GaussianPulse<f64>,
    /// Relative delays τ, ps, strictly increasing.
    pub delays: Vec<f64>,
    pub repetition_rate_hz: f64,
    /// Integration time per delay point, s.
    pub integration_time_s: f64,
    pub efficiency_c: f64,
    pub efficiency_d: f64,
    /// Coincidence window Δτ_c0, ps. Expected counts assume it is much
    /// longer than the dispersed wave-packets.
    pub coincidence_window_ps: f64,
    pub timing_jitter_fwhm_ps: f64,
    pub rng_seed: u64,
}

impl ScanConfig {
    /// Scan with the laboratory defaults: 0.015 photons per arm, 5 MHz,
    /// 10 s per point, 68 % detectors, 270 ps jitter, and 41 delays over
    /// ±3 dip widths around δτ.
    pub fn with_defaults(arm_a: ArmConfig<f64>, arm_b: ArmConfig<f64>, pulse_fwhm: f64, wavelength: f64) -> Result<Self> {
        let pulse = GaussianPulse::coherent_from_fwhm(pulse_fwhm, wavelength, DEFAULT_MEAN_PHOTON_NUMBER)?;
        let params = DipParameters::from_arms(&arm_a, &arm_b, pulse.t0_width)?;
        let config = Self {
            delays: default_delays(&params)?,
            arm_a,
            arm_b,
            pulse_a: pulse,
            pulse_b: pulse,
            repetition_rate_hz: DEFAULT_REPETITION_RATE_HZ,
            integration_time_s: DEFAULT_INTEGRATION_TIME_S,
            efficiency_c: DEFAULT_DETECTOR_EFFICIENCY,
            efficiency_d: DEFAULT_DETECTOR_EFFICIENCY,
            coincidence_window_ps: DEFAULT_COINCIDENCE_WINDOW_PS,
            timing_jitter_fwhm_ps: DEFAULT_TIMING_JITTER_PS,
            rng_seed: 0,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("repetition rate", self.repetition_rate_hz)?;
        ensure_positive("integration time", self.integration_time_s)?;
        ensure_unit_interval("detector C efficiency", self.efficiency_c)?;
        ensure_unit_interval("detector D efficiency", self.efficiency_d)?;
        ensure_positive("coincidence window", self.coincidence_window_ps)?;
        ensure_non_negative("timing jitter", self.timing_jitter_fwhm_ps)?;
        for pulse in [&self.pulse_a, &self.pulse_b] {
            GaussianPulse::new(pulse.t0_width, pulse.center_wavelength, pulse.mean_photon_number, pulse.source_g2)?;
        }
        let (la, lb) = (self.pulse_a.center_wavelength, self.pulse_b.center_wavelength);
        if (la - lb).abs() > 1e-9 * la {
            return Err(HomError::InvalidConfig(format!(
                "both arms must share one center wavelength, got {la} and {lb} nm"
            )));
        }
        if self.delays.is_empty() {
            return Err(HomError::InvalidConfig("delay grid is empty".into()));
        }
        for (i, &tau) in self.delays.iter().enumerate() {
            if !tau.is_finite() {
                return Err(HomError::NonFinite { what: "delay" });
            }
            if i > 0 && tau <= self.delays[i - 1] {
                return Err(HomError::InvalidConfig(format!(
                    "delay grid must be strictly increasing (point {i}: {tau} ps after {} ps)",
                    self.delays[i - 1]
                )));
            }
        }
        Ok(())
    }

    /// Pulses sent per delay point.
    pub fn trials(&self) -> f64 {
        self.repetition_rate_hz * self.integration_time_s
    }

    pub fn detection(&self) -> Result<DetectionModel<f64>> {
        DetectionModel::new(self.efficiency_c, self.efficiency_d, self.pulse_a.source_g2, self.pulse_b.source_g2)
    }

    pub fn delta_tau(&self) -> f64 {
        self.arm_a.group_delay() - self.arm_b.group_delay()
    }

    pub fn alpha(&self) -> f64 {
        self.arm_a.gdd() - self.arm_b.gdd()
    }

    /// Interferometer on a grid whose time window holds every scanned delay
    /// clear of the overlap's periodic images.
    pub fn interferometer(&self) -> Result<Interferometer<f64>> {
        let t_min = self.pulse_a.t0_width.min(self.pulse_b.t0_width);
        let t_max = self.pulse_a.t0_width.max(self.pulse_b.t0_width);
        let alpha = self.alpha();
        let envelope = (4.0 * t_max * t_max + (alpha / t_min).powi(2)).sqrt();
        let delta_tau = self.delta_tau();
        let reach = self.delays.iter().map(|tau| (tau - delta_tau).abs()).fold(0.0, f64::max);
        let window = 2.0 * (reach + ALIAS_GUARD_WIDTHS * envelope);
        let span = DEFAULT_SPAN_T0 / t_min;
        let needed = (window * span / std::f64::consts::TAU).ceil() as usize;
        let n = needed.max(DEFAULT_GRID_POINTS).next_power_of_two();
        if n > MAX_GRID_POINTS {
            return Err(HomError::InvalidConfig(format!(
                "delay scan reaches {reach:.1} ps from the dip; the quadrature grid would need {n} points"
            )));
        }
        let grid = FrequencyGrid::new(n, span)?;
        Interferometer::new(
            gaussian_spectral_amplitude(&self.pulse_a, &grid)?,
            gaussian_spectral_amplitude(&self.pulse_b, &grid)?,
            self.arm_a.clone(),
            self.arm_b.clone(),
        )
    }
}

/// `DEFAULT_DELAY_POINTS` delays spanning δτ ± 3d.
pub fn default_delays(params: &DipParameters<f64>) -> Result<Vec<f64>> {
    let d = dip_fwhm(params)?;
    let half = DEFAULT_DELAY_HALF_RANGE * d;
    let n = DEFAULT_DELAY_POINTS;
    Ok((0..n)
        .map(|i| params.delta_tau - half + 2.0 * half * i as f64 / (n - 1) as f64)
        .collect())
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CurveMetadata {
    /// Seed the counts were drawn with.
    pub seed: Option<u64>,
    /// Free-form `key → value` description of how the curve was produced.
    pub notes: BTreeMap<String, String>,
}

/// Coincidences per delay point: expected values, sampled counts, or both.
#[derive(Debug, Clone, PartialEq)]
pub struct HomCurve {
    pub delays: Vec<f64>,
    pub expected: Option<Vec<f64>>,
    pub counts: Option<Vec<u64>>,
    pub metadata: CurveMetadata,
}

impl HomCurve {
    pub fn from_expected(delays: Vec<f64>, expected: Vec<f64>) -> Result<Self> {
        Self::new(delays, Some(expected), None)
    }

    pub fn from_counts(delays: Vec<f64>, counts: Vec<u64>) -> Result<Self> {
        Self::new(delays, None, Some(counts))
    }

    pub fn new(delays: Vec<f64>, expected: Option<Vec<f64>>, counts: Option<Vec<u64>>) -> Result<Self> {
        let curve = Self {
            delays,
            expected,
            counts,
            metadata: CurveMetadata::default(),
        };
        curve.validate()?;
        Ok(curve)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.delays.len();
        if self.expected.is_none() && self.counts.is_none() {
            return Err(HomError::InvalidConfig("curve carries neither expected values nor counts".into()));
        }
        if self.expected.as_ref().is_some_and(|e| e.len() != n) || self.counts.as_ref().is_some_and(|c| c.len() != n)
        {
            return Err(HomError::InvalidConfig("curve columns differ in length".into()));
        }
        if self.delays.iter().any(|t| !t.is_finite()) {
            return Err(HomError::NonFinite { what: "delay" });
        }
        if let Some(expected) = &self.expected {
            for (index, &value) in expected.iter().enumerate() {
                if !value.is_finite() {
                    return Err(HomError::NonFinite { what: "expected count" });
                }
                if value < 0.0 {
                    return Err(HomError::NegativeRate { index, value });
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.delays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delays.is_empty()
    }

    /// Values to fit: the counts when present, otherwise the expectation.
    pub fn observations(&self) -> Vec<f64> {
        match (&self.counts, &self.expected) {
            (Some(counts), _) => counts.iter().map(|&c| c as f64).collect(),
            (None, Some(expected)) => expected.clone(),
            (None, None) => Vec::new(),
        }
    }
}

/// Expected coincidences per delay point: the phase-averaged rate per pulse
/// times the number of pulses. Deterministic.
pub fn expected_curve(config: &ScanConfig) -> Result<HomCurve> {
    config.validate()?;
    let detection = config.detection()?;
    let inter = config.interferometer()?;
    let trials = config.trials();
    let expected = config
        .delays
        .iter()
        .map(|&tau| inter.coincidence_rate(tau, &detection) * trials)
        .collect();
    let mut curve = HomCurve::from_expected(config.delays.clone(), expected)?;
    let notes = &mut curve.metadata.notes;
    notes.insert("delta_tau_ps".into(), format!("{}", config.delta_tau()));
    notes.insert("alpha_ps2".into(), format!("{}", config.alpha()));
    notes.insert("trials_per_point".into(), format!("{trials}"));
    notes.insert(
        "baseline_counts".into(),
        format!("{}", inter.baseline_rate(&detection) * trials),
    );
    Ok(curve)
}

/// Draws one Poisson count per point from the expected values. Point `i`
/// uses its own random stream `i` of the seeded generator, so the result
/// does not depend on the order in which points are drawn.
pub fn sample_counts(curve: &HomCurve, seed: u64) -> Result<HomCurve> {
    curve.validate()?;
    let expected = curve.expected.as_ref().ok_or_else(|| {
        HomError::InvalidConfig("sampling needs expected values".into())
    })?;
    let counts = expected
        .iter()
        .enumerate()
        .map(|(i, &mean)| poisson_draw(mean, seed, i as u64))
        .collect::<Result<Vec<_>>>()?;
    let mut sampled = curve.clone();
    sampled.counts = Some(counts);
    sampled.metadata.seed = Some(seed);
    Ok(sampled)
}

/// One Poisson variate from stream `stream` of the generator seeded with
/// `seed`.
pub fn poisson_draw(mean: f64, seed: u64, stream: u64) -> Result<u64> {
    if !mean.is_finite() {
        return Err(HomError::NonFinite { what: "Poisson mean" });
    }
    if mean < 0.0 {
        return Err(HomError::NegativeRate {
            index: stream as usize,
            value: mean,
        });
    }
    if mean == 0.0 {
        return Ok(0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let law = Poisson::new(mean).map_err(|e| HomError::InvalidConfig(format!("Poisson mean {mean}: {e}")))?;
    Ok(law.sample(&mut rng) as u64)
}

/// Expected singles per detector and delay point, `η·(N_A + N_B)/2` per
/// pulse. A lossless 50:50 splitter conserves the mean photon number, so
/// this does not depend on τ.
pub fn singles_rates(config: &ScanConfig) -> Result<(f64, f64)> {
    config.validate()?;
    let per_port = 0.5 * (config.pulse_a.mean_photon_number + config.pulse_b.mean_photon_number) * config.trials();
    Ok((config.efficiency_c * per_port, config.efficiency_d * per_port))
}

/// Smears a temporal profile with a Gaussian timing response of the given
/// FWHM. The output is padded on both sides so no flux is lost.
pub fn jitter_convolved_profile<T: Scalar>(profile: &TemporalProfile<T>, jitter_fwhm: T) -> Result<TemporalProfile<T>> {
    ensure_non_negative("timing jitter", jitter_fwhm.as_f64())?;
    ensure_positive("profile time step", profile.dt.as_f64())?;
    if jitter_fwhm == T::zero() || profile.is_empty() {
        return Ok(profile.clone());
    }
    let sigma = jitter_fwhm / T::lit(2.0 * (2.0 * std::f64::consts::LN_2).sqrt());
    let pad = (T::lit(8.0) * sigma / profile.dt).ceil().as_f64() as usize;
    let n = (profile.len() + 2 * pad).next_power_of_two();
    let mut buffer = vec![Complex::new(T::zero(), T::zero()); n];
    for (slot, &value) in buffer[pad..].iter_mut().zip(&profile.intensity) {
        *slot = Complex::new(value, T::zero());
    }

    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buffer);
    let step = T::TAU() / (T::lit(n as f64) * profile.dt);
    let half = T::lit(0.5);
    let scale = T::one() / T::lit(n as f64);
    for (k, z) in buffer.iter_mut().enumerate() {
        let signed = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
        let omega = T::lit(signed) * step;
        *z = *z * ((-half * sigma * sigma * omega * omega).exp() * scale);
    }
    planner.plan_fft_inverse(n).process(&mut buffer);

    let len = (profile.len() + 2 * pad).min(n);
    Ok(TemporalProfile {
        t_start: profile.t_start - T::lit(pad as f64) * profile.dt,
        dt: profile.dt,
        intensity: buffer[..len].iter().map(|z| z.re.max(T::zero())).collect(),
    })
}

/// Gaussian intensity profile of the given FWHM sampled every `dt` over
/// ±`half_range`, for checks and plots.
pub fn gaussian_profile<T: Scalar>(fwhm: T, dt: T, half_range: T) -> Result<TemporalProfile<T>> {
    ensure_positive("FWHM", fwhm.as_f64())?;
    ensure_positive("time step", dt.as_f64())?;
    ensure_positive("half range", half_range.as_f64())?;
    let sigma = fwhm / T::lit(2.0 * (2.0 * std::f64::consts::LN_2).sqrt());
    let n = (T::lit(2.0) * half_range / dt).ceil().as_f64() as usize + 1;
    let t_start = -T::lit((n / 2) as f64) * dt;
    let intensity = (0..n)
        .map(|k| {
            let t = t_start + T::lit(k as f64) * dt;
            (-(t * t) / (T::lit(2.0) * sigma * sigma)).exp()
        })
        .collect();
    Ok(TemporalProfile { t_start, dt, intensity })
}

/// Temporal intensity profile of `pulse` after a chain of total GDD `gdd`.
pub fn propagated_profile(pulse: &GaussianPulse<f64>, gdd: f64) -> Result<TemporalProfile<f64>> {
    let grid = FrequencyGrid::for_propagation(pulse.t0_width, gdd)?;
    let spec = gaussian_spectral_amplitude(pulse, &grid)?;
    let spec = crate::wavepacket::apply_phase(&spec, 0.0, gdd);
    Ok(crate::wavepacket::to_temporal_profile(&spec))
}
