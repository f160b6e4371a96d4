//! Declarative experiment description in TOML. Every key carries its unit.
//!
//! ```toml
//! [source]
//! pulse_fwhm_ps = 0.732
//! wavelength_nm = 1565.0
//! mean_photon_number = 0.015
//!
//! [[arm_a.elements]]
//! name = "fiber under test"
//! length_m = 80.0
//! beta1_ps_per_m = 4.9
//! dispersion_ps_per_nm_km = 14.33
//!
//! [scan]
//! integration_time_s = 60.0
//! ```

use homdip::experiment::{
    default_delays, ScanConfig, DEFAULT_COINCIDENCE_WINDOW_PS, DEFAULT_DETECTOR_EFFICIENCY,
    DEFAULT_INTEGRATION_TIME_S, DEFAULT_MEAN_PHOTON_NUMBER, DEFAULT_REPETITION_RATE_HZ, DEFAULT_TIMING_JITTER_PS,
};
use homdip::hom::{ArmConfig, DipParameters};
use homdip::units;
use homdip::wavepacket::{DispersiveElement, GaussianPulse};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentFile {
    pub source: Source,
    #[serde(default)]
    pub arm_a: Arm,
    #[serde(default)]
    pub arm_b: Arm,
    #[serde(default)]
    pub detection: Detection,
    #[serde(default)]
    pub scan: Scan,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Source {
    pub pulse_fwhm_ps: f64,
    pub wavelength_nm: f64,
    /// Per arm, unless the arm overrides it.
    #[serde(default = "default_photon_number")]
    pub mean_photon_number: f64,
    #[serde(default = "one")]
    pub g2: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Arm {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_photon_number: Option<f64>,
    #[serde(default)]
    pub elements: Vec<Element>,
}

/// A length of medium: β₁ plus either β₂ or D at a reference wavelength.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Element {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub length_m: f64,
    #[serde(default)]
    pub beta1_ps_per_m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta2_ps2_per_km: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dispersion_ps_per_nm_km: Option<f64>,
    /// Wavelength D refers to; the source wavelength when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_wavelength_nm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Detection {
    #[serde(default = "default_efficiency")]
    pub efficiency_c: f64,
    #[serde(default = "default_efficiency")]
    pub efficiency_d: f64,
    #[serde(default = "default_window")]
    pub coincidence_window_ps: f64,
    #[serde(default = "default_jitter")]
    pub timing_jitter_fwhm_ps: f64,
}

impl Default for Detection {
    fn default() -> Self {
        Self {
            efficiency_c: DEFAULT_DETECTOR_EFFICIENCY,
            efficiency_d: DEFAULT_DETECTOR_EFFICIENCY,
            coincidence_window_ps: DEFAULT_COINCIDENCE_WINDOW_PS,
            timing_jitter_fwhm_ps: DEFAULT_TIMING_JITTER_PS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scan {
    #[serde(default = "default_repetition_rate")]
    pub repetition_rate_hz: f64,
    #[serde(default = "default_integration_time")]
    pub integration_time_s: f64,
    /// Explicit delays. Mutually exclusive with `delay_range`; with neither,
    /// 41 points over ±3 dip widths around the expected centre.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delays_ps: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delay_range: Option<DelayRange>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Default for Scan {
    fn default() -> Self {
        Self {
            repetition_rate_hz: DEFAULT_REPETITION_RATE_HZ,
            integration_time_s: DEFAULT_INTEGRATION_TIME_S,
            delays_ps: None,
            delay_range: None,
            seed: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DelayRange {
    pub start_ps: f64,
    pub stop_ps: f64,
    pub points: usize,
}

fn default_photon_number() -> f64 {
    DEFAULT_MEAN_PHOTON_NUMBER
}
fn one() -> f64 {
    1.0
}
fn default_efficiency() -> f64 {
    DEFAULT_DETECTOR_EFFICIENCY
}
fn default_window() -> f64 {
    DEFAULT_COINCIDENCE_WINDOW_PS
}
fn default_jitter() -> f64 {
    DEFAULT_TIMING_JITTER_PS
}
fn default_repetition_rate() -> f64 {
    DEFAULT_REPETITION_RATE_HZ
}
fn default_integration_time() -> f64 {
    DEFAULT_INTEGRATION_TIME_S
}

fn schema(msg: impl Into<String>) -> CliError {
    CliError::Schema(msg.into())
}

fn positive(field: &str, value: f64) -> Result<(), CliError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(schema(format!("{field}: must be a positive number, got {value}")))
    }
}

fn non_negative(field: &str, value: f64) -> Result<(), CliError> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(schema(format!("{field}: must be a non-negative number, got {value}")))
    }
}

fn unit_interval(field: &str, value: f64) -> Result<(), CliError> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(schema(format!("{field}: must lie in [0, 1], got {value}")))
    }
}

impl ExperimentFile {
    /// Parses and validates. Unknown keys and out-of-range values are
    /// schema errors naming the offending field.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let file: Self = toml::from_str(text).map_err(|e| schema(e.to_string()))?;
        file.validate()?;
        Ok(file)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("experiment file serialises")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        positive("source.pulse_fwhm_ps", self.source.pulse_fwhm_ps)?;
        positive("source.wavelength_nm", self.source.wavelength_nm)?;
        non_negative("source.mean_photon_number", self.source.mean_photon_number)?;
        non_negative("source.g2", self.source.g2)?;
        for (arm_name, arm) in [("arm_a", &self.arm_a), ("arm_b", &self.arm_b)] {
            if let Some(n) = arm.mean_photon_number {
                non_negative(&format!("{arm_name}.mean_photon_number"), n)?;
            }
            for (i, element) in arm.elements.iter().enumerate() {
                element.validate(&format!("{arm_name}.elements[{i}]"))?;
            }
        }
        unit_interval("detection.efficiency_c", self.detection.efficiency_c)?;
        unit_interval("detection.efficiency_d", self.detection.efficiency_d)?;
        positive("detection.coincidence_window_ps", self.detection.coincidence_window_ps)?;
        non_negative("detection.timing_jitter_fwhm_ps", self.detection.timing_jitter_fwhm_ps)?;
        positive("scan.repetition_rate_hz", self.scan.repetition_rate_hz)?;
        positive("scan.integration_time_s", self.scan.integration_time_s)?;
        match (&self.scan.delays_ps, &self.scan.delay_range) {
            (Some(_), Some(_)) => return Err(schema("scan: give either delays_ps or delay_range, not both")),
            (Some(delays), None) => {
                if delays.is_empty() {
                    return Err(schema("scan.delays_ps: must not be empty"));
                }
                for (i, pair) in delays.windows(2).enumerate() {
                    if pair[1].partial_cmp(&pair[0]) != Some(std::cmp::Ordering::Greater) {
                        return Err(schema(format!(
                            "scan.delays_ps[{}]: delays must be strictly increasing ({} after {})",
                            i + 1,
                            pair[1],
                            pair[0]
                        )));
                    }
                }
                if delays.iter().any(|t| !t.is_finite()) {
                    return Err(schema("scan.delays_ps: delays must be finite"));
                }
            }
            (None, Some(range)) => {
                if !(range.start_ps.is_finite() && range.stop_ps.is_finite() && range.stop_ps > range.start_ps) {
                    return Err(schema("scan.delay_range: stop_ps must exceed start_ps"));
                }
                if range.points < 2 {
                    return Err(schema("scan.delay_range.points: need at least 2"));
                }
            }
            (None, None) => {}
        }
        Ok(())
    }

    /// The same experiment with every default written out, dispersion
    /// given as β₂, and the delay grid listed explicitly.
    pub fn normalized(&self) -> Result<Self, CliError> {
        let wavelength = self.source.wavelength_nm;
        let arm = |arm: &Arm| Arm {
            mean_photon_number: Some(arm.mean_photon_number.unwrap_or(self.source.mean_photon_number)),
            elements: arm.elements.iter().map(|e| e.normalized(wavelength)).collect(),
        };
        let mut normal = Self {
            source: self.source.clone(),
            arm_a: arm(&self.arm_a),
            arm_b: arm(&self.arm_b),
            detection: self.detection.clone(),
            scan: Scan {
                delays_ps: None,
                delay_range: None,
                ..self.scan.clone()
            },
        };
        normal.scan.delays_ps = Some(self.delays()?);
        Ok(normal)
    }

    fn pulse(&self, arm: &Arm) -> Result<GaussianPulse<f64>, CliError> {
        let t0 = units::t0_from_fwhm(self.source.pulse_fwhm_ps);
        let n = arm.mean_photon_number.unwrap_or(self.source.mean_photon_number);
        GaussianPulse::new(t0, self.source.wavelength_nm, n, self.source.g2).map_err(|e| schema(e.to_string()))
    }

    fn arm_config(&self, arm: &Arm) -> Result<ArmConfig<f64>, CliError> {
        let elements = arm
            .elements
            .iter()
            .map(|e| e.to_element(self.source.wavelength_nm))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ArmConfig::new(elements))
    }

    /// Delays as listed, as a range, or the default grid around the dip.
    pub fn delays(&self) -> Result<Vec<f64>, CliError> {
        if let Some(delays) = &self.scan.delays_ps {
            return Ok(delays.clone());
        }
        if let Some(r) = self.scan.delay_range {
            let step = (r.stop_ps - r.start_ps) / (r.points - 1) as f64;
            return Ok((0..r.points).map(|i| r.start_ps + step * i as f64).collect());
        }
        let arm_a = self.arm_config(&self.arm_a)?;
        let arm_b = self.arm_config(&self.arm_b)?;
        let t0 = units::t0_from_fwhm(self.source.pulse_fwhm_ps);
        let params = DipParameters::from_arms(&arm_a, &arm_b, t0).map_err(CliError::Physics)?;
        default_delays(&params).map_err(CliError::Physics)
    }

    /// Scan configuration; `seed` overrides the file's seed.
    pub fn scan_config(&self, seed: Option<u64>) -> Result<ScanConfig, CliError> {
        let config = ScanConfig {
            arm_a: self.arm_config(&self.arm_a)?,
            arm_b: self.arm_config(&self.arm_b)?,
            pulse_a: self.pulse(&self.arm_a)?,
            pulse_b: self.pulse(&self.arm_b)?,
            delays: self.delays()?,
            repetition_rate_hz: self.scan.repetition_rate_hz,
            integration_time_s: self.scan.integration_time_s,
            efficiency_c: self.detection.efficiency_c,
            efficiency_d: self.detection.efficiency_d,
            coincidence_window_ps: self.detection.coincidence_window_ps,
            timing_jitter_fwhm_ps: self.detection.timing_jitter_fwhm_ps,
            rng_seed: seed.or(self.scan.seed).unwrap_or(0),
        };
        config.validate().map_err(|e| schema(e.to_string()))?;
        Ok(config)
    }
}

impl Element {
    fn validate(&self, path: &str) -> Result<(), CliError> {
        non_negative(&format!("{path}.length_m"), self.length_m)?;
        if !self.beta1_ps_per_m.is_finite() {
            return Err(schema(format!("{path}.beta1_ps_per_m: must be finite")));
        }
        match (self.beta2_ps2_per_km, self.dispersion_ps_per_nm_km) {
            (Some(_), Some(_)) => Err(schema(format!(
                "{path}: give either beta2_ps2_per_km or dispersion_ps_per_nm_km, not both"
            ))),
            (None, None) => Err(schema(format!(
                "{path}: missing beta2_ps2_per_km or dispersion_ps_per_nm_km"
            ))),
            (Some(beta2), None) => {
                if self.reference_wavelength_nm.is_some() {
                    return Err(schema(format!(
                        "{path}.reference_wavelength_nm: only meaningful with dispersion_ps_per_nm_km"
                    )));
                }
                if beta2.is_finite() {
                    Ok(())
                } else {
                    Err(schema(format!("{path}.beta2_ps2_per_km: must be finite")))
                }
            }
            (None, Some(d)) => {
                if !d.is_finite() {
                    return Err(schema(format!("{path}.dispersion_ps_per_nm_km: must be finite")));
                }
                if let Some(w) = self.reference_wavelength_nm {
                    positive(&format!("{path}.reference_wavelength_nm"), w)?;
                }
                Ok(())
            }
        }
    }

    fn beta2(&self, source_wavelength: f64) -> f64 {
        match (self.beta2_ps2_per_km, self.dispersion_ps_per_nm_km) {
            (Some(beta2), _) => beta2,
            (None, Some(d)) => {
                units::dispersion_parameter_to_beta2(d, self.reference_wavelength_nm.unwrap_or(source_wavelength))
            }
            (None, None) => 0.0,
        }
    }

    fn normalized(&self, source_wavelength: f64) -> Self {
        Self {
            name: self.name.clone(),
            length_m: self.length_m,
            beta1_ps_per_m: self.beta1_ps_per_m,
            beta2_ps2_per_km: Some(self.beta2(source_wavelength)),
            dispersion_ps_per_nm_km: None,
            reference_wavelength_nm: None,
        }
    }

    fn to_element(&self, source_wavelength: f64) -> Result<DispersiveElement<f64>, CliError> {
        DispersiveElement::new(self.length_m, self.beta1_ps_per_m, self.beta2(source_wavelength))
            .map_err(|e| schema(e.to_string()))
    }
}
