//! JSON and plain-text renderings of fit and dispersion results.

use homdip::fitting::{DispersionEstimate, UncertaintySource};
use homdip::{FitResult, Measured};
use serde::{Deserialize, Serialize};

pub const FIT_SCHEMA: &str = "homdip-fit/1";
pub const DISPERSION_SCHEMA: &str = "homdip-dispersion/1";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Value {
    pub value: f64,
    pub sigma: f64,
}

impl From<Measured> for Value {
    fn from(m: Measured) -> Self {
        Self {
            value: m.value,
            sigma: m.sigma,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitReport {
    pub schema: String,
    pub baseline_counts: Value,
    pub visibility: Value,
    pub center_ps: Value,
    pub fwhm_ps: Value,
    /// FWHM/√2: the source pulse width if the arms are dispersion-balanced.
    pub pulse_fwhm_ps: Value,
    /// "covariance" or "monte-carlo".
    pub uncertainty_source: String,
    pub uncertainty_defined: bool,
    pub mc_trials: usize,
    pub failed_trials: usize,
    pub mc_seed: u64,
    pub iterations: usize,
    pub residual_norm: f64,
    pub points: usize,
}

impl FitReport {
    pub fn new(fit: &FitResult, mc_seed: u64) -> Self {
        Self {
            schema: FIT_SCHEMA.into(),
            baseline_counts: fit.baseline.into(),
            visibility: fit.visibility.into(),
            center_ps: fit.center.into(),
            fwhm_ps: fit.fwhm.into(),
            pulse_fwhm_ps: fit.pulse_width().into(),
            uncertainty_source: match fit.uncertainty_source {
                UncertaintySource::Covariance => "covariance",
                UncertaintySource::MonteCarlo => "monte-carlo",
            }
            .into(),
            uncertainty_defined: fit.uncertainty_defined,
            mc_trials: fit.mc_trials,
            failed_trials: fit.failed_trials,
            mc_seed,
            iterations: fit.iterations,
            residual_norm: fit.residual_norm,
            points: fit.points,
        }
    }

    /// Model y(τ) = B·[1 − V·exp(−(τ−τ₀)²/2σ²)] with the reported values.
    pub fn model(&self, tau: f64) -> f64 {
        let sigma = self.fwhm_ps.value / homdip::fitting::fwhm_per_sigma();
        let x = (tau - self.center_ps.value) / sigma;
        self.baseline_counts.value * (1.0 - self.visibility.value * (-0.5 * x * x).exp())
    }

    pub fn text(&self) -> String {
        let flag = if self.uncertainty_defined { "" } else { "  (uncertainties undefined)" };
        format!(
            "dip fit ({} points, {} iterations, residual norm {:.6e})\n\
             baseline    {}\n\
             visibility  {}\n\
             center      {} ps\n\
             fwhm        {} ps\n\
             pulse fwhm  {} ps\n\
             uncertainty {} ({} trials, {} failed, seed {}){flag}\n",
            self.points,
            self.iterations,
            self.residual_norm,
            pm(self.baseline_counts),
            pm(self.visibility),
            pm(self.center_ps),
            pm(self.fwhm_ps),
            pm(self.pulse_fwhm_ps),
            self.uncertainty_source,
            self.mc_trials,
            self.failed_trials,
            self.mc_seed,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DispersionInputsReport {
    pub dip_fwhm_ps: Value,
    pub pulse_fwhm_ps: Value,
    pub length_m: f64,
    pub wavelength_nm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DispersionReport {
    pub schema: String,
    /// |α|; the dip does not reveal the sign.
    pub alpha_ps2: Value,
    pub beta2_abs_ps2_per_km: Value,
    pub dispersion_abs_ps_per_nm_km: Value,
    pub dispersion_sigma_dip_only: f64,
    pub dispersion_sigma_pulse_only: f64,
    pub clamped_fraction: f64,
    pub near_floor: bool,
    pub mc_trials: usize,
    pub mc_seed: u64,
    pub inputs: DispersionInputsReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitReport>,
}

impl DispersionReport {
    pub fn new(estimate: &DispersionEstimate, mc_seed: u64, fit: Option<FitReport>) -> Self {
        let inputs = estimate.inputs;
        Self {
            schema: DISPERSION_SCHEMA.into(),
            alpha_ps2: estimate.alpha.into(),
            beta2_abs_ps2_per_km: estimate.beta2.into(),
            dispersion_abs_ps_per_nm_km: estimate.dispersion.into(),
            dispersion_sigma_dip_only: estimate.dispersion_sigma_dip_only,
            dispersion_sigma_pulse_only: estimate.dispersion_sigma_pulse_only,
            clamped_fraction: estimate.clamped_fraction,
            near_floor: estimate.near_floor,
            mc_trials: estimate.mc_trials,
            mc_seed,
            inputs: DispersionInputsReport {
                dip_fwhm_ps: inputs.dip_fwhm.into(),
                pulse_fwhm_ps: inputs.pulse_fwhm.into(),
                length_m: inputs.length_m,
                wavelength_nm: inputs.wavelength_nm,
            },
            fit,
        }
    }

    pub fn text(&self) -> String {
        let mut out = String::new();
        if let Some(fit) = &self.fit {
            out.push_str(&fit.text());
            out.push('\n');
        }
        out.push_str(&format!(
            "dispersion of a {} m element at {} nm\n\
             dip fwhm    {} ps\n\
             pulse fwhm  {} ps\n\
             |alpha|     {} ps^2\n\
             |beta2|     {} ps^2/km\n\
             |D|         {} ps/(nm km)  (dip only ±{:.4}, pulse only ±{:.4})\n\
             monte carlo {} trials, seed {}, {:.1}% below the dispersion-free width\n",
            self.inputs.length_m,
            self.inputs.wavelength_nm,
            pm(self.inputs.dip_fwhm_ps),
            pm(self.inputs.pulse_fwhm_ps),
            pm(self.alpha_ps2),
            pm(self.beta2_abs_ps2_per_km),
            pm(self.dispersion_abs_ps_per_nm_km),
            self.dispersion_sigma_dip_only,
            self.dispersion_sigma_pulse_only,
            self.mc_trials,
            self.mc_seed,
            100.0 * self.clamped_fraction,
        ));
        if self.near_floor {
            out.push_str("warning: dip width lies within 1 sigma of the dispersion-free width\n");
        }
        out
    }
}

fn pm(v: Value) -> String {
    format!("{:.6} ± {:.6}", v.value, v.sigma)
}
