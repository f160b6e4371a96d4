use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::Measured;
use crate::error::{ensure_non_negative, ensure_positive, HomError, Result};
use crate::hom::{extract_alpha_from_fwhm, min_dip_fwhm};
use crate::units::{self, METERS_PER_KM, SPEED_OF_LIGHT_NM_PER_PS};

/// Measured dip and pulse widths plus the geometry of the unknown element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionInputs {
    /// Dip FWHM d, ps.
    pub dip_fwhm: Measured,
    /// Source pulse intensity FWHM, ps.
    pub pulse_fwhm: Measured,
    /// Length of the element present in only one arm, m.
    pub length_m: f64,
    pub wavelength_nm: f64,
}

/// Second-order dispersion of the unbalanced element.
///
/// The dip is even in α, so only magnitudes are observable: `alpha`,
/// `beta2` and `dispersion` are |α|, |β₂| and |D|.
#[derive(Debug, Clone, PartialEq)]
pub struct DispersionEstimate {
    /// |α|, ps².
    pub alpha: Measured,
    /// |β₂|, ps²/km.
    pub beta2: Measured,
    /// |D|, ps/(nm·km).
    pub dispersion: Measured,
    /// σ of |D| with the pulse width held at its nominal value.
    pub dispersion_sigma_dip_only: f64,
    /// σ of |D| with the dip width held at its nominal value.
    pub dispersion_sigma_pulse_only: f64,
    pub inputs: DispersionInputs,
    pub mc_trials: usize,
    /// Fraction of Monte-Carlo draws that fell below the dispersion-free
    /// width and were counted as α = 0.
    pub clamped_fraction: f64,
    /// The dip lies within 1σ of the dispersion-free width, where the
    /// inversion is strongly nonlinear.
    pub near_floor: bool,
}

/// |β₂| → |D| at `wavelength` nm: 2πc/λ².
fn dispersion_per_beta2(wavelength: f64) -> f64 {
    std::f64::consts::TAU * SPEED_OF_LIGHT_NM_PER_PS / (wavelength * wavelength)
}

/// α from a dip width, clamped to zero below the dispersion-free width.
fn alpha_or_zero(d: f64, t0: f64) -> (f64, bool) {
    match extract_alpha_from_fwhm(d, t0) {
        Ok(alpha) => (alpha, false),
        Err(_) => (0.0, true),
    }
}

/// |α| = T₀·√(d²/(2 ln 2) − 4T₀²), then |β₂| = |α|/L and |D| = 2πc|β₂|/λ².
///
/// Uncertainties come from `mc_trials` draws of (d, pulse FWHM) as
/// independent Gaussians; the two marginal spreads are reported as well.
/// Draw `k` of each batch uses stream `k` of its own generator, seeded
/// from `seed`. A dip more than 1σ below the dispersion-free width is
/// rejected as infeasible.
pub fn dispersion_from_dip(inputs: DispersionInputs, mc_trials: usize, seed: u64) -> Result<DispersionEstimate> {
    let DispersionInputs {
        dip_fwhm,
        pulse_fwhm,
        length_m,
        wavelength_nm,
    } = inputs;
    ensure_positive("dip FWHM", dip_fwhm.value)?;
    ensure_non_negative("dip FWHM uncertainty", dip_fwhm.sigma)?;
    ensure_positive("pulse FWHM", pulse_fwhm.value)?;
    ensure_non_negative("pulse FWHM uncertainty", pulse_fwhm.sigma)?;
    ensure_positive("length", length_m)?;
    ensure_positive("wavelength", wavelength_nm)?;

    let t0 = units::t0_from_fwhm(pulse_fwhm.value);
    let floor = min_dip_fwhm(t0);
    let alpha = match extract_alpha_from_fwhm(dip_fwhm.value, t0) {
        Ok(alpha) => alpha,
        Err(_) if dip_fwhm.value + dip_fwhm.sigma >= floor => 0.0,
        Err(e) => return Err(e),
    };
    let near_floor = dip_fwhm.value - dip_fwhm.sigma <= floor * (1.0 + 1e-12);

    let draw = |stream: u64, vary_dip: bool, vary_pulse: bool| -> Result<(f64, usize)> {
        if mc_trials < 2 {
            return Ok((0.0, 0));
        }
        let dip_law = Normal::new(dip_fwhm.value, if vary_dip { dip_fwhm.sigma } else { 0.0 });
        let pulse_law = Normal::new(pulse_fwhm.value, if vary_pulse { pulse_fwhm.sigma } else { 0.0 });
        let (dip_law, pulse_law) = dip_law
            .and_then(|d| pulse_law.map(|p| (d, p)))
            .map_err(|e| HomError::InvalidConfig(e.to_string()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let mut clamped = 0;
        let alphas: Vec<f64> = (0..mc_trials)
            .map(|_| {
                let d = dip_law.sample(&mut rng);
                let fwhm = pulse_law.sample(&mut rng);
                if d <= 0.0 || fwhm <= 0.0 {
                    clamped += 1;
                    return 0.0;
                }
                let (a, was_clamped) = alpha_or_zero(d, units::t0_from_fwhm(fwhm));
                clamped += usize::from(was_clamped);
                a
            })
            .collect();
        let n = alphas.len() as f64;
        let mean = alphas.iter().sum::<f64>() / n;
        let var = alphas.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1.0);
        Ok((var.sqrt(), clamped))
    };
    let (sigma_alpha, clamped) = draw(0, true, true)?;
    let (sigma_dip_only, _) = draw(1, true, false)?;
    let (sigma_pulse_only, _) = draw(2, false, true)?;

    let length_km = length_m / METERS_PER_KM;
    let to_d = dispersion_per_beta2(wavelength_nm) / length_km;
    let alpha = Measured::new(alpha, sigma_alpha);
    Ok(DispersionEstimate {
        alpha,
        beta2: alpha.scaled(1.0 / length_km),
        dispersion: alpha.scaled(to_d),
        dispersion_sigma_dip_only: sigma_dip_only * to_d,
        dispersion_sigma_pulse_only: sigma_pulse_only * to_d,
        inputs,
        mc_trials,
        clamped_fraction: if mc_trials < 2 { 0.0 } else { clamped as f64 / mc_trials as f64 },
        near_floor,
    })
}
