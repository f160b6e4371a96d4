//! Single-photon wave-packets in time and frequency, and their propagation
//! through second-order dispersive media.

mod grid;
mod medium;
mod temporal;

use num_complex::Complex;

pub use grid::{FrequencyGrid, DEFAULT_GRID_POINTS, DEFAULT_SPAN_T0, MIN_GRID_POINTS};
pub use medium::{apply_dispersion, chain_totals, spectral_phase, DispersiveElement};
pub(crate) use medium::apply_phase;
pub use temporal::{to_temporal_profile, TemporalField, TemporalProfile};

use crate::error::{ensure_non_negative, ensure_positive, HomError, Result};
use crate::units::{self, QUADRATIC_PHASE_FACTOR};
use crate::Scalar;

/// Smallest admissible grid span in units of 1/T₀. At ±4/T₀ the Gaussian
/// spectral intensity is down by e⁻¹⁶.
pub const MIN_SPAN_T0: f64 = 8.0;

/// Gaussian wave-packet α(t) = √N·(T₀√π)^{-1/2}·exp(−t²/2T₀²).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPulse<T> {
    /// 1/e amplitude half-width T₀, ps.
    pub t0_width: T,
    /// λ₀, nm.
    pub center_wavelength: T,
    /// |α₀|², photons per wave-packet.
    pub mean_photon_number: T,
    /// g⁽²⁾(0) of the source; 1 for coherent states.
    pub source_g2: T,
}

impl<T: Scalar> GaussianPulse<T> {
    pub fn new(t0_width: T, center_wavelength: T, mean_photon_number: T, source_g2: T) -> Result<Self> {
        ensure_positive("T0", t0_width.as_f64())?;
        ensure_positive("center wavelength", center_wavelength.as_f64())?;
        ensure_non_negative("mean photon number", mean_photon_number.as_f64())?;
        ensure_non_negative("source g2", source_g2.as_f64())?;
        Ok(Self {
            t0_width,
            center_wavelength,
            mean_photon_number,
            source_g2,
        })
    }

    /// Coherent-state pulse specified by its intensity FWHM.
    pub fn coherent_from_fwhm(fwhm: T, center_wavelength: T, mean_photon_number: T) -> Result<Self> {
        ensure_positive("pulse FWHM", fwhm.as_f64())?;
        Self::new(units::t0_from_fwhm(fwhm), center_wavelength, mean_photon_number, T::one())
    }

    pub fn fwhm(&self) -> T {
        units::fwhm_from_t0(self.t0_width)
    }

    /// FWHM of the spectral intensity |α(Ω)|² in rad/ps.
    pub fn spectral_fwhm(&self) -> T {
        units::fwhm_per_t0::<T>() / self.t0_width
    }

    /// FWHM of the spectral intensity converted to wavelength, nm.
    pub fn spectral_fwhm_wavelength(&self) -> T {
        units::wavelength_width(self.spectral_fwhm(), self.center_wavelength)
    }
}

/// Complex spectral envelope α(Ω) sampled on a [`FrequencyGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralAmplitude<T> {
    grid: FrequencyGrid<T>,
    values: Vec<Complex<T>>,
    center_wavelength: T,
}

impl<T: Scalar> SpectralAmplitude<T> {
    pub(crate) fn from_parts(grid: FrequencyGrid<T>, values: Vec<Complex<T>>, center_wavelength: T) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self {
            grid,
            values,
            center_wavelength,
        }
    }

    /// Arbitrary sampled spectrum. `values.len()` must equal the grid size.
    pub fn from_samples(grid: FrequencyGrid<T>, values: Vec<Complex<T>>, center_wavelength: T) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(HomError::GridMismatch);
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(HomError::NonFinite {
                what: "spectral amplitude",
            });
        }
        ensure_positive("center wavelength", center_wavelength.as_f64())?;
        Ok(Self::from_parts(grid, values, center_wavelength))
    }

    pub fn grid(&self) -> &FrequencyGrid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn center_wavelength(&self) -> T {
        self.center_wavelength
    }

    /// Σ|α(Ω_j)|²·ΔΩ, the mean photon number carried by the samples.
    pub fn norm(&self) -> T {
        self.values.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()) * self.grid.spacing()
    }
}

/// Samples α(Ω) = √N·(T₀/√π)^{1/2}·exp(−Ω²T₀²/2) and rescales so the
/// discrete norm equals N exactly.
pub fn gaussian_spectral_amplitude<T: Scalar>(
    pulse: &GaussianPulse<T>,
    grid: &FrequencyGrid<T>,
) -> Result<SpectralAmplitude<T>> {
    let t0 = pulse.t0_width;
    let required = T::lit(MIN_SPAN_T0) / t0;
    if grid.span() < required * T::lit(1.0 - 1e-12) {
        return Err(HomError::GridTooNarrow {
            span: grid.span().as_f64(),
            required: required.as_f64(),
        });
    }
    let n = pulse.mean_photon_number;
    let amplitude = (t0 / T::PI().sqrt()).sqrt() * n.sqrt();
    let half = T::lit(0.5);
    let mut values: Vec<Complex<T>> = grid
        .omegas()
        .map(|omega| Complex::new(amplitude * (-half * omega * omega * t0 * t0).exp(), T::zero()))
        .collect();
    if n > T::zero() {
        let norm = values.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()) * grid.spacing();
        let scale = (n / norm).sqrt();
        values.iter_mut().for_each(|z| *z = *z * scale);
    }
    Ok(SpectralAmplitude::from_parts(*grid, values, pulse.center_wavelength))
}

/// Intensity FWHM of a Gaussian pulse of half-width `t0` after accumulating
/// `gdd` = Σβ₂L (ps²): 2√(ln2)·T₀·√(1 + (2c₂·GDD/T₀²)²).
pub fn broadened_width_closed_form<T: Scalar>(t0: T, gdd: T) -> Result<T> {
    ensure_positive("T0", t0.as_f64())?;
    let ratio = T::lit(2.0 * QUADRATIC_PHASE_FACTOR) * gdd / (t0 * t0);
    Ok(units::fwhm_from_t0(t0) * (T::one() + ratio * ratio).sqrt())
}
