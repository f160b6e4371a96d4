//! Unit conventions and conversions.
//!
//! Times are in ps, wavelengths in nm, fiber lengths in m, angular
//! frequencies in rad/ps. Group-velocity dispersion is quoted in ps²/km and
//! the dispersion parameter D in ps/(nm·km), the usual fiber datasheet units.

use crate::Scalar;

/// Speed of light in vacuum, nm/ps.
pub const SPEED_OF_LIGHT_NM_PER_PS: f64 = 299_792.458;

/// Coefficient of the quadratic spectral phase: a medium of length L with
/// group-velocity dispersion β₂ imprints `QUADRATIC_PHASE_FACTOR · β₂ L Ω²`.
///
/// With this value the spectral quadrature of the coincidence rate matches
/// the closed-form dip `1 − T₀²/√(4T₀⁴+α²)·exp(−2(τ−δτ)²/(4T₀²+(α/T₀)²))`
/// with α the plain difference of β₂L between the arms.
pub const QUADRATIC_PHASE_FACTOR: f64 = 0.5;

pub const METERS_PER_KM: f64 = 1_000.0;

/// `2·√(ln 2)`: ratio between intensity FWHM and the 1/e amplitude
/// half-width T₀ of a Gaussian pulse.
pub fn fwhm_per_t0<T: Scalar>() -> T {
    T::lit(2.0) * T::LN_2().sqrt()
}

pub fn fwhm_from_t0<T: Scalar>(t0: T) -> T {
    fwhm_per_t0::<T>() * t0
}

pub fn t0_from_fwhm<T: Scalar>(fwhm: T) -> T {
    fwhm / fwhm_per_t0::<T>()
}

/// β₂ = −D·λ²/(2πc), in ps²/km for D in ps/(nm·km) and λ in nm.
pub fn dispersion_parameter_to_beta2<T: Scalar>(d: T, wavelength_nm: T) -> T {
    -d * wavelength_nm * wavelength_nm / (T::TAU() * T::lit(SPEED_OF_LIGHT_NM_PER_PS))
}

/// D = −2πc·β₂/λ², the inverse of [`dispersion_parameter_to_beta2`].
pub fn beta2_to_dispersion_parameter<T: Scalar>(beta2: T, wavelength_nm: T) -> T {
    -beta2 * T::TAU() * T::lit(SPEED_OF_LIGHT_NM_PER_PS) / (wavelength_nm * wavelength_nm)
}

/// Carrier angular frequency ω₀ = 2πc/λ₀ in rad/ps.
pub fn angular_frequency<T: Scalar>(wavelength_nm: T) -> T {
    T::TAU() * T::lit(SPEED_OF_LIGHT_NM_PER_PS) / wavelength_nm
}

/// Converts an angular-frequency width (rad/ps) around λ₀ into a wavelength
/// width (nm): Δλ = λ₀²·ΔΩ/(2πc).
pub fn wavelength_width<T: Scalar>(delta_omega: T, wavelength_nm: T) -> T {
    wavelength_nm * wavelength_nm * delta_omega / (T::TAU() * T::lit(SPEED_OF_LIGHT_NM_PER_PS))
}

/// β₂ (ps²/km) times a length in m, giving the accumulated GDD in ps².
pub fn accumulated_gdd<T: Scalar>(beta2_ps2_per_km: T, length_m: T) -> T {
    beta2_ps2_per_km * length_m / T::lit(METERS_PER_KM)
}
