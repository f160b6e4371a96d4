use num_complex::Complex;

use super::SpectralAmplitude;
use crate::error::{ensure_finite, ensure_non_negative, ensure_positive, Result};
use crate::units::{self, QUADRATIC_PHASE_FACTOR};
use crate::Scalar;

/// One dispersive medium truncated at second order: length plus the first
/// two frequency derivatives of the propagation constant at the carrier.
/// The constant phase β(0)·L is dropped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersiveElement<T> {
    /// m
    pub length: T,
    /// Group delay per length β⁽¹⁾, ps/m.
    pub beta1: T,
    /// Group-velocity dispersion β⁽²⁾ = d²β/dΩ², ps²/km.
    pub beta2: T,
}

impl<T: Scalar> DispersiveElement<T> {
    pub fn new(length: T, beta1: T, beta2: T) -> Result<Self> {
        ensure_non_negative("element length", length.as_f64())?;
        ensure_finite("beta1", beta1.as_f64())?;
        ensure_finite("beta2", beta2.as_f64())?;
        Ok(Self {
            length,
            beta1,
            beta2,
        })
    }

    /// Builds an element from the datasheet dispersion parameter D (ps/(nm·km))
    /// quoted at `reference_wavelength` (nm).
    pub fn from_dispersion_parameter(
        length: T,
        beta1: T,
        dispersion: T,
        reference_wavelength: T,
    ) -> Result<Self> {
        ensure_finite("dispersion parameter", dispersion.as_f64())?;
        ensure_positive("reference wavelength", reference_wavelength.as_f64())?;
        Self::new(
            length,
            beta1,
            units::dispersion_parameter_to_beta2(dispersion, reference_wavelength),
        )
    }

    /// Pure group delay of `delay` ps with no dispersion.
    pub fn delay_line(delay: T) -> Result<Self> {
        Self::new(T::one(), delay, T::zero())
    }

    /// β⁽¹⁾·L, ps.
    pub fn group_delay(&self) -> T {
        self.beta1 * self.length
    }

    /// β⁽²⁾·L, ps².
    pub fn gdd(&self) -> T {
        units::accumulated_gdd(self.beta2, self.length)
    }

    pub fn dispersion_parameter(&self, wavelength: T) -> T {
        units::beta2_to_dispersion_parameter(self.beta2, wavelength)
    }
}

/// Spectral phase φ(Ω) = τ_g·Ω + c₂·GDD·Ω² of an accumulated group delay
/// τ_g (ps) and group-delay dispersion GDD (ps²).
pub fn spectral_phase<T: Scalar>(group_delay: T, gdd: T, omega: T) -> T {
    group_delay * omega + T::lit(QUADRATIC_PHASE_FACTOR) * gdd * omega * omega
}

/// Totals (Σβ₁L, Σβ₂L) over a chain of elements.
pub fn chain_totals<T: Scalar>(chain: &[DispersiveElement<T>]) -> (T, T) {
    chain.iter().fold((T::zero(), T::zero()), |(delay, gdd), e| {
        (delay + e.group_delay(), gdd + e.gdd())
    })
}

/// Propagates a spectral amplitude through `chain`, multiplying every
/// sample by `exp(i·φ(Ω))`. The discrete norm is unchanged.
pub fn apply_dispersion<T: Scalar>(
    spec: &SpectralAmplitude<T>,
    chain: &[DispersiveElement<T>],
) -> Result<SpectralAmplitude<T>> {
    for e in chain {
        ensure_finite("element length", e.length.as_f64())?;
        ensure_finite("beta1", e.beta1.as_f64())?;
        ensure_finite("beta2", e.beta2.as_f64())?;
    }
    let (delay, gdd) = chain_totals(chain);
    Ok(apply_phase(spec, delay, gdd))
}

pub(crate) fn apply_phase<T: Scalar>(spec: &SpectralAmplitude<T>, delay: T, gdd: T) -> SpectralAmplitude<T> {
    if delay == T::zero() && gdd == T::zero() {
        return spec.clone();
    }
    let grid = spec.grid();
    let values = spec
        .values()
        .iter()
        .zip(grid.omegas())
        .map(|(&a, omega)| a * Complex::cis(spectral_phase(delay, gdd, omega)))
        .collect();
    SpectralAmplitude::from_parts(*grid, values, spec.center_wavelength())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn element_totals() {
        let e = DispersiveElement::new(80.0_f64, 0.5, -20.0).unwrap();
        assert_relative_eq!(e.group_delay(), 40.0);
        assert_relative_eq!(e.gdd(), -1.6, max_relative = 1e-15);
        let chain = [e, DispersiveElement::new(20.0, 0.5, -20.0).unwrap()];
        let (delay, gdd) = chain_totals(&chain);
        assert_relative_eq!(delay, 50.0);
        assert_relative_eq!(gdd, -2.0, max_relative = 1e-15);
    }

    #[test]
    fn from_dispersion_parameter_round_trips() {
        let e = DispersiveElement::from_dispersion_parameter(80.0_f64, 0.0, 15.04, 1565.0).unwrap();
        assert_relative_eq!(
            e.beta2,
            -15.04 * 1565.0 * 1565.0 / (std::f64::consts::TAU * units::SPEED_OF_LIGHT_NM_PER_PS),
            max_relative = 1e-15
        );
        assert_relative_eq!(e.dispersion_parameter(1565.0), 15.04, max_relative = 1e-12);
    }

    #[test]
    fn rejects_negative_length() {
        assert!(DispersiveElement::new(-1.0_f64, 0.0, 0.0).is_err());
        assert!(DispersiveElement::new(1.0_f64, f64::INFINITY, 0.0).is_err());
    }
}
