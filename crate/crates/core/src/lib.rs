//! Hong-Ou-Mandel interference between dispersed coherent-state wave-packets.
//!
//! The crate is organised bottom-up:
//!
//! * [`wavepacket`] builds Gaussian single-photon wave-packets on a frequency
//!   grid and propagates them through second-order dispersive media.
//! * [`hom`] evaluates the two-detector coincidence rate, both by spectral
//!   quadrature and by the Gaussian closed forms, and exposes the eight-term
//!   decomposition of the rate.
//! * [`experiment`] turns ideal rates into delay scans with Poisson counts.
//! * [`fitting`] recovers dip parameters from scans and inverts them into a
//!   pulse width or a dispersion coefficient.
//!
//! The physics modules are generic over the floating-point type through
//! [`Scalar`]; the statistics layer works in `f64`. The aliases below fix
//! the scalar to `f64` for the common case.

pub mod error;
pub mod experiment;
pub mod fitting;
pub mod hom;
pub mod scalar;
pub mod units;
pub mod wavepacket;

pub use error::{HomError, Result};
pub use experiment::{HomCurve, ScanConfig};
pub use fitting::{DispersionEstimate, FitResult, Measured};
pub use scalar::Scalar;

pub type GaussianPulse = wavepacket::GaussianPulse<f64>;
pub type FrequencyGrid = wavepacket::FrequencyGrid<f64>;
pub type SpectralAmplitude = wavepacket::SpectralAmplitude<f64>;
pub type DispersiveElement = wavepacket::DispersiveElement<f64>;
pub type TemporalField = wavepacket::TemporalField<f64>;
pub type TemporalProfile = wavepacket::TemporalProfile<f64>;
pub type ArmConfig = hom::ArmConfig<f64>;
pub type DipParameters = hom::DipParameters<f64>;
pub type DetectionModel = hom::DetectionModel<f64>;
pub type Interferometer = hom::Interferometer<f64>;
pub type CoincidenceTerms = hom::CoincidenceTerms<f64>;
