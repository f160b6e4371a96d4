//! Gaussian-dip fits with Monte-Carlo uncertainties, and their inversion
//! into a pulse width or a dispersion coefficient.

mod dispersion;
mod lm;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{ensure_positive, HomError, Result};
use crate::experiment::HomCurve;
use lm::Params;

pub use dispersion::{dispersion_from_dip, DispersionEstimate, DispersionInputs};
pub use lm::{MAX_ITERATIONS, STEP_TOLERANCE};

pub const MIN_FIT_POINTS: usize = 6;
pub const DEFAULT_MC_TRIALS: usize = 1000;
/// Largest tolerated fraction of failed Monte-Carlo refits.
pub const MAX_FAILED_FRACTION: f64 = 0.05;
/// A dip is accepted when V ≥ this many standard errors.
pub const DIP_SIGNIFICANCE: f64 = 3.0;

/// 2√(2 ln 2): FWHM of a Gaussian in units of its standard deviation.
pub fn fwhm_per_sigma() -> f64 {
    2.0 * (2.0 * std::f64::consts::LN_2).sqrt()
}

/// A value with its 1σ uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Measured {
    pub value: f64,
    pub sigma: f64,
}

impl Measured {
    pub fn new(value: f64, sigma: f64) -> Self {
        Self { value, sigma }
    }

    pub fn exact(value: f64) -> Self {
        Self { value, sigma: 0.0 }
    }

    pub fn scaled(self, factor: f64) -> Self {
        Self::new(self.value * factor, self.sigma * factor.abs())
    }
}

/// Starting point for the fit, in the same units as [`FitResult`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialGuess {
    pub baseline: f64,
    pub visibility: f64,
    pub center: f64,
    pub fwhm: f64,
}

impl InitialGuess {
    /// (max, 1 − min/max, argmin, span/6).
    pub fn from_data(delays: &[f64], values: &[f64]) -> Self {
        let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let (argmin, min) = values
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |best, (i, &v)| if v < best.1 { (i, v) } else { best });
        let span = delays.last().unwrap_or(&0.0) - delays.first().unwrap_or(&0.0);
        Self {
            baseline: max,
            visibility: if max > 0.0 { 1.0 - min / max } else { 0.0 },
            center: delays.get(argmin).copied().unwrap_or(0.0),
            fwhm: fwhm_per_sigma() * span / 6.0,
        }
    }

    fn params(&self) -> Params {
        Params::new(self.baseline, self.visibility, self.center, self.fwhm / fwhm_per_sigma())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UncertaintySource {
    /// Linearised covariance s²·(JᵀJ)⁻¹ of a single fit.
    Covariance,
    /// Spread of refits to Poisson-resampled copies of the data.
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    /// Counts far from the dip.
    pub baseline: Measured,
    /// Dip depth over baseline.
    pub visibility: Measured,
    /// Dip centre, ps.
    pub center: Measured,
    /// Dip FWHM d, ps.
    pub fwhm: Measured,
    pub uncertainty_source: UncertaintySource,
    /// False when the uncertainties are not meaningful (a single trial).
    pub uncertainty_defined: bool,
    pub mc_trials: usize,
    pub failed_trials: usize,
    /// Iterations of the fit to the original data.
    pub iterations: usize,
    /// √RSS of the fit to the original data.
    pub residual_norm: f64,
    pub points: usize,
}

impl FitResult {
    pub fn sigma_width(&self) -> f64 {
        self.fwhm.value / fwhm_per_sigma()
    }

    /// Fitted model at delay `tau`.
    pub fn model(&self, tau: f64) -> f64 {
        lm::model(&self.params(), tau)
    }

    /// Source pulse FWHM implied by the dip width, assuming no dispersion
    /// difference between the arms.
    pub fn pulse_width(&self) -> Measured {
        self.fwhm.scaled(std::f64::consts::FRAC_1_SQRT_2)
    }

    pub fn initial_guess(&self) -> InitialGuess {
        InitialGuess {
            baseline: self.baseline.value,
            visibility: self.visibility.value,
            center: self.center.value,
            fwhm: self.fwhm.value,
        }
    }

    fn params(&self) -> Params {
        self.initial_guess().params()
    }
}

/// Least-squares fit of y(τ) = B·[1 − V·exp(−(τ−τ₀)²/2σ²)] to the curve's
/// counts, or to its expected values when it has none. Uncertainties are
/// the linearised covariance.
pub fn fit_gaussian_dip(curve: &HomCurve, initial_guess: Option<InitialGuess>) -> Result<FitResult> {
    curve.validate()?;
    let y = curve.observations();
    fit_values(&curve.delays, &y, initial_guess)
}

fn fit_values(x: &[f64], y: &[f64], initial_guess: Option<InitialGuess>) -> Result<FitResult> {
    if x.len() < MIN_FIT_POINTS {
        return Err(HomError::TooFewPoints {
            got: x.len(),
            min: MIN_FIT_POINTS,
        });
    }
    let start = initial_guess.unwrap_or_else(|| InitialGuess::from_data(x, y)).params();
    if start.iter().any(|v| !v.is_finite()) {
        return Err(HomError::NonFinite { what: "initial guess" });
    }
    let solution = lm::solve(x, y, start);
    let p = solution.params;
    let dof = (x.len() - 4) as f64;
    let s2 = solution.normal.rss / dof;
    let covariance = solution.normal.jtj.try_inverse();
    let sigma = |i: usize| covariance.map(|c| (s2 * c[(i, i)]).max(0.0).sqrt());

    let visibility = p[1];
    let sigma_v = sigma(1).unwrap_or(f64::INFINITY);
    // An insignificant dip explains a wandering fit better than the
    // optimiser does, so it is checked first.
    if covariance.is_none() || visibility <= 1e-9 || visibility < DIP_SIGNIFICANCE * sigma_v {
        return Err(HomError::DipNotFound {
            visibility,
            sigma: sigma_v,
        });
    }
    if !solution.converged {
        return Err(HomError::NonConvergence {
            iterations: solution.iterations,
        });
    }
    if visibility > 1.0 {
        return Err(HomError::InvalidConfig(format!(
            "fitted visibility {visibility} exceeds 1; counts cannot be negative"
        )));
    }
    Ok(FitResult {
        baseline: Measured::new(p[0], sigma(0).unwrap_or(0.0)),
        visibility: Measured::new(visibility, sigma_v),
        center: Measured::new(p[2], sigma(2).unwrap_or(0.0)),
        fwhm: Measured::new(fwhm_per_sigma() * p[3].abs(), fwhm_per_sigma() * sigma(3).unwrap_or(0.0)),
        uncertainty_source: UncertaintySource::Covariance,
        uncertainty_defined: x.len() > 4,
        mc_trials: 0,
        failed_trials: 0,
        iterations: solution.iterations,
        residual_norm: solution.normal.rss.sqrt(),
        points: x.len(),
    })
}

/// Fits the curve, then refits `trials` copies whose points are redrawn
/// from Poisson laws with the observed counts as means. Reports the mean
/// and sample standard deviation of each parameter over the successful
/// refits. Trial `k` uses stream `k` of the generator seeded with `seed`.
///
/// A curve without counts is treated as exact: every trial refits the same
/// values and the spread is zero. `trials == 0` returns the plain fit.
pub fn monte_carlo_fit(curve: &HomCurve, trials: usize, seed: u64) -> Result<FitResult> {
    let base = fit_gaussian_dip(curve, None)?;
    if trials == 0 {
        return Ok(base);
    }
    let y = curve.observations();
    let laws = match &curve.counts {
        Some(counts) => Some(
            counts
                .iter()
                .map(|&c| if c == 0 { Ok(None) } else { Poisson::new(c as f64).map(Some) })
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| HomError::InvalidConfig(e.to_string()))?,
        ),
        None => None,
    };
    let guess = base.initial_guess();

    let mut samples: Vec<[f64; 4]> = Vec::with_capacity(trials);
    let mut failed = 0;
    let mut last_error = String::new();
    let mut resampled = y.clone();
    for trial in 0..trials {
        if let Some(laws) = &laws {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial as u64);
            for (slot, law) in resampled.iter_mut().zip(laws) {
                *slot = law.map_or(0.0, |l| l.sample(&mut rng));
            }
        }
        match fit_values(&curve.delays, &resampled, Some(guess)) {
            Ok(fit) => samples.push([fit.baseline.value, fit.visibility.value, fit.center.value, fit.fwhm.value]),
            Err(e) => {
                failed += 1;
                last_error = e.to_string();
            }
        }
    }
    if failed as f64 > MAX_FAILED_FRACTION * trials as f64 || samples.is_empty() {
        return Err(HomError::TooManyFailedTrials {
            failed,
            total: trials,
            last: last_error,
        });
    }

    let stats = |i: usize| {
        let n = samples.len() as f64;
        let mean = samples.iter().map(|s| s[i]).sum::<f64>() / n;
        let sigma = if samples.len() > 1 {
            (samples.iter().map(|s| (s[i] - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Measured::new(mean, sigma)
    };
    Ok(FitResult {
        baseline: stats(0),
        visibility: stats(1),
        center: stats(2),
        fwhm: stats(3),
        uncertainty_source: UncertaintySource::MonteCarlo,
        uncertainty_defined: samples.len() > 1,
        mc_trials: trials,
        failed_trials: failed,
        ..base
    })
}

/// Source pulse FWHM d/√2 for a dip of FWHM `d` with no dispersion
/// difference between the arms.
pub fn pulse_width_from_dip(fwhm_d: f64) -> Result<f64> {
    ensure_positive("dip FWHM", fwhm_d)?;
    Ok(fwhm_d * std::f64::consts::FRAC_1_SQRT_2)
}
