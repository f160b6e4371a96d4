//! Two-photon coincidence rate behind a balanced beam splitter.
//!
//! Arm B carries the variable delay τ: its wave-packet arrives τ later than
//! it would at τ = 0. With the arm phases φ_X(Ω) = δ_X·Ω + c₂·GDD_X·Ω² the
//! central quantity is the spectral overlap
//!
//! ```text
//! J(τ) = ∫ dΩ α_A*(Ω) α_B(Ω) exp(i[Ωτ − (φ_A(Ω) − φ_B(Ω))])
//! ```
//!
//! whose modulus peaks at τ = δτ = δ_A − δ_B. The phase-averaged rate is
//! `(η_C η_D / 4)·[g_A N_A² + g_B N_B² + 2 N_A N_B − 2|J|²]`.

use num_complex::Complex;

use crate::error::{ensure_non_negative, ensure_positive, ensure_unit_interval, HomError, Result};
use crate::units;
use crate::wavepacket::{apply_phase, chain_totals, spectral_phase, DispersiveElement, SpectralAmplitude, TemporalField};
use crate::Scalar;

/// Chain of dispersive elements in one interferometer arm, with cached
/// totals Σβ₁L (ps) and Σβ₂L (ps²).
#[derive(Debug, Clone, PartialEq)]
pub struct ArmConfig<T> {
    elements: Vec<DispersiveElement<T>>,
    group_delay: T,
    gdd: T,
}

impl<T: Scalar> Default for ArmConfig<T> {
    fn default() -> Self {
        Self::new(Vec::new())
    }
}

impl<T: Scalar> ArmConfig<T> {
    pub fn new(elements: Vec<DispersiveElement<T>>) -> Self {
        let (group_delay, gdd) = chain_totals(&elements);
        Self {
            elements,
            group_delay,
            gdd,
        }
    }

    pub fn with_element(mut self, element: DispersiveElement<T>) -> Self {
        self.elements.push(element);
        let (group_delay, gdd) = chain_totals(&self.elements);
        self.group_delay = group_delay;
        self.gdd = gdd;
        self
    }

    pub fn elements(&self) -> &[DispersiveElement<T>] {
        &self.elements
    }

    pub fn group_delay(&self) -> T {
        self.group_delay
    }

    pub fn gdd(&self) -> T {
        self.gdd
    }
}

/// δτ = β₁ᴬLᴬ − β₁ᴮLᴮ, ps.
pub fn delta_tau_of_arms<T: Scalar>(arm_a: &ArmConfig<T>, arm_b: &ArmConfig<T>) -> T {
    arm_a.group_delay - arm_b.group_delay
}

/// α = β₂ᴬLᴬ − β₂ᴮLᴮ, ps².
pub fn alpha_of_arms<T: Scalar>(arm_a: &ArmConfig<T>, arm_b: &ArmConfig<T>) -> T {
    arm_a.gdd - arm_b.gdd
}

/// Parameters of the Gaussian closed-form dip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipParameters<T> {
    /// Dip centre δτ, ps.
    pub delta_tau: T,
    /// Dispersion imbalance α, ps².
    pub alpha: T,
    /// Pulse half-width T₀, ps.
    pub t0: T,
}

impl<T: Scalar> DipParameters<T> {
    pub fn new(delta_tau: T, alpha: T, t0: T) -> Result<Self> {
        ensure_positive("T0", t0.as_f64())?;
        Ok(Self { delta_tau, alpha, t0 })
    }

    pub fn from_arms(arm_a: &ArmConfig<T>, arm_b: &ArmConfig<T>, t0: T) -> Result<Self> {
        Self::new(delta_tau_of_arms(arm_a, arm_b), alpha_of_arms(arm_a, arm_b), t0)
    }

    /// Parameters seen with the arms exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            delta_tau: -self.delta_tau,
            alpha: -self.alpha,
            t0: self.t0,
        }
    }

    /// Dip depth below the normalised baseline: T₀²/√(4T₀⁴ + α²).
    pub fn depth(&self) -> T {
        let t0_sq = self.t0 * self.t0;
        t0_sq / (T::lit(4.0) * t0_sq * t0_sq + self.alpha * self.alpha).sqrt()
    }

    /// Visibility relative to the baseline (equals the depth for P normalised to 1).
    pub fn visibility(&self) -> T {
        self.depth()
    }
}

/// Normalised coincidence probability
/// `P(τ) = 1 − T₀²/√(4T₀⁴+α²)·exp(−2(τ−δτ)²/(4T₀²+(α/T₀)²))`.
pub fn coincidence_probability_gaussian<T: Scalar>(params: &DipParameters<T>, tau: T) -> Result<T> {
    ensure_positive("T0", params.t0.as_f64())?;
    let t0 = params.t0;
    let x = tau - params.delta_tau;
    let ratio = params.alpha / t0;
    let exponent = -T::lit(2.0) * x * x / (T::lit(4.0) * t0 * t0 + ratio * ratio);
    Ok(T::one() - params.depth() * exponent.exp())
}

/// Dispersion-free dip width 2√(ln 4)·T₀ = √2·T_FWHM.
pub fn min_dip_fwhm<T: Scalar>(t0: T) -> T {
    T::lit(2.0) * (T::lit(2.0) * T::LN_2()).sqrt() * t0
}

/// Dip FWHM d = 2√(ln 4)·√(T₀² + (α/2T₀)²).
pub fn dip_fwhm<T: Scalar>(params: &DipParameters<T>) -> Result<T> {
    ensure_positive("T0", params.t0.as_f64())?;
    let t0 = params.t0;
    let q = params.alpha / (T::lit(2.0) * t0);
    Ok(min_dip_fwhm(T::one()) * (t0 * t0 + q * q).sqrt())
}

/// Inverts [`dip_fwhm`]: |α| = T₀·√(d²/(2 ln 2) − 4T₀²).
pub fn extract_alpha_from_fwhm<T: Scalar>(d: T, t0: T) -> Result<T> {
    ensure_positive("T0", t0.as_f64())?;
    ensure_positive("dip FWHM", d.as_f64())?;
    let minimum = min_dip_fwhm(t0);
    let radicand = d * d / (T::lit(2.0) * T::LN_2()) - T::lit(4.0) * t0 * t0;
    // Within rounding of the boundary on either side α is zero; the square
    // root would otherwise blow a 1e-16 residue up to ~1e-8.
    let slack = minimum * T::lit(1e-12);
    if d <= minimum + slack {
        if minimum - d > slack {
            return Err(HomError::InfeasibleWidth {
                fwhm: d.as_f64(),
                minimum: minimum.as_f64(),
            });
        }
        return Ok(T::zero());
    }
    Ok(t0 * radicand.max(T::zero()).sqrt())
}

/// Detector efficiencies η_C, η_D and source g⁽²⁾(0) of each arm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionModel<T> {
    pub eta_c: T,
    pub eta_d: T,
    pub g2_a: T,
    pub g2_b: T,
}

impl<T: Scalar> DetectionModel<T> {
    pub fn new(eta_c: T, eta_d: T, g2_a: T, g2_b: T) -> Result<Self> {
        ensure_unit_interval("eta_c", eta_c.as_f64())?;
        ensure_unit_interval("eta_d", eta_d.as_f64())?;
        ensure_non_negative("g2_a", g2_a.as_f64())?;
        ensure_non_negative("g2_b", g2_b.as_f64())?;
        Ok(Self { eta_c, eta_d, g2_a, g2_b })
    }

    /// Coherent-state sources, g⁽²⁾(0) = 1 in both arms.
    pub fn coherent(eta_c: T, eta_d: T) -> Result<Self> {
        Self::new(eta_c, eta_d, T::one(), T::one())
    }

    /// Unit efficiencies, coherent sources.
    pub fn ideal() -> Self {
        Self {
            eta_c: T::one(),
            eta_d: T::one(),
            g2_a: T::one(),
            g2_b: T::one(),
        }
    }

    fn quarter(&self) -> T {
        self.eta_c * self.eta_d / T::lit(4.0)
    }
}

/// Integration limits of the coincidence counter: start/stop time of the
/// run and the full width Δτ_c0 of the coincidence window, all in ps.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum CoincidenceWindow<T> {
    /// Both windows much longer than the broadened wave-packets.
    #[default]
    Unbounded,
    Finite { t_start: T, t_stop: T, width: T },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TermOptions<T> {
    /// Zero the fast `cos(2ω₀τ)` pair n₃ + n₄, as optical-path fluctuations
    /// do in a fiber interferometer.
    pub average_oscillating: bool,
    pub window: CoincidenceWindow<T>,
}

impl<T> Default for TermOptions<T> {
    fn default() -> Self {
        Self {
            average_oscillating: true,
            window: CoincidenceWindow::Unbounded,
        }
    }
}

/// The eight contributions to the coincidence rate.
///
/// n₁, n₂: auto-correlation of each arm; n₃, n₄: the carrier-oscillating
/// pair (complex conjugates of each other); n₅, n₆: cross-arm intensity
/// products; n₇, n₈: the interference terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoincidenceTerms<T> {
    pub n1: T,
    pub n2: T,
    pub n3: Complex<T>,
    pub n4: Complex<T>,
    pub n5: T,
    pub n6: T,
    pub n7: T,
    pub n8: T,
}

impl<T: Scalar> CoincidenceTerms<T> {
    pub fn oscillating_pair(&self) -> T {
        (self.n3 + self.n4).re
    }

    pub fn sum(&self) -> T {
        self.n1 + self.n2 + self.oscillating_pair() + self.n5 + self.n6 + self.n7 + self.n8
    }
}

/// Two input spectra sharing one grid plus the dispersive arms they pass.
#[derive(Debug, Clone)]
pub struct Interferometer<T> {
    spec_a: SpectralAmplitude<T>,
    spec_b: SpectralAmplitude<T>,
    arm_a: ArmConfig<T>,
    arm_b: ArmConfig<T>,
}

impl<T: Scalar> Interferometer<T> {
    pub fn new(
        spec_a: SpectralAmplitude<T>,
        spec_b: SpectralAmplitude<T>,
        arm_a: ArmConfig<T>,
        arm_b: ArmConfig<T>,
    ) -> Result<Self> {
        if spec_a.grid() != spec_b.grid() {
            return Err(HomError::GridMismatch);
        }
        Ok(Self {
            spec_a,
            spec_b,
            arm_a,
            arm_b,
        })
    }

    pub fn delta_tau(&self) -> T {
        delta_tau_of_arms(&self.arm_a, &self.arm_b)
    }

    pub fn alpha(&self) -> T {
        alpha_of_arms(&self.arm_a, &self.arm_b)
    }

    pub fn photon_numbers(&self) -> (T, T) {
        (self.spec_a.norm(), self.spec_b.norm())
    }

    /// Spectral overlap J(τ) by midpoint quadrature on the shared grid.
    pub fn overlap(&self, tau: T) -> Complex<T> {
        let delta_tau = self.delta_tau();
        let alpha = self.alpha();
        let grid = self.spec_a.grid();
        let sum = self
            .spec_a
            .values()
            .iter()
            .zip(self.spec_b.values())
            .zip(grid.omegas())
            .fold(Complex::new(T::zero(), T::zero()), |acc, ((a, b), omega)| {
                let phase = omega * tau - spectral_phase(delta_tau, alpha, omega);
                acc + a.conj() * b * Complex::cis(phase)
            });
        sum * grid.spacing()
    }

    fn interference_free(&self, detection: &DetectionModel<T>) -> T {
        let (na, nb) = self.photon_numbers();
        detection.g2_a * na * na + detection.g2_b * nb * nb + T::lit(2.0) * na * nb
    }

    /// Rate far from the dip, (η_Cη_D/4)·(g_A N_A² + g_B N_B² + 2N_AN_B).
    pub fn baseline_rate(&self, detection: &DetectionModel<T>) -> T {
        detection.quarter() * self.interference_free(detection)
    }

    /// Phase-averaged coincidence rate per trial.
    pub fn coincidence_rate(&self, tau: T, detection: &DetectionModel<T>) -> T {
        let j = self.overlap(tau);
        let rate = detection.quarter() * (self.interference_free(detection) - T::lit(2.0) * j.norm_sqr());
        rate.max(T::zero())
    }

    /// Coincidence rate including the carrier-oscillating pair
    /// n₃ + n₄ = −(η_Cη_D/2)·Re[exp(2iω₀τ)·J²].
    pub fn coincidence_rate_resolved(&self, tau: T, detection: &DetectionModel<T>) -> T {
        let j = self.overlap(tau);
        let q = detection.quarter();
        let base = q * (self.interference_free(detection) - T::lit(2.0) * j.norm_sqr());
        base - T::lit(2.0) * q * (self.carrier(tau) * j * j).re
    }

    /// Coincidence rate divided by its baseline; `1 − |J|²/2` for balanced
    /// unit-photon coherent inputs.
    pub fn normalized_probability(&self, tau: T, detection: &DetectionModel<T>) -> T {
        let baseline = self.baseline_rate(detection);
        if baseline <= T::zero() {
            return T::zero();
        }
        self.coincidence_rate(tau, detection) / baseline
    }

    /// exp(2iω₀τ)
    fn carrier(&self, tau: T) -> Complex<T> {
        let omega0 = units::angular_frequency(self.spec_a.center_wavelength());
        Complex::cis(T::lit(2.0) * omega0 * tau)
    }

    /// Each of the eight terms evaluated directly from the temporal fields
    /// α_A1(t) and α_B2(t) = α_B1(t − τ), integrating over the run and the
    /// coincidence window as given by `options.window`.
    pub fn terms(&self, tau: T, detection: &DetectionModel<T>, options: &TermOptions<T>) -> CoincidenceTerms<T> {
        let field_a = TemporalField::from_spectral(&apply_phase(&self.spec_a, self.arm_a.group_delay, self.arm_a.gdd));
        let field_b = TemporalField::from_spectral(&apply_phase(
            &self.spec_b,
            self.arm_b.group_delay + tau,
            self.arm_b.gdd,
        ));
        let grid = field_a.grid();
        let dt = grid.time_step();
        let times: Vec<T> = (0..grid.len()).map(|k| grid.time(k)).collect();
        let window = WindowSums::new(&times, dt, options.window);

        let a = field_a.values();
        let b = field_b.values();
        let ia: Vec<Complex<T>> = a.iter().map(|z| Complex::new(z.norm_sqr(), T::zero())).collect();
        let ib: Vec<Complex<T>> = b.iter().map(|z| Complex::new(z.norm_sqr(), T::zero())).collect();
        let f: Vec<Complex<T>> = a.iter().zip(b).map(|(x, y)| x.conj() * y).collect();
        let f_conj: Vec<Complex<T>> = f.iter().map(|z| z.conj()).collect();

        let q = detection.quarter();
        let (n3, n4) = if options.average_oscillating {
            (Complex::new(T::zero(), T::zero()), Complex::new(T::zero(), T::zero()))
        } else {
            let carrier = self.carrier(tau);
            (
                -(carrier * window.double_sum(&f, &f)) * q,
                -(carrier.conj() * window.double_sum(&f_conj, &f_conj)) * q,
            )
        };
        CoincidenceTerms {
            n1: q * detection.g2_a * window.double_sum(&ia, &ia).re,
            n2: q * detection.g2_b * window.double_sum(&ib, &ib).re,
            n3,
            n4,
            n5: q * window.double_sum(&ia, &ib).re,
            n6: q * window.double_sum(&ib, &ia).re,
            n7: -q * window.double_sum(&f, &f_conj).re,
            n8: -q * window.double_sum(&f_conj, &f).re,
        }
    }
}

/// Evaluates ∫_{T₁}^{T₂}dt ∫_{−Δ/2}^{Δ/2}dτ_c f(t)·g(t+τ_c) on a uniform grid.
struct WindowSums<T> {
    dt: T,
    /// Inclusive index range of t inside [T₁, T₂].
    run: (usize, usize),
    /// Half-width of the coincidence window in samples; `None` = unbounded.
    half_width: Option<usize>,
    unbounded: bool,
}

impl<T: Scalar> WindowSums<T> {
    fn new(times: &[T], dt: T, window: CoincidenceWindow<T>) -> Self {
        match window {
            CoincidenceWindow::Unbounded => Self {
                dt,
                run: (0, times.len().saturating_sub(1)),
                half_width: None,
                unbounded: true,
            },
            CoincidenceWindow::Finite { t_start, t_stop, width } => {
                let first = times.iter().position(|&t| t >= t_start).unwrap_or(times.len());
                let last = times.iter().rposition(|&t| t <= t_stop).unwrap_or(0);
                let half = (width / (T::lit(2.0) * dt)).floor().to_usize().unwrap_or(0);
                Self {
                    dt,
                    run: (first, last),
                    half_width: Some(half),
                    unbounded: false,
                }
            }
        }
    }

    fn double_sum(&self, f: &[Complex<T>], g: &[Complex<T>]) -> Complex<T> {
        let zero = Complex::new(T::zero(), T::zero());
        let dt2 = self.dt * self.dt;
        if self.unbounded {
            let sf = f.iter().fold(zero, |acc, &z| acc + z);
            let sg = g.iter().fold(zero, |acc, &z| acc + z);
            return sf * sg * dt2;
        }
        let (first, last) = self.run;
        if first > last || f.is_empty() {
            return zero;
        }
        let half = self.half_width.unwrap_or(0);
        let mut prefix = Vec::with_capacity(g.len() + 1);
        prefix.push(zero);
        for &z in g {
            let next = *prefix.last().unwrap() + z;
            prefix.push(next);
        }
        let n = g.len();
        (first..=last).fold(zero, |acc, k| {
            let lo = k.saturating_sub(half);
            let hi = (k + half).min(n - 1);
            acc + f[k] * (prefix[hi + 1] - prefix[lo])
        }) * dt2
    }
}

/// J(τ) for two spectra and their arms. See [`Interferometer::overlap`].
pub fn overlap_integral<T: Scalar>(
    spec_a: &SpectralAmplitude<T>,
    spec_b: &SpectralAmplitude<T>,
    arm_a: &ArmConfig<T>,
    arm_b: &ArmConfig<T>,
    tau: T,
) -> Result<Complex<T>> {
    Ok(Interferometer::new(spec_a.clone(), spec_b.clone(), arm_a.clone(), arm_b.clone())?.overlap(tau))
}

/// Phase-averaged coincidence rate per trial. See
/// [`Interferometer::coincidence_rate`].
pub fn coincidence_rate_general<T: Scalar>(
    spec_a: &SpectralAmplitude<T>,
    spec_b: &SpectralAmplitude<T>,
    arm_a: &ArmConfig<T>,
    arm_b: &ArmConfig<T>,
    tau: T,
    detection: &DetectionModel<T>,
) -> Result<T> {
    let detection = DetectionModel::new(detection.eta_c, detection.eta_d, detection.g2_a, detection.g2_b)?;
    Ok(Interferometer::new(spec_a.clone(), spec_b.clone(), arm_a.clone(), arm_b.clone())?
        .coincidence_rate(tau, &detection))
}

/// Eight-term decomposition with unbounded windows.
pub fn term_decomposition<T: Scalar>(
    spec_a: &SpectralAmplitude<T>,
    spec_b: &SpectralAmplitude<T>,
    arm_a: &ArmConfig<T>,
    arm_b: &ArmConfig<T>,
    tau: T,
    detection: &DetectionModel<T>,
    average_oscillating: bool,
) -> Result<CoincidenceTerms<T>> {
    let detection = DetectionModel::new(detection.eta_c, detection.eta_d, detection.g2_a, detection.g2_b)?;
    let options = TermOptions {
        average_oscillating,
        window: CoincidenceWindow::Unbounded,
    };
    Ok(Interferometer::new(spec_a.clone(), spec_b.clone(), arm_a.clone(), arm_b.clone())?
        .terms(tau, &detection, &options))
}
