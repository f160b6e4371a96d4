use num_complex::Complex;
use num_traits::Float;
use rustfft::FftPlanner;

use super::{FrequencyGrid, SpectralAmplitude};
use crate::Scalar;

/// Complex temporal envelope α(t) on the time grid conjugate to a
/// [`FrequencyGrid`]. The carrier `exp(−iω₀t)` is factored out.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalField<T> {
    grid: FrequencyGrid<T>,
    values: Vec<Complex<T>>,
    center_wavelength: T,
}

/// Sampled photon flux |α(t)|² in photons/ps.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalProfile<T> {
    pub t_start: T,
    pub dt: T,
    pub intensity: Vec<T>,
}

// Both directions use Ω_j = (j − c)ΔΩ with c = (n−1)/2 and t_k = (k − n/2)Δt,
// where ΔΩ·Δt = 2π/n. The half-sample offset c and the centring n/2 are
// folded into pre/post phase factors around a plain FFT.

/// 2π·c·(k − n/2)/n, reduced exactly in integers before scaling.
fn centring_phase<T: Scalar>(n: usize, k: usize) -> T {
    let n = n as i64;
    let twice_n = 2 * n;
    let numerator = ((n - 1) * (k as i64 - n / 2)).rem_euclid(twice_n);
    T::TAU() * T::lit(numerator as f64) / T::lit(twice_n as f64)
}

/// Multiplies by exp(±2πi·j·(n/2)/n); ±1 for even n.
fn shift_by_half<T: Scalar>(n: usize, j: usize, z: Complex<T>, sign: T) -> Complex<T> {
    if n.is_multiple_of(2) {
        if j.is_multiple_of(2) {
            z
        } else {
            -z
        }
    } else {
        let numerator = (j * (n / 2)) % n;
        z * Complex::cis(sign * T::TAU() * T::lit(numerator as f64) / T::lit(n as f64))
    }
}

/// α(t_k) = (2π)^{-1/2} Σ_j α(Ω_j) exp(−iΩ_j t_k) ΔΩ
pub(crate) fn spectral_to_temporal<T: Scalar>(grid: &FrequencyGrid<T>, spectral: &[Complex<T>]) -> Vec<Complex<T>> {
    let n = grid.len();
    let mut buffer: Vec<Complex<T>> = spectral
        .iter()
        .enumerate()
        .map(|(j, &a)| shift_by_half(n, j, a, T::one()))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buffer);
    let prefactor = grid.spacing() / T::TAU().sqrt();
    buffer
        .iter_mut()
        .enumerate()
        .for_each(|(k, z)| *z = *z * Complex::cis(centring_phase::<T>(n, k)) * prefactor);
    buffer
}

/// α(Ω_j) = (2π)^{-1/2} Σ_k α(t_k) exp(+iΩ_j t_k) Δt
pub(crate) fn temporal_to_spectral<T: Scalar>(grid: &FrequencyGrid<T>, temporal: &[Complex<T>]) -> Vec<Complex<T>> {
    let n = grid.len();
    let mut buffer: Vec<Complex<T>> = temporal
        .iter()
        .enumerate()
        .map(|(k, &a)| a * Complex::cis(-centring_phase::<T>(n, k)))
        .collect();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buffer);
    let prefactor = grid.time_step() / T::TAU().sqrt();
    buffer
        .into_iter()
        .enumerate()
        .map(|(j, z)| shift_by_half(n, j, z * prefactor, -T::one()))
        .collect()
}

impl<T: Scalar> TemporalField<T> {
    pub fn from_spectral(spec: &SpectralAmplitude<T>) -> Self {
        Self {
            grid: *spec.grid(),
            values: spectral_to_temporal(spec.grid(), spec.values()),
            center_wavelength: spec.center_wavelength(),
        }
    }

    /// Wraps samples given on the time grid conjugate to `grid`.
    pub fn from_samples(grid: FrequencyGrid<T>, values: Vec<Complex<T>>, center_wavelength: T) -> Option<Self> {
        (values.len() == grid.len()).then_some(Self {
            grid,
            values,
            center_wavelength,
        })
    }

    pub fn grid(&self) -> &FrequencyGrid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn time(&self, k: usize) -> T {
        self.grid.time(k)
    }

    pub fn to_spectral(&self) -> SpectralAmplitude<T> {
        SpectralAmplitude::from_parts(
            self.grid,
            temporal_to_spectral(&self.grid, &self.values),
            self.center_wavelength,
        )
    }

    pub fn profile(&self) -> TemporalProfile<T> {
        TemporalProfile {
            t_start: self.grid.time(0),
            dt: self.grid.time_step(),
            intensity: self.values.iter().map(|z| z.norm_sqr()).collect(),
        }
    }
}

/// Inverse-transforms a spectral amplitude and returns its photon flux.
pub fn to_temporal_profile<T: Scalar>(spec: &SpectralAmplitude<T>) -> TemporalProfile<T> {
    TemporalField::from_spectral(spec).profile()
}

impl<T: Scalar> TemporalProfile<T> {
    pub fn len(&self) -> usize {
        self.intensity.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intensity.is_empty()
    }

    pub fn time(&self, k: usize) -> T {
        self.t_start + T::lit(k as f64) * self.dt
    }

    /// ∫|α(t)|² dt, the mean photon number.
    pub fn total(&self) -> T {
        self.intensity.iter().fold(T::zero(), |acc, &v| acc + v) * self.dt
    }

    pub fn centroid(&self) -> Option<T> {
        let total = self.intensity.iter().fold(T::zero(), |acc, &v| acc + v);
        if total <= T::zero() {
            return None;
        }
        let first = self
            .intensity
            .iter()
            .enumerate()
            .fold(T::zero(), |acc, (k, &v)| acc + v * self.time(k));
        Some(first / total)
    }

    /// Standard deviation of the flux distribution, ps.
    pub fn rms_width(&self) -> Option<T> {
        let mean = self.centroid()?;
        let (sum, second) = self
            .intensity
            .iter()
            .enumerate()
            .fold((T::zero(), T::zero()), |(s, m2), (k, &v)| {
                let x = self.time(k) - mean;
                (s + v, m2 + v * x * x)
            });
        Some((second / sum).sqrt())
    }

    fn peak_index(&self) -> Option<usize> {
        self.intensity
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_finite())
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap_or(std::cmp::Ordering::Equal))
            .map(|(k, _)| k)
            .filter(|&k| self.intensity[k] > T::zero())
    }

    /// Full width at half maximum of the main peak, ps.
    ///
    /// Each half-maximum crossing is located by fitting a parabola to
    /// ln I through the three samples around it, which is exact for
    /// Gaussian profiles. Falls back to linear interpolation where a sample
    /// is zero. Returns `None` when the peak touches the window edge.
    pub fn fwhm(&self) -> Option<T> {
        let peak = self.peak_index()?;
        let half = self.interpolated_peak(peak) / T::lit(2.0);
        let mut right = peak;
        while right + 1 < self.len() && self.intensity[right + 1] >= half {
            right += 1;
        }
        if right + 1 >= self.len() {
            return None;
        }
        let mut left = peak;
        while left > 0 && self.intensity[left - 1] >= half {
            left -= 1;
        }
        if left == 0 {
            return None;
        }
        let t_right = self.crossing(right, half);
        let t_left = self.crossing(left - 1, half);
        Some(t_right - t_left)
    }

    /// Peak height from a parabola through ln I at the three samples around
    /// the discrete maximum.
    fn interpolated_peak(&self, peak: usize) -> T {
        let sampled = self.intensity[peak];
        if peak == 0 || peak + 1 >= self.len() {
            return sampled;
        }
        let ys = [self.intensity[peak - 1], sampled, self.intensity[peak + 1]];
        if ys.iter().any(|&y| y <= T::zero()) {
            return sampled;
        }
        let [l0, l1, l2] = ys.map(|y| y.ln());
        let curvature = l0 - T::lit(2.0) * l1 + l2;
        if curvature >= T::zero() {
            return sampled;
        }
        let slope = (l2 - l0) / T::lit(2.0);
        (l1 - slope * slope / (T::lit(2.0) * curvature)).exp().max(sampled)
    }

    /// Time in [t_k, t_{k+1}] where the flux crosses `level`.
    fn crossing(&self, k: usize, level: T) -> T {
        let y0 = self.intensity[k];
        let y1 = self.intensity[k + 1];
        let linear = {
            let s = (level - y0) / (y1 - y0);
            self.time(k) + s * self.dt
        };
        // Third sample on the side farther from the level.
        let (base, third) = if (y0 - level).abs() > (y1 - level).abs() {
            (k.checked_sub(1), k)
        } else {
            (Some(k), k + 2)
        };
        let Some(base) = base else { return linear };
        if third >= self.len() || base + 2 >= self.len() {
            return linear;
        }
        let ys = [self.intensity[base], self.intensity[base + 1], self.intensity[base + 2]];
        if ys.iter().any(|&y| y <= T::zero()) {
            return linear;
        }
        let [l0, l1, l2] = ys.map(|y| y.ln());
        let target = level.ln();
        // ln I(s) = l1 + b(s−1) + a(s−1)², s in sample units from `base`.
        let a = (l0 - T::lit(2.0) * l1 + l2) / T::lit(2.0);
        let b = (l2 - l0) / T::lit(2.0);
        let c = l1 - target;
        let lo = T::lit((k - base) as f64) - T::one();
        let hi = lo + T::one();
        let root = solve_quadratic_in(a, b, c, lo, hi);
        match root {
            Some(u) => self.time(base + 1) + u * self.dt,
            None => linear,
        }
    }
}

/// Root of a·u² + b·u + c = 0 inside [lo, hi], if any.
fn solve_quadratic_in<T: Scalar>(a: T, b: T, c: T, lo: T, hi: T) -> Option<T> {
    let tol = T::lit(1e-9);
    let inside = |u: T| u >= lo - tol && u <= hi + tol;
    if Float::abs(a) < T::lit(1e-14) * (Float::abs(b) + T::one()) {
        if b == T::zero() {
            return None;
        }
        let u = -c / b;
        return inside(u).then_some(u);
    }
    let disc = b * b - T::lit(4.0) * a * c;
    if disc < T::zero() {
        return None;
    }
    let sq = disc.sqrt();
    // Numerically stable pair of roots.
    let q = if b >= T::zero() {
        -(b + sq) / T::lit(2.0)
    } else {
        -(b - sq) / T::lit(2.0)
    };
    let roots = [q / a, if q != T::zero() { c / q } else { q / a }];
    roots.into_iter().find(|&u| inside(u))
}
