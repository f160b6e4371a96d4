use crate::error::{ensure_positive, HomError, Result};
use crate::Scalar;

pub const MIN_GRID_POINTS: usize = 16;
pub const DEFAULT_GRID_POINTS: usize = 4096;
/// Default span in units of 1/T₀.
pub const DEFAULT_SPAN_T0: f64 = 16.0;
const PROPAGATION_SPAN_T0: f64 = 12.0;

/// Uniform grid of detunings Ω from the carrier, symmetric about Ω = 0.
///
/// Point `j` sits at `(j + ½ − n/2)·ΔΩ` with `ΔΩ = span/n`, so the grid
/// never samples Ω = 0 for even `n` but is exactly mirror-symmetric. The
/// conjugate time grid has step `2π/span` and covers `2π/ΔΩ` ps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid<T> {
    n_points: usize,
    span: T,
}

impl<T: Scalar> FrequencyGrid<T> {
    pub fn new(n_points: usize, span: T) -> Result<Self> {
        if n_points < MIN_GRID_POINTS {
            return Err(HomError::GridTooSmall {
                got: n_points,
                min: MIN_GRID_POINTS,
            });
        }
        ensure_positive("frequency grid span", span.as_f64())?;
        Ok(Self { n_points, span })
    }

    /// 4096 points over 16/T₀.
    pub fn for_pulse_width(t0: T) -> Result<Self> {
        ensure_positive("T0", t0.as_f64())?;
        Self::new(DEFAULT_GRID_POINTS, T::lit(DEFAULT_SPAN_T0) / t0)
    }

    /// Grid wide enough in time to hold a pulse of half-width `t0` after
    /// accumulating `gdd` ps² without wrap-around: span 12/T₀ and a time
    /// window of at least 1.2·|GDD|·span.
    pub fn for_propagation(t0: T, gdd: T) -> Result<Self> {
        ensure_positive("T0", t0.as_f64())?;
        let span = T::lit(PROPAGATION_SPAN_T0) / t0;
        let window = (T::lit(1.2) * num_traits::Float::abs(gdd) * span).max(T::lit(64.0) * t0);
        let needed = (span * window / T::TAU()).ceil().as_f64() as usize;
        let n = needed.max(DEFAULT_GRID_POINTS).next_power_of_two();
        Self::new(n, span)
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn span(&self) -> T {
        self.span
    }

    pub fn spacing(&self) -> T {
        self.span / T::lit(self.n_points as f64)
    }

    pub fn omega(&self, j: usize) -> T {
        (T::lit(j as f64) + T::lit(0.5) - T::lit(self.n_points as f64 / 2.0)) * self.spacing()
    }

    pub fn omegas(&self) -> impl Iterator<Item = T> + '_ {
        (0..self.n_points).map(move |j| self.omega(j))
    }

    /// Sampling step of the conjugate time grid, ps.
    pub fn time_step(&self) -> T {
        T::TAU() / self.span
    }

    /// Total extent of the (periodic) conjugate time window, ps.
    pub fn time_window(&self) -> T {
        T::TAU() / self.spacing()
    }

    /// Time of sample `k` on the conjugate grid; `k = n/2` is t = 0.
    pub fn time(&self, k: usize) -> T {
        (T::lit(k as f64) - T::lit((self.n_points / 2) as f64)) * self.time_step()
    }
}
