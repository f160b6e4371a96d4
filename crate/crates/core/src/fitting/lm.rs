//! Levenberg–Marquardt for the four-parameter Gaussian dip
//! y(τ) = B·[1 − V·exp(−(τ−τ₀)²/2σ²)].

use nalgebra::{Matrix4, Vector4};

pub const MAX_ITERATIONS: usize = 200;
pub const STEP_TOLERANCE: f64 = 1e-10;
const LAMBDA_START: f64 = 1e-3;
const LAMBDA_MAX: f64 = 1e16;

/// (B, V, τ₀, σ)
pub(crate) type Params = Vector4<f64>;

pub(crate) fn model(p: &Params, tau: f64) -> f64 {
    let x = (tau - p[2]) / p[3];
    p[0] * (1.0 - p[1] * (-0.5 * x * x).exp())
}

fn gradient(p: &Params, tau: f64) -> Vector4<f64> {
    let (b, v, s) = (p[0], p[1], p[3]);
    let u = tau - p[2];
    let g = (-0.5 * u * u / (s * s)).exp();
    let bvg = b * v * g;
    Vector4::new(1.0 - v * g, -b * g, -bvg * u / (s * s), -bvg * u * u / (s * s * s))
}

pub(crate) struct Normal {
    pub rss: f64,
    pub jtj: Matrix4<f64>,
    jtr: Vector4<f64>,
}

pub(crate) fn rss(p: &Params, x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(&t, &v)| (v - model(p, t)).powi(2)).sum()
}

pub(crate) fn normal_equations(p: &Params, x: &[f64], y: &[f64]) -> Normal {
    let mut jtj = Matrix4::zeros();
    let mut jtr = Vector4::zeros();
    let mut rss = 0.0;
    for (&t, &v) in x.iter().zip(y) {
        let r = v - model(p, t);
        let j = gradient(p, t);
        jtj += j * j.transpose();
        jtr += j * r;
        rss += r * r;
    }
    Normal { rss, jtj, jtr }
}

pub(crate) struct Solution {
    pub params: Params,
    pub iterations: usize,
    pub normal: Normal,
    pub converged: bool,
}

/// Damped Gauss–Newton with Marquardt's diagonal scaling. Converges when an
/// accepted step moves every parameter by less than `STEP_TOLERANCE` of its
/// natural scale (|B|, 1, σ, σ), or when no damping can reduce the residual
/// any further. After `MAX_ITERATIONS` the last iterate is returned with
/// `converged == false`.
pub(crate) fn solve(x: &[f64], y: &[f64], start: Params) -> Solution {
    let mut p = start;
    let mut normal = normal_equations(&p, x, y);
    let mut lambda = LAMBDA_START;
    for iteration in 1..=MAX_ITERATIONS {
        let floor = 1e-12 * normal.jtj.diagonal().max();
        let mut damped = normal.jtj;
        for i in 0..4 {
            damped[(i, i)] += lambda * normal.jtj[(i, i)].max(floor);
        }
        let step = damped.cholesky().map(|c| c.solve(&normal.jtr));
        if let Some(step) = step.filter(|s| s.iter().all(|v| v.is_finite())) {
            let candidate = p + step;
            let trial_rss = rss(&candidate, x, y);
            if trial_rss.is_finite() && trial_rss <= normal.rss {
                p = candidate;
                normal = normal_equations(&p, x, y);
                lambda = (lambda / 10.0).max(1e-12);
                let scale = Vector4::new(p[0].abs(), 1.0, p[3].abs(), p[3].abs());
                let small = (0..4).all(|i| step[i].abs() <= STEP_TOLERANCE * scale[i]);
                if small {
                    return Solution {
                        params: p,
                        iterations: iteration,
                        normal,
                        converged: true,
                    };
                }
                continue;
            }
        }
        lambda *= 10.0;
        if lambda > LAMBDA_MAX {
            return Solution {
                params: p,
                iterations: iteration,
                normal,
                converged: true,
            };
        }
    }
    Solution {
        params: p,
        iterations: MAX_ITERATIONS,
        normal,
        converged: false,
    }
}
