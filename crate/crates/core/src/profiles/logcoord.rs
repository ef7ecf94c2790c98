//! Logarithmic change of variables `|x| = e^{−t/2}`, `w(t) = √(4π)·u(|x|)`.
//!
//! Under it `∫|∇u|²dx = ∫|w′|²dt` and `∫|u|ᵖdx = π(4π)^{−p/2}∫|w|ᵖe^{−t}dt`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Result, XnlsError};
use crate::quadrature::trapezoid;
use crate::radial::RadialFunction;

/// Relative tolerance on the ratio of consecutive radii.
const LOG_SPACING_RTOL: f64 = 1e-9;

/// `w` as a piecewise-linear function on an increasing `t` grid. Beyond the last sample
/// `w` is continued by its last value, which is exact on an inner plateau.
#[derive(Debug, Clone, Serialize)]
pub struct LogTransform {
    pub t: Vec<f64>,
    pub w: Vec<f64>,
}

/// Transform samples `u(rᵢ)` taken on log-spaced radii in `(0, 1]`.
pub fn log_transform(radii: &[f64], values: &[f64]) -> Result<LogTransform> {
    if radii.len() != values.len() || radii.len() < 3 {
        return Err(XnlsError::Domain("need at least three (radius, value) samples".into()));
    }
    if radii.iter().any(|&r| !(r > 0.0 && r <= 1.0)) {
        return Err(XnlsError::Domain("radii must lie in (0, 1]".into()));
    }
    let q = radii[1] / radii[0];
    if (q - 1.0).abs() < 1e-12
        || radii
            .windows(2)
            .any(|w| ((w[1] / w[0]) / q - 1.0).abs() > LOG_SPACING_RTOL)
    {
        return Err(XnlsError::Domain("radii are not log-spaced".into()));
    }
    let mut pairs: Vec<(f64, f64)> = radii
        .iter()
        .zip(values)
        .map(|(&r, &u)| (-2.0 * r.ln(), (4.0 * PI).sqrt() * u))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(LogTransform { t: pairs.iter().map(|p| p.0).collect(), w: pairs.iter().map(|p| p.1).collect() })
}

/// Sample a radial function on `count` log-spaced radii from 1 down to `e^{−t_max/2}`
/// and transform.
pub fn log_transform_radial<F: RadialFunction + ?Sized>(f: &F, t_max: f64, count: usize) -> Result<LogTransform> {
    let radii: Vec<f64> = (0..count)
        .map(|i| (-0.5 * t_max * i as f64 / (count - 1) as f64).exp())
        .collect();
    let values: Vec<f64> = radii.iter().map(|&r| f.value(r)).collect();
    log_transform(&radii, &values)
}

impl LogTransform {
    /// `∫|w′|²dt`, exact for the piecewise-linear interpolant. Zero for `t < t₀` is implied
    /// when `t₀ = 0` and `w(0) = 0`.
    pub fn dirichlet(&self) -> f64 {
        self.t
            .windows(2)
            .zip(self.w.windows(2))
            .map(|(t, w)| (w[1] - w[0]).powi(2) / (t[1] - t[0]))
            .sum()
    }

    /// `∫ h(w(t)) e^{−t} dt` by trapezoid on the samples plus the constant tail.
    pub fn weighted_integral(&self, mut h: impl FnMut(f64) -> f64) -> f64 {
        let ys: Vec<f64> = self.t.iter().zip(&self.w).map(|(&t, &w)| h(w) * (-t).exp()).collect();
        let last_t = *self.t.last().expect("nonempty");
        let last_w = *self.w.last().expect("nonempty");
        trapezoid(&self.t, &ys) + h(last_w) * (-last_t).exp()
    }

    /// `∫|w|ᵖe^{−t}dt`.
    pub fn lp_weighted(&self, p: f64) -> f64 {
        self.weighted_integral(|w| w.abs().powf(p))
    }

    /// `∫e^{β w²}|w|ᵖe^{−t}dt`.
    pub fn reduced_lhs(&self, beta: f64, p: f64) -> f64 {
        self.weighted_integral(|w| (beta * w * w).exp() * w.abs().powf(p))
    }

    /// `∫|u|ᵖdx` recovered from `w`.
    pub fn planar_lp(&self, p: f64) -> f64 {
        PI * (4.0 * PI).powf(-0.5 * p) * self.lp_weighted(p)
    }
}
