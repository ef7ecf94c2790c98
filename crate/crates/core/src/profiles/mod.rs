//! Log-profiles, Moser concentration fields and their synthesis on ℝ².

pub mod fourier;
pub mod logcoord;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Result, XnlsError};
use crate::field::Field2D;
use crate::grid::GridSpec;
use crate::radial::RadialFunction;

pub use fourier::{fourier_moser, moser_fourier_h1_distance, FourierMoser};
pub use logcoord::{log_transform, LogTransform};

/// Largest admissible `α·s_m`, so that `e^{−α s_m}` stays representable.
pub const MAX_LOG_SCALE: f64 = 700.0;

/// Piecewise-linear `ψ` on `[0, ∞)`: linear between knots, constant after the last knot,
/// zero on `(−∞, 0]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadialProfile {
    knots: Vec<f64>,
    values: Vec<f64>,
}

impl RadialProfile {
    pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if knots.len() != values.len() || knots.len() < 2 {
            return Err(XnlsError::Domain(
                "profile needs at least two knots and one value per knot".into(),
            ));
        }
        if knots[0] != 0.0 || values[0] != 0.0 {
            return Err(XnlsError::Domain("profile must start at s = 0 with ψ(0) = 0".into()));
        }
        if knots.windows(2).any(|w| !(w[1] > w[0])) || knots.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(XnlsError::Domain("profile knots must be finite and strictly increasing".into()));
        }
        Ok(RadialProfile { knots, values })
    }

    /// The ramp `𝐋(s) = min(max(s, 0), 1)`.
    pub fn lions() -> Self {
        RadialProfile { knots: vec![0.0, 1.0], values: vec![0.0, 1.0] }
    }

    pub fn zero() -> Self {
        RadialProfile { knots: vec![0.0, 1.0], values: vec![0.0, 0.0] }
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn last_knot(&self) -> f64 {
        *self.knots.last().expect("at least two knots")
    }

    pub fn scaled(&self, c: f64) -> Self {
        RadialProfile { knots: self.knots.clone(), values: self.values.iter().map(|v| c * v).collect() }
    }

    fn segment(&self, s: f64) -> Option<usize> {
        if s <= 0.0 || s >= self.last_knot() {
            return None;
        }
        Some(self.knots.partition_point(|&k| k <= s) - 1)
    }

    pub fn eval(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        match self.segment(s) {
            None => *self.values.last().expect("nonempty"),
            Some(i) => {
                let (a, b) = (self.knots[i], self.knots[i + 1]);
                let t = (s - a) / (b - a);
                self.values[i] + t * (self.values[i + 1] - self.values[i])
            }
        }
    }

    pub fn slope(&self, s: f64) -> f64 {
        match self.segment(s) {
            None => 0.0,
            Some(i) => (self.values[i + 1] - self.values[i]) / (self.knots[i + 1] - self.knots[i]),
        }
    }

    fn slopes(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.knots.windows(2).zip(self.values.windows(2)).map(|(k, v)| {
            let len = k[1] - k[0];
            (k[0], len, (v[1] - v[0]) / len)
        })
    }

    /// `∫|ψ′|² ds`.
    pub fn dirichlet(&self) -> f64 {
        self.slopes().map(|(_, len, q)| q * q * len).sum()
    }

    /// `∫|ψ|² e^{−2s} ds`, exact for piecewise-linear ψ.
    pub fn weighted_l2(&self) -> f64 {
        let mut acc = 0.0;
        for (i, (a, len, q)) in self.slopes().enumerate() {
            let p = self.values[i] - q * a; // ψ = p + q s on the segment
            let b = a + len;
            // ∫ (p + qs)² e^{−2s} ds via the antiderivative −e^{−2s}(ψ²/2 + ψq/2 + q²/4)
            let anti = |s: f64| {
                let v = p + q * s;
                -(-2.0 * s).exp() * (0.5 * v * v + 0.5 * v * q + 0.25 * q * q)
            };
            acc += anti(b) - anti(a);
        }
        let last = *self.values.last().expect("nonempty");
        acc + 0.5 * last * last * (-2.0 * self.last_knot()).exp()
    }

    /// `(1/√4π)·sup_{s>0} |ψ(s)|/√s`, maximised segment by segment in closed form.
    pub fn orlicz_limit(&self) -> f64 {
        let mut best: f64 = 0.0;
        for (i, (a, len, q)) in self.slopes().enumerate() {
            let p = self.values[i] - q * a;
            let b = a + len;
            let h = |s: f64| if s > 0.0 { (p + q * s).abs() / s.sqrt() } else { 0.0 };
            best = best.max(h(a)).max(h(b));
            // d/ds (p + qs)/√s = (qs − p)/(2 s^{3/2}) vanishes at s = p/q
            if q != 0.0 {
                let s = p / q;
                if s > a && s < b {
                    best = best.max(h(s));
                }
            }
        }
        best / (4.0 * PI).sqrt()
    }

    pub fn add(&self, other: &RadialProfile) -> RadialProfile {
        let mut knots: Vec<f64> = self.knots.iter().chain(&other.knots).copied().collect();
        knots.sort_by(f64::total_cmp);
        knots.dedup();
        let values = knots.iter().map(|&s| self.eval(s) + other.eval(s)).collect();
        RadialProfile { knots, values }
    }
}

/// `(ψ⁽¹⁾, ψ⁽²⁾)` with `ψ⁽¹⁾ = min(𝐋, 1 − δ)` and `ψ⁽²⁾ = 𝐋 − ψ⁽¹⁾`.
pub fn clipped_profiles(delta: f64) -> Result<(RadialProfile, RadialProfile)> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(XnlsError::Domain(format!("δ = {delta} must lie in (0, 1/2)")));
    }
    let c = 1.0 - delta;
    let first = RadialProfile::new(vec![0.0, c], vec![0.0, c])?;
    let second = RadialProfile::new(vec![0.0, c, 1.0], vec![0.0, 0.0, delta])?;
    Ok((first, second))
}

/// `g(x) = √(α/2π)·ψ(−ln|x|/α)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaledProfileField {
    pub profile: RadialProfile,
    pub alpha: f64,
}

impl ScaledProfileField {
    pub fn new(profile: RadialProfile, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(XnlsError::Domain(format!("scale α = {alpha} must be positive")));
        }
        if alpha * profile.last_knot() > MAX_LOG_SCALE {
            return Err(XnlsError::Domain(format!(
                "α·s_m = {} exceeds {MAX_LOG_SCALE}; inner radius underflows",
                alpha * profile.last_knot()
            )));
        }
        Ok(ScaledProfileField { profile, alpha })
    }

    /// Moser's field `f_α`.
    pub fn moser(alpha: f64) -> Result<Self> {
        Self::new(RadialProfile::lions(), alpha)
    }

    fn amplitude(&self) -> f64 {
        (self.alpha / (2.0 * PI)).sqrt()
    }

    /// Radius inside which the field is constant.
    pub fn inner_radius(&self) -> f64 {
        (-self.alpha * self.profile.last_knot()).exp()
    }

    /// Synthesis at cell centres. Integrals of the result are only meaningful when
    /// [`ScaledProfileField::plateau_resolved`] holds; use the radial form otherwise.
    pub fn to_grid(&self, grid: GridSpec) -> Field2D {
        Field2D::from_radial(grid, |r| self.value(r))
    }

    pub fn plateau_resolved(&self, grid: &GridSpec) -> bool {
        self.inner_radius() >= grid.h()
    }

    /// Human-readable resolution warning, if any.
    pub fn resolution_warning(&self, grid: &GridSpec) -> Option<String> {
        (!self.plateau_resolved(grid)).then(|| {
            format!(
                "inner plateau radius {:.3e} below cell size {:.3e} at α = {}; radial quadrature used for integrals",
                self.inner_radius(),
                grid.h(),
                self.alpha
            )
        })
    }
}

impl RadialFunction for ScaledProfileField {
    fn value(&self, r: f64) -> f64 {
        if r >= 1.0 {
            return 0.0;
        }
        if r <= 0.0 {
            return self.amplitude() * self.profile.values().last().copied().unwrap_or(0.0);
        }
        self.amplitude() * self.profile.eval(-r.ln() / self.alpha)
    }

    fn derivative(&self, r: f64) -> f64 {
        if r >= 1.0 || r <= 0.0 {
            return 0.0;
        }
        -self.amplitude() * self.profile.slope(-r.ln() / self.alpha) / (self.alpha * r)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.profile.knots().iter().map(|&s| (-self.alpha * s).exp()).collect()
    }

    fn plateau_radius(&self) -> f64 {
        self.inner_radius()
    }

    fn outer_radius(&self) -> f64 {
        1.0
    }
}

/// Direct piecewise formula for `f_α`.
pub fn moser_value(alpha: f64, r: f64) -> f64 {
    if r >= 1.0 {
        0.0
    } else if r <= (-alpha).exp() {
        (alpha / (2.0 * PI)).sqrt()
    } else {
        -r.ln() / (2.0 * PI * alpha).sqrt()
    }
}

/// `f_α` sampled at cell centres.
pub fn moser_field(alpha: f64, grid: GridSpec) -> Result<Field2D> {
    ScaledProfileField::moser(alpha).map(|f| f.to_grid(grid))
}

/// `g = √(α/2π) ψ(−ln|x|/α)` sampled at cell centres.
pub fn profile_field(profile: &RadialProfile, alpha: f64, grid: GridSpec) -> Result<Field2D> {
    ScaledProfileField::new(profile.clone(), alpha).map(|f| f.to_grid(grid))
}

/// `‖f_α‖²_{L²} = (α/2)e^{−2α} + (1/α)∫_{e^{−α}}^1 r ln²r dr`, in closed form.
pub fn moser_mass_closed_form(alpha: f64) -> f64 {
    // ∫_a^1 r ln²r dr = 1/4 − a²(ln²a/2 − ln a/2 + 1/4) with ln a = −α
    let a2 = (-2.0 * alpha).exp();
    let tail = a2 * (0.5 * alpha * alpha + 0.5 * alpha + 0.25);
    0.5 * alpha * a2 + (0.25 - tail) / alpha
}

/// `|ln(β/α)|`, the separation of two scales.
pub fn log_scale_gap(alpha: f64, beta: f64) -> f64 {
    (beta / alpha).ln().abs()
}

/// Whether a finite sample of scale pairs shows `|ln(βₙ/αₙ)|` increasing past `floor`.
pub fn scales_orthogonal(pairs: &[(f64, f64)], floor: f64) -> bool {
    let gaps: Vec<f64> = pairs.iter().map(|&(a, b)| log_scale_gap(a, b)).collect();
    gaps.windows(2).all(|w| w[1] > w[0]) && gaps.last().is_some_and(|&g| g > floor)
}
