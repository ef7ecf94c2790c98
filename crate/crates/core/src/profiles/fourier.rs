//! Fourier-side form of the Moser field:
//! `f̃_α(r) = (2πα)^{-1/2} ∫₁^{e^α} J₀(rρ)/ρ dρ = (2πα)^{-1/2} (P(r) − P(r e^α))`.

use std::f64::consts::PI;

use crate::bessel::{j0, BesselIntegralTable};
use crate::error::{Result, XnlsError};
use crate::field::Field2D;
use crate::grid::GridSpec;
use crate::quadrature::GaussLegendre;
use crate::radial::RadialFunction;

/// Largest α accepted by the oscillatory quadrature.
pub const MAX_FOURIER_ALPHA: f64 = 12.0;
/// Panel budget for the tabulated Bessel integral.
pub const MAX_PANELS: usize = 4_000_000;
/// Upper frequency limit of the H¹-distance integral, in units of `e^α`.
const DISTANCE_CUTOFF: f64 = 20.0;

pub struct FourierMoser {
    alpha: f64,
    r_max: f64,
    table: BesselIntegralTable,
}

impl FourierMoser {
    /// Evaluator valid on `0 ≤ r ≤ r_max`.
    pub fn new(alpha: f64, r_max: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= MAX_FOURIER_ALPHA) {
            return Err(XnlsError::QuadratureBudget(format!(
                "Fourier Moser field needs 0 < α ≤ {MAX_FOURIER_ALPHA}, got {alpha}"
            )));
        }
        let x_max = r_max * alpha.exp();
        let panels = BesselIntegralTable::panels_for(x_max);
        if panels > MAX_PANELS {
            return Err(XnlsError::QuadratureBudget(format!(
                "{panels} Bessel panels exceed the budget of {MAX_PANELS}"
            )));
        }
        Ok(FourierMoser { alpha, r_max, table: BesselIntegralTable::new(x_max) })
    }

    fn norm(&self) -> f64 {
        (2.0 * PI * self.alpha).sqrt()
    }
}

impl RadialFunction for FourierMoser {
    fn value(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return (self.alpha / (2.0 * PI)).sqrt();
        }
        (self.table.p(r) - self.table.p(r * self.alpha.exp())) / self.norm()
    }

    fn derivative(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        (j0(r * self.alpha.exp()) - j0(r)) / (r * self.norm())
    }

    fn breakpoints(&self) -> Vec<f64> {
        vec![(-self.alpha).exp(), 1.0]
    }

    fn outer_radius(&self) -> f64 {
        self.r_max
    }
}

/// `f̃_α` sampled at cell centres.
pub fn fourier_moser(alpha: f64, grid: GridSpec) -> Result<Field2D> {
    let f = FourierMoser::new(alpha, grid.l * std::f64::consts::FRAC_1_SQRT_2 * 1.001)?;
    Ok(Field2D::from_radial(grid, |r| f.value(r)))
}

/// `‖f_α − f̃_α‖_{H¹}` by Plancherel. With `c = √(2π/α)` the Fourier transforms are
/// `c(J₀(ρe^{−α}) − J₀(ρ))/ρ²` and `c/ρ²` on `[1, e^α]`; the norm is
/// `(2π)^{-1}∫(1 + ρ²)|Δ|²ρ dρ`. Beyond `20e^α` the phase-averaged tail
/// `(e^α + 1)/(παρ)` is added in closed form.
pub fn moser_fourier_h1_distance(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= MAX_FOURIER_ALPHA) {
        return Err(XnlsError::QuadratureBudget(format!(
            "H¹ distance needs 0 < α ≤ {MAX_FOURIER_ALPHA}, got {alpha}"
        )));
    }
    let e = alpha.exp();
    let inv_e = 1.0 / e;
    let c2 = 2.0 * PI / alpha;
    let integrand = |rho: f64| {
        let mut d = j0(rho * inv_e) - j0(rho);
        if (1.0..=e).contains(&rho) {
            d -= 1.0;
        }
        c2 * d * d * (1.0 + rho * rho) / (rho * rho * rho) / (2.0 * PI)
    };
    let rule = GaussLegendre::g16();
    let mut acc = rule.composite(0.0, 1.0, 8, integrand);
    let rho_max = DISTANCE_CUTOFF * e;
    let mut a = 1.0;
    // panels grow geometrically until they reach the J₀ half-period
    let mut cuts = Vec::new();
    while a < rho_max {
        let mut b = a + (0.25 * a).min(PI);
        if a < e && b > e {
            b = e;
        }
        b = b.min(rho_max);
        cuts.push((a, b));
        a = b;
    }
    acc += cuts.iter().map(|&(a, b)| rule.integrate(a, b, integrand)).sum::<f64>();
    acc += (e + 1.0) / (PI * alpha * rho_max);
    Ok(acc.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::moser_value;

    #[test]
    fn origin_value_is_the_plateau_height() {
        for &alpha in &[2.0, 4.0, 8.0] {
            let f = FourierMoser::new(alpha, 2.0).unwrap();
            let plateau = (alpha / (2.0 * PI)).sqrt();
            assert_eq!(f.value(0.0), plateau);
            assert!((f.value(1e-9) - plateau).abs() < 1e-6);
        }
    }

    #[test]
    fn matches_direct_bessel_quadrature() {
        // 20-digit mpmath quadrature of (2πα)^{-1/2}∫₁^{e^α} J₀(rρ)/ρ dρ at α = 4
        let f = FourierMoser::new(4.0, 3.0).unwrap();
        for &(r, v) in &[
            (0.05, 0.649_923_729_727_592_6),
            (0.3, 0.266_018_876_715_332_7),
            (1.0, 0.047_149_244_833_416_32),
            (2.5, -0.031_028_532_283_967_44),
        ] {
            assert!((f.value(r) - v).abs() < 1e-12, "r = {r}: {} vs {v}", f.value(r));
        }
    }

    #[test]
    fn derivative_matches_difference_quotient() {
        let f = FourierMoser::new(4.0, 3.0).unwrap();
        for &r in &[0.1, 0.7, 2.0] {
            let h = 1e-6;
            let d = (f.value(r + h) - f.value(r - h)) / (2.0 * h);
            assert!((d - f.derivative(r)).abs() < 1e-6, "r = {r}");
        }
    }

    #[test]
    fn tracks_the_moser_field_away_from_its_kinks() {
        let f = FourierMoser::new(8.0, 3.0).unwrap();
        for &r in &[0.01, 0.1, 0.5] {
            assert!((f.value(r) - moser_value(8.0, r)).abs() < 0.05);
        }
    }

    #[test]
    fn budget_errors() {
        assert!(matches!(FourierMoser::new(13.0, 1.0), Err(XnlsError::QuadratureBudget(_))));
        assert!(matches!(FourierMoser::new(12.0, 1e3), Err(XnlsError::QuadratureBudget(_))));
        assert!(moser_fourier_h1_distance(20.0).is_err());
    }

    #[test]
    fn grid_field_is_real() {
        let grid = GridSpec::new(32, 8.0).unwrap();
        let u = fourier_moser(4.0, grid).unwrap();
        assert!(u.values().iter().all(|v| v.im.abs() < 1e-10 && v.re.is_finite()));
    }

    #[test]
    fn h1_distance_reference_and_trend() {
        // scipy quadrature of the same Plancherel integral
        let refs = [(4.0, 0.47215), (8.0, 0.33413), (12.0, 0.27282)];
        let mut prev = f64::INFINITY;
        for &(alpha, v) in &refs {
            let d = moser_fourier_h1_distance(alpha).unwrap();
            assert!(((d - v) / v).abs() < 2e-3, "α = {alpha}: {d} vs {v}");
            assert!(d < prev);
            prev = d;
        }
    }
}
