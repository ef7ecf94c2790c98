//! Exact radial representation of fields on ℝ² and the `Integrable` abstraction shared with
//! grid fields.
//!
//! Radial integrals are taken as `2π∫ h(u(r)) r dr`, split at the function's breakpoints.
//! Segments away from the origin are integrated in `t = −ln r`, which resolves the
//! logarithmic concentration of Moser-type fields at any scale. A constant plateau on
//! `[0, r₀]` contributes `π r₀² h(u(0))` exactly.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::field::Field2D;
use crate::quadrature::GaussLegendre;

/// Gauss–Legendre panels per unit length of `t = −ln r`.
const PANELS_PER_LOG_UNIT: f64 = 8.0;
/// Panels per unit of `r` on a segment touching the origin.
const PANELS_PER_RADIUS: f64 = 24.0;

/// A real radial function `u(x) = v(|x|)`.
pub trait RadialFunction: Send + Sync {
    fn value(&self, r: f64) -> f64;
    fn derivative(&self, r: f64) -> f64;
    /// Radii in `(0, outer_radius())` where `v` or `v′` may be non-smooth.
    fn breakpoints(&self) -> Vec<f64>;
    /// `v` is constant on `[0, plateau_radius()]`.
    fn plateau_radius(&self) -> f64 {
        0.0
    }
    /// `v` vanishes, or is negligible, beyond this radius.
    fn outer_radius(&self) -> f64;

    /// Sample onto a grid at cell centres.
    fn to_field(&self, grid: crate::grid::GridSpec) -> Field2D
    where
        Self: Sized,
    {
        Field2D::from_radial(grid, |r| self.value(r))
    }
}

/// Quantities every field representation must provide for the inequality machinery.
pub trait Integrable: Sync {
    /// `∫ h(|u(x)|) dx`.
    fn integrate_modulus(&self, h: &mut dyn FnMut(f64) -> f64) -> f64;
    fn sup_modulus(&self) -> f64;
    /// `∫|∇u|²`.
    fn grad_energy(&self) -> f64;
    /// `∫ h(|∇u(x)|) dx`.
    fn integrate_grad_modulus(&self, h: &mut dyn FnMut(f64) -> f64) -> f64;
    /// `sup |u(x) − u(y)| / |x − y|^{1/2}`.
    fn holder_half(&self) -> f64;

    fn mass(&self) -> f64 {
        self.integrate_modulus(&mut |s| s * s)
    }

    fn h1(&self) -> f64 {
        (self.mass() + self.grad_energy()).sqrt()
    }

    /// `‖u‖_{Lᵖ}` with the sup factored out.
    fn lp(&self, p: f64) -> f64 {
        let sup = self.sup_modulus();
        if sup == 0.0 {
            return 0.0;
        }
        sup * self.integrate_modulus(&mut |s| (s / sup).powf(p)).powf(1.0 / p)
    }

    /// `‖u‖_{L⁴} + ‖∇u‖_{L⁴}`.
    fn w14(&self) -> f64 {
        let grad4 = self.integrate_grad_modulus(&mut |s| s.powi(4)).powf(0.25);
        self.lp(4.0) + grad4
    }
}

impl Integrable for Field2D {
    fn integrate_modulus(&self, h: &mut dyn FnMut(f64) -> f64) -> f64 {
        let area = self.grid().cell_area();
        self.values().iter().map(|z| h(z.norm())).sum::<f64>() * area
    }

    fn sup_modulus(&self) -> f64 {
        self.linf()
    }

    fn grad_energy(&self) -> f64 {
        Field2D::grad_energy(self)
    }

    fn integrate_grad_modulus(&self, h: &mut dyn FnMut(f64) -> f64) -> f64 {
        let area = self.grid().cell_area();
        self.gradient_modulus().iter().map(|&g| h(g)).sum::<f64>() * area
    }

    fn holder_half(&self) -> f64 {
        crate::field::holder_half(self, crate::field::HOLDER_WINDOW)
    }

    fn lp(&self, p: f64) -> f64 {
        self.lp_norm(p).unwrap_or(f64::INFINITY)
    }
}

/// Integration intervals in `r`, excluding the plateau.
fn segments<F: RadialFunction + ?Sized>(f: &F) -> Vec<(f64, f64)> {
    let r0 = f.plateau_radius();
    let outer = f.outer_radius();
    let mut cuts: Vec<f64> = f
        .breakpoints()
        .into_iter()
        .filter(|&b| b > r0 && b < outer)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut pts = vec![r0];
    pts.extend(cuts);
    pts.push(outer);
    pts.windows(2).map(|w| (w[0], w[1])).filter(|(a, b)| b > a).collect()
}

/// `2π∫_{r₀}^{outer} k(r) r dr` over the segments of `f`.
fn integrate_segments<F: RadialFunction + ?Sized>(f: &F, k: &mut dyn FnMut(f64) -> f64) -> f64 {
    let rule = GaussLegendre::g16();
    let mut acc = 0.0;
    for (a, b) in segments(f) {
        if a == 0.0 {
            let panels = ((b * PANELS_PER_RADIUS).ceil() as usize).max(4);
            acc += rule.composite(0.0, b, panels, |r| k(r) * r);
        } else {
            let (ta, tb) = (-b.ln(), -a.ln());
            let panels = (((tb - ta) * PANELS_PER_LOG_UNIT).ceil() as usize).max(2);
            acc += rule.composite(ta, tb, panels, |t| {
                let r = (-t).exp();
                k(r) * r * r
            });
        }
    }
    2.0 * PI * acc
}

/// `∫_{ℝ²} h(|v(|x|)|) dx` with exact plateau contribution.
pub fn integrate_radial<F: RadialFunction + ?Sized>(f: &F, h: &mut dyn FnMut(f64) -> f64) -> f64 {
    let r0 = f.plateau_radius();
    let plateau = if r0 > 0.0 { PI * r0 * r0 * h(f.value(0.0).abs()) } else { 0.0 };
    plateau + integrate_segments(f, &mut |r| h(f.value(r).abs()))
}

/// Log-spaced radii resolving the structure of `f`, used for sup and Hölder scans.
fn scan_radii<F: RadialFunction + ?Sized>(f: &F) -> Vec<f64> {
    let outer = f.outer_radius();
    let r0 = f.plateau_radius();
    let lo = if r0 > 0.0 { r0 * 0.5 } else { (outer * 1e-6).min(1e-3) };
    let mut rs = Vec::new();
    let count = (((outer / lo).ln() * 200.0).ceil() as usize).clamp(400, 20_000);
    let step = (outer / lo).ln() / count as f64;
    for i in 0..=count {
        rs.push(lo * (step * i as f64).exp());
    }
    rs.extend(f.breakpoints().into_iter().filter(|&b| b > 0.0 && b < outer));
    rs.push(0.0);
    rs.sort_by(f64::total_cmp);
    rs.dedup();
    rs
}

impl<T: RadialFunction + ?Sized> Integrable for T {
    fn integrate_modulus(&self, h: &mut dyn FnMut(f64) -> f64) -> f64 {
        integrate_radial(self, h)
    }

    fn sup_modulus(&self) -> f64 {
        scan_radii(self)
            .into_iter()
            .map(|r| self.value(r).abs())
            .fold(0.0, f64::max)
    }

    fn grad_energy(&self) -> f64 {
        integrate_segments(self, &mut |r| self.derivative(r).powi(2))
    }

    fn integrate_grad_modulus(&self, h: &mut dyn FnMut(f64) -> f64) -> f64 {
        let r0 = self.plateau_radius();
        let plateau = if r0 > 0.0 { PI * r0 * r0 * h(0.0) } else { 0.0 };
        plateau + integrate_segments(self, &mut |r| h(self.derivative(r).abs()))
    }

    /// For a radial function the supremum is approached along a ray, since
    /// `|x − y| ≥ ||x| − |y||`; scanned over pairs on a log grid.
    fn holder_half(&self) -> f64 {
        let rs = scan_radii(self);
        let vs: Vec<f64> = rs.iter().map(|&r| self.value(r)).collect();
        let mut best: f64 = 0.0;
        for i in 0..rs.len() {
            for j in (i + 1)..rs.len() {
                let q = (vs[j] - vs[i]).abs() / (rs[j] - rs[i]).sqrt();
                best = best.max(q);
            }
        }
        best
    }
}

/// `c·e^{−r²/w²}`, truncated where it falls below `10⁻²⁰` of its peak.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialGaussian {
    pub amplitude: f64,
    pub width: f64,
}

impl RadialGaussian {
    pub fn scaled_copy(&self, c: f64) -> RadialGaussian {
        RadialGaussian { amplitude: c * self.amplitude, width: self.width }
    }
}

impl RadialFunction for RadialGaussian {
    fn value(&self, r: f64) -> f64 {
        self.amplitude * (-(r / self.width).powi(2)).exp()
    }

    fn derivative(&self, r: f64) -> f64 {
        -2.0 * r / (self.width * self.width) * self.value(r)
    }

    fn breakpoints(&self) -> Vec<f64> {
        vec![self.width, 2.0 * self.width, 4.0 * self.width]
    }

    fn outer_radius(&self) -> f64 {
        6.8 * self.width
    }
}

/// `c·v(r)` for a shared radial function.
#[derive(Clone)]
pub struct ScaledRadial {
    pub factor: f64,
    pub inner: Arc<dyn RadialFunction>,
}

impl RadialFunction for ScaledRadial {
    fn value(&self, r: f64) -> f64 {
        self.factor * self.inner.value(r)
    }
    fn derivative(&self, r: f64) -> f64 {
        self.factor * self.inner.derivative(r)
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.inner.breakpoints()
    }
    fn plateau_radius(&self) -> f64 {
        self.inner.plateau_radius()
    }
    fn outer_radius(&self) -> f64 {
        self.inner.outer_radius()
    }
}

/// Pointwise sum of radial functions.
#[derive(Clone)]
pub struct RadialSum {
    pub terms: Vec<Arc<dyn RadialFunction>>,
}

impl RadialFunction for RadialSum {
    fn value(&self, r: f64) -> f64 {
        self.terms.iter().map(|t| t.value(r)).sum()
    }
    fn derivative(&self, r: f64) -> f64 {
        self.terms.iter().map(|t| t.derivative(r)).sum()
    }
    fn breakpoints(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self.terms.iter().flat_map(|t| t.breakpoints()).collect();
        // each term's plateau edge is a kink of the sum
        b.extend(self.terms.iter().map(|t| t.plateau_radius()).filter(|&r| r > 0.0));
        b.extend(self.terms.iter().map(|t| t.outer_radius()));
        b
    }
    fn plateau_radius(&self) -> f64 {
        self.terms.iter().map(|t| t.plateau_radius()).fold(f64::INFINITY, f64::min)
    }
    fn outer_radius(&self) -> f64 {
        self.terms.iter().map(|t| t.outer_radius()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    #[test]
    fn gaussian_integrals_match_closed_forms() {
        let g = RadialGaussian { amplitude: 1.0, width: 1.0 };
        assert!((g.mass() - PI / 2.0).abs() < 1e-12);
        assert!((Integrable::grad_energy(&g) - PI).abs() < 1e-12);
        assert!((g.sup_modulus() - 1.0).abs() < 1e-15);
        // ‖e^{−r²}‖₄⁴ = π/4
        assert!((g.lp(4.0).powi(4) - PI / 4.0).abs() < 1e-12);
        // ∫|∇u|⁴ = ∫ 16 r⁴ e^{−4r²} 2πr dr = π/2
        let g4 = g.integrate_grad_modulus(&mut |s| s.powi(4));
        assert!((g4 - PI / 2.0).abs() < 1e-11);
    }

    #[test]
    fn radial_and_grid_representations_agree() {
        let g = RadialGaussian { amplitude: 0.7, width: 1.3 };
        let grid = GridSpec::new(256, 24.0).unwrap();
        let u = g.to_field(grid);
        let rel = |a: f64, b: f64| ((a - b) / b).abs();
        assert!(rel(Integrable::mass(&u), g.mass()) < 1e-10);
        assert!(rel(Integrable::grad_energy(&u), Integrable::grad_energy(&g)) < 1e-10);
        assert!(rel(Integrable::lp(&u, 6.0), g.lp(6.0)) < 1e-10);
        assert!(rel(Integrable::w14(&u), g.w14()) < 1e-8);
    }

    #[test]
    fn holder_of_gaussian_is_close_to_grid_value() {
        let g = RadialGaussian { amplitude: 1.0, width: 1.0 };
        let grid = GridSpec::new(256, 16.0).unwrap();
        let u = g.to_field(grid);
        let a = Integrable::holder_half(&g);
        let b = Integrable::holder_half(&u);
        // the windowed grid value cannot exceed the true supremum by more than sampling error
        assert!(b <= a * 1.01, "grid {b} radial {a}");
        assert!(b > 0.5 * a);
    }

    #[test]
    fn sums_and_scales() {
        let a: Arc<dyn RadialFunction> = Arc::new(RadialGaussian { amplitude: 1.0, width: 1.0 });
        let twice = RadialSum { terms: vec![a.clone(), a.clone()] };
        let scaled = ScaledRadial { factor: 2.0, inner: a };
        assert!((twice.mass() - scaled.mass()).abs() < 1e-12);
        assert!((twice.mass() - 2.0 * PI).abs() < 1e-11);
    }
}
