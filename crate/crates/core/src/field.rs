//! Grid fields on the periodic square, spectral calculus and the norms used
//! throughout the crate.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, XnlsError};
use crate::fft::Fft2;
use crate::grid::GridSpec;

/// Window (in cells) for the discrete C^{1/2} seminorm.
pub const HOLDER_WINDOW: usize = 8;

/// Complex field sampled at the cell centers of a [`GridSpec`].
///
/// Values are stored row-major: `values[j * n + k] = u(x_j, y_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field2D {
    grid: GridSpec,
    values: Vec<Complex64>,
}

impl Field2D {
    pub fn new(grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        grid.validate()?;
        if values.len() != grid.len() {
            return Err(XnlsError::InvalidField(format!(
                "expected {} values for n = {}, got {}",
                grid.len(),
                grid.n,
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(XnlsError::InvalidField(format!("non-finite value at cell {i}")));
        }
        Ok(Field2D { grid, values })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Field2D { grid, values: vec![Complex64::default(); grid.len()] }
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(f64, f64) -> Complex64) -> Self {
        let values = (0..grid.len())
            .map(|i| {
                let (x, y) = grid.position(i);
                f(x, y)
            })
            .collect();
        Field2D { grid, values }
    }

    pub fn from_radial(grid: GridSpec, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(grid, |x, y| Complex64::new(f(x.hypot(y)), 0.0))
    }

    pub(crate) fn from_raw(grid: GridSpec, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Field2D { grid, values }
    }

    #[inline]
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    #[cfg(test)]
    pub(crate) fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.re == 0.0 && v.im == 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Field2D {
        Field2D { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn scaled(&self, c: f64) -> Field2D {
        self.map(|v| v * c)
    }

    pub fn conj(&self) -> Field2D {
        self.map(|v| v.conj())
    }

    fn check_same_grid(&self, other: &Field2D) -> Result<()> {
        if self.grid != other.grid {
            return Err(XnlsError::InvalidField("fields live on different grids".into()));
        }
        Ok(())
    }

    pub fn sub(&self, other: &Field2D) -> Result<Field2D> {
        self.check_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(Field2D { grid: self.grid, values })
    }

    pub fn add(&self, other: &Field2D) -> Result<Field2D> {
        self.check_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(Field2D { grid: self.grid, values })
    }

    /// Cyclic shift by `(dj, dk)` cells.
    pub fn translated(&self, dj: isize, dk: isize) -> Field2D {
        let n = self.grid.n as isize;
        let mut values = vec![Complex64::default(); self.values.len()];
        for j in 0..n {
            let tj = (j + dj).rem_euclid(n);
            for k in 0..n {
                let tk = (k + dk).rem_euclid(n);
                values[(tj * n + tk) as usize] = self.values[(j * n + k) as usize];
            }
        }
        Field2D { grid: self.grid, values }
    }

    /// `h² Σ g(u)` over all cells.
    pub fn integrate(&self, mut g: impl FnMut(Complex64) -> f64) -> f64 {
        self.values.iter().map(|&v| g(v)).sum::<f64>() * self.grid.cell_area()
    }

    /// `h² Σ g(x, y, u)` over all cells.
    pub fn integrate_with_position(&self, mut g: impl FnMut(f64, f64, Complex64) -> f64) -> f64 {
        let grid = self.grid;
        self.values
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let (x, y) = grid.position(i);
                g(x, y, v)
            })
            .sum::<f64>()
            * grid.cell_area()
    }

    pub fn mass(&self) -> f64 {
        self.integrate(|v| v.norm_sqr())
    }

    pub fn l2(&self) -> f64 {
        self.mass().sqrt()
    }

    pub fn linf(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn l1(&self) -> f64 {
        self.integrate(|v| v.norm())
    }

    /// `‖u‖_{L^p}`, evaluated with the sup factored out so large `p` does not overflow.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        lp_from_moduli(self.values.iter().map(|v| v.norm()), p, self.grid.cell_area())
    }

    pub fn spectrum(&self) -> Spectrum {
        let mut coeffs = self.values.clone();
        Fft2::get(self.grid.n).forward(&mut coeffs);
        Spectrum { grid: self.grid, coeffs }
    }

    /// Spectral gradient `(∂ₓu, ∂ᵧu)`.
    pub fn gradient(&self) -> [Field2D; 2] {
        self.spectrum().gradient()
    }

    pub fn laplacian(&self) -> Field2D {
        self.spectrum().laplacian()
    }

    /// `∫|∇u|²` by Parseval.
    pub fn grad_energy(&self) -> f64 {
        self.spectrum().grad_energy()
    }

    pub fn grad_l2(&self) -> f64 {
        self.grad_energy().sqrt()
    }

    pub fn h1(&self) -> f64 {
        (self.mass() + self.grad_energy()).sqrt()
    }

    /// Pointwise gradient modulus `|∇u| = (|∂ₓu|² + |∂ᵧu|²)^{1/2}`.
    pub fn gradient_modulus(&self) -> Vec<f64> {
        let [gx, gy] = self.gradient();
        gx.values
            .iter()
            .zip(&gy.values)
            .map(|(a, b)| (a.norm_sqr() + b.norm_sqr()).sqrt())
            .collect()
    }

    /// `‖u‖_{L⁴} + ‖∇u‖_{L⁴}`.
    pub fn w14_norm(&self) -> Result<f64> {
        let grad = self.gradient_modulus();
        let l4 = self.lp_norm(4.0)?;
        let g4 = lp_from_moduli(grad.into_iter(), 4.0, self.grid.cell_area())?;
        Ok(l4 + g4)
    }
}

pub(crate) fn lp_from_moduli(moduli: impl Iterator<Item = f64> + Clone, p: f64, area: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(XnlsError::Domain(format!("exponent p = {p} must be at least 1")));
    }
    let sup = moduli.clone().fold(0.0, f64::max);
    if sup == 0.0 {
        return Ok(0.0);
    }
    let sum: f64 = moduli.map(|m| (m / sup).powf(p)).sum();
    let value = sup * (sum * area).powf(1.0 / p);
    if !value.is_finite() {
        return Err(XnlsError::Evaluation(format!("L^{p} norm is not finite")));
    }
    Ok(value)
}

/// Fourier coefficients of a [`Field2D`] (unnormalised forward DFT).
#[derive(Debug, Clone)]
pub struct Spectrum {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub(crate) fn from_parts(grid: GridSpec, coeffs: Vec<Complex64>) -> Self {
        Spectrum { grid, coeffs }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Multiply every coefficient by `m(ξₓ, ξᵧ)` using the supplied wavenumber table.
    pub fn apply(&mut self, m: impl Fn(f64, f64) -> Complex64, ks: &[f64]) {
        let n = self.grid.n;
        for (i, c) in self.coeffs.iter_mut().enumerate() {
            *c *= m(ks[i / n], ks[i % n]);
        }
    }

    pub fn into_field(self) -> Field2D {
        let mut values = self.coeffs;
        Fft2::get(self.grid.n).inverse(&mut values);
        Field2D { grid: self.grid, values }
    }

    /// Multiply by the free Schrödinger multiplier `e^{-it|ξ|²}`.
    pub fn propagate(&mut self, t: f64) {
        if t == 0.0 {
            return;
        }
        let ks = self.grid.wavenumbers();
        self.apply(|kx, ky| Complex64::from_polar(1.0, -t * (kx * kx + ky * ky)), &ks);
    }

    fn parseval_scale(&self) -> f64 {
        self.grid.cell_area() / (self.grid.len() as f64)
    }

    pub fn mass(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.parseval_scale()
    }

    pub fn grad_energy(&self) -> f64 {
        let n = self.grid.n;
        let ks: Vec<f64> = (0..n).map(|k| self.grid.derivative_wavenumber(k)).collect();
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| (ks[i / n].powi(2) + ks[i % n].powi(2)) * c.norm_sqr())
            .sum::<f64>()
            * self.parseval_scale()
    }

    /// `‖a − b‖_{H¹}` computed on the coefficients.
    pub fn h1_distance(&self, other: &Spectrum) -> f64 {
        let n = self.grid.n;
        let ks: Vec<f64> = (0..n).map(|k| self.grid.derivative_wavenumber(k)).collect();
        let sum: f64 = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .enumerate()
            .map(|(i, (a, b))| (1.0 + ks[i / n].powi(2) + ks[i % n].powi(2)) * (a - b).norm_sqr())
            .sum();
        (sum * self.parseval_scale()).sqrt()
    }

    pub fn gradient(&self) -> [Field2D; 2] {
        let n = self.grid.n;
        let ks: Vec<f64> = (0..n).map(|k| self.grid.derivative_wavenumber(k)).collect();
        let mut gx = self.clone();
        gx.apply(|kx, _| Complex64::new(0.0, kx), &ks);
        let mut gy = self.clone();
        gy.apply(|_, ky| Complex64::new(0.0, ky), &ks);
        [gx.into_field(), gy.into_field()]
    }

    pub fn laplacian(&self) -> Field2D {
        let mut s = self.clone();
        s.apply(|kx, ky| Complex64::new(-(kx * kx + ky * ky), 0.0), &self.grid.wavenumbers());
        s.into_field()
    }
}

/// Exact free evolution `e^{itΔ}u` on the torus.
pub fn free_propagate(u: &Field2D, t: f64) -> Field2D {
    if t == 0.0 {
        return u.clone();
    }
    let mut s = u.spectrum();
    s.propagate(t);
    s.into_field()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub mass: f64,
    pub grad_l2: f64,
    pub h1: f64,
    /// `(p, ‖u‖_{L^p})` pairs in the requested order.
    pub lp: Vec<(f64, f64)>,
    pub linf: f64,
    pub mu: f64,
    pub h_mu: f64,
    pub holder_half: f64,
    pub w14: f64,
}

impl NormReport {
    pub fn lp(&self, p: f64) -> Option<f64> {
        self.lp.iter().find(|(q, _)| *q == p).map(|&(_, v)| v)
    }
}

pub fn norms(u: &Field2D, mu: f64, p_list: &[f64]) -> Result<NormReport> {
    if !(mu > 0.0) {
        return Err(XnlsError::Domain(format!("mu = {mu} must be positive")));
    }
    let mass = u.mass();
    let grad_energy = u.grad_energy();
    let lp = p_list
        .iter()
        .map(|&p| u.lp_norm(p).map(|v| (p, v)))
        .collect::<Result<Vec<_>>>()?;
    Ok(NormReport {
        mass,
        grad_l2: grad_energy.sqrt(),
        h1: (grad_energy + mass).sqrt(),
        lp,
        linf: u.linf(),
        mu,
        h_mu: (grad_energy + mu * mu * mass).sqrt(),
        holder_half: holder_half(u, HOLDER_WINDOW),
        w14: u.w14_norm()?,
    })
}

/// `max |u(x) − u(y)| / |x − y|^{1/2}` over cell offsets (periodic): every offset within
/// `window` cells, plus the ring `2 < max(|a|,|b|) ≤ 4` dilated by `window/2, window, …`
/// out to half the box. The physical reach is therefore independent of `n`.
pub fn holder_half(u: &Field2D, window: usize) -> f64 {
    let n = u.grid.n;
    let h = u.grid.h();
    let w = window.max(2) as isize;
    let mut offsets = Vec::new();
    let mut push = |a: isize, b: isize| {
        let dist = h * ((a * a + b * b) as f64).sqrt();
        offsets.push((a, b, 1.0 / dist));
    };
    for a in 0..=w {
        for b in -w..=w {
            if a == 0 && b <= 0 {
                continue;
            }
            push(a, b);
        }
    }
    let half = (n / 2) as isize;
    let mut scale = (w / 2).max(2);
    while 4 * scale <= half {
        for a in 0..=4isize {
            for b in -4..=4isize {
                if (a == 0 && b <= 0) || a.abs().max(b.abs()) <= 2 {
                    continue;
                }
                push(a * scale, b * scale);
            }
        }
        scale *= 2;
    }
    let vals = &u.values;
    let ni = n as isize;
    // squared quotients; one square root at the end
    let mut best = 0.0f64;
    for &(a, b, inv) in &offsets {
        let shift = b.rem_euclid(ni) as usize;
        let mut row_best = 0.0f64;
        for j in 0..ni {
            let here = &vals[(j * ni) as usize..((j + 1) * ni) as usize];
            let jj = (j + a).rem_euclid(ni);
            let there = &vals[(jj * ni) as usize..((jj + 1) * ni) as usize];
            let (head, tail) = here.split_at(n - shift);
            for (x, y) in head.iter().zip(&there[shift..]) {
                row_best = row_best.max((*y - *x).norm_sqr());
            }
            for (x, y) in tail.iter().zip(&there[..shift]) {
                row_best = row_best.max((*y - *x).norm_sqr());
            }
        }
        best = best.max(row_best * inv);
    }
    best.sqrt()
}

/// Bilinear samples `(r, u(r cos θ, r sin θ))` with periodic wrap.
pub fn radial_sample_along(u: &Field2D, radii: &[f64], angle: f64) -> Result<Vec<(f64, Complex64)>> {
    let grid = u.grid;
    let n = grid.n;
    let h = grid.h();
    let (c, s) = (angle.cos(), angle.sin());
    radii
        .iter()
        .map(|&r| {
            if !(r > 0.0 && r < 0.5 * grid.l) {
                return Err(XnlsError::Domain(format!(
                    "radius {r} outside (0, {})",
                    0.5 * grid.l
                )));
            }
            let fx = (r * c + 0.5 * grid.l) / h;
            let fy = (r * s + 0.5 * grid.l) / h;
            let (j0, k0) = (fx.floor(), fy.floor());
            let (tx, ty) = (fx - j0, fy - k0);
            let idx = |j: f64, k: f64| {
                let j = (j as isize).rem_euclid(n as isize) as usize;
                let k = (k as isize).rem_euclid(n as isize) as usize;
                u.values[j * n + k]
            };
            let v = idx(j0, k0) * (1.0 - tx) * (1.0 - ty)
                + idx(j0 + 1.0, k0) * tx * (1.0 - ty)
                + idx(j0, k0 + 1.0) * (1.0 - tx) * ty
                + idx(j0 + 1.0, k0 + 1.0) * tx * ty;
            Ok((r, v))
        })
        .collect()
}

/// Samples along the positive x-axis.
pub fn radial_sample(u: &Field2D, radii: &[f64]) -> Result<Vec<(f64, Complex64)>> {
    radial_sample_along(u, radii, 0.0)
}

/// Fraction of the mass carried by the shell `|x|_∞ > 0.4 l`.
pub fn boundary_mass_fraction(u: &Field2D) -> f64 {
    let grid = u.grid;
    let edge = 0.4 * grid.l;
    let mut total = 0.0;
    let mut shell = 0.0;
    for (i, v) in u.values.iter().enumerate() {
        let m = v.norm_sqr();
        total += m;
        let (x, y) = grid.position(i);
        if x.abs().max(y.abs()) > edge {
            shell += m;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        shell / total
    }
}

/// First sampled time at which the free evolution of `u0` puts more than
/// `threshold` of its mass in the boundary shell. `None` if it never does up to `t_max`.
pub fn find_t_wrap(u0: &Field2D, t_max: f64, dt: f64, threshold: f64) -> Option<f64> {
    let base = u0.spectrum();
    let mut t = 0.0;
    while t <= t_max {
        let mut s = base.clone();
        s.propagate(t);
        if boundary_mass_fraction(&s.into_field()) > threshold {
            return Some(t);
        }
        t += dt;
    }
    None
}

/// `c·exp(−|x − x₀|²/σ²)`.
pub fn gaussian(grid: GridSpec, amplitude: f64, width: f64, center: (f64, f64)) -> Field2D {
    Field2D::from_fn(grid, |x, y| {
        let r2 = (x - center.0).powi(2) + (y - center.1).powi(2);
        Complex64::new(amplitude * (-r2 / (width * width)).exp(), 0.0)
    })
}

/// Closed-form free evolution of `e^{−|x|²}`: `(1+4it)^{-1} exp(−|x|²/(1+4it))`.
pub fn gaussian_free_solution(r: f64, t: f64) -> Complex64 {
    let z = Complex64::new(1.0, 4.0 * t);
    (-(r * r) / z).exp() / z
}

/// Area of the unit disk as seen by the grid (cells with center radius ≤ 1).
pub fn unit_disk_mask(grid: &GridSpec) -> Vec<bool> {
    (0..grid.len()).map(|i| grid.radius(i) <= 1.0).collect()
}

/// The 2-D free Schrödinger kernel bound `1/(4π)`.
pub const DISPERSIVE_CONSTANT: f64 = 1.0 / (4.0 * PI);
