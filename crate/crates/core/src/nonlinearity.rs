//! Stable evaluation of the exponential nonlinearity and the functionals built from it.
//!
//! With `s = |z|²` and `a = 4πs`:
//!
//! * `f̃(s) = e^a − 1 − a`, `f(z) = f̃(|z|²) z`
//! * `F(z) = (e^a − 1 − a − a²/2) / 4π` (Hamiltonian density), and `g(s) = ∫₀ˢ f̃ = F(√s)`
//! * `G(z) = f̃(|z|²)|z|²`, `G₂(z) = 4π F(z) z`
//! * `G₁(z, x) = (1 − χ(x)) f(z) + 8π²χ(x)|z|⁴z`
//!
//! The differences `e^a − Σ_{j<k} a^j/j!` are computed either by Taylor series or by
//! `expm1` minus the retained terms, depending on `a`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, XnlsError};
use crate::field::Field2D;

/// Largest admissible exponent in `e^x`.
pub const EXPONENT_CAP: f64 = 700.0;

/// Below this value of `4π|z|²`, `f̃` switches to its Taylor series.
pub const SERIES_SWITCH: f64 = 1e-4;

/// Switch point for tails that drop three or more leading terms (`F`, `g`, `G₂`).
/// `expm1(a) − a − a²/2` loses about `log₁₀(6/a)` digits, so the series is used up to `a = 1`.
pub const DEEP_SERIES_SWITCH: f64 = 1.0;

const FOUR_PI: f64 = 4.0 * PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NonlinearKind {
    F,
    FBig,
    FTilde,
    GInt,
    G,
    G1,
    G2,
}

/// `e^a − Σ_{j<k} a^j/j!` by series (`a` small). Always keeps at least four terms.
pub fn exp_tail_series(a: f64, k: u32) -> f64 {
    let mut term = 1.0;
    for j in 1..=k {
        term *= a / j as f64;
    }
    let mut sum = 0.0;
    let mut j = k;
    let mut kept = 0;
    loop {
        sum += term;
        kept += 1;
        j += 1;
        term *= a / j as f64;
        if kept >= 4 && term.abs() <= 1e-17 * sum.abs() {
            break;
        }
        if kept > 200 {
            break;
        }
    }
    sum
}

/// `e^a − Σ_{j<k} a^j/j!` through `expm1` with explicit subtraction.
pub fn exp_tail_direct(a: f64, k: u32) -> f64 {
    let mut value = a.exp_m1();
    let mut term = 1.0;
    for j in 1..k {
        term *= a / j as f64;
        value -= term;
    }
    value
}

pub(crate) fn exp_tail(a: f64, k: u32) -> f64 {
    let switch = if k <= 2 { SERIES_SWITCH } else { DEEP_SERIES_SWITCH };
    if a < switch {
        exp_tail_series(a, k)
    } else {
        exp_tail_direct(a, k)
    }
}

#[inline]
fn guard(a: f64, cell: Option<usize>) -> Result<()> {
    if a > EXPONENT_CAP || !a.is_finite() {
        return Err(XnlsError::OverflowGuard { exponent: a, cap: EXPONENT_CAP, cell });
    }
    Ok(())
}

/// `f̃(s) = e^{4πs} − 1 − 4πs`.
pub fn f_tilde(s: f64) -> Result<f64> {
    let a = FOUR_PI * s;
    guard(a, None)?;
    Ok(exp_tail(a, 2))
}

/// `g(s) = ∫₀ˢ f̃ = (e^{4πs} − 1)/4π − s − 2πs²`.
pub fn g_int(s: f64) -> Result<f64> {
    let a = FOUR_PI * s;
    guard(a, None)?;
    Ok(exp_tail(a, 3) / FOUR_PI)
}

/// `f(z) = f̃(|z|²) z`.
pub fn f(z: Complex64) -> Result<Complex64> {
    Ok(z * f_tilde(z.norm_sqr())?)
}

/// Hamiltonian density `F(z)`.
pub fn big_f(z: Complex64) -> Result<f64> {
    g_int(z.norm_sqr())
}

/// `G(z) = f̃(|z|²)|z|²`.
pub fn big_g(z: Complex64) -> Result<f64> {
    let s = z.norm_sqr();
    Ok(f_tilde(s)? * s)
}

/// `G₂(z) = (e^{4π|z|²} − 1 − 4π|z|² − 8π²|z|⁴) z`.
pub fn g2(z: Complex64) -> Result<Complex64> {
    let a = FOUR_PI * z.norm_sqr();
    guard(a, None)?;
    Ok(z * exp_tail(a, 3))
}

/// Quintic smoothstep cutoff: 1 for `r ≤ ½`, 0 for `r ≥ 1`, `C²` in `r²`.
pub fn chi(r: f64) -> f64 {
    if r <= 0.5 {
        1.0
    } else if r >= 1.0 {
        0.0
    } else {
        let t = (r * r - 0.25) / 0.75;
        // q(t) = 1 − (10t³ − 15t⁴ + 6t⁵)
        1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
    }
}

/// `G₁(z, x) = (1 − χ(x)) f(z) + 8π²χ(x)|z|⁴z`.
pub fn g1(z: Complex64, r: f64) -> Result<Complex64> {
    let c = chi(r);
    let s = z.norm_sqr();
    let quintic = z * (8.0 * PI * PI * s * s);
    if c == 1.0 {
        return Ok(quintic);
    }
    Ok(f(z)? * (1.0 - c) + quintic * c)
}

/// Evaluate `kind` at `z`; `r = |x|` is only used by `G1`. Real-valued kinds return a
/// complex number with zero imaginary part.
pub fn eval_pointwise(kind: NonlinearKind, z: Complex64, r: f64) -> Result<Complex64> {
    let real = |v: f64| Complex64::new(v, 0.0);
    match kind {
        NonlinearKind::F => f(z),
        NonlinearKind::FBig => big_f(z).map(real),
        NonlinearKind::FTilde => f_tilde(z.norm_sqr()).map(real),
        NonlinearKind::GInt => g_int(z.norm_sqr()).map(real),
        NonlinearKind::G => big_g(z).map(real),
        NonlinearKind::G1 => g1(z, r),
        NonlinearKind::G2 => g2(z),
    }
}

/// Largest `4π|u|²` over the grid and the cell where it occurs.
pub fn max_exponent(u: &Field2D) -> (f64, usize) {
    u.values()
        .iter()
        .enumerate()
        .map(|(i, v)| (FOUR_PI * v.norm_sqr(), i))
        .fold((0.0, 0), |acc, x| if x.0 > acc.0 { x } else { acc })
}

pub fn check_overflow(u: &Field2D) -> Result<()> {
    let (a, cell) = max_exponent(u);
    guard(a, Some(cell))
}

/// Pointwise lift of [`eval_pointwise`] to a grid field.
pub fn apply_field(kind: NonlinearKind, u: &Field2D) -> Result<Field2D> {
    check_overflow(u)?;
    let grid = *u.grid();
    let values = u
        .values()
        .iter()
        .enumerate()
        .map(|(i, &z)| {
            let r = if kind == NonlinearKind::G1 { grid.radius(i) } else { 0.0 };
            eval_pointwise(kind, z, r).map_err(|e| match e {
                XnlsError::OverflowGuard { exponent, cap, .. } => {
                    XnlsError::OverflowGuard { exponent, cap, cell: Some(i) }
                }
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Field2D::from_raw(grid, values))
}

/// `H(u) = ∫|∇u|² + ∫F(u)`.
pub fn hamiltonian(u: &Field2D) -> Result<f64> {
    check_overflow(u)?;
    let mut potential = 0.0;
    for &z in u.values() {
        let v = big_f(z)?;
        debug_assert!(v >= 0.0);
        potential += v;
    }
    Ok(u.grad_energy() + potential * u.grid().cell_area())
}

/// `∫F(u)` alone.
pub fn potential_energy(u: &Field2D) -> Result<f64> {
    check_overflow(u)?;
    let mut acc = 0.0;
    for &z in u.values() {
        acc += big_f(z)?;
    }
    Ok(acc * u.grid().cell_area())
}
