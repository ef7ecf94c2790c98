//! Strang-split time integration of `i u_t + Δu = f(u)` on the periodic grid.
//!
//! One step is `K(dt/2) N(dt) K(dt/2)` with `K(t)` the exact free multiplier
//! `e^{−it|ξ|²}` and `N(t)u = u·e^{−it f̃(|u|²)}`, the exact flow of `i u_t = f(u)`
//! (it leaves `|u|` pointwise fixed). Both substeps are L²-isometries.
//! Between outputs the state lives in Fourier space; each step costs two FFTs.

pub mod cutoff;
pub mod series;
pub mod virial;

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, XnlsError};
use crate::fft::{Fft2, FftWork};
use crate::field::{boundary_mass_fraction, Field2D, Spectrum};
use crate::grid::GridSpec;
use crate::nonlinearity::{exp_tail_direct, exp_tail_series, hamiltonian, EXPONENT_CAP, SERIES_SWITCH};

pub use cutoff::{phi_derivatives, Cutoff};
pub use series::{local_g_budget, DiagnosticsSeries, LocalGBudget, SeriesRow, VirialRecord};
pub use virial::{exterior_gradient, local_g, virial, VirialValues, VirialWeights};

const FOUR_PI: f64 = 4.0 * PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryPolicy {
    /// Stop the run at the first output whose boundary mass exceeds the threshold.
    Abort,
    /// Keep running and record the first such time in [`RunOutcome::wrapped_at`].
    #[default]
    Record,
}

fn default_virial_every() -> usize {
    10
}
fn default_cap() -> f64 {
    EXPONENT_CAP
}
fn default_boundary_threshold() -> f64 {
    1e-6
}
fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub grid: GridSpec,
    pub dt: f64,
    pub t_end: f64,
    /// Radii of the virial records; the first one feeds the `v_r` series columns.
    pub virial_r: Vec<f64>,
    #[serde(default)]
    pub cutoff: Cutoff,
    /// Series (and observer) cadence in steps.
    pub output_every: usize,
    /// Virial record cadence in steps.
    #[serde(default = "default_virial_every")]
    pub virial_every: usize,
    #[serde(default = "default_cap")]
    pub overflow_cap: f64,
    #[serde(default = "default_boundary_threshold")]
    pub boundary_threshold: f64,
    #[serde(default)]
    pub boundary_policy: BoundaryPolicy,
    /// `false` switches the nonlinear substep off (free evolution).
    #[serde(default = "default_true")]
    pub nonlinear: bool,
}

impl SimConfig {
    pub fn new(grid: GridSpec, dt: f64, t_end: f64) -> Self {
        SimConfig {
            grid,
            dt,
            t_end,
            virial_r: vec![2.0],
            cutoff: Cutoff::default(),
            output_every: 50,
            virial_every: default_virial_every(),
            overflow_cap: EXPONENT_CAP,
            boundary_threshold: default_boundary_threshold(),
            boundary_policy: BoundaryPolicy::default(),
            nonlinear: true,
        }
    }

    /// Errors name the offending key.
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, detail: String| Err(XnlsError::Config { key: key.into(), detail });
        self.grid.validate()?;
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt", format!("must be positive and finite, got {}", self.dt));
        }
        if !(self.t_end >= self.dt && self.t_end.is_finite()) {
            return bad("t_end", format!("must be finite and at least dt, got {}", self.t_end));
        }
        if self.virial_r.is_empty() {
            return bad("virial_r", "needs at least one radius".into());
        }
        for &r in &self.virial_r {
            if !(r > 0.0 && r < self.grid.l / 4.0) {
                return bad("virial_r", format!("radius {r} outside (0, l/4 = {})", self.grid.l / 4.0));
            }
        }
        if self.output_every == 0 {
            return bad("output_every", "must be at least 1".into());
        }
        if self.virial_every == 0 {
            return bad("virial_every", "must be at least 1".into());
        }
        if !(self.overflow_cap > 0.0 && self.overflow_cap <= EXPONENT_CAP) {
            return bad("overflow_cap", format!("must lie in (0, {EXPONENT_CAP}], got {}", self.overflow_cap));
        }
        if !(self.boundary_threshold > 0.0 && self.boundary_threshold < 1.0) {
            return bad("boundary_threshold", format!("must lie in (0, 1), got {}", self.boundary_threshold));
        }
        Ok(())
    }

    /// Number of steps; `t_end` is rounded to the nearest multiple of `dt`.
    pub fn steps(&self) -> usize {
        ((self.t_end / self.dt).round() as usize).max(1)
    }
}

/// Position of `H(u₀)` relative to the critical level 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criticality {
    Subcritical,
    Critical,
    Supercritical,
}

/// Relative tolerance for calling `H(u₀)` critical.
pub const CRITICAL_RTOL: f64 = 1e-9;

impl Criticality {
    pub fn classify(h: f64) -> Self {
        if (h - 1.0).abs() <= CRITICAL_RTOL {
            Criticality::Critical
        } else if h < 1.0 {
            Criticality::Subcritical
        } else {
            Criticality::Supercritical
        }
    }
}

/// Fourier-space Strang integrator holding the current coefficients.
pub struct Stepper {
    grid: GridSpec,
    dt: f64,
    cap: f64,
    nonlinear: bool,
    half: Vec<Complex64>,
    coeffs: Vec<Complex64>,
    fft: Arc<Fft2>,
    work: FftWork,
}

impl Stepper {
    pub fn new(u0: &Field2D, dt: f64, nonlinear: bool, cap: f64) -> Result<Self> {
        let grid = *u0.grid();
        if !(dt.is_finite() && dt >= 0.0) {
            return Err(XnlsError::Config { key: "dt".into(), detail: format!("must be nonnegative, got {dt}") });
        }
        let n = grid.n;
        let ks = grid.wavenumbers();
        let half = (0..grid.len())
            .map(|i| {
                let (kx, ky) = (ks[i / n], ks[i % n]);
                unit_modulus(Complex64::from_polar(1.0, -0.5 * dt * (kx * kx + ky * ky)))
            })
            .collect();
        let fft = Fft2::get(n);
        let work = fft.work();
        let mut coeffs = u0.values().to_vec();
        let mut stepper = Stepper { grid, dt, cap, nonlinear, half, coeffs: Vec::new(), fft, work };
        stepper.fft.forward_with(&mut coeffs, &mut stepper.work);
        stepper.coeffs = coeffs;
        Ok(stepper)
    }

    fn kinetic_half(&mut self) {
        for (c, m) in self.coeffs.iter_mut().zip(&self.half) {
            *c *= m;
        }
    }

    /// One Strang step. On `OverflowGuard` the state is left mid-step and must be discarded.
    pub fn step(&mut self) -> Result<()> {
        if self.dt == 0.0 {
            return Ok(());
        }
        self.kinetic_half();
        let scale = 1.0 / self.grid.len() as f64;
        self.fft.inverse_unscaled_with(&mut self.coeffs, &mut self.work);
        for (cell, z) in self.coeffs.iter_mut().enumerate() {
            *z *= scale;
            if !self.nonlinear {
                continue;
            }
            let a = FOUR_PI * z.norm_sqr();
            if !(a <= self.cap) {
                return Err(XnlsError::OverflowGuard { exponent: a, cap: self.cap, cell: Some(cell) });
            }
            if a < NEGLIGIBLE_EXPONENT {
                continue;
            }
            let ft = if a < SERIES_SWITCH { exp_tail_series(a, 2) } else { exp_tail_direct(a, 2) };
            *z *= unit_phase(-self.dt * ft);
        }
        self.fft.forward_with(&mut self.coeffs, &mut self.work);
        self.kinetic_half();
        Ok(())
    }

    pub fn spectrum(&self) -> Spectrum {
        Spectrum::from_parts(self.grid, self.coeffs.clone())
    }

    pub fn field(&self) -> Field2D {
        self.spectrum().into_field()
    }
}

/// Below this `4π|u|²` the phase `dt·f̃ ≈ dt·a²/2` is under `10⁻⁴⁰·dt` and the cell is
/// left untouched, which also keeps subnormal powers of `a` out of the loop.
const NEGLIGIBLE_EXPONENT: f64 = 1e-20;

/// Below this phase `e^{iφ}` is summed directly; the truncation error is under `φ⁸/8!`.
const SMALL_PHASE: f64 = 1e-3;

/// One Newton step towards `|m| = 1`. Rounded `(cos φ, sin φ)` pairs carry a per-mode
/// modulus error of about `10⁻¹⁶`; applied every step it would bias the mass linearly in time.
fn unit_modulus(m: Complex64) -> Complex64 {
    let e = m.re.mul_add(m.re, -1.0) + m.im * m.im;
    m * (1.0 - 0.5 * e)
}

#[inline]
fn unit_phase(phi: f64) -> Complex64 {
    if phi.abs() < SMALL_PHASE {
        let p2 = phi * phi;
        let c = 1.0 - p2 / 2.0 * (1.0 - p2 / 12.0 * (1.0 - p2 / 30.0));
        let s = phi * (1.0 - p2 / 6.0 * (1.0 - p2 / 20.0 * (1.0 - p2 / 42.0)));
        Complex64::new(c, s)
    } else {
        Complex64::from_polar(1.0, phi)
    }
}

/// A single Strang step of size `dt` applied to `u`.
pub fn strang_step(u: &Field2D, dt: f64) -> Result<Field2D> {
    if dt == 0.0 {
        return Ok(u.clone());
    }
    let mut s = Stepper::new(u, dt, true, EXPONENT_CAP)?;
    s.step()?;
    Ok(s.field())
}

/// Callback at every series sample, including `t = 0`.
pub trait Observer {
    fn observe(&mut self, index: usize, t: f64, u: &Field2D) -> Result<()>;
}

#[derive(Debug)]
pub struct RunOutcome {
    pub series: DiagnosticsSeries,
    pub virial: Vec<VirialRecord>,
    pub h0: f64,
    pub criticality: Criticality,
    /// First output time with boundary mass above the threshold.
    pub wrapped_at: Option<f64>,
    /// Runtime guard that ended the run early; the series stops at the last good sample.
    pub abort: Option<XnlsError>,
    pub steps_done: usize,
    pub final_field: Field2D,
}

impl RunOutcome {
    pub fn completed(&self) -> bool {
        self.abort.is_none()
    }

    /// Relative mass drift `max |M(t) − M(0)| / M(0)`, zero for zero data.
    pub fn mass_drift(&self) -> f64 {
        self.series.relative_drift(|r| r.mass)
    }

    pub fn hamiltonian_drift(&self) -> f64 {
        self.series.relative_drift(|r| r.hamiltonian)
    }

    pub fn into_result(self) -> Result<RunOutcome> {
        match self.abort {
            Some(e) => Err(e),
            None => Ok(self),
        }
    }
}

/// Integrate from `u0` for `cfg.steps()` steps. Config errors are returned as `Err`;
/// runtime guards end the run and are reported in [`RunOutcome::abort`].
pub fn evolve(u0: &Field2D, cfg: &SimConfig, observers: &mut [&mut dyn Observer]) -> Result<RunOutcome> {
    cfg.validate()?;
    if *u0.grid() != cfg.grid {
        return Err(XnlsError::Config { key: "grid".into(), detail: "initial field lives on a different grid".into() });
    }
    let h0 = if cfg.nonlinear { hamiltonian(u0)? } else { u0.grad_energy() };
    let weights: Vec<VirialWeights> =
        cfg.virial_r.iter().map(|&r| VirialWeights::new(cfg.grid, r, cfg.cutoff)).collect();
    let mut stepper = Stepper::new(u0, cfg.dt, cfg.nonlinear, cfg.overflow_cap)?;
    let mut out = RunOutcome {
        series: DiagnosticsSeries::default(),
        virial: Vec::new(),
        h0,
        criticality: Criticality::classify(h0),
        wrapped_at: None,
        abort: None,
        steps_done: 0,
        final_field: u0.clone(),
    };
    let steps = cfg.steps();
    let sample = |step: usize, stepper: &Stepper, out: &mut RunOutcome, observers: &mut [&mut dyn Observer]| -> Result<()> {
        let on_virial = step % cfg.virial_every == 0;
        let on_output = step % cfg.output_every == 0 || step == steps;
        if !(on_virial || on_output) {
            return Ok(());
        }
        let t = step as f64 * cfg.dt;
        let spectrum = stepper.spectrum();
        let grad = spectrum.gradient();
        let lap = spectrum.laplacian();
        let u = spectrum.clone().into_field();
        let mut first = None;
        {
            for w in &weights {
                let v = w.evaluate(&u, &grad, &lap, cfg.nonlinear)?;
                first.get_or_insert(v);
                if on_virial {
                    out.virial.push(VirialRecord { t, r: w.radius(), v: v.v, dv: v.dv, d2v: v.d2v });
                }
            }
        }
        if on_output {
            let boundary = boundary_mass_fraction(&u);
            let row = SeriesRow::measure(t, &u, &spectrum, first.expect("virial radii nonempty"), boundary, cfg.nonlinear)?;
            out.series.push(row)?;
            let index = out.series.rows.len() - 1;
            for obs in observers.iter_mut() {
                obs.observe(index, t, &u)?;
            }
            if boundary > cfg.boundary_threshold {
                out.wrapped_at.get_or_insert(t);
                if cfg.boundary_policy == BoundaryPolicy::Abort {
                    out.final_field = u;
                    return Err(XnlsError::BoundaryPollution { t, fraction: boundary, threshold: cfg.boundary_threshold });
                }
            }
            if step == steps {
                out.final_field = u;
            }
        }
        Ok(())
    };

    if let Err(e) = sample(0, &stepper, &mut out, observers) {
        return guard_or_err(e, out);
    }
    for step in 1..=steps {
        if let Err(e) = stepper.step() {
            return guard_or_err(e, out);
        }
        out.steps_done = step;
        if let Err(e) = sample(step, &stepper, &mut out, observers) {
            return guard_or_err(e, out);
        }
    }
    Ok(out)
}

fn guard_or_err(e: XnlsError, mut out: RunOutcome) -> Result<RunOutcome> {
    if e.is_runtime_guard() {
        out.abort = Some(e);
        Ok(out)
    } else {
        Err(e)
    }
}
