//! The ten pinned acceptance criteria, shared by the `acceptance` test target and the CLI.
//!
//! Criteria 1, 5, 8 and 10 read one small-Gaussian run (`n = 512`, `l = 40`,
//! `dt = 10⁻³`, `T = 20`), computed once per [`Acceptance`] value.

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::Serialize;

use crate::error::Result;
use crate::evolution::{evolve, local_g_budget, Observer, RunOutcome, SimConfig, VirialRecord};
use crate::evolution::series::{virial_at_radius, DiagnosticsSeries};
use crate::field::{find_t_wrap, gaussian, Field2D, Spectrum, DISPERSIVE_CONSTANT};
use crate::grid::GridSpec;
use crate::harness::{standard_suite, BankMember, FunctionBank, MemberSpec, Normalization, SuiteConfig};
use crate::orlicz::{luxemburg_norm, OrliczSpec};
use crate::profiles::{clipped_profiles, moser_mass_closed_form, RadialProfile, ScaledProfileField};
use crate::radial::Integrable;
use crate::rearrangement::{rearrange, rearrangement_invariants};
use crate::scattering::{
    apriori_ratio, bootstrap_ratios, dispersive_profile, scattering_test, space_time_norms, st_deviation,
    transported, ScatteringRecorder, SliceOptions,
};

pub const PRESET_H1: f64 = 0.1;
pub const PRESET_T: f64 = 20.0;
pub const PRESET_DT: f64 = 1e-3;
pub const PRESET_RADII: [f64; 2] = [2.0, 4.0];
/// Start of the scattering window, two thirds of the horizon.
pub const SCATTERING_WINDOW_START: f64 = 13.3;
const PRESET_OUTPUT_EVERY: usize = 50;
const PRESET_VIRIAL_EVERY: usize = 10;
/// Every `STATE_STRIDE`-th output inside the window is kept as `v(t)`.
const STATE_STRIDE: usize = 8;

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} [{}]: {} {}",
            self.id,
            self.name,
            if self.pass { "PASS" } else { "FAIL" },
            self.detail
        )
    }
}

fn result(id: u8, name: &'static str, pass: bool, detail: String) -> CriterionResult {
    CriterionResult { id, name, pass, detail }
}

/// Centered Gaussian of width 1 scaled to the given `H¹` norm.
pub fn gaussian_with_h1(grid: GridSpec, h1: f64) -> Field2D {
    let unit = gaussian(grid, 1.0, 1.0, (0.0, 0.0));
    let a = h1 / unit.h1();
    unit.scaled(a)
}

pub fn preset_config(dt: f64, t_end: f64) -> SimConfig {
    let mut cfg = SimConfig::new(GridSpec::new(512, 40.0).expect("valid grid"), dt, t_end);
    cfg.virial_r = PRESET_RADII.to_vec();
    let per_unit = (1.0 / dt).round() as usize;
    // sample cadence fixed in time units: 0.05 for the series, 0.01 for the virial
    cfg.output_every = (PRESET_OUTPUT_EVERY * per_unit / 1000).max(1);
    cfg.virial_every = (PRESET_VIRIAL_EVERY * per_unit / 1000).max(1);
    cfg
}

/// `v(t) = e^{−itΔ}u(t)` at a thinned subset of outputs with `t ≥ start`.
struct StateSampler {
    start: f64,
    stride: usize,
    seen: usize,
    states: Vec<(f64, Spectrum)>,
}

impl Observer for StateSampler {
    fn observe(&mut self, _index: usize, t: f64, u: &Field2D) -> Result<()> {
        if t >= self.start - 1e-9 {
            if self.seen % self.stride == 0 {
                self.states.push((t, transported(t, u)));
            }
            self.seen += 1;
        }
        Ok(())
    }
}

pub struct PresetRun {
    pub outcome: RunOutcome,
    pub states: Vec<(f64, Spectrum)>,
}

fn run_preset() -> Result<PresetRun> {
    let cfg = preset_config(PRESET_DT, PRESET_T);
    let u0 = gaussian_with_h1(cfg.grid, PRESET_H1);
    let mut sampler = StateSampler { start: SCATTERING_WINDOW_START, stride: STATE_STRIDE, seen: 0, states: Vec::new() };
    let outcome = evolve(&u0, &cfg, &mut [&mut sampler])?.into_result()?;
    let mut states = sampler.states;
    if states.last().map(|s| s.0) != Some(PRESET_T) {
        states.push((PRESET_T, transported(PRESET_T, &outcome.final_field)));
    }
    Ok(PresetRun { outcome, states })
}

/// Lazily computed shared state of one acceptance pass.
#[derive(Default)]
pub struct Acceptance {
    preset: OnceLock<std::result::Result<PresetRun, String>>,
}

impl Acceptance {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn preset(&self) -> Result<&PresetRun> {
        // concurrent callers block on the first computation
        self.preset
            .get_or_init(|| run_preset().map_err(|e| e.to_string()))
            .as_ref()
            .map_err(|e| crate::XnlsError::Domain(format!("preset run failed: {e}")))
    }

    pub fn run(&self, id: u8) -> Result<CriterionResult> {
        match id {
            1 => self.conservation(),
            2 => moser_limits(),
            3 => profile_formula(),
            4 => rearrangement(),
            5 => self.virial(),
            6 => dispersive(),
            7 => dichotomy(),
            8 => self.scattering(),
            9 => bootstrap_matrix(),
            10 => self.local_budget(),
            _ => Err(crate::XnlsError::Domain(format!("no acceptance criterion {id}"))),
        }
    }

    pub fn run_all(&self) -> Result<Vec<CriterionResult>> {
        (1..=10).map(|id| self.run(id)).collect()
    }

    /// Mass and Hamiltonian drift of the preset; the `H` drift again at `dt/2`.
    pub fn conservation(&self) -> Result<CriterionResult> {
        let base = &self.preset()?.outcome;
        let mut cfg = preset_config(PRESET_DT / 2.0, PRESET_T);
        // the virial records do not enter this criterion
        cfg.virial_every = cfg.steps();
        let halved = evolve(&gaussian_with_h1(cfg.grid, PRESET_H1), &cfg, &mut [])?.into_result()?;
        let (m, h, h_half) = (base.mass_drift(), base.hamiltonian_drift(), halved.hamiltonian_drift());
        let order = h / h_half;
        let pass = m < 1e-10 && h < 1e-6 && (order - 4.0).abs() <= 0.8;
        Ok(result(
            1,
            "conservation",
            pass,
            format!("mass_drift={m:.3e} (<1e-10) h_drift={h:.3e} (<1e-6) h_drift(dt/2)={h_half:.3e} ratio={order:.3} (4±0.8)"),
        ))
    }

    /// Centered differences of `V_R` against `V_R'`, and of `V_R'` against `V_R''`.
    pub fn virial(&self) -> Result<CriterionResult> {
        let records = &self.preset()?.outcome.virial;
        let mut pass = true;
        let mut parts = Vec::new();
        for r in PRESET_RADII {
            let at = virial_at_radius(records, r);
            let (e1, e2) = virial_fd_errors(&at);
            pass &= e1 < 1e-3 && e2 < 1e-2;
            parts.push(format!("R={r}: dV {e1:.2e} (<1e-3) d2V {e2:.2e} (<1e-2)"));
        }
        Ok(result(5, "virial", pass, parts.join("; ")))
    }

    /// Pairwise `H¹` distances of `v(t)` on the tail window, and the amplitude law of the deviation.
    pub fn scattering(&self) -> Result<CriterionResult> {
        let states = &self.preset()?.states;
        let rep = scattering_test(states, (SCATTERING_WINDOW_START, PRESET_T))?;
        let devs = st_deviation_ladder()?;
        let floor = 2f64.powf(1.5);
        let factors: Vec<f64> = devs.windows(2).map(|w| w[0] / w[1]).collect();
        let pass = rep.max_pairwise < 1e-3 && factors.iter().all(|&f| f >= floor);
        Ok(result(
            8,
            "scattering",
            pass,
            format!(
                "max_pairwise={:.3e} (<1e-3) over {} states; st_deviation={} halving factors={} (>={floor:.3})",
                rep.max_pairwise,
                states.len(),
                fmt_list(&devs, |x| format!("{x:.3e}")),
                fmt_list(&factors, |x| format!("{x:.2}"))
            ),
        ))
    }

    /// `max window ∫∫_{|x|≤1} G / ⟨τ⟩` on the first half of the horizon versus the whole.
    pub fn local_budget(&self) -> Result<CriterionResult> {
        let series = &self.preset()?.outcome.series;
        let half = DiagnosticsSeries {
            rows: series.rows.iter().copied().filter(|r| r.t <= PRESET_T / 2.0 + 1e-9).collect(),
        };
        let a = local_g_budget(&half, 1.0)?.max_ratio;
        let b = local_g_budget(series, 1.0)?.max_ratio;
        let change = if a > 0.0 && b > 0.0 { (b / a).max(a / b) } else { f64::INFINITY };
        Ok(result(
            10,
            "local_g_budget",
            change.is_finite() && change < 2.0,
            format!("T=10: {a:.4e} T=20: {b:.4e} change={change:.3} (<2)"),
        ))
    }
}

fn fmt_list(xs: &[f64], f: impl Fn(f64) -> String) -> String {
    let items: Vec<String> = xs.iter().map(|&x| f(x)).collect();
    format!("[{}]", items.join(", "))
}

/// Largest centered-difference mismatch relative to the largest derivative, for `V'` and `V''`.
pub fn virial_fd_errors(records: &[VirialRecord]) -> (f64, f64) {
    let mut err = [0.0f64; 2];
    let mut scale = [0.0f64; 2];
    for w in records.windows(3) {
        let h = w[2].t - w[0].t;
        let fd_v = (w[2].v - w[0].v) / h;
        let fd_dv = (w[2].dv - w[0].dv) / h;
        err[0] = err[0].max((fd_v - w[1].dv).abs());
        err[1] = err[1].max((fd_dv - w[1].d2v).abs());
    }
    for rec in records {
        scale[0] = scale[0].max(rec.dv.abs());
        scale[1] = scale[1].max(rec.d2v.abs());
    }
    let rel = |e: f64, s: f64| if s > 0.0 { e / s } else { e };
    (rel(err[0], scale[0]), rel(err[1], scale[1]))
}

/// `‖u − e^{itΔ}u₀‖_{ST([0,5])}` for `H¹ = 0.1, 0.05, 0.025, 0.0125` on `n = 256`.
pub fn st_deviation_ladder() -> Result<Vec<f64>> {
    let grid = GridSpec::new(256, 40.0)?;
    let t_end = 5.0;
    (0..4)
        .map(|k| {
            let u0 = gaussian_with_h1(grid, PRESET_H1 / 2f64.powi(k));
            let mut cfg = SimConfig::new(grid, PRESET_DT, t_end);
            cfg.output_every = 50;
            cfg.virial_every = cfg.steps();
            let mut rec = ScatteringRecorder::new(&u0, SliceOptions::default(), f64::INFINITY, 2);
            let out = evolve(&u0, &cfg, &mut [&mut rec])?.into_result()?;
            rec.finish(out.series.rows.last().map_or(t_end, |r| r.t), &out.final_field);
            st_deviation(&rec.slices, (0.0, t_end))
        })
        .collect()
}

/// Moser fields by radial quadrature against their closed forms.
pub fn moser_limits() -> Result<CriterionResult> {
    let target = 1.0 / (4.0 * PI).sqrt();
    let mut pass = true;
    let mut orlicz = Vec::new();
    let mut parts = Vec::new();
    for alpha in [4.0, 8.0, 16.0] {
        let f = ScaledProfileField::moser(alpha)?;
        let grad = f.grad_energy().sqrt();
        let mass = f.mass();
        let closed = moser_mass_closed_form(alpha);
        let mass_err = (mass - closed).abs() / closed;
        let l = luxemburg_norm(&f, OrliczSpec::l())?;
        let lt = luxemburg_norm(&f, OrliczSpec::ltilde())?;
        pass &= (grad - 1.0).abs() <= 1e-3 && mass_err < 0.05;
        orlicz.push((l, lt));
        parts.push(format!("α={alpha}: grad={grad:.6} mass_rel_err={mass_err:.2e} L={l:.5} Lt={lt:.5}"));
    }
    let (l16, lt16) = orlicz[2];
    let near = |x: f64| (x - target).abs() / target < 0.05;
    let monotone = |pick: fn(&(f64, f64)) -> f64| {
        let gaps: Vec<f64> = orlicz.iter().map(|p| (pick(p) - target).abs()).collect();
        gaps.windows(2).all(|w| w[1] <= w[0])
    };
    pass &= near(l16) && near(lt16) && monotone(|p| p.0) && monotone(|p| p.1);
    parts.push(format!("target={target:.5}"));
    Ok(result(2, "moser_limits", pass, parts.join("; ")))
}

/// Closed-form Orlicz limits of profiles and the norms of their synthesized fields at `α = 16`.
pub fn profile_formula() -> Result<CriterionResult> {
    let inv = 1.0 / (4.0 * PI).sqrt();
    let lions = RadialProfile::lions();
    let (psi1, _) = clipped_profiles(0.25)?;
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, profile, exact) in [("lions", lions, inv), ("psi1(0.25)", psi1, 0.75f64.sqrt() * inv)] {
        let limit = profile.orlicz_limit();
        let field = ScaledProfileField::new(profile, 16.0)?;
        let measured = luxemburg_norm(&field, OrliczSpec::l())?;
        let rel = (measured - exact).abs() / exact;
        pass &= (limit - exact).abs() <= 1e-14 * exact && rel < 0.07;
        parts.push(format!("{name}: limit={limit:.15} exact={exact:.15} measured(α=16)={measured:.5} rel={rel:.3}"));
    }
    Ok(result(3, "profile_formula", pass, parts.join("; ")))
}

/// Norm invariance of the rearrangement on a 100-member seeded bank.
pub fn rearrangement() -> Result<CriterionResult> {
    let bank = FunctionBank::random(4242, 100);
    let grid = GridSpec::new(512, 40.0)?;
    let fine = GridSpec::new(1024, 40.0)?;
    let members = bank.realize(grid, true)?;
    let (mut lp, mut orl, mut grad) = (0.0f64, 0.0f64, 0.0f64);
    for m in &members {
        let Some(u) = grid_field(&m.field) else { continue };
        let rep = rearrangement_invariants(u, &[1.0, 2.0, 4.0, 8.0], OrliczSpec::l())?;
        lp = rep.lp_deviation.iter().map(|d| d.1).fold(lp, f64::max);
        orl = orl.max(rep.orlicz_deviation);
        grad = grad.max(rep.grad_ratio);
    }
    let mut grad_fine = 0.0f64;
    for m in &bank.realize(fine, true)? {
        let Some(u) = grid_field(&m.field) else { continue };
        let g = u.grad_l2();
        if g > 0.0 {
            grad_fine = grad_fine.max(rearrange(u).grad_l2() / g);
        }
    }
    let (slack, slack_fine) = ((grad - 1.0).max(0.0), (grad_fine - 1.0).max(0.0));
    let pass = lp < 1e-12 && orl < 1e-5 && grad <= 1.02 && slack_fine <= slack;
    Ok(result(
        4,
        "rearrangement",
        pass,
        format!(
            "members={} max_lp_dev={lp:.2e} (<1e-12) max_orlicz_dev={orl:.2e} (<1e-5) max_grad_ratio={grad:.5} (<=1.02) \
             max_grad_ratio(n=1024)={grad_fine:.5} slack n=512: {slack:.2e} n=1024: {slack_fine:.2e}",
            members.len()
        ),
    ))
}

fn grid_field(r: &crate::harness::Realized) -> Option<&Field2D> {
    match r {
        crate::harness::Realized::Grid(f) => Some(f),
        crate::harness::Realized::Radial(_) => None,
    }
}

/// Free Gaussian evolution on `1 ≤ t ≤ t_wrap`.
pub fn dispersive() -> Result<CriterionResult> {
    let grid = GridSpec::new(256, 80.0)?;
    let u0 = gaussian(grid, 1.0, 1.0, (0.0, 0.0));
    let t_wrap = find_t_wrap(&u0, 100.0, 0.25, 1e-6).unwrap_or(100.0);
    let rep = dispersive_profile(&u0, 1.0, t_wrap, 24)?;
    let bound = DISPERSIVE_CONSTANT * 1.05;
    let pass = rep.sup_constant <= bound && (rep.l4_exponent + 0.5).abs() <= 0.05;
    Ok(result(
        6,
        "dispersive",
        pass,
        format!(
            "t_wrap={t_wrap:.2} sup_constant={:.5} (<={bound:.5}) l4_exponent={:.4} (-0.5±0.05)",
            rep.sup_constant, rep.l4_exponent
        ),
    ))
}

/// The Moser–Trudinger dichotomy from the standard suite.
pub fn dichotomy() -> Result<CriterionResult> {
    let report = standard_suite(&SuiteConfig::new(2024, GridSpec::new(256, 40.0)?))?;
    let d = &report.dichotomy;
    let change = report
        .report("moser_weighted")
        .and_then(|r| r.refinement.as_ref())
        .map_or(f64::NAN, |r| r.rel_change);
    Ok(result(
        7,
        "moser_dichotomy",
        d.pass,
        format!(
            "bank_max(0.9·4π)={:.4e} refinement_change={change:.3} (<0.05) growth(4π)={:.1} (>10) \
             reduced_max(β=0.9)={:.4e} reduced_growth(β=1)={:.1} (>10)",
            d.subcritical_bank_max, d.critical_growth, d.reduced_subcritical_max, d.reduced_critical_growth
        ),
    ))
}

pub const MATRIX_AMPLITUDES: [f64; 5] = [0.05, 0.075, 0.1, 0.125, 0.15];
pub const MATRIX_SEEDS: [u64; 4] = [11, 12, 13, 14];

/// `(a priori, r1, r2)` for one seeded random member at `H¹ = amplitude`.
pub fn matrix_entry(seed: u64, amplitude: f64) -> Result<(f64, f64, f64)> {
    let grid = GridSpec::new(256, 40.0)?;
    let mut member = BankMember::new(format!("seed{seed}"), MemberSpec::RandomSmooth { seed, bumps: 3 });
    member.normalization = Normalization::H1;
    member.factor = amplitude;
    let Some(u0) = grid_field(&member.realize(grid, true)?.field).cloned() else {
        return Err(crate::XnlsError::Domain("random member did not realize on the grid".into()));
    };
    let t_end = 1.0;
    let mut cfg = SimConfig::new(grid, PRESET_DT, t_end);
    cfg.output_every = 20;
    cfg.virial_every = cfg.steps();
    let mut rec = ScatteringRecorder::new(&u0, SliceOptions { nonlinear: true, with_ltilde: false }, f64::INFINITY, 2);
    evolve(&u0, &cfg, &mut [&mut rec])?.into_result()?;
    let interval = (0.0, t_end);
    let apriori = apriori_ratio(&space_time_norms(&rec.slices, interval)?)?;
    let boot = bootstrap_ratios(&rec.slices, interval)?
        .ok_or_else(|| crate::XnlsError::Domain("bootstrap ratios undefined for zero data".into()))?;
    Ok((apriori, boot.r1, boot.r2))
}

/// Spread `max/min` over amplitudes, worst over seeds, for each of the three ratios.
pub fn bootstrap_matrix() -> Result<CriterionResult> {
    let mut worst = [1.0f64; 3];
    let mut finite = true;
    let mut ranges = [(f64::INFINITY, 0.0f64); 3];
    for seed in MATRIX_SEEDS {
        let rows = MATRIX_AMPLITUDES.iter().map(|&a| matrix_entry(seed, a)).collect::<Result<Vec<_>>>()?;
        for (k, pick) in [|r: &(f64, f64, f64)| r.0, |r: &(f64, f64, f64)| r.1, |r: &(f64, f64, f64)| r.2]
            .into_iter()
            .enumerate()
        {
            let vals: Vec<f64> = rows.iter().map(pick).collect();
            finite &= vals.iter().all(|v| v.is_finite() && *v > 0.0);
            let (lo, hi) = vals.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
            worst[k] = worst[k].max(hi / lo);
            ranges[k] = (ranges[k].0.min(lo), ranges[k].1.max(hi));
        }
    }
    let pass = finite && worst.iter().all(|&s| s < 2.0);
    let names = ["apriori", "r1", "r2"];
    let parts: Vec<String> = (0..3)
        .map(|k| format!("{}: [{:.3e}, {:.3e}] spread={:.3}", names[k], ranges[k].0, ranges[k].1, worst[k]))
        .collect();
    Ok(result(9, "apriori_bootstrap", pass, format!("{} (spread <2)", parts.join("; "))))
}
