//! Empirical constants for the standalone inequalities, one check per inequality.
//!
//! Every check maps a realized bank to per-member `(lhs, rhs, ratio)` triples. Members
//! that fall outside a check's hypotheses are listed as skipped with a reason.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bank::{FunctionBank, RealizedMember};
use crate::error::{Result, XnlsError};
use crate::field::radial_sample;
use crate::grid::GridSpec;
use crate::nonlinearity::{exp_tail, EXPONENT_CAP};
use crate::orlicz::{luxemburg_norm, OrliczSpec};
use crate::profiles::logcoord::log_transform_radial;
use crate::profiles::{LogTransform, ScaledProfileField};

/// Relative change under grid doubling accepted as stable.
pub const REFINEMENT_RTOL: f64 = 0.05;
/// Tolerance on the `‖∇u‖ ≤ 1` and `∫|w′|² ≤ 1` constraints.
pub const CONSTRAINT_TOL: f64 = 1e-3;
/// Growth along a family that separates bounded from divergent ratios.
pub const DIVERGENCE_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberResult {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Skipped {
    pub name: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Refinement {
    pub coarse_n: usize,
    pub fine_n: usize,
    pub coarse: f64,
    pub fine: f64,
    pub rel_change: f64,
    pub stable: bool,
}

/// Ratios of the members in bank order against a family parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trend {
    pub parameter: Vec<f64>,
    pub ratios: Vec<f64>,
    /// `last / first`.
    pub growth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub id: String,
    pub params: BTreeMap<String, f64>,
    pub members: Vec<MemberResult>,
    pub skipped: Vec<Skipped>,
    pub max_ratio: f64,
    pub refinement: Option<Refinement>,
    pub trend: Option<Trend>,
    pub pass: bool,
}

enum Outcome {
    Ratio(MemberResult),
    Skip(Skipped),
}

fn ratio(name: &str, lhs: f64, rhs: f64) -> Outcome {
    Outcome::Ratio(MemberResult { name: name.to_string(), lhs, rhs, ratio: lhs / rhs })
}

fn skip(name: &str, reason: impl Into<String>) -> Outcome {
    Outcome::Skip(Skipped { name: name.to_string(), reason: reason.into() })
}

fn run(
    id: &str,
    params: &[(&str, f64)],
    members: &[RealizedMember],
    eval: impl Fn(&RealizedMember) -> Result<Outcome> + Sync,
) -> Result<InequalityReport> {
    let outcomes: Vec<Outcome> = members.par_iter().map(&eval).collect::<Result<_>>()?;
    let mut results = Vec::new();
    let mut skipped = Vec::new();
    for o in outcomes {
        match o {
            Outcome::Ratio(r) => results.push(r),
            Outcome::Skip(s) => skipped.push(s),
        }
    }
    if results.is_empty() {
        return Err(XnlsError::EmptyBank);
    }
    let max_ratio = results.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let pass = results.iter().all(|r| r.ratio.is_finite() && r.ratio >= 0.0);
    Ok(InequalityReport {
        id: id.to_string(),
        params: params.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
        members: results,
        skipped,
        max_ratio,
        refinement: None,
        trend: None,
        pass,
    })
}

impl InequalityReport {
    /// Attach the trend of the evaluated members against `parameter` (one per member).
    pub fn with_trend(mut self, parameter: &[f64]) -> Result<Self> {
        if parameter.len() != self.members.len() || parameter.is_empty() {
            return Err(XnlsError::Domain(format!(
                "{} trend parameters for {} evaluated members",
                parameter.len(),
                self.members.len()
            )));
        }
        let ratios: Vec<f64> = self.members.iter().map(|m| m.ratio).collect();
        let growth = ratios[ratios.len() - 1] / ratios[0];
        self.trend = Some(Trend { parameter: parameter.to_vec(), ratios, growth });
        Ok(self)
    }

    pub fn with_refinement(mut self, refinement: Refinement) -> Self {
        self.pass &= refinement.stable;
        self.refinement = Some(refinement);
        self
    }

    pub fn ratio_of(&self, name: &str) -> Option<f64> {
        self.members.iter().find(|m| m.name == name).map(|m| m.ratio)
    }
}

/// Max ratio of `check` on the grid-realized `bank` at `grid` and at the doubled grid.
pub fn refinement(
    bank: &FunctionBank,
    grid: GridSpec,
    check: impl Fn(&[RealizedMember]) -> Result<InequalityReport>,
) -> Result<Refinement> {
    let fine_grid = grid.refined();
    let coarse = check(&bank.realize(grid, true)?)?.max_ratio;
    let fine = check(&bank.realize(fine_grid, true)?)?.max_ratio;
    let rel_change = if fine == 0.0 && coarse == 0.0 { 0.0 } else { (fine - coarse).abs() / fine.abs() };
    Ok(Refinement {
        coarse_n: grid.n,
        fine_n: fine_grid.n,
        coarse,
        fine,
        rel_change,
        stable: rel_change < REFINEMENT_RTOL,
    })
}

/// Hölder index of the available Hölder seminorm.
pub const HOLDER_INDEX: f64 = 0.5;

/// Minimal `C_λ` with `‖u‖²_∞ ≤ λ‖u‖²_{H_μ} log(C_λ + 8^α μ^{−α}‖u‖_{C^α}/‖u‖_{H_μ})`,
/// `‖u‖²_{H_μ} = ‖∇u‖² + μ²‖u‖²` and `‖u‖_{C^α} = ‖u‖_∞ + [u]_α`.
///
/// Reported as `lhs = e^{‖u‖²_∞/(λ‖u‖²_{H_μ})}`, `rhs = 8^α μ^{−α}‖u‖_{C^α}/‖u‖_{H_μ}` and
/// `ratio = max(0, lhs − rhs)`.
pub fn check_log_sobolev(members: &[RealizedMember], lambda: f64, mu: f64, alpha: f64) -> Result<InequalityReport> {
    if alpha != HOLDER_INDEX {
        return Err(XnlsError::Domain(format!("only the Hölder index {HOLDER_INDEX} is available, got {alpha}")));
    }
    if !(lambda > 1.0 / (2.0 * PI * alpha)) {
        return Err(XnlsError::Domain(format!("λ = {lambda} must exceed 1/(2πα) = {}", 1.0 / (2.0 * PI * alpha))));
    }
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(XnlsError::Domain(format!("μ = {mu} must lie in (0, 1]")));
    }
    run("log_sobolev", &[("lambda", lambda), ("mu", mu), ("alpha", alpha)], members, |m| {
        let u = m.integrable();
        let h2 = u.grad_energy() + mu * mu * u.mass();
        if h2 == 0.0 {
            return Ok(skip(&m.name, "‖u‖_{H_μ} = 0"));
        }
        let sup = u.sup_modulus();
        let holder = sup + u.holder_half();
        let h = h2.sqrt();
        let lhs = (sup * sup / (lambda * h2)).exp();
        let rhs = 8f64.powf(alpha) * mu.powf(-alpha) * holder / h;
        Ok(Outcome::Ratio(MemberResult { name: m.name.clone(), lhs, rhs, ratio: (lhs - rhs).max(0.0) }))
    })
}

/// Decay exponent `2/(2+p)` of the pointwise radial bound.
pub fn radial_exponent(p: f64) -> f64 {
    2.0 / (2.0 + p)
}

/// `count` log-spaced radii in `[r_min, r_max]`.
pub fn log_radii(r_min: f64, r_max: f64, count: usize) -> Vec<f64> {
    let count = count.max(2);
    let step = (r_max / r_min).ln() / (count - 1) as f64;
    (0..count).map(|i| r_min * (step * i as f64).exp()).collect()
}

/// `sup_r |u(r)|·r^{2/(2+p)} / (‖u‖_p^{p/(p+2)}‖∇u‖^{2/(p+2)})`. Grid members are sampled
/// bilinearly along the positive x-axis.
pub fn check_radial_bounds(members: &[RealizedMember], p: f64, radii: &[f64]) -> Result<InequalityReport> {
    if !(p >= 1.0) {
        return Err(XnlsError::Domain(format!("p = {p} must be at least 1")));
    }
    let e = radial_exponent(p);
    run("radial_bounds", &[("p", p), ("exponent", e)], members, |m| {
        if !m.radial {
            return Ok(skip(&m.name, "not radial"));
        }
        let u = m.integrable();
        let rhs = u.lp(p).powf(p / (p + 2.0)) * u.grad_energy().sqrt().powf(2.0 / (p + 2.0));
        if rhs == 0.0 {
            return Ok(skip(&m.name, "zero member"));
        }
        let values: Vec<(f64, f64)> = match (&m.field, m.field.radial()) {
            (_, Some(f)) => radii.iter().map(|&r| (r, crate::radial::RadialFunction::value(f, r).abs())).collect(),
            (super::bank::Realized::Grid(g), None) => {
                let inside: Vec<f64> = radii.iter().copied().filter(|&r| r < 0.5 * g.grid().l).collect();
                radial_sample(g, &inside)?.into_iter().map(|(r, z)| (r, z.norm())).collect()
            }
            _ => unreachable!("a realized member is radial or gridded"),
        };
        let lhs = values.iter().map(|&(r, v)| v * r.powf(e)).fold(0.0, f64::max);
        Ok(ratio(&m.name, lhs, rhs))
    })
}

/// `‖u‖_4 / (‖∇u‖^{1/4}‖u‖_{H¹}^{3/4})`.
pub fn check_refined_l4(members: &[RealizedMember]) -> Result<InequalityReport> {
    run("refined_l4", &[], members, |m| {
        let u = m.integrable();
        let rhs = u.grad_energy().sqrt().powf(0.25) * u.h1().powf(0.75);
        if rhs == 0.0 {
            return Ok(skip(&m.name, "zero member"));
        }
        Ok(ratio(&m.name, u.lp(4.0), rhs))
    })
}

/// `‖u‖_4 / ‖∇u‖`, the gradient-only variant that fails on flat families.
pub fn check_gradient_only_l4(members: &[RealizedMember]) -> Result<InequalityReport> {
    run("gradient_only_l4", &[], members, |m| {
        let u = m.integrable();
        let rhs = u.grad_energy().sqrt();
        if rhs == 0.0 {
            return Ok(skip(&m.name, "zero member"));
        }
        Ok(ratio(&m.name, u.lp(4.0), rhs))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum MoserForm {
    /// `∫e^{α|u|²}|u|ᵖ ≤ C(α,p)∫|u|ᵖ`
    Weighted { alpha: f64, p: f64 },
    /// `∫(e^{α|u|²} − 1 − α|u|²) ≤ c_α‖u‖⁴_4`
    Tail { alpha: f64 },
    /// `∫e^{4π(1+ε)|u|²}|u|ᵖ ≤ C(‖u‖ᵖ_p + ‖u‖ᵖ_{pr})`, `r = 1/(1 − ε c_δ)`, on the ball
    /// `‖u‖_{𝓛̃} ≤ 1/√(4π(1+2δ))`.
    Supercritical { delta: f64, epsilon: f64, p: f64, c_delta: f64 },
}

impl MoserForm {
    /// `c_δ = (2 + 1/δ)/(1 + δ)`, the value forced by the Hölder split `r′ = (1+δ)/(ε(2+1/δ))`.
    pub fn default_c_delta(delta: f64) -> f64 {
        (2.0 + 1.0 / delta) / (1.0 + delta)
    }

    pub fn supercritical(delta: f64, epsilon: f64, p: f64) -> Self {
        MoserForm::Supercritical { delta, epsilon, p, c_delta: Self::default_c_delta(delta) }
    }

    fn id(&self) -> &'static str {
        match self {
            MoserForm::Weighted { .. } => "moser_weighted",
            MoserForm::Tail { .. } => "moser_tail",
            MoserForm::Supercritical { .. } => "moser_supercritical",
        }
    }

    fn exponent(&self) -> f64 {
        match *self {
            MoserForm::Weighted { alpha, .. } | MoserForm::Tail { alpha } => alpha,
            MoserForm::Supercritical { epsilon, .. } => 4.0 * PI * (1.0 + epsilon),
        }
    }

    fn params(&self) -> Vec<(&'static str, f64)> {
        match *self {
            MoserForm::Weighted { alpha, p } => vec![("alpha", alpha), ("p", p)],
            MoserForm::Tail { alpha } => vec![("alpha", alpha)],
            MoserForm::Supercritical { delta, epsilon, p, c_delta } => {
                vec![("delta", delta), ("epsilon", epsilon), ("p", p), ("c_delta", c_delta), ("r", 1.0 / (1.0 - epsilon * c_delta))]
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let a = self.exponent();
        if !(a >= 0.0 && a.is_finite()) {
            return Err(XnlsError::Domain(format!("exponent {a} must be finite and nonnegative")));
        }
        match *self {
            MoserForm::Weighted { p, .. } if !(p > 0.0) => Err(XnlsError::Domain(format!("p = {p} must be positive"))),
            MoserForm::Supercritical { delta, epsilon, p, c_delta } => {
                if !(delta > 0.0 && epsilon > 0.0 && p >= 2.0) {
                    return Err(XnlsError::Domain(format!("need δ, ε > 0 and p ≥ 2, got δ = {delta}, ε = {epsilon}, p = {p}")));
                }
                if !(epsilon * c_delta < 1.0) {
                    return Err(XnlsError::Domain(format!("ε c_δ = {} must be below 1", epsilon * c_delta)));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// Moser–Trudinger type ratios over members with `‖∇u‖ ≤ 1`.
pub fn check_moser_trudinger(members: &[RealizedMember], form: MoserForm) -> Result<InequalityReport> {
    form.validate()?;
    let a = form.exponent();
    run(form.id(), &form.params(), members, |m| {
        let u = m.integrable();
        let grad = u.grad_energy().sqrt();
        if grad > 1.0 + CONSTRAINT_TOL {
            return Ok(skip(&m.name, format!("‖∇u‖ = {grad:.6} > 1")));
        }
        let sup = u.sup_modulus();
        if sup == 0.0 {
            return Ok(skip(&m.name, "zero member"));
        }
        let peak = a * sup * sup;
        if peak > EXPONENT_CAP {
            let e = XnlsError::OverflowGuard { exponent: peak, cap: EXPONENT_CAP, cell: None };
            return Ok(skip(&m.name, e.to_string()));
        }
        let (lhs, rhs) = match form {
            MoserForm::Weighted { alpha, p } => {
                // both sides scaled by sup^{−p}
                let lhs = u.integrate_modulus(&mut |s| (alpha * s * s).exp() * (s / sup).powf(p));
                let rhs = u.integrate_modulus(&mut |s| (s / sup).powf(p));
                (lhs, rhs)
            }
            MoserForm::Tail { alpha } => {
                let lhs = u.integrate_modulus(&mut |s| exp_tail(alpha * s * s, 2));
                (lhs, u.lp(4.0).powi(4))
            }
            MoserForm::Supercritical { delta, epsilon, p, c_delta } => {
                let ball = 1.0 / (4.0 * PI * (1.0 + 2.0 * delta)).sqrt();
                let norm = luxemburg_norm(u, OrliczSpec::ltilde())?;
                if norm > ball {
                    return Ok(skip(&m.name, format!("‖u‖_𝓛̃ = {norm:.6} outside the ball {ball:.6}")));
                }
                let r = 1.0 / (1.0 - epsilon * c_delta);
                let lhs = u.integrate_modulus(&mut |s| (4.0 * PI * (1.0 + epsilon) * s * s).exp() * s.powf(p));
                (lhs, u.lp(p).powf(p) + u.lp(p * r).powf(p))
            }
        };
        Ok(ratio(&m.name, lhs, rhs))
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CondL4Entry {
    pub name: String,
    pub l4: f64,
    pub grad_l2: f64,
    pub orlicz_tilde: f64,
    /// `‖u‖_𝓛̃ − ‖∇u‖/√(4π)`.
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CondL4Report {
    pub entries: Vec<CondL4Entry>,
    pub l4_decreasing: bool,
    /// `e_{n+1} ≤ max(e_n, 0)`: the excess falls, or rises towards zero from below.
    pub excess_trending_down: bool,
    pub final_excess: f64,
    pub pass: bool,
}

/// Excess over the `‖u‖_𝓛̃ ≤ ‖∇u‖/√(4π) + o(1)` bound along a sequence whose L⁴ norms
/// decrease; passes when the excess trends down and ends below `tol`.
pub fn check_cond_l4(members: &[RealizedMember], tol: f64) -> Result<CondL4Report> {
    if members.is_empty() {
        return Err(XnlsError::EmptyBank);
    }
    let entries: Vec<CondL4Entry> = members
        .par_iter()
        .map(|m| {
            let u = m.integrable();
            let grad_l2 = u.grad_energy().sqrt();
            let orlicz_tilde = luxemburg_norm(u, OrliczSpec::ltilde())?;
            Ok(CondL4Entry {
                name: m.name.clone(),
                l4: u.lp(4.0),
                grad_l2,
                orlicz_tilde,
                excess: orlicz_tilde - grad_l2 / (4.0 * PI).sqrt(),
            })
        })
        .collect::<Result<_>>()?;
    let l4_decreasing = entries.windows(2).all(|w| w[1].l4 <= w[0].l4);
    let excess_trending_down = entries.windows(2).all(|w| w[1].excess <= w[0].excess.max(0.0) + tol * 1e-3);
    let final_excess = entries.last().expect("nonempty").excess;
    let pass = l4_decreasing && excess_trending_down && final_excess <= tol;
    Ok(CondL4Report { entries, l4_decreasing, excess_trending_down, final_excess, pass })
}

/// `∫e^{β w²}|w|ᵖe^{−t}dt / ∫|w|ᵖe^{−t}dt` under `∫|w′|² ≤ 1`.
pub fn check_reduced(transforms: &[(String, LogTransform)], beta: f64, p: f64) -> Result<InequalityReport> {
    if !(beta >= 0.0 && beta.is_finite() && p > 0.0) {
        return Err(XnlsError::Domain(format!("need β ≥ 0 and p > 0, got β = {beta}, p = {p}")));
    }
    let outcomes: Vec<Outcome> = transforms
        .par_iter()
        .map(|(name, w)| {
            let d = w.dirichlet();
            if d > 1.0 + CONSTRAINT_TOL {
                return skip(name, format!("∫|w′|² = {d:.6} > 1"));
            }
            let rhs = w.lp_weighted(p);
            if rhs == 0.0 {
                return skip(name, "zero member");
            }
            ratio(name, w.reduced_lhs(beta, p), rhs)
        })
        .collect();
    let mut results = Vec::new();
    let mut skipped = Vec::new();
    for o in outcomes {
        match o {
            Outcome::Ratio(r) => results.push(r),
            Outcome::Skip(s) => skipped.push(s),
        }
    }
    if results.is_empty() {
        return Err(XnlsError::EmptyBank);
    }
    let max_ratio = results.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let pass = results.iter().all(|r| r.ratio.is_finite());
    Ok(InequalityReport {
        id: "reduced_1d".into(),
        params: [("beta".to_string(), beta), ("p".to_string(), p)].into_iter().collect(),
        members: results,
        skipped,
        max_ratio,
        refinement: None,
        trend: None,
        pass,
    })
}

/// Log transforms of Moser fields, sampled 20 per unit of `t` so that the ramp end
/// `t = 2α` lands on a sample.
pub fn moser_log_transforms(alphas: &[f64]) -> Result<Vec<(String, LogTransform)>> {
    alphas
        .iter()
        .map(|&a| {
            let f = ScaledProfileField::moser(a)?;
            let t_max = (2.0 * a + 10.0).round();
            let count = (t_max * 20.0) as usize + 1;
            Ok((format!("moser(α={a})"), log_transform_radial(&f, t_max, count)?))
        })
        .collect()
}

/// `[u]_{1/2} / ‖u‖_{W^{1,4}}`.
pub fn check_embedding_w14(members: &[RealizedMember]) -> Result<InequalityReport> {
    run("embedding_w14_c12", &[], members, |m| {
        let u = m.integrable();
        let rhs = u.w14();
        if rhs == 0.0 {
            return Ok(skip(&m.name, "zero member"));
        }
        Ok(ratio(&m.name, u.holder_half(), rhs))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::bank::{BankMember, MemberSpec, Normalization};

    fn grid() -> GridSpec {
        GridSpec::new(128, 24.0).unwrap()
    }

    fn gaussians(specs: &[(f64, f64)]) -> Vec<RealizedMember> {
        let members = specs
            .iter()
            .map(|&(a, w)| BankMember::new(format!("g({a},{w})"), MemberSpec::Gaussian { amplitude: a, width: w }))
            .collect();
        FunctionBank::new(0, members).realize(grid(), false).unwrap()
    }

    fn moser(alphas: &[f64]) -> Vec<RealizedMember> {
        FunctionBank::moser_family(alphas).realize(grid(), false).unwrap()
    }

    #[test]
    fn zero_members_are_skipped() {
        let bank = gaussians(&[(0.0, 1.0), (0.5, 1.0)]);
        let r = check_log_sobolev(&bank, 0.5, 1.0, 0.5).unwrap();
        assert_eq!(r.skipped.len(), 1);
        assert_eq!(r.members.len(), 1);
        let only_zero = gaussians(&[(0.0, 1.0)]);
        assert!(matches!(check_refined_l4(&only_zero), Err(XnlsError::EmptyBank)));
        let r = check_moser_trudinger(&bank, MoserForm::Weighted { alpha: 1.0, p: 2.0 }).unwrap();
        assert_eq!(r.skipped[0].name, "g(0,1)");
    }

    #[test]
    fn log_sobolev_rejects_small_lambda() {
        let bank = gaussians(&[(1.0, 1.0)]);
        assert!(check_log_sobolev(&bank, 1.0 / PI, 1.0, 0.5).is_err());
        assert!(check_log_sobolev(&bank, 0.5, 1.5, 0.5).is_err());
        assert!(check_log_sobolev(&bank, 0.5, 1.0, 0.3).is_err());
    }

    #[test]
    fn log_sobolev_constant_is_amplitude_free() {
        let cs = [0.1, 0.3, 1.0, 3.0, 10.0];
        let specs: Vec<(f64, f64)> = cs.iter().map(|&c| (c, 1.0)).collect();
        let r = check_log_sobolev(&gaussians(&specs), 0.5, 1.0, 0.5).unwrap();
        let first = &r.members[0];
        for m in &r.members {
            assert!((m.lhs - first.lhs).abs() < 1e-9 * first.lhs);
            assert!((m.rhs - first.rhs).abs() < 1e-9 * first.rhs);
        }
    }

    #[test]
    fn log_sobolev_holds_on_moser_family() {
        let r = check_log_sobolev(&moser(&[4.0, 8.0, 16.0]), 0.5, 1.0, 0.5).unwrap();
        assert!(r.pass);
        for m in &r.members {
            // the inequality with the bank's constant
            assert!(m.lhs <= r.max_ratio + m.rhs);
        }
    }

    #[test]
    fn radial_exponents() {
        assert_eq!(radial_exponent(2.0), 0.5);
        assert!((radial_exponent(4.0) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn radial_bound_vanishes_beyond_support() {
        let bump = FunctionBank::new(0, vec![BankMember::new("b", MemberSpec::Bump { amplitude: 1.0, radius: 1.0 })])
            .realize(grid(), false)
            .unwrap();
        let r = check_radial_bounds(&bump, 2.0, &log_radii(1.5, 5.0, 20)).unwrap();
        assert_eq!(r.max_ratio, 0.0);
        let random = FunctionBank::random(3, 1).realize(grid(), true).unwrap();
        let mut all = bump;
        all.extend(random);
        let r = check_radial_bounds(&all, 2.0, &log_radii(0.01, 5.0, 20)).unwrap();
        assert_eq!(r.skipped.len(), 1);
    }

    #[test]
    fn radial_bound_grid_matches_quadrature() {
        let spec = BankMember::new("g", MemberSpec::Gaussian { amplitude: 1.0, width: 1.5 });
        let bank = FunctionBank::new(0, vec![spec]);
        let radii = log_radii(0.05, 8.0, 40);
        let exact = check_radial_bounds(&bank.realize(grid(), false).unwrap(), 4.0, &radii).unwrap();
        let fine = GridSpec::new(256, 24.0).unwrap();
        let sampled = check_radial_bounds(&bank.realize(fine, true).unwrap(), 4.0, &radii).unwrap();
        assert!((exact.max_ratio - sampled.max_ratio).abs() < 1e-3 * exact.max_ratio);
    }

    #[test]
    fn refined_l4_is_homogeneous() {
        let r = check_refined_l4(&gaussians(&[(0.2, 1.3), (5.0, 1.3)])).unwrap();
        assert!((r.members[0].ratio - r.members[1].ratio).abs() < 1e-10 * r.members[0].ratio);
    }

    #[test]
    fn flat_family_separates_true_and_gradient_only_bounds() {
        // u_n = (1/n)e^{−|x/n|²}: true ratio ~ n^{−1/4}, gradient-only ratio ~ n^{1/2}
        let ns = [1.0, 4.0, 16.0];
        let specs: Vec<(f64, f64)> = ns.iter().map(|&n| (1.0 / n, n)).collect();
        let bank = gaussians(&specs);
        let truth = check_refined_l4(&bank).unwrap().with_trend(&ns).unwrap();
        let gradient_only = check_gradient_only_l4(&bank).unwrap().with_trend(&ns).unwrap();
        let g_true = truth.trend.unwrap().growth;
        let g_false = gradient_only.trend.unwrap().growth;
        assert!(g_true < 1.0, "{g_true}");
        assert!((g_false - 4.0).abs() < 1e-3, "{g_false}");
    }

    #[test]
    fn moser_dichotomy() {
        let alphas = [4.0, 8.0, 16.0, 32.0, 64.0, 100.0];
        let fam = moser(&alphas);
        let sub = check_moser_trudinger(&fam, MoserForm::Weighted { alpha: 0.9 * 4.0 * PI, p: 4.0 }).unwrap();
        let crit = check_moser_trudinger(&fam, MoserForm::Weighted { alpha: 4.0 * PI, p: 4.0 }).unwrap();
        let s: Vec<f64> = sub.members.iter().map(|m| m.ratio).collect();
        let c: Vec<f64> = crit.members.iter().map(|m| m.ratio).collect();
        // plateau term ~ α⁴e^{−0.2α}/24 peaks near α = 20, then decays
        assert!(s[5] < s[2] && s[4] < s[3]);
        assert!(c.windows(2).all(|w| w[1] > w[0]));
        assert!(c[2] / c[0] > DIVERGENCE_FACTOR);
    }

    #[test]
    fn weighted_ratio_with_zero_exponent_is_one() {
        let r = check_moser_trudinger(&moser(&[8.0]), MoserForm::Weighted { alpha: 0.0, p: 2.0 }).unwrap();
        assert!((r.max_ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gradient_constraint_filters_members() {
        let bank = gaussians(&[(1.0, 1.0)]);
        // ‖∇u‖² = π > 1
        let mut all = bank;
        all.extend(moser(&[4.0]));
        let r = check_moser_trudinger(&all, MoserForm::Tail { alpha: 2.0 }).unwrap();
        assert_eq!(r.skipped.len(), 1);
        assert!(r.skipped[0].reason.contains("> 1"));
    }

    #[test]
    fn supercritical_form_checks_parameters_and_ball() {
        assert!(check_moser_trudinger(&moser(&[4.0]), MoserForm::supercritical(0.1, 0.5, 2.0)).is_err());
        let m = MoserForm::supercritical(0.1, 0.01, 2.0);
        // Moser fields sit on the edge of the 𝓛̃ unit ball, outside the shrunken one
        let mut bank = moser(&[16.0]);
        bank.extend(gaussians(&[(0.1, 1.0)]));
        let r = check_moser_trudinger(&bank, m).unwrap();
        assert_eq!(r.skipped.len(), 1);
        assert!(r.skipped[0].reason.contains("outside the ball"));
        assert!(r.members[0].ratio.is_finite());
    }

    #[test]
    fn cond_l4_trends() {
        let zero = gaussians(&[(0.0, 1.0), (0.0, 1.0)]);
        let r = check_cond_l4(&zero, 1e-3).unwrap();
        assert!(r.entries.iter().all(|e| e.excess == 0.0));
        // narrow Gaussians: ‖g‖_𝓛̃ < ‖∇g‖/√(4π) = c/2, so c g → 0 from below
        let cs = [0.4, 0.2, 0.1, 0.05];
        let specs: Vec<(f64, f64)> = cs.iter().map(|&c| (c, 0.2)).collect();
        let r = check_cond_l4(&gaussians(&specs), 1e-3).unwrap();
        assert!(r.pass);
        assert!(r.entries.iter().all(|e| e.excess < 0.0));
        let r = check_cond_l4(&moser(&[4.0, 8.0, 16.0]), 0.02).unwrap();
        assert!(r.pass, "{:?}", r.entries);
    }

    #[test]
    fn reduced_dichotomy() {
        let ws = moser_log_transforms(&[4.0, 8.0, 16.0]).unwrap();
        let sub = check_reduced(&ws, 0.9, 2.0).unwrap().with_trend(&[4.0, 8.0, 16.0]).unwrap();
        let crit = check_reduced(&ws, 1.0, 2.0).unwrap().with_trend(&[4.0, 8.0, 16.0]).unwrap();
        assert!(sub.skipped.is_empty());
        assert!(sub.trend.unwrap().growth < DIVERGENCE_FACTOR);
        assert!(crit.trend.unwrap().growth > DIVERGENCE_FACTOR);
    }

    #[test]
    fn reduced_planar_consistency() {
        // the 1-D ratio equals the planar weighted ratio at α = 4πβ
        let ws = moser_log_transforms(&[8.0]).unwrap();
        let one_d = check_reduced(&ws, 0.5, 2.0).unwrap().max_ratio;
        let planar = check_moser_trudinger(&moser(&[8.0]), MoserForm::Weighted { alpha: 2.0 * PI, p: 2.0 })
            .unwrap()
            .max_ratio;
        assert!((one_d - planar).abs() < 1e-2 * planar, "{one_d} vs {planar}");
    }

    #[test]
    fn embedding_ratio_homogeneous_and_refinement_stable() {
        let r = check_embedding_w14(&gaussians(&[(0.5, 1.0), (2.0, 1.0)])).unwrap();
        assert!((r.members[0].ratio - r.members[1].ratio).abs() < 1e-9 * r.members[0].ratio);
        let bank = FunctionBank::random(11, 3);
        let refinement = refinement(&bank, GridSpec::new(64, 24.0).unwrap(), check_embedding_w14).unwrap();
        assert!(refinement.rel_change < 0.1, "{refinement:?}");
    }

    #[test]
    fn reports_reproduce_from_seed() {
        let bank = FunctionBank::standard(5, 3).normalized(Normalization::Grad);
        let a = check_refined_l4(&bank.realize(grid(), false).unwrap()).unwrap();
        let b = check_refined_l4(&bank.realize(grid(), false).unwrap()).unwrap();
        assert_eq!(a.max_ratio.to_bits(), b.max_ratio.to_bits());
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}
