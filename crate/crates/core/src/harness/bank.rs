//! Seeded test corpus for the inequality checks.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, XnlsError};
use crate::field::Field2D;
use crate::grid::GridSpec;
use crate::profiles::{clipped_profiles, RadialProfile, ScaledProfileField};
use crate::radial::{Integrable, RadialFunction, RadialGaussian, ScaledRadial};

/// Tolerance on normalization flags.
pub const NORMALIZATION_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProfileKind {
    Lions,
    /// `min(𝐋, 1 − δ)`
    ClippedLow { delta: f64 },
    /// `𝐋 − min(𝐋, 1 − δ)`
    ClippedHigh { delta: f64 },
}

impl ProfileKind {
    pub fn profile(self) -> Result<RadialProfile> {
        match self {
            ProfileKind::Lions => Ok(RadialProfile::lions()),
            ProfileKind::ClippedLow { delta } => Ok(clipped_profiles(delta)?.0),
            ProfileKind::ClippedHigh { delta } => Ok(clipped_profiles(delta)?.1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum MemberSpec {
    /// `c·e^{−|x|²/w²}`
    Gaussian { amplitude: f64, width: f64 },
    /// `c·e^{1 − 1/(1 − |x|²/ρ²)}` on `|x| < ρ`
    Bump { amplitude: f64, radius: f64 },
    Moser { alpha: f64 },
    Profile { profile: ProfileKind, alpha: f64 },
    /// Sum of `bumps` random complex Gaussians; needs a grid.
    RandomSmooth { seed: u64, bumps: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    #[default]
    None,
    /// `‖u‖_{H¹} = 1`
    H1,
    /// `‖∇u‖_{L²} = 1`
    Grad,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BankMember {
    pub name: String,
    pub spec: MemberSpec,
    #[serde(default)]
    pub normalization: Normalization,
    /// Applied after normalization.
    #[serde(default = "unit")]
    pub factor: f64,
}

fn unit() -> f64 {
    1.0
}

/// Smooth compactly supported bump.
#[derive(Debug, Clone, Copy)]
pub struct RadialBump {
    pub amplitude: f64,
    pub radius: f64,
}

impl RadialFunction for RadialBump {
    fn value(&self, r: f64) -> f64 {
        let s = r / self.radius;
        if s >= 1.0 {
            0.0
        } else {
            self.amplitude * (1.0 - 1.0 / (1.0 - s * s)).exp()
        }
    }

    fn derivative(&self, r: f64) -> f64 {
        let s = r / self.radius;
        if s >= 1.0 {
            0.0
        } else {
            -2.0 * s / (1.0 - s * s).powi(2) * self.value(r) / self.radius
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        vec![0.5 * self.radius, 0.8 * self.radius, 0.95 * self.radius]
    }

    fn outer_radius(&self) -> f64 {
        self.radius
    }
}

/// A member in one concrete representation.
pub enum Realized {
    Radial(ScaledRadial),
    Grid(Field2D),
}

impl Realized {
    pub fn integrable(&self) -> &dyn Integrable {
        match self {
            Realized::Radial(r) => r,
            Realized::Grid(f) => f,
        }
    }

    pub fn radial(&self) -> Option<&ScaledRadial> {
        match self {
            Realized::Radial(r) => Some(r),
            Realized::Grid(_) => None,
        }
    }

    fn scaled(self, c: f64) -> Realized {
        match self {
            Realized::Radial(r) => Realized::Radial(ScaledRadial { factor: r.factor * c, inner: r.inner }),
            Realized::Grid(f) => Realized::Grid(f.scaled(c)),
        }
    }
}

pub struct RealizedMember {
    pub name: String,
    pub field: Realized,
    /// The underlying function is radial, whatever its representation.
    pub radial: bool,
}

impl RealizedMember {
    pub fn integrable(&self) -> &dyn Integrable {
        self.field.integrable()
    }
}

fn random_smooth(seed: u64, bumps: usize, grid: GridSpec) -> Field2D {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let reach = grid.l / 5.0;
    let terms: Vec<(f64, f64, f64, f64, f64)> = (0..bumps.max(1))
        .map(|_| {
            (
                rng.gen_range(-reach..reach),
                rng.gen_range(-reach..reach),
                rng.gen_range(0.6..2.0),
                rng.gen_range(0.2..1.0),
                rng.gen_range(0.0..2.0 * PI),
            )
        })
        .collect();
    Field2D::from_fn(grid, |x, y| {
        terms
            .iter()
            .map(|&(cx, cy, w, a, th)| {
                let r2 = (x - cx).powi(2) + (y - cy).powi(2);
                Complex64::from_polar(a * (-r2 / (w * w)).exp(), th)
            })
            .sum()
    })
}

impl MemberSpec {
    pub fn is_radial(&self) -> bool {
        !matches!(self, MemberSpec::RandomSmooth { .. })
    }

    fn radial_function(&self) -> Result<Option<Arc<dyn RadialFunction>>> {
        Ok(match *self {
            MemberSpec::Gaussian { amplitude, width } => Some(Arc::new(RadialGaussian { amplitude, width })),
            MemberSpec::Bump { amplitude, radius } => Some(Arc::new(RadialBump { amplitude, radius })),
            MemberSpec::Moser { alpha } => Some(Arc::new(ScaledProfileField::moser(alpha)?)),
            MemberSpec::Profile { profile, alpha } => Some(Arc::new(ScaledProfileField::new(profile.profile()?, alpha)?)),
            MemberSpec::RandomSmooth { .. } => None,
        })
    }

    /// Radial members use quadrature unless `grid_only`; the rest are sampled on `grid`.
    pub fn realize(&self, grid: GridSpec, grid_only: bool) -> Result<Realized> {
        if let MemberSpec::RandomSmooth { seed, bumps } = *self {
            return Ok(Realized::Grid(random_smooth(seed, bumps, grid)));
        }
        let f = self.radial_function()?.expect("radial member");
        if grid_only {
            Ok(Realized::Grid(Field2D::from_radial(grid, |r| f.value(r))))
        } else {
            Ok(Realized::Radial(ScaledRadial { factor: 1.0, inner: f }))
        }
    }
}

impl BankMember {
    pub fn new(name: impl Into<String>, spec: MemberSpec) -> Self {
        BankMember { name: name.into(), spec, normalization: Normalization::None, factor: 1.0 }
    }

    pub fn realize(&self, grid: GridSpec, grid_only: bool) -> Result<RealizedMember> {
        let raw = self.spec.realize(grid, grid_only)?;
        let measure = |r: &Realized| match self.normalization {
            Normalization::None => 1.0,
            Normalization::H1 => r.integrable().h1(),
            Normalization::Grad => r.integrable().grad_energy().sqrt(),
        };
        let size = measure(&raw);
        let invalid = |detail: String| XnlsError::ConstraintViolation { member: self.name.clone(), detail };
        if !(size.is_finite() && size > 0.0) {
            return Err(invalid(format!("normalizing quantity is {size}")));
        }
        let field = if self.normalization == Normalization::None { raw } else { raw.scaled(1.0 / size) };
        let check = measure(&field);
        if self.normalization != Normalization::None && (check - 1.0).abs() > NORMALIZATION_TOL {
            return Err(invalid(format!("normalized to {check}, not 1")));
        }
        let field = if self.factor == 1.0 { field } else { field.scaled(self.factor) };
        if !field.integrable().sup_modulus().is_finite() {
            return Err(invalid("non-finite values".into()));
        }
        Ok(RealizedMember { name: self.name.clone(), field, radial: self.spec.is_radial() })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionBank {
    pub seed: u64,
    pub members: Vec<BankMember>,
}

impl FunctionBank {
    pub fn new(seed: u64, members: Vec<BankMember>) -> Self {
        FunctionBank { seed, members }
    }

    /// Gaussians, bumps, Moser fields, profile fields and `random_count` random fields.
    pub fn standard(seed: u64, random_count: usize) -> Self {
        let mut m = Vec::new();
        for &(a, w) in &[(0.3, 0.5), (1.0, 1.0), (0.5, 2.0), (0.2, 4.0)] {
            m.push(BankMember::new(format!("gaussian(c={a},w={w})"), MemberSpec::Gaussian { amplitude: a, width: w }));
        }
        for &(a, r) in &[(1.0, 1.0), (0.5, 2.5)] {
            m.push(BankMember::new(format!("bump(c={a},ρ={r})"), MemberSpec::Bump { amplitude: a, radius: r }));
        }
        for &alpha in &[4.0, 8.0, 16.0] {
            m.push(BankMember::new(format!("moser(α={alpha})"), MemberSpec::Moser { alpha }));
        }
        m.push(BankMember::new(
            "profile(ψ1,δ=0.25,α=16)",
            MemberSpec::Profile { profile: ProfileKind::ClippedLow { delta: 0.25 }, alpha: 16.0 },
        ));
        m.extend(Self::random(seed, random_count).members);
        FunctionBank { seed, members: m }
    }

    /// `count` random smooth members with per-member seeds drawn from `seed`.
    pub fn random(seed: u64, count: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let members = (0..count)
            .map(|i| {
                let s: u64 = rng.gen();
                let bumps = rng.gen_range(2..=5);
                BankMember::new(format!("random#{i}"), MemberSpec::RandomSmooth { seed: s, bumps })
            })
            .collect();
        FunctionBank { seed, members }
    }

    pub fn moser_family(alphas: &[f64]) -> Self {
        let members = alphas
            .iter()
            .map(|&alpha| BankMember::new(format!("moser(α={alpha})"), MemberSpec::Moser { alpha }))
            .collect();
        FunctionBank { seed: 0, members }
    }

    pub fn normalized(&self, normalization: Normalization) -> Self {
        let members = self.members.iter().map(|m| BankMember { normalization, ..m.clone() }).collect();
        FunctionBank { seed: self.seed, members }
    }

    /// Every member multiplied by `c` after its normalization.
    pub fn scaled(&self, c: f64) -> Self {
        let members = self.members.iter().map(|m| BankMember { factor: m.factor * c, ..m.clone() }).collect();
        FunctionBank { seed: self.seed, members }
    }

    pub fn realize(&self, grid: GridSpec, grid_only: bool) -> Result<Vec<RealizedMember>> {
        if self.members.is_empty() {
            return Err(XnlsError::EmptyBank);
        }
        self.members.iter().map(|m| m.realize(grid, grid_only)).collect()
    }

    /// Members that can be sampled on a grid without losing their plateau.
    pub fn calibration_subset(&self) -> Self {
        let members = self
            .members
            .iter()
            .filter(|m| matches!(m.spec, MemberSpec::Gaussian { .. } | MemberSpec::Bump { .. } | MemberSpec::RandomSmooth { .. }))
            .cloned()
            .collect();
        FunctionBank { seed: self.seed, members }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> GridSpec {
        GridSpec::new(128, 24.0).unwrap()
    }

    #[test]
    fn random_members_are_reproducible() {
        let a = FunctionBank::random(7, 3).realize(grid(), true).unwrap();
        let b = FunctionBank::random(7, 3).realize(grid(), true).unwrap();
        for (x, y) in a.iter().zip(&b) {
            match (&x.field, &y.field) {
                (Realized::Grid(f), Realized::Grid(g)) => assert_eq!(f, g),
                _ => panic!("random members live on the grid"),
            }
        }
        let c = FunctionBank::random(8, 3);
        assert_ne!(FunctionBank::random(7, 3), c);
    }

    #[test]
    fn normalization_is_verified() {
        let bank = FunctionBank::standard(1, 4).normalized(Normalization::Grad);
        for m in bank.realize(grid(), false).unwrap() {
            let g = m.integrable().grad_energy().sqrt();
            assert!((g - 1.0).abs() <= NORMALIZATION_TOL, "{}: {g}", m.name);
        }
        let h1 = FunctionBank::standard(1, 2).normalized(Normalization::H1);
        for m in h1.realize(grid(), false).unwrap() {
            assert!((m.integrable().h1() - 1.0).abs() <= NORMALIZATION_TOL);
        }
    }

    #[test]
    fn zero_member_cannot_be_normalized() {
        let m = BankMember {
            normalization: Normalization::Grad,
            ..BankMember::new("zero", MemberSpec::Gaussian { amplitude: 0.0, width: 1.0 })
        };
        assert!(matches!(m.realize(grid(), false), Err(XnlsError::ConstraintViolation { .. })));
    }

    #[test]
    fn bump_quadrature_matches_grid() {
        // the flat edge e^{−1/(1−s²)} converges slowly on the grid, worst for the gradient
        let spec = MemberSpec::Bump { amplitude: 1.0, radius: 2.0 };
        let radial = spec.realize(grid(), false).unwrap();
        let sampled = spec.realize(GridSpec::new(256, 24.0).unwrap(), true).unwrap();
        let (a, b) = (radial.integrable().mass(), sampled.integrable().mass());
        assert!(((a - b) / a).abs() < 1e-6, "{a} vs {b}");
        let (a, b) = (radial.integrable().grad_energy(), sampled.integrable().grad_energy());
        assert!(((a - b) / a).abs() < 1e-4, "{a} vs {b}");
    }

    #[test]
    fn empty_bank_is_an_error() {
        assert!(matches!(FunctionBank::new(0, vec![]).realize(grid(), false), Err(XnlsError::EmptyBank)));
    }
}
