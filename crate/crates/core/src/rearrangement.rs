//! Symmetric decreasing rearrangement as a permutation of cell values.

use serde::Serialize;

use crate::error::Result;
use crate::field::Field2D;
use crate::grid::GridSpec;
use crate::orlicz::{luxemburg_norm, OrliczSpec};

/// `targets[i]` receives the `i`-th largest modulus, taken from cell `sources[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RearrangementPlan {
    pub sources: Vec<usize>,
    pub targets: Vec<usize>,
}

/// Cells ordered by centre radius, ties by index. Uses exact integer squared radii.
pub fn radius_order(grid: &GridSpec) -> Vec<usize> {
    let n = grid.n as i64;
    let half = n / 2;
    let key = |i: usize| {
        let (j, k) = (i as i64 / n - half, i as i64 % n - half);
        j * j + k * k
    };
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by_key(|&i| (key(i), i));
    order
}

impl RearrangementPlan {
    pub fn for_field(u: &Field2D) -> Self {
        let moduli: Vec<f64> = u.values().iter().map(|v| v.norm()).collect();
        let mut sources: Vec<usize> = (0..moduli.len()).collect();
        sources.sort_by(|&a, &b| moduli[b].total_cmp(&moduli[a]).then(a.cmp(&b)));
        RearrangementPlan { sources, targets: radius_order(u.grid()) }
    }

    pub fn is_bijection(&self) -> bool {
        let n = self.sources.len();
        let mut seen_s = vec![false; n];
        let mut seen_t = vec![false; n];
        for (&s, &t) in self.sources.iter().zip(&self.targets) {
            if s >= n || t >= n || seen_s[s] || seen_t[t] {
                return false;
            }
            seen_s[s] = true;
            seen_t[t] = true;
        }
        self.targets.len() == n
    }
}

/// `u*`: the moduli of `u` reassigned in decreasing order to cells of increasing radius.
pub fn rearrange(u: &Field2D) -> Field2D {
    let plan = RearrangementPlan::for_field(u);
    let mut out = vec![num_complex::Complex64::default(); u.values().len()];
    for (&s, &t) in plan.sources.iter().zip(&plan.targets) {
        out[t] = num_complex::Complex64::new(u.values()[s].norm(), 0.0);
    }
    Field2D::from_raw(*u.grid(), out)
}

#[derive(Debug, Clone, Serialize)]
pub struct RearrangementReport {
    /// `(p, |‖u*‖ₚ − ‖u‖ₚ| / ‖u‖ₚ)`.
    pub lp_deviation: Vec<(f64, f64)>,
    pub orlicz_deviation: f64,
    pub grad_ratio: f64,
}

fn rel_dev(a: f64, b: f64) -> f64 {
    if a == 0.0 && b == 0.0 {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

pub fn rearrangement_invariants(u: &Field2D, p_list: &[f64], spec: OrliczSpec) -> Result<RearrangementReport> {
    let star = rearrange(u);
    let lp_deviation = p_list
        .iter()
        .map(|&p| Ok((p, rel_dev(u.lp_norm(p)?, star.lp_norm(p)?))))
        .collect::<Result<Vec<_>>>()?;
    let orlicz_deviation = rel_dev(luxemburg_norm(u, spec)?, luxemburg_norm(&star, spec)?);
    let g = u.grad_l2();
    let grad_ratio = if g == 0.0 { 0.0 } else { star.grad_l2() / g };
    Ok(RearrangementReport { lp_deviation, orlicz_deviation, grad_ratio })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::gaussian;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn grid() -> GridSpec {
        GridSpec::new(64, 16.0).unwrap()
    }

    fn bumps(seed: u64) -> Field2D {
        let s = seed as f64;
        let a = gaussian(grid(), 1.0, 1.0 + 0.1 * (s % 5.0), (-3.0 + 0.2 * (s % 7.0), 1.0));
        let b = gaussian(grid(), 0.5, 0.8, (3.0, -2.0 + 0.3 * (s % 3.0)));
        a.add(&b).unwrap().map(|z| z * Complex64::from_polar(1.0, 0.1 * s))
    }

    #[test]
    fn radial_decreasing_input_is_fixed() {
        let u = gaussian(grid(), 1.0, 2.0, (0.0, 0.0));
        let v = rearrange(&u);
        assert_eq!(u, v);
    }

    #[test]
    fn two_bumps_merge_into_one_centered_bump() {
        let u = bumps(0);
        let v = rearrange(&u);
        let mut a: Vec<f64> = u.values().iter().map(|z| z.norm()).collect();
        let mut b: Vec<f64> = v.values().iter().map(|z| z.re).collect();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        assert_eq!(a, b);
        let centre = grid().n / 2 * grid().n + grid().n / 2;
        assert_eq!(v.values()[centre].re, u.linf());
    }

    #[test]
    fn zero_field_report() {
        let u = Field2D::zeros(grid());
        let r = rearrangement_invariants(&u, &[2.0, 4.0], OrliczSpec::l()).unwrap();
        assert!(r.lp_deviation.iter().all(|&(_, d)| d == 0.0));
        assert_eq!(r.orlicz_deviation, 0.0);
    }

    #[test]
    fn plan_is_a_bijection() {
        assert!(RearrangementPlan::for_field(&bumps(3)).is_bijection());
        let bad = RearrangementPlan { sources: vec![0, 0], targets: vec![0, 1] };
        assert!(!bad.is_bijection());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn idempotent(seed in 0u64..500) {
            let once = rearrange(&bumps(seed));
            prop_assert_eq!(rearrange(&once), once);
        }

        #[test]
        fn equimeasurable(seed in 0u64..500, level in 0.0f64..1.0) {
            let u = bumps(seed);
            let v = rearrange(&u);
            let a = u.values().iter().filter(|z| z.norm() > level).count();
            let b = v.values().iter().filter(|z| z.re > level).count();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn norms_preserved(seed in 0u64..500) {
            let r = rearrangement_invariants(&bumps(seed), &[2.0, 4.0, 6.0], OrliczSpec::l()).unwrap();
            for &(_, d) in &r.lp_deviation {
                prop_assert!(d < 1e-12);
            }
            prop_assert!(r.orlicz_deviation < 1e-5);
            prop_assert!(r.grad_ratio <= 1.02);
        }
    }
}
