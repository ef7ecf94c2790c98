//! `J₀` and the integral `P(x) = ∫ₓ^∞ J₀(t)/t dt`.

use std::f64::consts::PI;

use crate::quadrature::GaussLegendre;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
/// Above this argument `J₀` uses the Hankel expansion.
const HANKEL_SWITCH: f64 = 25.0;
/// Below this argument `P` uses its power series.
const P_SERIES_SWITCH: f64 = 4.0;

/// Bessel function of the first kind, order zero.
pub fn j0(x: f64) -> f64 {
    let x = x.abs();
    if x < 1e-8 {
        return 1.0 - 0.25 * x * x;
    }
    if x > HANKEL_SWITCH {
        return j0_hankel(x);
    }
    j0_miller(x)
}

/// Backward recurrence normalised by `J₀ + 2ΣJ₂ₖ = 1`.
fn j0_miller(x: f64) -> f64 {
    let start = 2 * ((x as usize + 30) / 2) + 20;
    let mut next = 0.0; // J_{k+1}
    let mut cur = 1e-300; // J_k
    let mut norm = 0.0;
    let mut j0 = 0.0;
    for k in (1..=start).rev() {
        let prev = 2.0 * k as f64 / x * cur - next;
        next = cur;
        cur = prev;
        if (k - 1) % 2 == 0 && k - 1 > 0 {
            norm += 2.0 * cur;
        }
        if k - 1 == 0 {
            j0 = cur;
        }
        if cur.abs() > 1e250 {
            next *= 1e-250;
            cur *= 1e-250;
            norm *= 1e-250;
        }
    }
    j0 / (j0 + norm)
}

/// Hankel asymptotic expansion, accurate to roundoff for `x > 25`.
fn j0_hankel(x: f64) -> f64 {
    let mu = 0.0f64;
    let z8 = 8.0 * x;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    // term_k = Π_{j=1..k} (μ − (2j−1)²) / (j·8x)
    for k in 1..30 {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (k as f64 * z8);
        let contrib = term;
        if k % 2 == 1 {
            // odd k feed Q with sign (−1)^{(k−1)/2}
            let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
            q += sign * contrib;
        } else {
            let sign = if (k / 2) % 2 == 1 { -1.0 } else { 1.0 };
            p += sign * contrib;
        }
        if contrib.abs() < 1e-17 {
            break;
        }
    }
    let chi = x - 0.25 * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// `P(x)` for `0 < x ≤ 4` by its convergent series.
fn p_series(x: f64) -> f64 {
    let h2 = 0.25 * x * x;
    let mut term = 1.0; // (x/2)^{2k}/(k!)²
    let mut sum = 0.0;
    for k in 1..60 {
        let kf = k as f64;
        term *= h2 / (kf * kf);
        let c = term / (2.0 * kf);
        sum += if k % 2 == 1 { c } else { -c };
        if c < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    -EULER_GAMMA - (0.5 * x).ln() + sum
}

/// Tabulated `P` on `[4, x_max]`: cumulative integrals at panel ends spaced by `π`.
#[derive(Debug, Clone)]
pub struct BesselIntegralTable {
    p4: f64,
    cumulative: Vec<f64>,
    x_max: f64,
}

impl BesselIntegralTable {
    pub fn panels_for(x_max: f64) -> usize {
        ((x_max.max(P_SERIES_SWITCH) - P_SERIES_SWITCH) / PI).ceil() as usize + 1
    }

    pub fn new(x_max: f64) -> Self {
        let rule = GaussLegendre::g16();
        let panels = Self::panels_for(x_max);
        let mut cumulative = Vec::with_capacity(panels + 1);
        let mut acc = 0.0;
        cumulative.push(0.0);
        for k in 0..panels {
            let a = P_SERIES_SWITCH + k as f64 * PI;
            acc += rule.integrate(a, a + PI, |t| j0(t) / t);
            cumulative.push(acc);
        }
        BesselIntegralTable { p4: p_series(P_SERIES_SWITCH), cumulative, x_max }
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    /// `P(x)`; requires `0 < x ≤ x_max`.
    pub fn p(&self, x: f64) -> f64 {
        debug_assert!(x > 0.0 && x <= self.x_max * (1.0 + 1e-12));
        if x <= P_SERIES_SWITCH {
            return p_series(x);
        }
        let k = (((x - P_SERIES_SWITCH) / PI) as usize).min(self.cumulative.len() - 2);
        let a = P_SERIES_SWITCH + k as f64 * PI;
        let partial = GaussLegendre::g16().integrate(a, x, |t| j0(t) / t);
        self.p4 - self.cumulative[k] - partial
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // reference values from 30-digit mpmath evaluation
    const J0_REF: [(f64, f64); 7] = [
        (0.5, 0.938_469_807_240_813_0),
        (1.0, 0.765_197_686_557_966_6),
        (2.404_825_557_695_773, 0.0),
        (10.0, -0.245_935_764_451_348_3),
        (24.9, 0.083_245_968_353_015_68),
        (25.1, 0.108_275_671_499_949_29),
        (100.0, 0.019_985_850_304_223_1),
    ];

    #[test]
    fn j0_reference_values() {
        for &(x, v) in &J0_REF {
            assert!((j0(x) - v).abs() < 1e-13, "J0({x}) = {} vs {v}", j0(x));
        }
        assert_eq!(j0(0.0), 1.0);
    }

    #[test]
    fn branches_agree_at_switch() {
        for &x in &[24.0, 25.0, 26.0, 30.0] {
            assert!((j0_miller(x) - j0_hankel(x)).abs() < 1e-14, "x = {x}");
        }
    }

    #[test]
    fn p_has_log_singularity_and_decays() {
        let table = BesselIntegralTable::new(200.0);
        // P(x) + ln x → ln 2 − γ as x → 0
        let x = 1e-6;
        assert!((table.p(x) + x.ln() - (2f64.ln() - EULER_GAMMA)).abs() < 1e-10);
        // derivative matches −J₀(x)/x
        for &x in &[1.0, 3.9, 4.1, 50.0] {
            let h = 1e-5;
            let d = (table.p(x + h) - table.p(x - h)) / (2.0 * h);
            assert!((d + j0(x) / x).abs() < 1e-8, "x = {x}");
        }
        // the tail is small and oscillatory: |P(x)| ≲ √(2/π) x^{-3/2}
        let x: f64 = 150.0;
        assert!(table.p(x).abs() < 1.2 * (2.0 / PI).sqrt() * x.powf(-1.5));
    }

    #[test]
    fn p_reference_values() {
        // 25-digit mpmath quadrature of ∫ₓ^∞ J₀(t)/t dt
        let table = BesselIntegralTable::new(120.0);
        for &(x, v) in &[
            (1.0, 0.237_096_762_653_481_16),
            (10.0, -0.008_787_157_242_297_243),
            (100.0, 0.000_775_139_410_659_968_3),
        ] {
            assert!((table.p(x) - v).abs() < 1e-13, "P({x}) = {} vs {v}", table.p(x));
        }
    }

    #[test]
    fn series_and_table_agree_across_switch() {
        let table = BesselIntegralTable::new(50.0);
        let inside = p_series(4.0);
        assert!((table.p(4.0) - inside).abs() < 1e-15);
        let just = table.p(4.0 + 1e-9);
        assert!((just - inside).abs() < 1e-9);
    }
}
