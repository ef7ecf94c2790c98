//! The virial weight `Φ`: identity on `[0, 1]`, a degree-9 Hermite join on `[1, 2]`,
//! zero beyond. The join matches value 1, slope 1 and vanishing derivatives 2–4 at
//! `ρ = 1`, and vanishes with derivatives 1–4 at `ρ = 2`, so `Φ ∈ C⁴`.

use serde::{Deserialize, Serialize};

/// Join polynomial in `τ = ρ − 1`, coefficients of `τ⁰ … τ⁹`.
const JOIN: [f64; 10] = [1.0, 1.0, 0.0, 0.0, 0.0, -196.0, 644.0, -820.0, 475.0, -105.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cutoff {
    #[default]
    Hermite9,
}

/// `(Φ, Φ′, Φ″, Φ‴, Φ⁗)` at `ρ ≥ 0`.
pub fn phi_derivatives(rho: f64) -> [f64; 5] {
    if rho <= 1.0 {
        return [rho, 1.0, 0.0, 0.0, 0.0];
    }
    if rho >= 2.0 {
        return [0.0; 5];
    }
    let tau = rho - 1.0;
    let mut out = [0.0; 5];
    for (d, slot) in out.iter_mut().enumerate() {
        // Horner on the d-th derivative
        let mut acc = 0.0;
        for k in (d..JOIN.len()).rev() {
            let falling: f64 = (0..d).map(|j| (k - j) as f64).product();
            acc = acc * tau + JOIN[k] * falling;
        }
        *slot = acc;
    }
    out
}

impl Cutoff {
    pub fn derivatives(self, rho: f64) -> [f64; 5] {
        match self {
            Cutoff::Hermite9 => phi_derivatives(rho),
        }
    }
}

/// Pointwise weights of `Φ_R(x) = R²Φ(|x|²/R²)` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialWeights {
    pub phi_r: f64,
    pub d1: f64,
    pub d2: f64,
    /// `ΔΦ_R = 4Φ′ + 4ρΦ″`
    pub lap: f64,
    /// `Δ²Φ_R = (4/R²)(8Φ″ + 16ρΦ‴ + 4ρ²Φ⁗)`
    pub bilap: f64,
}

pub fn weights(cutoff: Cutoff, r2: f64, big_r: f64) -> RadialWeights {
    let rho = r2 / (big_r * big_r);
    let [p0, p1, p2, p3, p4] = cutoff.derivatives(rho);
    RadialWeights {
        phi_r: big_r * big_r * p0,
        d1: p1,
        d2: p2,
        lap: 4.0 * p1 + 4.0 * rho * p2,
        bilap: 4.0 / (big_r * big_r) * (8.0 * p2 + 16.0 * rho * p3 + 4.0 * rho * rho * p4),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn join_conditions() {
        let at1 = phi_derivatives(1.0 + 1e-15);
        let exp1 = [1.0, 1.0, 0.0, 0.0, 0.0];
        for d in 0..5 {
            assert!((at1[d] - exp1[d]).abs() < 1e-10, "derivative {d} at 1: {}", at1[d]);
        }
        let at2 = phi_derivatives(2.0 - 1e-15);
        for (d, v) in at2.iter().enumerate() {
            assert!(v.abs() < 1e-9, "derivative {d} at 2: {v}");
        }
    }

    #[test]
    fn bounded_and_nonnegative() {
        let mut max: f64 = 0.0;
        for i in 0..=2000 {
            let v = phi_derivatives(2.5 * i as f64 / 2000.0)[0];
            assert!(v >= -1e-15);
            max = max.max(v);
        }
        // peak of the join, exceeds 1 because Φ′(1) = 1
        assert!((max - 1.1748).abs() < 1e-3, "max {max}");
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-5;
        for &rho in &[1.1, 1.37, 1.5, 1.9] {
            let d = phi_derivatives(rho);
            let dp = phi_derivatives(rho + h);
            let dm = phi_derivatives(rho - h);
            for k in 0..4 {
                let fd = (dp[k] - dm[k]) / (2.0 * h);
                assert!((fd - d[k + 1]).abs() < 1e-4 * d[k + 1].abs().max(1.0), "ρ = {rho}, k = {k}");
            }
        }
    }

    #[test]
    fn inner_weights_are_those_of_x_squared() {
        let w = weights(Cutoff::Hermite9, 0.5, 2.0);
        assert_eq!(w.phi_r, 0.5);
        assert_eq!(w.lap, 4.0);
        assert_eq!(w.bilap, 0.0);
    }
}
