//! Small quadrature toolbox: Gauss–Legendre panels and trapezoid sums.

use std::sync::OnceLock;

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes by Newton iteration on the Legendre recurrence.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1);
        let mut nodes = vec![0.0; order];
        let mut weights = vec![0.0; order];
        let m = order.div_ceil(2);
        for i in 0..m {
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (order as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(order, z);
                dp = d;
                let dz = p / d;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(order, z);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            nodes[i] = -z;
            nodes[order - 1 - i] = z;
            weights[i] = w;
            weights[order - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// Shared 16-point rule.
    pub fn g16() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(16))
    }

    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }

    /// Composite rule with `panels` equal panels on `[a, b]`.
    pub fn composite(&self, a: f64, b: f64, panels: usize, mut f: impl FnMut(f64) -> f64) -> f64 {
        let width = (b - a) / panels as f64;
        (0..panels)
            .map(|i| {
                let lo = a + i as f64 * width;
                self.integrate(lo, lo + width, &mut f)
            })
            .sum()
    }
}

fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Trapezoid rule over (possibly non-uniform) samples.
pub fn trapezoid(ts: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(ts.len(), ys.len());
    ts.windows(2)
        .zip(ys.windows(2))
        .map(|(t, y)| 0.5 * (t[1] - t[0]) * (y[0] + y[1]))
        .sum()
}
