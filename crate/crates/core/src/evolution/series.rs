//! Time series of conserved quantities and diagnostics, with their CSV form.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::virial::{local_g, VirialValues};
use crate::error::{Result, XnlsError};
use crate::field::{Field2D, Spectrum};
use crate::nonlinearity::potential_energy;
use crate::orlicz::{luxemburg_norm, OrliczSpec};
use crate::quadrature::trapezoid;

pub const SERIES_COLUMNS: [&str; 13] = [
    "t",
    "mass",
    "hamiltonian",
    "grad_l2",
    "l4",
    "l8",
    "linf",
    "orlicz_tilde",
    "v_r",
    "dv_r",
    "d2v_r",
    "local_g",
    "boundary_mass",
];

pub const VIRIAL_COLUMNS: [&str; 5] = ["t", "r", "v", "dv", "d2v"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub t: f64,
    pub mass: f64,
    /// `∫|∇u|² + ∫F(u)`; only the kinetic part for free runs.
    pub hamiltonian: f64,
    pub grad_l2: f64,
    pub l4: f64,
    pub l8: f64,
    pub linf: f64,
    pub orlicz_tilde: f64,
    pub v_r: f64,
    pub dv_r: f64,
    pub d2v_r: f64,
    pub local_g: f64,
    pub boundary_mass: f64,
}

impl SeriesRow {
    pub fn measure(
        t: f64,
        u: &Field2D,
        spectrum: &Spectrum,
        virial: VirialValues,
        boundary_mass: f64,
        nonlinear: bool,
    ) -> Result<Self> {
        let grad = spectrum.grad_energy();
        let potential = if nonlinear { potential_energy(u)? } else { 0.0 };
        Ok(SeriesRow {
            t,
            mass: u.mass(),
            hamiltonian: grad + potential,
            grad_l2: grad.sqrt(),
            l4: u.lp_norm(4.0)?,
            l8: u.lp_norm(8.0)?,
            linf: u.linf(),
            orlicz_tilde: luxemburg_norm(u, OrliczSpec::ltilde())?,
            v_r: virial.v,
            dv_r: virial.dv,
            d2v_r: virial.d2v,
            local_g: local_g(u)?,
            boundary_mass,
        })
    }

    pub fn columns(&self) -> [f64; 13] {
        [
            self.t,
            self.mass,
            self.hamiltonian,
            self.grad_l2,
            self.l4,
            self.l8,
            self.linf,
            self.orlicz_tilde,
            self.v_r,
            self.dv_r,
            self.d2v_r,
            self.local_g,
            self.boundary_mass,
        ]
    }

    fn from_columns(c: &[f64]) -> Self {
        SeriesRow {
            t: c[0],
            mass: c[1],
            hamiltonian: c[2],
            grad_l2: c[3],
            l4: c[4],
            l8: c[5],
            linf: c[6],
            orlicz_tilde: c[7],
            v_r: c[8],
            dv_r: c[9],
            d2v_r: c[10],
            local_g: c[11],
            boundary_mass: c[12],
        }
    }
}

/// Rows with strictly increasing `t`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsSeries {
    pub rows: Vec<SeriesRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VirialRecord {
    pub t: f64,
    pub r: f64,
    pub v: f64,
    pub dv: f64,
    pub d2v: f64,
}

fn parse_table(text: &str, header: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut lines = text.lines();
    let head = lines.next().ok_or_else(|| XnlsError::Format("empty table".into()))?;
    if head.split(',').map(str::trim).ne(header.iter().copied()) {
        return Err(XnlsError::Format(format!("unexpected header `{head}`")));
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, line)| {
            let cells = line
                .split(',')
                .map(|c| c.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| XnlsError::Format(format!("row {}: {e}", i + 1)))?;
            if cells.len() != header.len() {
                return Err(XnlsError::Format(format!("row {} has {} cells", i + 1, cells.len())));
            }
            Ok(cells)
        })
        .collect()
}

fn write_table<const N: usize>(header: &[&str], rows: impl Iterator<Item = [f64; N]>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            // shortest round-trip representation
            write!(out, "{v:?}").expect("string write");
        }
        out.push('\n');
    }
    out
}

impl DiagnosticsSeries {
    pub fn push(&mut self, row: SeriesRow) -> Result<()> {
        if let Some(last) = self.rows.last() {
            if !(row.t > last.t) {
                return Err(XnlsError::Format(format!("series time {} does not exceed {}", row.t, last.t)));
            }
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.t).collect()
    }

    /// `max_t |q(t) − q(0)| / |q(0)|`, zero when `q(0) = 0`.
    pub fn relative_drift(&self, q: impl Fn(&SeriesRow) -> f64) -> f64 {
        let Some(first) = self.rows.first() else { return 0.0 };
        let q0 = q(first);
        if q0 == 0.0 {
            return 0.0;
        }
        self.rows.iter().map(|r| (q(r) - q0).abs()).fold(0.0, f64::max) / q0.abs()
    }

    pub fn to_csv(&self) -> String {
        write_table(&SERIES_COLUMNS, self.rows.iter().map(SeriesRow::columns))
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut s = DiagnosticsSeries::default();
        for cells in parse_table(text, &SERIES_COLUMNS)? {
            s.push(SeriesRow::from_columns(&cells))?;
        }
        Ok(s)
    }
}

pub fn virial_to_csv(records: &[VirialRecord]) -> String {
    write_table(&VIRIAL_COLUMNS, records.iter().map(|r| [r.t, r.r, r.v, r.dv, r.d2v]))
}

pub fn virial_from_csv(text: &str) -> Result<Vec<VirialRecord>> {
    Ok(parse_table(text, &VIRIAL_COLUMNS)?
        .into_iter()
        .map(|c| VirialRecord { t: c[0], r: c[1], v: c[2], dv: c[3], d2v: c[4] })
        .collect())
}

/// Records of one radius, in time order.
pub fn virial_at_radius(records: &[VirialRecord], r: f64) -> Vec<VirialRecord> {
    records.iter().copied().filter(|rec| rec.r == r).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalGBudget {
    pub tau: f64,
    /// `(window start, ∫_t^{t+τ}∫_{|x|≤1}G)` per window.
    pub windows: Vec<(f64, f64)>,
    /// `max window integral / ⟨τ⟩`.
    pub max_ratio: f64,
}

fn interpolate(ts: &[f64], ys: &[f64], t: f64) -> f64 {
    let k = ts.partition_point(|&s| s < t);
    if k == 0 {
        return ys[0];
    }
    if k == ts.len() {
        return ys[k - 1];
    }
    let w = (t - ts[k - 1]) / (ts[k] - ts[k - 1]);
    ys[k - 1] + w * (ys[k] - ys[k - 1])
}

/// Trapezoid of the piecewise-linear interpolant of `(ts, ys)` over `[a, b]`.
fn window_integral(ts: &[f64], ys: &[f64], a: f64, b: f64) -> f64 {
    let mut xs = vec![a];
    let mut vs = vec![interpolate(ts, ys, a)];
    for (&t, &y) in ts.iter().zip(ys) {
        if t > a && t < b {
            xs.push(t);
            vs.push(y);
        }
    }
    xs.push(b);
    vs.push(interpolate(ts, ys, b));
    trapezoid(&xs, &vs)
}

/// Windows `[tᵢ, tᵢ + τ]` start at every sample with `tᵢ + τ ≤ T`.
pub fn local_g_budget(series: &DiagnosticsSeries, tau: f64) -> Result<LocalGBudget> {
    if !(tau > 0.0) {
        return Err(XnlsError::Domain(format!("window length τ = {tau} must be positive")));
    }
    let ts = series.times();
    let ys: Vec<f64> = series.rows.iter().map(|r| r.local_g).collect();
    let Some(&t_last) = ts.last() else {
        return Err(XnlsError::InsufficientSamples { have: 0, need: 2 });
    };
    let slack = 1e-9 * tau;
    let windows: Vec<(f64, f64)> = ts
        .iter()
        .filter(|&&t0| t0 + tau <= t_last + slack)
        .map(|&t0| (t0, window_integral(&ts, &ys, t0, (t0 + tau).min(t_last))))
        .collect();
    if windows.is_empty() {
        return Err(XnlsError::InsufficientSamples { have: ts.len(), need: 2 });
    }
    let bracket = (1.0 + tau * tau).sqrt();
    let max_ratio = windows.iter().map(|w| w.1).fold(0.0, f64::max) / bracket;
    Ok(LocalGBudget { tau, windows, max_ratio })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(t: f64, g: f64) -> SeriesRow {
        SeriesRow::from_columns(&[t, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0, g, 1e-9])
    }

    fn series(ts: &[f64], g: impl Fn(f64) -> f64) -> DiagnosticsSeries {
        let mut s = DiagnosticsSeries::default();
        for &t in ts {
            s.push(row(t, g(t))).unwrap();
        }
        s
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let s = series(&[0.0, 0.05, 0.1], |t| (t * 7.1).sin() / 3.0);
        let text = s.to_csv();
        assert!(text.starts_with("t,mass,hamiltonian,grad_l2,l4,l8,linf,orlicz_tilde,v_r,dv_r,d2v_r,local_g,boundary_mass\n"));
        assert_eq!(DiagnosticsSeries::from_csv(&text).unwrap(), s);
        assert!(DiagnosticsSeries::from_csv("t,mass\n0,1\n").is_err());
    }

    #[test]
    fn time_must_increase() {
        let mut s = series(&[0.0, 1.0], |_| 0.0);
        assert!(s.push(row(1.0, 0.0)).is_err());
    }

    #[test]
    fn budget_of_zero_and_constant() {
        let ts: Vec<f64> = (0..=40).map(|i| i as f64 * 0.05).collect();
        let b = local_g_budget(&series(&ts, |_| 0.0), 1.0).unwrap();
        assert_eq!(b.max_ratio, 0.0);
        assert_eq!(b.windows.len(), 21);
        let b = local_g_budget(&series(&ts, |_| 3.0), 1.0).unwrap();
        assert!((b.max_ratio - 3.0 / 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn budget_windows_are_exact_for_linear_data() {
        let ts: Vec<f64> = (0..=30).map(|i| i as f64 * 0.1).collect();
        let b = local_g_budget(&series(&ts, |t| 3.0 - t), 0.75).unwrap();
        // ∫_0^{0.75}(3 − t)dt = 2.25 − 0.28125
        assert!((b.windows[0].1 - 1.96875).abs() < 1e-12);
        assert!(local_g_budget(&series(&ts, |t| t), 5.0).is_err());
    }
}
