use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Result, XnlsError};

/// Square periodic grid of `n × n` cells on `[-l/2, l/2)²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n: usize,
    pub l: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { n: 512, l: 40.0 }
    }
}

impl GridSpec {
    pub fn new(n: usize, l: f64) -> Result<Self> {
        let grid = GridSpec { n, l };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 16 || self.n % 2 != 0 {
            return Err(XnlsError::InvalidGrid(format!(
                "n = {} must be even and at least 16",
                self.n
            )));
        }
        if !(self.l.is_finite() && self.l > 0.0) {
            return Err(XnlsError::InvalidGrid(format!("l = {} must be positive", self.l)));
        }
        if self.h() >= 1.0 {
            return Err(XnlsError::InvalidGrid(format!(
                "cell size h = {} must be below 1",
                self.h()
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn h(&self) -> f64 {
        self.l / self.n as f64
    }

    #[inline]
    pub fn cell_area(&self) -> f64 {
        self.h() * self.h()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Physical coordinate of index `j` along either axis.
    #[inline]
    pub fn coord(&self, j: usize) -> f64 {
        -0.5 * self.l + j as f64 * self.h()
    }

    /// Angular wavenumber of FFT bin `k`, taken in `[-n/2, n/2)`.
    #[inline]
    pub fn wavenumber(&self, k: usize) -> f64 {
        let n = self.n as isize;
        let k = k as isize;
        let signed = if k < n / 2 { k } else { k - n };
        2.0 * PI * signed as f64 / self.l
    }

    /// Wavenumber used for odd-order derivatives: the Nyquist bin is dropped.
    #[inline]
    pub fn derivative_wavenumber(&self, k: usize) -> f64 {
        if k == self.n / 2 {
            0.0
        } else {
            self.wavenumber(k)
        }
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.wavenumber(k)).collect()
    }

    #[inline]
    pub fn position(&self, idx: usize) -> (f64, f64) {
        (self.coord(idx / self.n), self.coord(idx % self.n))
    }

    #[inline]
    pub fn radius(&self, idx: usize) -> f64 {
        let (x, y) = self.position(idx);
        x.hypot(y)
    }

    /// The same domain with twice as many cells per side.
    pub fn refined(&self) -> GridSpec {
        GridSpec { n: 2 * self.n, l: self.l }
    }
}
