//! Cached 2-D FFT plans over row-major `n × n` complex arrays.
//!
//! Power-of-two sizes use an in-crate radix-2 transform with unit-modulus twiddles: the
//! library plans drift the l² norm by about 3e-16 per round trip, always upwards, which
//! accumulates linearly over 10⁴ split steps. Other even sizes fall back to `rustfft`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Reusable transpose buffer and plan scratch for repeated transforms of one size.
pub(crate) struct FftWork {
    buffer: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl FftWork {
    fn new(n: usize, scratch: usize) -> Self {
        FftWork { buffer: vec![Complex64::default(); n * n], scratch: vec![Complex64::default(); scratch] }
    }
}

/// Iterative decimation-in-time radix-2 transform of one length.
struct Radix2 {
    n: usize,
    /// Bit-reversal partner of each index.
    swaps: Vec<(usize, usize)>,
    /// Stage twiddles back to back: stage with span `m` occupies `[m/2 - 1, m - 1)`.
    twiddles: Vec<Complex64>,
}

impl Radix2 {
    fn new(n: usize, sign: f64) -> Self {
        debug_assert!(n.is_power_of_two() && n >= 2);
        let bits = n.trailing_zeros();
        let swaps = (0..n)
            .filter_map(|i| {
                let j = i.reverse_bits() >> (usize::BITS - bits);
                (j > i).then_some((i, j))
            })
            .collect();
        let mut twiddles = Vec::with_capacity(n);
        let mut m = 2;
        while m <= n {
            for k in 0..m / 2 {
                let (s, c) = (sign * 2.0 * std::f64::consts::PI * k as f64 / m as f64).sin_cos();
                twiddles.push(unit(Complex64::new(c, s)));
            }
            m *= 2;
        }
        Radix2 { n, swaps, twiddles }
    }

    fn process(&self, data: &mut [Complex64]) {
        for row in data.chunks_exact_mut(self.n) {
            for &(i, j) in &self.swaps {
                row.swap(i, j);
            }
            for pair in row.chunks_exact_mut(2) {
                let a = pair[0];
                pair[0] += pair[1];
                pair[1] = a - pair[1];
            }
            let mut half = 2;
            while half < self.n {
                let tw = &self.twiddles[half - 1..2 * half - 1];
                for block in row.chunks_exact_mut(2 * half) {
                    let (lo, hi) = block.split_at_mut(half);
                    for ((a, b), w) in lo.iter_mut().zip(hi.iter_mut()).zip(tw) {
                        let t = *b * w;
                        *b = *a - t;
                        *a += t;
                    }
                }
                half *= 2;
            }
        }
    }
}

/// One Newton step towards `|w| = 1`; leaves `||w|² − 1|` at rounding level.
fn unit(w: Complex64) -> Complex64 {
    let e = w.re.mul_add(w.re, -1.0) + w.im * w.im;
    w * (1.0 - 0.5 * e)
}

enum Plan {
    Radix2(Radix2),
    Library(Arc<dyn Fft<f64>>),
}

impl Plan {
    fn new(n: usize, inverse: bool, planner: &mut FftPlanner<f64>) -> Self {
        if n.is_power_of_two() {
            Plan::Radix2(Radix2::new(n, if inverse { 1.0 } else { -1.0 }))
        } else if inverse {
            Plan::Library(planner.plan_fft_inverse(n))
        } else {
            Plan::Library(planner.plan_fft_forward(n))
        }
    }

    fn scratch_len(&self) -> usize {
        match self {
            Plan::Radix2(_) => 0,
            Plan::Library(p) => p.get_inplace_scratch_len(),
        }
    }

    /// Transform every length-`n` row of `data`.
    fn process(&self, data: &mut [Complex64], scratch: &mut [Complex64]) {
        match self {
            Plan::Radix2(p) => p.process(data),
            Plan::Library(p) => p.process_with_scratch(data, scratch),
        }
    }
}

pub(crate) struct Fft2 {
    n: usize,
    forward: Plan,
    inverse: Plan,
}

fn cache() -> &'static Mutex<HashMap<usize, Arc<Fft2>>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Fft2>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

impl Fft2 {
    pub(crate) fn get(n: usize) -> Arc<Fft2> {
        let mut map = cache().lock().expect("fft plan cache poisoned");
        map.entry(n)
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                Arc::new(Fft2 {
                    n,
                    forward: Plan::new(n, false, &mut planner),
                    inverse: Plan::new(n, true, &mut planner),
                })
            })
            .clone()
    }

    fn run(&self, plan: &Plan, data: &mut [Complex64]) {
        let mut work = FftWork::new(self.n, plan.scratch_len());
        self.run_with(plan, data, &mut work);
    }

    fn run_with(&self, plan: &Plan, data: &mut [Complex64], work: &mut FftWork) {
        let n = self.n;
        assert_eq!(data.len(), n * n);
        let FftWork { buffer, scratch } = work;
        plan.process(data, scratch);
        transpose::transpose(data, buffer, n, n);
        plan.process(buffer, scratch);
        transpose::transpose(buffer, data, n, n);
    }

    pub(crate) fn work(&self) -> FftWork {
        let len = self.forward.scratch_len().max(self.inverse.scratch_len());
        FftWork::new(self.n, len)
    }

    pub(crate) fn forward_with(&self, data: &mut [Complex64], work: &mut FftWork) {
        self.run_with(&self.forward, data, work);
    }

    /// Inverse transform without the `1/n²` factor.
    pub(crate) fn inverse_unscaled_with(&self, data: &mut [Complex64], work: &mut FftWork) {
        self.run_with(&self.inverse, data, work);
    }

    /// Unnormalised forward transform, in place.
    pub(crate) fn forward(&self, data: &mut [Complex64]) {
        self.run(&self.forward, data);
    }

    /// Inverse transform including the `1/n²` normalisation.
    pub(crate) fn inverse(&self, data: &mut [Complex64]) {
        self.run(&self.inverse, data);
        let scale = 1.0 / (self.n * self.n) as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }
}
