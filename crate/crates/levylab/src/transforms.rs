//! Discrete transforms consistent with the continuous convention
//! fhat(xi) = int e^{-i xi x} f(x) dx on the offset grid x_j = -L + j dx.
//!
//! The grid offset is compensated with an explicit phase factor e^{+i xi L}
//! (forward) / e^{-i xi L} (inverse) so sampled spectra compare directly to
//! analytic formulas, with no index shuffling.

use std::cell::RefCell;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{LabError, Result};
use crate::grid::Grid;

/// real nonnegative density samples on a grid
#[derive(Debug, Clone)]
pub struct DensitySample {
    pub grid: Arc<Grid>,
    pub values: Vec<f64>,
    /// total negative mass removed by clamping
    pub clamped_mass: f64,
}

/// complex characteristic-function samples on the dual grid (DFT order)
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub grid: Arc<Grid>,
    pub values: Vec<Complex64>,
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub(crate) fn fft_in_place(buf: &mut [Complex64], inverse: bool) {
    PLANNER.with(|p| {
        let mut planner = p.borrow_mut();
        let plan = if inverse {
            planner.plan_fft_inverse(buf.len())
        } else {
            planner.plan_fft_forward(buf.len())
        };
        plan.process(buf);
    });
}

/// unnormalized inverse DFT of `vals` (sum with e^{+2 pi i jk/N})
pub(crate) fn ifft_raw(vals: &[Complex64]) -> Vec<Complex64> {
    let mut buf = vals.to_vec();
    fft_in_place(&mut buf, true);
    buf
}

pub fn forward_transform(f: &DensitySample) -> Spectrum {
    let g = &f.grid;
    let mut buf: Vec<Complex64> = f.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_in_place(&mut buf, false);
    let values = g
        .xis()
        .iter()
        .zip(buf)
        .map(|(&xi, v)| v * Complex64::from_polar(g.dx, xi * g.l))
        .collect();
    Spectrum { grid: Arc::clone(g), values }
}

/// inverse of a closed-form or sampled spectrum; checks the imaginary residue
/// and clamps negative ringing, recording the removed mass
pub fn inverse_transform(s: &Spectrum) -> Result<DensitySample> {
    let g = &s.grid;
    let complex = inverse_complex(g, &s.values);
    let residue = complex.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    if residue > 1e-6 {
        return Err(LabError::SymmetryViolation { residue });
    }
    let mut clamped = 0.0;
    let values = complex
        .iter()
        .map(|v| {
            if v.re < 0.0 {
                clamped -= v.re;
                0.0
            } else {
                v.re
            }
        })
        .collect();
    Ok(DensitySample { grid: Arc::clone(g), values, clamped_mass: clamped * g.dx })
}

/// (1/2L) sum_k e^{-i xi_k L} fh_k e^{+2 pi i jk/N} — the inverse with phase
pub(crate) fn inverse_complex(g: &Grid, fh: &[Complex64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = g
        .xis()
        .iter()
        .zip(fh)
        .map(|(&xi, &v)| v * Complex64::from_polar(1.0, -xi * g.l))
        .collect();
    fft_in_place(&mut buf, true);
    let scale = 1.0 / (2.0 * g.l);
    buf.iter_mut().for_each(|v| *v *= scale);
    buf
}

/// pointwise spectral product = convolution of the physical densities
pub fn convolve(a: &Spectrum, b: &Spectrum) -> Result<Spectrum> {
    if !a.grid.same_as(&b.grid) {
        return Err(LabError::GridMismatch);
    }
    let values = a.values.iter().zip(&b.values).map(|(x, y)| x * y).collect();
    Ok(Spectrum { grid: Arc::clone(&a.grid), values })
}

// 8-point equispaced barycentric weights (-1)^j C(7, j)
const BARY_W: [f64; 8] = [1.0, -7.0, 21.0, -35.0, 35.0, -21.0, 7.0, -1.0];

/// spectrum of the density of a*X: values at a*xi by 8-point barycentric
/// interpolation on the dual grid. Frequencies that land beyond the grid are
/// zero-extended only when the spectrum has already decayed below 1e-14 at
/// the boundary; otherwise the request is a range error.
pub fn scale_spectrum(s: &Spectrum, a: f64) -> Result<Spectrum> {
    if !(a > 0.0) {
        return Err(LabError::Config(format!("scale factor must be positive, got {a}")));
    }
    let g = &s.grid;
    let n = g.n;
    let half = n / 2;
    // ordered view: index i corresponds to xi = (i - n/2) dxi
    let ord = |i: usize| s.values[(i + half) % n];
    let edge = (0..8)
        .map(|i| ord(i).norm().max(ord(n - 1 - i).norm()))
        .fold(0.0, f64::max);
    let mut values = Vec::with_capacity(n);
    for &xi in g.xis() {
        let y = a * xi;
        let t = y / g.dxi + half as f64;
        if !(0.0..=(n - 1) as f64).contains(&t) {
            if edge < 1e-14 {
                values.push(Complex64::new(0.0, 0.0));
                continue;
            }
            return Err(LabError::RangeError { requested: y.abs(), max: g.xi_max });
        }
        let near = t.round();
        if (t - near).abs() < 1e-9 {
            values.push(ord(near as usize));
            continue;
        }
        let i0 = ((t.floor() as isize) - 3).clamp(0, n as isize - 8) as usize;
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = 0.0;
        for (j, &w) in BARY_W.iter().enumerate() {
            let c = w / (t - (i0 + j) as f64);
            num += ord(i0 + j) * c;
            den += c;
        }
        values.push(num / den);
    }
    Ok(Spectrum { grid: Arc::clone(g), values })
}

impl Spectrum {
    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn(f64) -> Complex64) -> Spectrum {
        let values = grid.xis().iter().map(|&xi| f(xi)).collect();
        Spectrum { grid: Arc::clone(grid), values }
    }

    /// max |value(-xi) - conj(value(xi))|
    pub fn hermitian_residue(&self) -> f64 {
        let n = self.grid.n;
        (1..n)
            .map(|k| (self.values[n - k] - self.values[k].conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn value_at_zero(&self) -> Complex64 {
        self.values[0]
    }
}

impl DensitySample {
    pub fn from_values(grid: &Arc<Grid>, raw: &[f64]) -> DensitySample {
        let mut clamped = 0.0;
        let values = raw
            .iter()
            .map(|&v| {
                if v < 0.0 {
                    clamped -= v;
                    0.0
                } else {
                    v
                }
            })
            .collect();
        DensitySample { grid: Arc::clone(grid), values, clamped_mass: clamped * grid.dx }
    }

    pub fn trapezoid_mass(&self) -> f64 {
        self.grid.quad(&self.values)
    }
}
