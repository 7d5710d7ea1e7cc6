//! Uniform symmetric spatial grid with its dual frequency grid.
//!
//! Nodes are x_j = -L + j*dx with dx = 2L/N, and the dual nodes xi_k = k*dxi
//! in standard DFT ordering with dxi = pi/L, so dx * dxi * N = 2*pi exactly.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{LabError, Result};

#[derive(Debug)]
pub struct Grid {
    pub n: usize,
    /// half extent L; the window is [-L, L)
    pub l: f64,
    pub dx: f64,
    pub dxi: f64,
    /// Nyquist frequency pi/dx
    pub xi_max: f64,
    xs: Vec<f64>,
    xis: Vec<f64>,
}

impl Grid {
    pub fn new(n: usize, l: f64) -> Result<Arc<Grid>> {
        if !n.is_power_of_two() || n < 1024 {
            return Err(LabError::Config(format!(
                "grid size must be a power of two >= 1024, got {n}"
            )));
        }
        if !l.is_finite() || l <= 0.0 {
            return Err(LabError::Config(format!("half extent must be positive, got {l}")));
        }
        let dx = 2.0 * l / n as f64;
        let dxi = PI / l;
        let xs = (0..n).map(|j| -l + dx * j as f64).collect();
        let xis = (0..n)
            .map(|k| {
                let kk = if k < n / 2 { k as i64 } else { k as i64 - n as i64 };
                kk as f64 * dxi
            })
            .collect();
        Ok(Arc::new(Grid { n, l, dx, dxi, xi_max: PI / dx, xs, xis }))
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    /// dual nodes in DFT order: 0, dxi, ..., -dxi
    pub fn xis(&self) -> &[f64] {
        &self.xis
    }

    /// index of the x = 0 node
    pub fn zero_index(&self) -> usize {
        self.n / 2
    }

    pub fn index_near(&self, x: f64) -> usize {
        let t = ((x + self.l) / self.dx).round();
        (t.max(0.0) as usize).min(self.n - 1)
    }

    /// trapezoid rule on the periodic window (equal weights)
    pub fn quad(&self, v: &[f64]) -> f64 {
        debug_assert_eq!(v.len(), self.n);
        self.dx * v.iter().sum::<f64>()
    }

    /// quad with the NaN/Inf guard demanded of the public quadrature entry point
    pub fn quadrature(&self, v: &[f64]) -> Result<f64> {
        if v.len() != self.n {
            return Err(LabError::GridMismatch);
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(LabError::Numeric("non-finite value in quadrature input".into()));
        }
        Ok(self.quad(v))
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        self.n == other.n && self.l == other.l
    }
}

/// composite Simpson; falls back to a trapezoid step on the last interval
/// when the point count is even
pub fn simpson(vals: &[f64], dx: f64) -> f64 {
    let n = vals.len();
    if n < 2 {
        return 0.0;
    }
    if n == 2 {
        return dx * (vals[0] + vals[1]) / 2.0;
    }
    let m = if n % 2 == 1 { n } else { n - 1 };
    let v = &vals[..m];
    let mut s4 = 0.0;
    let mut i = 1;
    while i < m - 1 {
        s4 += v[i];
        i += 2;
    }
    let mut s2 = 0.0;
    let mut i = 2;
    while i < m - 2 {
        s2 += v[i];
        i += 2;
    }
    let mut s = dx / 3.0 * (v[0] + v[m - 1] + 4.0 * s4 + 2.0 * s2);
    if n % 2 == 0 {
        s += dx * (vals[n - 2] + vals[n - 1]) / 2.0;
    }
    s
}
