//! Exact discrete completions for slowly decaying spectra.
//!
//! The inverse DFT only sums |k| <= N/2; for a spectrum with power-law dual
//! tail the truncated remainder sum_{|k| > N/2} A |xi_k|^{-p} e^{i xi_k x_j}
//! is evaluated in closed form through Hurwitz zeta values and one FFT, using
//! e^{i xi_k x_j} = (-1)^k e^{2 pi i jk/N}. Periodization images of the x-side
//! tail model are likewise summed exactly with zeta(q, 1 +- x/2L).

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rustfft::num_complex::Complex64;

use crate::grid::Grid;
use crate::series::DualEnv;
use crate::special::{digamma, zeta_h};
use crate::transforms::ifft_raw;

static PTAIL_CACHE: OnceLock<Mutex<HashMap<(usize, i64), Arc<Vec<Complex64>>>>> = OnceLock::new();

/// P(s)_j = sum_{k >= N/2+1} k^{-s} e^{i xi_k x_j} for all j.
///
/// Rewriting k = r + N*m splits the sum into N Hurwitz zetas
/// S_r = N^{-s} zeta(s, a_r); the index shift j -> j + N/2 absorbs the
/// (-1)^k sign. s = 1 takes the digamma finite part (the divergent piece
/// cancels against the conjugate half for every physical assembly used here).
pub fn ptail(n: usize, s: f64) -> Arc<Vec<Complex64>> {
    let cache = PTAIL_CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (n, (s * 1e12).round() as i64);
    if let Some(hit) = cache.lock().unwrap().get(&key) {
        return Arc::clone(hit);
    }
    let k_cut = n / 2 + 1;
    let nf = n as f64;
    let digamma_path = (s - 1.0).abs() < 1e-13;
    let scale = nf.powf(-s);
    let svals: Vec<Complex64> = (0..n)
        .map(|r| {
            let a = if r >= k_cut { r as f64 / nf } else { 1.0 + r as f64 / nf };
            let v = if digamma_path { -digamma(a) / nf } else { scale * zeta_h(s, a) };
            Complex64::new(v, 0.0)
        })
        .collect();
    let t = ifft_raw(&svals);
    let half = n / 2;
    let out: Vec<Complex64> = (0..n).map(|j| t[(j + half) % n]).collect();
    let out = Arc::new(out);
    cache.lock().unwrap().insert(key, Arc::clone(&out));
    out
}

/// missing (1/2L) sum_{|k| > N/2} fhat_model(xi_k) e^{i xi_k x_j} for an even
/// power-law dual model, including the Nyquist term
pub fn completion_density(g: &Grid, dual: Option<&DualEnv>) -> Vec<f64> {
    let mut out = vec![0.0; g.n];
    let Some(dual) = dual else { return out };
    let half = g.n / 2;
    for &(a, p) in &dual.terms {
        let m_nyq = a * g.xi_max.powf(-p);
        let pt = ptail(g.n, p);
        let c = 2.0 * a * g.dxi.powf(-p);
        for j in 0..g.n {
            let ny = if (j as i64 - half as i64) % 2 == 0 { 1.0 } else { -1.0 };
            out[j] += (m_nyq * ny + c * pt[j].re) / (2.0 * g.l);
        }
    }
    out
}

/// missing part of the inverse transform of i sign(xi) |xi|^nu fhat_model;
/// the Nyquist pair contributes no real part
pub fn completion_odd(g: &Grid, dual: Option<&DualEnv>, nu: f64) -> Vec<f64> {
    let mut out = vec![0.0; g.n];
    let Some(dual) = dual else { return out };
    for &(a, p) in &dual.terms {
        let s = p - nu;
        let pt = ptail(g.n, s);
        let c = -(a / g.l) * g.dxi.powf(-s);
        for j in 0..g.n {
            out[j] += c * pt[j].im;
        }
    }
    out
}

/// sum_{m >= 1} model(2Lm + x) + model(2Lm - x) for model = sum coef |y|^{-q}
pub fn images_even(g: &Grid, terms: &[(f64, f64)]) -> Vec<f64> {
    let twol = 2.0 * g.l;
    let mut out = vec![0.0; g.n];
    for &(coef, q) in terms {
        if coef == 0.0 {
            continue;
        }
        let c = coef * twol.powf(-q);
        for (j, &x) in g.xs().iter().enumerate() {
            let u = x / twol;
            out[j] += c * (zeta_h(q, 1.0 + u) + zeta_h(q, 1.0 - u));
        }
    }
    out
}

/// the odd-model variant: model = sum coef sign(y) |y|^{-q}
pub fn images_odd(g: &Grid, terms: &[(f64, f64)]) -> Vec<f64> {
    let twol = 2.0 * g.l;
    let mut out = vec![0.0; g.n];
    for &(coef, q) in terms {
        if coef == 0.0 {
            continue;
        }
        let c = coef * twol.powf(-q);
        for (j, &x) in g.xs().iter().enumerate() {
            let u = x / twol;
            out[j] += c * (zeta_h(q, 1.0 + u) - zeta_h(q, 1.0 - u));
        }
    }
    out
}
