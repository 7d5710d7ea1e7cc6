//! Tail and origin power-series machinery.
//!
//! A symmetric density whose spectrum has the singular expansion
//! sum_k b_k |xi|^{k lam} near 0 (b_0 = 1) inherits the x-side tail model
//! f(x) ~ sum_k b_k M_k |x|^{-k lam - 1}; a spectrum with power-law dual tail
//! sum_j A_j |xi|^{-p_j} inherits even origin cusps c_j |x|^{p_j - 1} and the
//! Riesz derivative inherits odd origin terms, including a genuine jump when
//! p_j - nu = 1. Both expansions propagate through scaling, products
//! (convolution) and integer powers (i.i.d. sums), and feed the analytic tail
//! closures and the trapezoid endpoint (Navot) corrections.

use std::collections::BTreeMap;

use crate::special::{ft_even_c, ft_odd_c, gamma, zeta_neg};

/// three-term x-side tail envelope of a density with spectrum
/// 1 + b1|xi|^lam + b2|xi|^{2 lam} + b3|xi|^{3 lam} + ... near xi = 0
#[derive(Debug, Clone, Copy)]
pub struct TailEnv {
    pub lam: f64,
    pub b: [f64; 3],
}

fn m_coef(lam: f64, k: usize) -> f64 {
    let kl = k as f64 * lam;
    -gamma(kl + 1.0) * (k as f64 * std::f64::consts::PI * lam / 2.0).sin() / std::f64::consts::PI
}

impl TailEnv {
    pub fn levy(lam: f64) -> TailEnv {
        TailEnv { lam, b: [-1.0, 0.5, -1.0 / 6.0] }
    }

    pub fn linnik(lam: f64) -> TailEnv {
        TailEnv { lam, b: [-1.0, 1.0, -1.0] }
    }

    /// tail model of the density itself at |y| (even)
    pub fn f_model(&self, y: f64) -> f64 {
        let ay = y.abs();
        self.f_terms()
            .iter()
            .map(|&(c, q)| c * ay.powf(-q))
            .sum()
    }

    /// tail model of the Riesz derivative of order nu (odd)
    pub fn d_model(&self, y: f64, nu: f64) -> f64 {
        let ay = y.abs();
        let v: f64 = self
            .d_terms(nu)
            .iter()
            .map(|&(c, q)| c * ay.powf(-q))
            .sum();
        v * y.signum()
    }

    /// (coef, exponent) pairs of the density tail: coef |y|^{-exponent}
    pub fn f_terms(&self) -> [(f64, f64); 3] {
        let mut out = [(0.0, 0.0); 3];
        for (k, &bk) in self.b.iter().enumerate() {
            let kk = k + 1;
            out[k] = (bk * m_coef(self.lam, kk), kk as f64 * self.lam + 1.0);
        }
        out
    }

    /// odd tail terms of the order-nu Riesz derivative (prefix coefficients 1, b1, b2)
    pub fn d_terms(&self, nu: f64) -> [(f64, f64); 3] {
        let pre = [1.0, self.b[0], self.b[1]];
        let mut out = [(0.0, 0.0); 3];
        for (k, &bk) in pre.iter().enumerate() {
            let s = k as f64 * self.lam + nu;
            let ck = -(gamma(s + 1.0) / std::f64::consts::PI) * (std::f64::consts::PI * s / 2.0).cos();
            out[k] = (bk * ck, s + 1.0);
        }
        out
    }

    /// odd tail terms of the classical derivative f'
    pub fn fp_terms(&self) -> [(f64, f64); 3] {
        let mut out = [(0.0, 0.0); 3];
        for (k, &bk) in self.b.iter().enumerate() {
            let kk = (k + 1) as f64;
            let q = kk * self.lam + 1.0;
            out[k] = (bk * m_coef(self.lam, k + 1) * (-q), q + 1.0);
        }
        out
    }

    /// merged numerator terms of D_{lam-1} f + x f/(lam ups); the leading
    /// terms cancel exactly at ups = 1, which keeps the tail integrand of the
    /// scaled relative Fisher information cancellation-free
    pub fn score_num_terms(&self, ups: f64) -> Vec<(f64, f64)> {
        let mut acc: BTreeMap<i64, f64> = BTreeMap::new();
        for (c, q) in self.d_terms(self.lam - 1.0) {
            *acc.entry(key_of(q)).or_insert(0.0) += c;
        }
        for (c, q) in self.f_terms() {
            *acc.entry(key_of(q - 1.0)).or_insert(0.0) += c / (self.lam * ups);
        }
        acc.into_iter().map(|(k, c)| (c, k as f64 / KEY_SCALE)).collect()
    }

    /// spectrum(a xi) rescales b_k by a^{k lam}
    pub fn scale(&self, a: f64) -> TailEnv {
        let l = self.lam;
        TailEnv {
            lam: l,
            b: [
                self.b[0] * a.powf(l),
                self.b[1] * a.powf(2.0 * l),
                self.b[2] * a.powf(3.0 * l),
            ],
        }
    }

    /// spectrum product (density convolution)
    pub fn product(&self, other: &TailEnv) -> TailEnv {
        debug_assert!((self.lam - other.lam).abs() < 1e-12);
        let a = self.b;
        let b = other.b;
        TailEnv {
            lam: self.lam,
            b: [
                a[0] + b[0],
                a[1] + a[0] * b[0] + b[1],
                a[2] + a[1] * b[0] + a[0] * b[1] + b[2],
            ],
        }
    }

    /// n-fold spectrum power (i.i.d. sum before rescaling)
    pub fn power(&self, n: u32) -> TailEnv {
        let nf = n as f64;
        let [b1, b2, b3] = self.b;
        TailEnv {
            lam: self.lam,
            b: [
                nf * b1,
                nf * b2 + nf * (nf - 1.0) / 2.0 * b1 * b1,
                nf * b3 + nf * (nf - 1.0) * b1 * b2 + nf * (nf - 1.0) * (nf - 2.0) / 6.0 * b1 * b1 * b1,
            ],
        }
    }
}

/// power-law dual tail: spectrum ~ sum_j A_j |xi|^{-p_j} beyond the grid,
/// kept to the three smallest exponents
#[derive(Debug, Clone)]
pub struct DualEnv {
    pub terms: Vec<(f64, f64)>,
}

impl DualEnv {
    pub fn new(mut terms: Vec<(f64, f64)>) -> DualEnv {
        terms.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        terms.truncate(3);
        DualEnv { terms }
    }

    pub fn linnik(lam: f64) -> DualEnv {
        DualEnv::new(vec![(1.0, lam), (-1.0, 2.0 * lam), (1.0, 3.0 * lam)])
    }

    pub fn laplace() -> DualEnv {
        DualEnv::new(vec![(1.0, 2.0), (-1.0, 4.0), (1.0, 6.0)])
    }

    pub fn scale(&self, a: f64) -> DualEnv {
        DualEnv::new(self.terms.iter().map(|&(c, p)| (c * a.powf(-p), p)).collect())
    }

    pub fn product(&self, other: &DualEnv) -> DualEnv {
        let mut acc: BTreeMap<i64, f64> = BTreeMap::new();
        for &(a1, p1) in &self.terms {
            for &(a2, p2) in &other.terms {
                *acc.entry(key_of(p1 + p2)).or_insert(0.0) += a1 * a2;
            }
        }
        DualEnv::new(acc.into_iter().map(|(k, v)| (v, k as f64 / KEY_SCALE)).collect())
    }

    /// n-th power keeping the three smallest exponents; the two candidate
    /// third terms coincide when the exponents are arithmetic (Linnik case)
    pub fn power(&self, n: u32) -> DualEnv {
        if n == 1 {
            return self.clone();
        }
        let nf = n as f64;
        let (a1, p1) = self.terms[0];
        let mut out = vec![(a1.powi(n as i32), nf * p1)];
        if self.terms.len() > 1 {
            let (a2, p2) = self.terms[1];
            out.push((nf * a2 * a1.powi(n as i32 - 1), (nf - 1.0) * p1 + p2));
            if self.terms.len() > 2 {
                let (a3, p3) = self.terms[2];
                let e_a = (nf - 1.0) * p1 + p3;
                let c_a = nf * a3 * a1.powi(n as i32 - 1);
                let e_b = (nf - 2.0) * p1 + 2.0 * p2;
                let c_b = nf * (nf - 1.0) / 2.0 * a2 * a2 * a1.powi(n as i32 - 2);
                if (e_a - e_b).abs() < 1e-12 {
                    out.push((c_a + c_b, e_a));
                } else if e_a < e_b {
                    out.push((c_a, e_a));
                } else {
                    out.push((c_b, e_b));
                }
            }
        }
        DualEnv::new(out)
    }
}

// ---- origin singular series, keyed by exponent rounded at 1e-10 ----

const KEY_SCALE: f64 = 1e10;

fn key_of(e: f64) -> i64 {
    (e * KEY_SCALE).round() as i64
}

/// map exponent -> coefficient of |x|^exponent (or sign(x)|x|^exponent)
pub type PowerMap = BTreeMap<i64, f64>;

pub fn pm_exponent(key: i64) -> f64 {
    key as f64 / KEY_SCALE
}

/// series product, dropping exponents >= cut (they carry no O(dx^{<3}) weight)
pub fn pm_mul(d1: &PowerMap, d2: &PowerMap, cut: f64) -> PowerMap {
    let mut out = PowerMap::new();
    for (&k1, &c1) in d1 {
        for (&k2, &c2) in d2 {
            let e = pm_exponent(k1) + pm_exponent(k2);
            if e < cut - 1e-12 {
                *out.entry(key_of(e)).or_insert(0.0) += c1 * c2;
            }
        }
    }
    out
}

pub fn pm_add(out: &mut PowerMap, d: &PowerMap, scale: f64) {
    for (&k, &c) in d {
        *out.entry(k).or_insert(0.0) += scale * c;
    }
}

/// even singular series of the density at 0 (exponents < 2, integer exponents
/// carry no non-smooth term and are skipped)
pub fn origin_sing_f(dual: &DualEnv) -> PowerMap {
    let mut out = PowerMap::new();
    for &(a, p) in &dual.terms {
        let sig = p - 1.0;
        if sig < 2.0 - 1e-12 && (p - p.round()).abs() > 1e-9 {
            *out.entry(key_of(sig)).or_insert(0.0) += a * ft_even_c(p);
        }
    }
    out
}

/// odd singular series (coef sign(x) |x|^e) of the order-nu Riesz derivative
/// at 0; s = 1 is the half-jump term
pub fn origin_sing_d(dual: &DualEnv, nu: f64) -> PowerMap {
    let mut out = PowerMap::new();
    for &(a, p) in &dual.terms {
        let s = p - nu;
        let e = s - 1.0;
        if e < 2.0 - 1e-12 && ((s - 1.0).abs() < 1e-12 || (s - s.round()).abs() > 1e-9) {
            *out.entry(key_of(e)).or_insert(0.0) += a * ft_odd_c(s);
        }
    }
    out
}

/// singular series of 1/f from f = p0 + cusps, by geometric inversion
pub fn inv_series(p0: f64, fs: &PowerMap) -> PowerMap {
    let mut invf = PowerMap::new();
    invf.insert(key_of(0.0), 1.0 / p0);
    let mut t = invf.clone();
    let mw: PowerMap = fs.iter().map(|(&k, &c)| (k, -c / p0)).collect();
    for _ in 0..24 {
        t = pm_mul(&t, &mw, 2.0);
        if t.is_empty() {
            break;
        }
        pm_add(&mut invf, &t, 1.0);
    }
    invf
}

/// trapezoid endpoint correction sum_sigma -2 zeta(-sigma) dx^{1+sigma} c_sigma
/// for an even integrand with origin expansion sum c_sigma |x|^sigma
pub fn navot_sum(dx: f64, gs: &PowerMap) -> f64 {
    gs.iter()
        .map(|(&k, &c)| {
            let sig = pm_exponent(k);
            -2.0 * zeta_neg(sig) * dx.powf(1.0 + sig) * c
        })
        .sum()
}

/// origin correction for int (D f/f + x/(lam ups))^2 f: the score of a
/// power-dual density jumps at 0 (the grid node sees the odd midpoint) and
/// carries |x|^{lam-1} cusps
pub fn frac_fisher_origin_corr(dual: &DualEnv, p0: f64, dx: f64, lam: f64, ups: f64) -> f64 {
    let fs = origin_sing_f(dual);
    let ds = origin_sing_d(dual, lam - 1.0);
    if fs.is_empty() && ds.is_empty() {
        return 0.0;
    }
    let mut gs = pm_mul(&pm_mul(&ds, &ds, 2.0), &inv_series(p0, &fs), 2.0);
    // cross term 2 x D / (lam ups)
    for (&k, &c) in &ds {
        let ee = pm_exponent(k) + 1.0;
        if ee < 2.0 - 1e-12 {
            *gs.entry(key_of(ee)).or_insert(0.0) += 2.0 * c / (lam * ups);
        }
    }
    navot_sum(dx, &gs)
}

/// origin correction for int f log(f/g); vanishes identically when the two
/// cusp series coincide
pub fn relent_origin_corr(
    dual_f: Option<&DualEnv>,
    p0: f64,
    dual_g: Option<&DualEnv>,
    g0: f64,
    dx: f64,
) -> f64 {
    let dfs = dual_f.map(origin_sing_f).unwrap_or_default();
    let dgs = dual_g.map(origin_sing_f).unwrap_or_default();
    if dfs.is_empty() && dgs.is_empty() {
        return 0.0;
    }
    let wf: PowerMap = dfs.iter().map(|(&k, &c)| (k, c / p0)).collect();
    let wg: PowerMap = dgs.iter().map(|(&k, &c)| (k, c / g0)).collect();
    // f log f part: (1 + log(p0/g0)) * cusps(f) + p0 sum_{m>=2} (-1)^m wf^m/(m(m-1))
    let mut gs = PowerMap::new();
    pm_add(&mut gs, &dfs, 1.0 + (p0 / g0).ln());
    let mut t = wf.clone();
    for m in 2..26 {
        t = pm_mul(&t, &wf, 2.0);
        if t.is_empty() {
            break;
        }
        let mf = m as f64;
        pm_add(&mut gs, &t, p0 * if m % 2 == 0 { 1.0 } else { -1.0 } / (mf * (mf - 1.0)));
    }
    // minus the f log g part beyond cusps(f) * log g0: (p0 + cusps(f)) * L(wg)
    let mut lg = PowerMap::new();
    let mut t = PowerMap::new();
    t.insert(key_of(0.0), 1.0);
    for m in 1..26 {
        t = pm_mul(&t, &wg, 2.0);
        if t.is_empty() {
            break;
        }
        let mf = m as f64;
        pm_add(&mut lg, &t, if m % 2 == 1 { 1.0 } else { -1.0 } / mf);
    }
    pm_add(&mut gs, &lg, -p0);
    let cross = pm_mul(&dfs, &lg, 2.0);
    pm_add(&mut gs, &cross, -1.0);
    navot_sum(dx, &gs)
}

/// origin correction for -int f log f
pub fn shannon_origin_corr(dual: Option<&DualEnv>, p0: f64, dx: f64) -> f64 {
    let Some(dual) = dual else { return 0.0 };
    let dfs = origin_sing_f(dual);
    if dfs.is_empty() {
        return 0.0;
    }
    let wf: PowerMap = dfs.iter().map(|(&k, &c)| (k, c / p0)).collect();
    let mut gs = PowerMap::new();
    pm_add(&mut gs, &dfs, 1.0 + p0.ln());
    let mut t = wf.clone();
    for m in 2..26 {
        t = pm_mul(&t, &wf, 2.0);
        if t.is_empty() {
            break;
        }
        let mf = m as f64;
        pm_add(&mut gs, &t, p0 * if m % 2 == 0 { 1.0 } else { -1.0 } / (mf * (mf - 1.0)));
    }
    -navot_sum(dx, &gs)
}
