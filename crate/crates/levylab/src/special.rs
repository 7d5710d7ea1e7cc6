//! Special functions needed by the tail/cusp machinery: gamma (any non-pole
//! real argument), digamma, Hurwitz zeta, zeta at negative arguments via the
//! functional equation, the Fourier cusp coefficients, and Gauss-Legendre rules.

use std::f64::consts::PI;

// Lanczos g=7, n=9 coefficients
const LANCZOS: [f64; 9] = [
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
];

/// ln Gamma(x) for x > 0
pub fn ln_gamma(x: f64) -> f64 {
    assert!(x > 0.0, "ln_gamma needs a positive argument, got {x}");
    if x < 0.5 {
        // reflection keeps the Lanczos argument away from 0
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let z = x - 1.0;
    let mut a = LANCZOS[0];
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (z + i as f64);
    }
    let t = z + 7.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + a.ln()
}

/// Gamma(x) for any real x that is not a non-positive integer
pub fn gamma(x: f64) -> f64 {
    if x > 0.0 {
        if x < 0.5 {
            return PI / ((PI * x).sin() * gamma(1.0 - x));
        }
        return ln_gamma(x).exp();
    }
    assert!(
        (x - x.round()).abs() > 1e-12,
        "gamma pole at non-positive integer {x}"
    );
    PI / ((PI * x).sin() * gamma(1.0 - x))
}

/// digamma via argument shift to >= 10 and the asymptotic series
pub fn digamma(x: f64) -> f64 {
    assert!(x > 0.0, "digamma needs a positive argument, got {x}");
    let mut v = 0.0;
    let mut y = x;
    while y < 10.0 {
        v -= 1.0 / y;
        y += 1.0;
    }
    let inv = 1.0 / y;
    let inv2 = inv * inv;
    // B_2k/(2k) y^-2k terms through k=5
    v + y.ln() - 0.5 * inv
        - inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 / 132.0))))
}

/// Hurwitz zeta for s > 0, s != 1, a > 0 by Euler-Maclaurin with 9 leading terms
pub fn zeta_h(s: f64, a: f64) -> f64 {
    debug_assert!(a > 0.0 && s > 0.0 && (s - 1.0).abs() > 1e-13);
    const M: usize = 16;
    let mut base = 0.0;
    for n in 0..M {
        base += (a + n as f64).powf(-s);
    }
    let w = a + M as f64;
    let rise = |k: u32| -> f64 { (0..k).map(|j| s + j as f64).product() };
    let tail = w.powf(1.0 - s) / (s - 1.0) + 0.5 * w.powf(-s) + s * w.powf(-s - 1.0) / 12.0
        - rise(3) * w.powf(-s - 3.0) / 720.0
        + rise(5) * w.powf(-s - 5.0) / 30240.0
        - rise(7) * w.powf(-s - 7.0) / 1209600.0;
    base + tail
}

/// Riemann zeta for s > 1
pub fn zeta(s: f64) -> f64 {
    zeta_h(s, 1.0)
}

/// zeta(-sigma) for sigma >= 0 via the functional equation; the sigma = 0
/// value -1/2 is the jump-notch weight of the endpoint correction
pub fn zeta_neg(sigma: f64) -> f64 {
    if sigma < 1e-12 {
        return -0.5;
    }
    -2.0 * (2.0 * PI).powf(-1.0 - sigma) * (PI * sigma / 2.0).sin() * gamma(1.0 + sigma) * zeta(1.0 + sigma)
}

/// coefficient c of the even origin cusp c*|x|^{s-1} contributed by a
/// spectral term |xi|^{-s}
pub fn ft_even_c(s: f64) -> f64 {
    (PI * s / 2.0).sin() * gamma(1.0 - s) / PI
}

/// coefficient c of the odd origin term c*sign(x)*|x|^{s-1} contributed by a
/// spectral term i*sign(xi)*|xi|^{-s}; s = 1 is the half-jump -1/2
pub fn ft_odd_c(s: f64) -> f64 {
    if (s - 1.0).abs() < 1e-12 {
        return -0.5;
    }
    -(PI * s / 2.0).cos() * gamma(1.0 - s) / PI
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on the
/// three-term recurrence
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        // Chebyshev-like initial guess
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// integral of f over [a, b] by an n-node Gauss-Legendre rule
pub fn gl_quad(f: &dyn Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let (xs, ws) = gauss_legendre(n);
    let c = (b - a) / 2.0;
    let mid = (a + b) / 2.0;
    xs.iter().zip(&ws).map(|(&x, &w)| w * f(mid + c * x)).sum::<f64>() * c
}

/// composite Gauss-Legendre from a to b: geometrically spaced panels when
/// the interval sits away from zero (power-law integrands), uniform panels
/// when it starts at zero
pub fn gl_quad_panels(f: &dyn Fn(f64) -> f64, a: f64, b: f64, panels: usize, nodes: usize) -> f64 {
    debug_assert!(b > a && a >= 0.0);
    if a <= 0.0 {
        let h = (b - a) / panels as f64;
        return (0..panels)
            .map(|i| gl_quad(f, a + i as f64 * h, a + (i + 1) as f64 * h, nodes))
            .sum();
    }
    let r = (b / a).powf(1.0 / panels as f64);
    let mut s = 0.0;
    let mut lo = a;
    for _ in 0..panels {
        let hi = lo * r;
        s += gl_quad(f, lo, hi, nodes);
        lo = hi;
    }
    s
}
