//! Normalized-sum cascades T_n = n^{-1/lam} (X_1 + ... + X_n) and the
//! inequality batteries tied to them: step-wise Fisher contraction,
//! entropy-to-Fisher chains, Sobolev convergence, and the convolution
//! inequalities (Blachman-Stam in both classical and fractional form).
//!
//! Everything here works on the spectral side: T_n has characteristic
//! function phi(n^{-1/lam} xi)^n, so a base density with a closed-form
//! spectrum gives every cascade level in one sampling pass, with tail and
//! origin metadata dilated and powered alongside.

use std::sync::Arc;

use serde::Serialize;

use crate::density::{Density, SpecFn};
use crate::error::{LabError, Result};
use crate::evolve::InequalityCheck;
use crate::functionals::{
    con23_checker, fisher_information, fractional_relative_fisher, functional_report, l1_distance,
    sobolev_sq_analytic, sobolev_sq_spectrum, tv_norm, FunctionalReport,
};
use crate::transforms::{scale_spectrum, Spectrum};

// Completion corrections scale like L^{-p}; once the leading dual exponent
// p = n*lam passes this cutoff the correction is far below round-off and the
// powered coefficients overflow, so the dual is dropped instead.
const DUAL_EXPONENT_CUTOFF: f64 = 40.0;

/// Density of the normalized n-fold sum of independent copies of `d`.
///
/// Requires a closed-form spectrum: the grid-sampled route would compound
/// interpolation error n times, while the closure route keeps every level
/// exact up to sampling. Integer powers go through `powi`
/// (square-and-multiply), which handles spectra flushed to subnormals at
/// large xi without the pow-of-log artifacts of `powf`.
pub fn normalized_sum(d: &Density, n: u32) -> Result<Density> {
    if n == 0 {
        return Err(LabError::Config("normalized sum needs n >= 1".into()));
    }
    let spec0 = d
        .spec_closure()
        .cloned()
        .ok_or_else(|| LabError::InapplicableInput("cascade needs a closed-form spectrum".into()))?;
    let lam = d.lam();
    let a = (n as f64).powf(-1.0 / lam);
    let spec: SpecFn = Arc::new(move |u| spec0(a * u).powi(n as i32));
    let env = d.env().map(|e| e.scale(a).power(n));
    let dual = d
        .dual()
        .map(|dd| dd.scale(a).power(n))
        .filter(|dd| dd.terms[0].1 <= DUAL_EXPONENT_CUTOFF);
    Ok(Density::from_spectrum(d.grid(), lam, spec, env, dual))
}

/// Same cascade step on a bare sampled spectrum (values at a*xi_k by
/// barycentric interpolation, then an integer power pointwise).
pub fn normalized_sum_spectrum(sp: &Spectrum, n: u32, lam: f64) -> Result<Spectrum> {
    if n == 0 {
        return Err(LabError::Config("normalized sum needs n >= 1".into()));
    }
    let a = (n as f64).powf(-1.0 / lam);
    let mut out = scale_spectrum(sp, a)?;
    for v in out.values.iter_mut() {
        *v = v.powi(n as i32);
    }
    Ok(out)
}

/// Density of a*X + b*Y for independent X ~ f, Y ~ g (spectral product).
/// Tail and origin metadata survive only when both factors carry it; the
/// heavier tail index governs the result.
pub fn scaled_convolution(f: &Density, g: &Density, a: f64, b: f64) -> Result<Density> {
    if !f.grid().same_as(g.grid()) {
        return Err(LabError::GridMismatch);
    }
    if !(a > 0.0 && b > 0.0) {
        return Err(LabError::Config("convolution scales must be positive".into()));
    }
    let sf = f
        .spec_closure()
        .cloned()
        .ok_or_else(|| LabError::InapplicableInput("convolution needs closed-form spectra".into()))?;
    let sg = g
        .spec_closure()
        .cloned()
        .ok_or_else(|| LabError::InapplicableInput("convolution needs closed-form spectra".into()))?;
    let spec: SpecFn = Arc::new(move |u| sf(a * u) * sg(b * u));
    let env = match (f.env(), g.env()) {
        (Some(ef), Some(eg)) => Some(ef.scale(a).product(&eg.scale(b))),
        _ => None,
    };
    let dual = match (f.dual(), g.dual()) {
        (Some(df), Some(dg)) => Some(df.scale(a).product(&dg.scale(b))),
        _ => None,
    }
    .filter(|dd| dd.terms[0].1 <= DUAL_EXPONENT_CUTOFF);
    let lam = f.lam().min(g.lam());
    Ok(Density::from_spectrum(f.grid(), lam, spec, env, dual))
}

/// One bound/measurement pair from a sweep, tagged with its cascade level.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RatioCheck {
    pub n: u32,
    pub bound: f64,
    pub measured: f64,
    pub pass: bool,
}

/// Full record of a cascade sweep: the ladder of n values, the functional
/// report at each level, the per-level inequality checks, and the fitted
/// log-log decay slope over the asymptotic range n >= 4.
#[derive(Debug, Serialize)]
pub struct SweepResult {
    pub n_values: Vec<u32>,
    pub reports: Vec<FunctionalReport>,
    pub ratio_checks: Vec<RatioCheck>,
    pub rate_fit: f64,
}

// log-spaced ladder, dense at small n where the step bounds bite hardest
const N_LADDER: [u32; 12] = [1, 2, 3, 4, 6, 8, 12, 16, 24, 32, 48, 64];

fn ladder(n_max: u32) -> Vec<u32> {
    N_LADDER.iter().copied().filter(|&n| n <= n_max).collect()
}

/// least-squares slope of ln(val) against ln(n) over n >= 4; -inf when
/// fewer than two usable points remain (values at round-off get dropped)
fn log_slope(ns: &[u32], vals: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = ns
        .iter()
        .zip(vals)
        .filter(|&(&n, &v)| n >= 4 && v > 1e-300)
        .map(|(&n, &v)| ((n as f64).ln(), v.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NEG_INFINITY;
    }
    let m = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    (m * sxy - sx * sy) / (m * sxx - sx * sx)
}

fn sweep_core(base: &Density, n_max: u32) -> Result<(Vec<u32>, Vec<FunctionalReport>, Density)> {
    if n_max < 2 {
        return Err(LabError::Config("sweep needs n_max >= 2".into()));
    }
    let wref = Density::levy(base.grid(), base.lam())?;
    let ns = ladder(n_max);
    let reports = ns
        .iter()
        .map(|&n| functional_report(&normalized_sum(base, n)?, &wref))
        .collect::<Result<Vec<_>>>()?;
    Ok((ns, reports, wref))
}

/// Fractional Fisher information along the cascade. Hard-fails unless, at
/// every step, I_lam(T_n) is nonincreasing and contracts at least as fast
/// as the step bound (n_prev/n)^{(2-lam)/lam} * I_lam(T_prev), and the
/// running value stays below the cumulative bound n^{-(2-lam)/lam} * I_lam(X).
pub fn fisher_monotonicity_sweep(base: &Density, n_max: u32) -> Result<SweepResult> {
    let (ns, reports, _) = sweep_core(base, n_max)?;
    let theta = (2.0 - base.lam()) / base.lam();
    let vals: Vec<f64> = reports.iter().map(|r| r.frac_fisher_lambda).collect();
    let mut ratio_checks = Vec::with_capacity(ns.len());
    for i in 1..ns.len() {
        let bound = (ns[i - 1] as f64 / ns[i] as f64).powf(theta) * vals[i - 1];
        let pass = vals[i] <= bound * (1.0 + 1e-4) + 1e-12;
        ratio_checks.push(RatioCheck {
            n: ns[i],
            bound,
            measured: vals[i],
            pass,
        });
        if vals[i] > vals[i - 1] + 1e-7 || !pass {
            return Err(LabError::MonotonicityViolation {
                index: i,
                value: vals[i],
                prev: bound,
            });
        }
        let cumulative = (ns[i] as f64).powf(-theta) * vals[0] * (1.0 + 1e-4) + 1e-12;
        if vals[i] > cumulative {
            return Err(LabError::MonotonicityViolation {
                index: i,
                value: vals[i],
                prev: cumulative,
            });
        }
    }
    let rate_fit = log_slope(&ns, &vals);
    Ok(SweepResult {
        n_values: ns,
        reports,
        ratio_checks,
        rate_fit,
    })
}

/// Relative entropy along the cascade. Hard-fails unless H(T_n|w) decays
/// monotonically, each level satisfies the entropy-Fisher chain
/// H <= lam 2^{1/lam} min(I(T_n), I(w))^{1/2} I_lam(T_n)^{1/2}, and the
/// Csiszar-Kullback bound l1^2 <= 2H holds.
pub fn entropy_decay_sweep(base: &Density, n_max: u32) -> Result<SweepResult> {
    let (ns, reports, wref) = sweep_core(base, n_max)?;
    let lam = base.lam();
    let i_ref = fisher_information(&wref);
    let chain_const = lam * 2f64.powf(1.0 / lam);
    let hs: Vec<f64> = reports.iter().map(|r| r.rel_entropy).collect();
    let mut ratio_checks = Vec::with_capacity(ns.len());
    for (i, r) in reports.iter().enumerate() {
        let bound =
            chain_const * r.fisher.min(i_ref).max(0.0).sqrt() * r.frac_fisher_lambda.max(0.0).sqrt();
        let pass = hs[i] <= bound + 1e-6;
        ratio_checks.push(RatioCheck {
            n: ns[i],
            bound,
            measured: hs[i],
            pass,
        });
        if !pass {
            return Err(LabError::MonotonicityViolation {
                index: i,
                value: hs[i],
                prev: bound,
            });
        }
        if r.l1 * r.l1 > 2.0 * hs[i] + 1e-6 {
            return Err(LabError::MonotonicityViolation {
                index: i,
                value: r.l1 * r.l1,
                prev: 2.0 * hs[i],
            });
        }
        if i > 0 && hs[i] > hs[i - 1] + 1e-6 {
            return Err(LabError::MonotonicityViolation {
                index: i,
                value: hs[i],
                prev: hs[i - 1],
            });
        }
    }
    let rate_fit = log_slope(&ns, &hs);
    Ok(SweepResult {
        n_values: ns,
        reports,
        ratio_checks,
        rate_fit,
    })
}

/// Homogeneous Sobolev distance ||T_n - w||_{H^k} along the cascade,
/// k <= 2. Requires the base spectrum to be integrable enough for order-k
/// convergence (checked through the tail-integrability probe at an exponent
/// 10% above the threshold 2(k+1)/lam); hard-fails unless the distance is
/// nonincreasing over the asymptotic range n >= 4.
pub fn sobolev_convergence_sweep(base: &Density, n_max: u32, k: u32) -> Result<SweepResult> {
    if k > 2 {
        return Err(LabError::Config("Sobolev sweep supports k <= 2".into()));
    }
    let m_gate = 1.1 * 2.0 * (k as f64 + 1.0) / base.lam();
    let (_, converged) = con23_checker(base, m_gate, k)?;
    if !converged {
        return Err(LabError::InapplicableInput(format!(
            "spectrum not integrable at exponent {m_gate:.3} for order {k}"
        )));
    }
    let (ns, reports, wref) = sweep_core(base, n_max)?;
    let wspec = wref.spec_samples().to_vec();
    let mut ratio_checks = Vec::with_capacity(ns.len());
    let mut dists = Vec::with_capacity(ns.len());
    let mut prev = f64::INFINITY;
    for &n in &ns {
        let tn = normalized_sum(base, n)?;
        let diff = Spectrum {
            grid: Arc::clone(base.grid()),
            values: tn
                .spec_samples()
                .iter()
                .zip(&wspec)
                .map(|(a, b)| a - b)
                .collect(),
        };
        let measured = sobolev_sq_spectrum(&diff, k, true)?.max(0.0).sqrt();
        let bound = if prev.is_finite() { prev } else { measured };
        let pass = n < 4 || measured <= bound + 1e-9;
        ratio_checks.push(RatioCheck {
            n,
            bound,
            measured,
            pass,
        });
        if !pass {
            return Err(LabError::MonotonicityViolation {
                index: dists.len(),
                value: measured,
                prev: bound,
            });
        }
        if n >= 4 {
            prev = measured;
        }
        dists.push(measured);
    }
    let rate_fit = log_slope(&ns, &dists);
    Ok(SweepResult {
        n_values: ns,
        reports,
        ratio_checks,
        rate_fit,
    })
}

/// Uniform-in-n Sobolev bound: the full-line H^k mass of T_n against the
/// stable target's, with a 2% allowance. Both sides go through adaptive
/// quadrature on the closed-form spectra, so the comparison sees the true
/// tails rather than the grid window.
pub fn uniform_sobolev_check(base: &Density, n: u32, k: u32) -> Result<InequalityCheck> {
    if k > 4 {
        return Err(LabError::Config("Sobolev order capped at k = 4".into()));
    }
    let tn = normalized_sum(base, n)?;
    let ts = tn
        .spec_closure()
        .cloned()
        .expect("normalized_sum always carries a closure");
    let lam = base.lam();
    let lhs = sobolev_sq_analytic(&move |u: f64| ts(u), k);
    let wspec = move |u: f64| {
        if (lam - 2.0).abs() < 1e-12 {
            (-(u * u)).exp()
        } else {
            (-u.abs().powf(lam)).exp()
        }
    };
    let rhs = sobolev_sq_analytic(&wspec, k) * 1.02;
    Ok(InequalityCheck {
        lhs,
        rhs,
        pass: lhs <= rhs,
    })
}

/// Sharp constant in the L1 / homogeneous-Sobolev interpolation bound
/// ||f||_{H^k} <= C_k ||f||_{L1}^{2/(2k+3)} ||f||_{H^{k+1}}^{(2k+1)/(2k+3)},
/// from splitting the spectral integral at the optimal radius.
pub fn interpolation_constant(k: u32) -> f64 {
    let kk = k as f64;
    ((2.0 * kk + 3.0) / (2.0 * kk + 1.0)).sqrt()
        * (2.0 * std::f64::consts::PI).powf(-1.0 / (2.0 * kk + 3.0))
}

/// Interpolation bound applied to the residual T_n - w, k <= 3.
pub fn interpolation_check(base: &Density, n: u32, k: u32) -> Result<InequalityCheck> {
    if k > 3 {
        return Err(LabError::Config(
            "interpolation needs order k+1 <= 4".into(),
        ));
    }
    let wref = Density::levy(base.grid(), base.lam())?;
    let tn = normalized_sum(base, n)?;
    let diff = Spectrum {
        grid: Arc::clone(base.grid()),
        values: tn
            .spec_samples()
            .iter()
            .zip(wref.spec_samples())
            .map(|(a, b)| a - b)
            .collect(),
    };
    let hk = sobolev_sq_spectrum(&diff, k, true)?.max(0.0).sqrt();
    let hk1 = sobolev_sq_spectrum(&diff, k + 1, true)?.max(0.0).sqrt();
    let l1 = l1_distance(&tn, &wref)?;
    let kk = k as f64;
    let rhs = interpolation_constant(k)
        * l1.powf(2.0 / (2.0 * kk + 3.0))
        * hk1.powf((2.0 * kk + 1.0) / (2.0 * kk + 3.0));
    Ok(InequalityCheck {
        lhs: hk,
        rhs,
        pass: hk <= rhs + 1e-6,
    })
}

/// Fractional Blachman-Stam: for the convolution of eps^{1/lam} X with
/// (1-eps)^{1/lam} Y,
/// I_lam(conv) <= eps^{2/lam} I_lam(f) + (1-eps)^{2/lam} I_lam(g).
pub fn blachman_stam_check(f: &Density, g: &Density, eps: f64) -> Result<InequalityCheck> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(LabError::Config("convolution weight must be in (0,1)".into()));
    }
    if (f.lam() - g.lam()).abs() > 1e-9 {
        return Err(LabError::Config(
            "Blachman-Stam needs matching tail orders".into(),
        ));
    }
    let lam = f.lam();
    let conv = scaled_convolution(f, g, eps.powf(1.0 / lam), (1.0 - eps).powf(1.0 / lam))?;
    let lhs = fractional_relative_fisher(&conv, 1.0);
    let rhs = eps.powf(2.0 / lam) * fractional_relative_fisher(f, 1.0)
        + (1.0 - eps).powf(2.0 / lam) * fractional_relative_fisher(g, 1.0);
    Ok(InequalityCheck {
        lhs,
        rhs,
        pass: lhs <= rhs + 1e-5,
    })
}

/// Smoothing form of Blachman-Stam: convolving in a stable component of
/// weight eps only contracts,
/// I_lam((1-eps)^{1/lam} X + eps^{1/lam} Z_lam) <= (1-eps)^{2/lam} I_lam(X),
/// since the stable law sits at the zero of I_lam.
pub fn smoothing_form_check(f: &Density, eps: f64) -> Result<InequalityCheck> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(LabError::Config("smoothing weight must be in (0,1)".into()));
    }
    let lam = f.lam();
    let wref = Density::levy(f.grid(), lam)?;
    let conv = scaled_convolution(f, &wref, (1.0 - eps).powf(1.0 / lam), eps.powf(1.0 / lam))?;
    let lhs = fractional_relative_fisher(&conv, 1.0);
    let rhs = (1.0 - eps).powf(2.0 / lam) * fractional_relative_fisher(f, 1.0);
    Ok(InequalityCheck {
        lhs,
        rhs,
        pass: lhs <= rhs + 1e-5,
    })
}

/// Classical Stam inequality on the convolution of two densities:
/// 1/I(f*g) >= 1/I(f) + 1/I(g). `pass` records the inequality as stated
/// (lhs at least rhs).
pub fn stam_check(f: &Density, g: &Density) -> Result<InequalityCheck> {
    let conv = scaled_convolution(f, g, 1.0, 1.0)?;
    let lhs = 1.0 / fisher_information(&conv);
    let rhs = 1.0 / fisher_information(f) + 1.0 / fisher_information(g);
    Ok(InequalityCheck {
        lhs,
        rhs,
        pass: lhs >= rhs - 1e-6,
    })
}

/// Classical Fisher information of the three-fold self-convolution against
/// the total-variation bound I(X_1 + X_2 + X_3) <= (3/2) ||f||_TV^2, which
/// is what keeps I(T_n) uniformly bounded along cascades.
pub fn tv_fisher_bound_check(d: &Density) -> Result<InequalityCheck> {
    let spec0 = d
        .spec_closure()
        .cloned()
        .ok_or_else(|| LabError::InapplicableInput("three-fold sum needs a closed-form spectrum".into()))?;
    let spec: SpecFn = Arc::new(move |u| {
        let s = spec0(u);
        s * s * s
    });
    let env = d.env().map(|e| e.power(3));
    let dual = d
        .dual()
        .map(|dd| dd.power(3))
        .filter(|dd| dd.terms[0].1 <= DUAL_EXPONENT_CUTOFF);
    let d3 = Density::from_spectrum(d.grid(), d.lam(), spec, env, dual);
    let lhs = fisher_information(&d3);
    let tv = tv_norm(d);
    let rhs = 1.5 * tv * tv;
    Ok(InequalityCheck {
        lhs,
        rhs,
        pass: lhs <= rhs + 1e-6,
    })
}
