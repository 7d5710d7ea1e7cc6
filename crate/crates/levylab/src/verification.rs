//! The full verification battery: nine ordered categories, each a bundle of
//! named checks with pinned tolerances. A category passes when every check
//! in it passes; the index of the first failing category doubles as a
//! process exit code, so the ordering here is part of the interface and
//! should not be reshuffled.

use std::fmt::Write as _;

use rustfft::num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::cascade::{
    blachman_stam_check, entropy_decay_sweep, fisher_monotonicity_sweep, interpolation_check,
    normalized_sum, smoothing_form_check, tv_fisher_bound_check, uniform_sobolev_check,
};
use crate::completion::images_even;
use crate::density::Density;
use crate::error::Result;
use crate::evolve::{entropy_trajectory, evolve, log_sobolev_check, EvolutionSchedule};
use crate::functionals::{
    con23_checker, fisher_information, fractional_relative_fisher, relative_entropy,
    relative_fisher, shannon_entropy,
};
use crate::grid::Grid;
use crate::series::TailEnv;
use crate::transforms::{forward_transform, inverse_transform, Spectrum};

/// One named check: what was measured, the limit it was held to, verdict.
#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub measured: f64,
    pub limit: f64,
    pub passed: bool,
}

impl CheckRecord {
    /// measured below limit (one-sided, the common case here)
    fn below(name: impl Into<String>, measured: f64, limit: f64) -> CheckRecord {
        CheckRecord {
            name: name.into(),
            measured,
            limit,
            passed: measured.is_finite() && measured < limit,
        }
    }

    /// explicit verdict with a diagnostic pair
    fn verdict(name: impl Into<String>, measured: f64, limit: f64, passed: bool) -> CheckRecord {
        CheckRecord {
            name: name.into(),
            measured,
            limit,
            passed: passed && measured.is_finite(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct CategoryResult {
    pub name: String,
    pub passed: bool,
    pub checks: Vec<CheckRecord>,
}

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub grid_n: usize,
    pub grid_l: f64,
    pub lambdas: Vec<f64>,
    pub categories: Vec<CategoryResult>,
    pub passed: bool,
}

impl VerifyReport {
    /// 1-based index of the first failing category, None when all pass
    pub fn first_failing(&self) -> Option<usize> {
        self.categories.iter().position(|c| !c.passed).map(|i| i + 1)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "grid": { "n": self.grid_n, "l": self.grid_l },
            "lambdas": self.lambdas,
            "passed": self.passed,
            "first_failing": self.first_failing(),
            "categories": self.categories.iter().map(|c| json!({
                "name": c.name,
                "passed": c.passed,
                "checks": c.checks,
            })).collect::<Vec<_>>(),
        })
    }

    /// one line per category, `ok`/`FAIL` followed by any failing checks
    pub fn summary_text(&self) -> String {
        let mut out = String::new();
        for (i, c) in self.categories.iter().enumerate() {
            let _ = writeln!(
                out,
                "[{}] {:9} {}",
                i + 1,
                if c.passed { "ok" } else { "FAIL" },
                c.name
            );
            if !c.passed {
                for chk in c.checks.iter().filter(|chk| !chk.passed) {
                    let _ = writeln!(
                        out,
                        "      {}: measured {:.6e} vs limit {:.6e}",
                        chk.name, chk.measured, chk.limit
                    );
                }
            }
        }
        let _ = writeln!(out, "overall: {}", if self.passed { "ok" } else { "FAIL" });
        out
    }
}

fn category(name: &str, checks: Vec<CheckRecord>) -> CategoryResult {
    let passed = checks.iter().all(|c| c.passed);
    CategoryResult {
        name: name.to_string(),
        passed,
        checks,
    }
}

const DEFAULT_LAMBDAS: [f64; 3] = [1.2, 1.5, 1.8];

/// Run every category on the given stability indices (defaults to
/// {1.2, 1.5, 1.8}) at the given grid. Categories run in interface order;
/// a failing check never aborts the battery, it only flips verdicts.
pub fn verify_all(lambdas: Option<&[f64]>, n: usize, l: f64) -> Result<VerifyReport> {
    let lams: Vec<f64> = lambdas.unwrap_or(&DEFAULT_LAMBDAS).to_vec();
    let grid = Grid::new(n, l)?;

    let mut categories = Vec::with_capacity(9);
    categories.push(transform_fidelity(&grid)?);
    categories.push(score_identity(&grid, &lams)?);
    categories.push(golden_functionals(&grid, &lams)?);
    categories.push(convolution_inequalities(&grid, &lams)?);
    categories.push(fisher_monotonicity(&grid, &lams)?);
    categories.push(entropy_fisher_inequality(&grid, &lams)?);
    categories.push(entropy_production(&grid, &lams)?);
    categories.push(entropy_decay(&grid, &lams)?);
    categories.push(sobolev_machinery(&grid, &lams)?);

    let passed = categories.iter().all(|c| c.passed);
    Ok(VerifyReport {
        grid_n: n,
        grid_l: l,
        lambdas: lams,
        categories,
        passed,
    })
}

// [1] classical transform pairs and the round trip
fn transform_fidelity(grid: &std::sync::Arc<Grid>) -> Result<CategoryResult> {
    let mut checks = Vec::new();

    // e^{-xi^2/2} -> standard normal density
    let s = Spectrum::from_fn(grid, |xi| Complex64::new((-xi * xi / 2.0).exp(), 0.0));
    let f = inverse_transform(&s)?;
    let norm = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    let err = grid
        .xs()
        .iter()
        .zip(&f.values)
        .map(|(&x, &v)| (v - norm * (-x * x / 2.0).exp()).abs())
        .fold(0.0, f64::max);
    checks.push(CheckRecord::below("gaussian-pair-abs", err, 1e-9));

    // e^{-|xi|} -> Cauchy density, periodization images subtracted
    let s = Spectrum::from_fn(grid, |xi| Complex64::new((-xi.abs()).exp(), 0.0));
    let f = inverse_transform(&s)?;
    let img = images_even(grid, &TailEnv::levy(1.0).f_terms());
    let rel = grid
        .xs()
        .iter()
        .zip(f.values.iter().zip(&img))
        .filter(|(&x, _)| x.abs() <= 20.0)
        .map(|(&x, (&v, &im))| {
            let want = 1.0 / (std::f64::consts::PI * (1.0 + x * x));
            ((v - im - want) / want).abs()
        })
        .fold(0.0, f64::max);
    checks.push(CheckRecord::below("cauchy-pair-rel", rel, 1e-6));

    // 1/(1+xi^2) -> e^{-|x|}/2, spectral tail completed
    let lapl = Density::linnik_fourier(grid, 2.0)?;
    let err = grid
        .xs()
        .iter()
        .zip(lapl.sample().values.iter())
        .map(|(&x, &v)| (v - 0.5 * (-x.abs()).exp()).abs())
        .fold(0.0, f64::max);
    checks.push(CheckRecord::below("laplace-pair-abs", err, 1e-6));

    // forward o inverse on a heavy-tailed spectrum
    let p = Density::linnik_fourier(grid, 1.5)?;
    let back = forward_transform(&inverse_transform(&p.spectrum())?);
    let err = back
        .values
        .iter()
        .zip(p.spec_samples())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    checks.push(CheckRecord::below("round-trip-sup", err, 1e-10));

    Ok(category("transform fidelity", checks))
}

// [2] stable laws satisfy D_{lam-1} w + (x/lam) w = 0
fn score_identity(grid: &std::sync::Arc<Grid>, lams: &[f64]) -> Result<CategoryResult> {
    let mut checks = Vec::new();
    for &lam in lams {
        let w = Density::levy(grid, lam)?;
        let dv = w.d_est(lam - 1.0);
        let f = w.f_est();
        let sup = grid
            .xs()
            .iter()
            .enumerate()
            .filter(|(_, x)| x.abs() <= 20.0)
            .map(|(i, &x)| (dv[i] + x / lam * f[i]).abs())
            .fold(0.0, f64::max);
        checks.push(CheckRecord::below(format!("score-identity-{lam}"), sup, 1e-5));
    }
    Ok(category("fractional score identity", checks))
}

// [3] closed-form entropy and Fisher values
fn golden_functionals(grid: &std::sync::Arc<Grid>, lams: &[f64]) -> Result<CategoryResult> {
    let mut checks = Vec::new();

    let h_gauss = shannon_entropy(&Density::gaussian(grid, 1.0)?);
    let want = 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E).ln();
    checks.push(CheckRecord::below(
        "entropy-gaussian-abs",
        (h_gauss - want).abs(),
        1e-6,
    ));

    for sigma in [1.0, 2.0] {
        let i = fisher_information(&Density::gaussian(grid, sigma)?);
        checks.push(CheckRecord::below(
            format!("fisher-gaussian-{sigma}-abs"),
            (i - 1.0 / sigma).abs(),
            1e-6,
        ));
    }

    let h_lapl = shannon_entropy(&Density::laplace(grid));
    checks.push(CheckRecord::below(
        "entropy-laplace-abs",
        (h_lapl - (1.0 + 2f64.ln())).abs(),
        1e-5,
    ));

    for &lam in lams {
        let w = Density::levy(grid, lam)?;
        checks.push(CheckRecord::below(
            format!("frac-fisher-stable-{lam}"),
            fractional_relative_fisher(&w, 1.0).abs(),
            1e-5,
        ));
    }

    Ok(category("golden functionals", checks))
}

// [4] fractional Blachman-Stam on the 3x3 corpus + the smoothing form
fn convolution_inequalities(grid: &std::sync::Arc<Grid>, lams: &[f64]) -> Result<CategoryResult> {
    let mut checks = Vec::new();
    for &lam in lams {
        let p = Density::linnik_fourier(grid, lam)?;
        for eps in [0.1, 0.5, 0.9] {
            let bs = blachman_stam_check(&p, &p, eps)?;
            checks.push(CheckRecord::verdict(
                format!("blachman-stam-{lam}-eps{eps}"),
                bs.lhs,
                bs.rhs,
                bs.pass,
            ));
            let sm = smoothing_form_check(&p, eps)?;
            checks.push(CheckRecord::verdict(
                format!("smoothing-{lam}-eps{eps}"),
                sm.lhs,
                sm.rhs,
                sm.pass,
            ));
        }
    }
    Ok(category("convolution inequalities", checks))
}

// [5] cascade Fisher monotonicity, step/cumulative bounds, fitted rate
fn fisher_monotonicity(grid: &std::sync::Arc<Grid>, lams: &[f64]) -> Result<CategoryResult> {
    let mut checks = Vec::new();
    for &lam in lams {
        let p = Density::linnik_fourier(grid, lam)?;
        match fisher_monotonicity_sweep(&p, 64) {
            Ok(sweep) => {
                let all = sweep.ratio_checks.iter().all(|c| c.pass);
                checks.push(CheckRecord::verdict(
                    format!("fisher-steps-{lam}"),
                    sweep.ratio_checks.len() as f64,
                    sweep.ratio_checks.len() as f64,
                    all,
                ));
                let slope_cap = -(2.0 - lam) / lam + 0.05;
                checks.push(CheckRecord::below(
                    format!("fisher-rate-{lam}"),
                    sweep.rate_fit,
                    slope_cap,
                ));
                // the classical Fisher information stays uniformly bounded
                // along the cascade: three-fold TV bound, rescaled
                let tvb = tv_fisher_bound_check(&p)?;
                checks.push(CheckRecord::verdict(
                    format!("three-fold-tv-{lam}"),
                    tvb.lhs,
                    tvb.rhs,
                    tvb.pass,
                ));
                let max_i = sweep.reports.iter().map(|r| r.fisher).fold(0.0, f64::max);
                checks.push(CheckRecord::below(
                    format!("uniform-fisher-{lam}"),
                    max_i,
                    3f64.powf(2.0 / lam) * tvb.rhs + 1e-6,
                ));
            }
            Err(_) => checks.push(CheckRecord::verdict(
                format!("fisher-steps-{lam}"),
                f64::NAN,
                0.0,
                false,
            )),
        }
    }
    Ok(category("fisher monotonicity and rate", checks))
}

// [6] entropy-Fisher inequality across the corpus and the cascade
fn entropy_fisher_inequality(grid: &std::sync::Arc<Grid>, lams: &[f64]) -> Result<CategoryResult> {
    let mut checks = Vec::new();
    for &lam in lams {
        let w = Density::levy(grid, lam)?;
        let p = Density::linnik_fourier(grid, lam)?;

        let mut corpus: Vec<(String, Density)> = vec![(format!("linnik-{lam}"), p)];
        for n in [2u32, 8, 64] {
            let base = Density::linnik_fourier(grid, lam)?;
            corpus.push((format!("cascade{n}-{lam}"), normalized_sum(&base, n)?));
        }
        for t in [0.4, 3.2] {
            let base = Density::linnik_fourier(grid, lam)?;
            corpus.push((format!("evolved{t}-{lam}"), evolve(&base, t)?));
        }

        for (name, d) in &corpus {
            let chk = log_sobolev_check(d, &w)?;
            checks.push(CheckRecord::verdict(
                format!("entropy-fisher-{name}"),
                chk.lhs,
                chk.rhs,
                chk.pass,
            ));
        }

        // equality case: both sides vanish at the stable law
        let chk = log_sobolev_check(&w, &w)?;
        checks.push(CheckRecord::verdict(
            format!("entropy-fisher-stable-{lam}"),
            chk.lhs,
            1e-8,
            chk.pass && chk.lhs < 1e-8,
        ));
    }
    Ok(category("entropy-Fisher inequality", checks))
}

// [7] dH/dt = -entropy production along the flow; lam = 2 reduction
fn entropy_production(grid: &std::sync::Arc<Grid>, lams: &[f64]) -> Result<CategoryResult> {
    let mut checks = Vec::new();
    for &lam in lams {
        let p = Density::linnik_fourier(grid, lam)?;
        let schedule = EvolutionSchedule::default_times(lam)?;
        let traj = entropy_trajectory(&p, &schedule)?;
        let worst = traj
            .reports
            .iter()
            .zip(&traj.dhdt_residuals)
            .map(|(r, &resid)| resid / (1.0 + r.entropy_production.abs()))
            .fold(0.0, f64::max);
        checks.push(CheckRecord::below(
            format!("production-identity-{lam}"),
            worst,
            1e-3,
        ));
    }

    // boundary order: the flow becomes the classical relation
    // dH(f_t|w_2)/dt = -I(f_t|w_2)
    let phi = Density::gaussian(grid, 1.0)?;
    let w2 = Density::levy(grid, 2.0)?;
    let h_at = |t: f64| -> Result<f64> { relative_entropy(&evolve(&phi, t)?, &w2) };
    for t in [0.3, 1.0] {
        let dt = 1e-3;
        let dh = (h_at(t + dt)? - h_at(t - dt)?) / (2.0 * dt);
        let i_rel = relative_fisher(&evolve(&phi, t)?, &w2)?;
        checks.push(CheckRecord::below(
            format!("classical-reduction-t{t}"),
            (dh + i_rel).abs(),
            1e-4,
        ));
    }
    Ok(category("entropy production identity", checks))
}

// [8] entropy decay along the cascade + Csiszar-Kullback + rate
fn entropy_decay(grid: &std::sync::Arc<Grid>, lams: &[f64]) -> Result<CategoryResult> {
    let mut checks = Vec::new();
    for &lam in lams {
        let p = Density::linnik_fourier(grid, lam)?;
        match entropy_decay_sweep(&p, 64) {
            Ok(sweep) => {
                let all = sweep.ratio_checks.iter().all(|c| c.pass);
                checks.push(CheckRecord::verdict(
                    format!("entropy-chain-{lam}"),
                    sweep.ratio_checks.len() as f64,
                    sweep.ratio_checks.len() as f64,
                    all,
                ));
                let slope_cap = -(2.0 - lam) / (2.0 * lam) + 0.05;
                checks.push(CheckRecord::below(
                    format!("entropy-rate-{lam}"),
                    sweep.rate_fit,
                    slope_cap,
                ));
                checks.push(CheckRecord::below(
                    format!("entropy-terminal-{lam}"),
                    sweep.reports.last().map(|r| r.rel_entropy).unwrap_or(f64::NAN),
                    1e-3,
                ));
            }
            Err(_) => checks.push(CheckRecord::verdict(
                format!("entropy-chain-{lam}"),
                f64::NAN,
                0.0,
                false,
            )),
        }
    }
    Ok(category("entropy decay and Csiszar-Kullback", checks))
}

// [9] spectral integrability threshold, uniform Sobolev bound, interpolation
fn sobolev_machinery(grid: &std::sync::Arc<Grid>, lams: &[f64]) -> Result<CategoryResult> {
    let mut checks = Vec::new();
    for &lam in lams {
        let p = Density::linnik_fourier(grid, lam)?;
        let threshold = 2.0 * 2.0 / lam; // k = 1
        let (_, above) = con23_checker(&p, threshold * 1.2, 1)?;
        let (_, below) = con23_checker(&p, threshold * 0.8, 1)?;
        checks.push(CheckRecord::verdict(
            format!("integrability-threshold-{lam}"),
            if above { 1.0 } else { 0.0 },
            1.0,
            above && !below,
        ));

        for k in [0u32, 1] {
            let chk = uniform_sobolev_check(&p, 64, k)?;
            checks.push(CheckRecord::verdict(
                format!("uniform-sobolev-{lam}-k{k}"),
                chk.lhs,
                chk.rhs,
                chk.pass,
            ));
            let chk = interpolation_check(&p, 8, k)?;
            checks.push(CheckRecord::verdict(
                format!("interpolation-{lam}-k{k}"),
                chk.lhs,
                chk.rhs,
                chk.pass,
            ));
        }
    }
    Ok(category("Sobolev machinery", checks))
}
