//! Artifact serialization: CSV tables and JSON summaries.
//!
//! Everything here is a pure function of the numerical inputs — no
//! timestamps, no environment probes, no map iteration order — so a rerun
//! with the same configuration produces byte-identical files.

use std::fmt::Write as _;

use serde_json::{json, Value};

use crate::cascade::SweepResult;
use crate::evolve::Trajectory;
use crate::transforms::{DensitySample, Spectrum};

// 16 significant-digit scientific notation: enough to round-trip f64
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV of density samples, columns `x,f`.
pub fn density_csv(d: &DensitySample) -> String {
    let mut out = String::with_capacity(48 * d.values.len() + 16);
    out.push_str("x,f\n");
    for (x, f) in d.grid.xs().iter().zip(&d.values) {
        let _ = writeln!(out, "{},{}", num(*x), num(*f));
    }
    out
}

/// CSV of spectrum samples, columns `xi,re,im`.
pub fn spectrum_csv(s: &Spectrum) -> String {
    let mut out = String::with_capacity(72 * s.values.len() + 16);
    out.push_str("xi,re,im\n");
    for (xi, v) in s.grid.xis().iter().zip(&s.values) {
        let _ = writeln!(out, "{},{},{}", num(*xi), num(v.re), num(v.im));
    }
    out
}

/// CSV of an evolution trajectory, one row per scheduled time, columns
/// `t,H_rel,I,I_lambda,Ibar,dHdt_residual`.
pub fn trajectory_csv(t: &Trajectory) -> String {
    let mut out = String::from("t,H_rel,I,I_lambda,Ibar,dHdt_residual\n");
    for (i, time) in t.schedule.times.iter().enumerate() {
        let r = &t.reports[i];
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            num(*time),
            num(r.rel_entropy),
            num(r.fisher),
            num(r.frac_fisher_lambda),
            num(r.entropy_production),
            num(t.dhdt_residuals[i]),
        );
    }
    out
}

/// CSV of a cascade sweep, one row per level, columns
/// `n,H_rel,I,I_lambda,l1,tv,hk0,hk1,bound_ratio,pass`.
///
/// `bound_ratio` is measured/bound for the check attached to that level;
/// levels without a check (the base of a step-wise family) get ratio 0 and
/// pass by convention.
pub fn sweep_csv(s: &SweepResult) -> String {
    let mut out = String::from("n,H_rel,I,I_lambda,l1,tv,hk0,hk1,bound_ratio,pass\n");
    for (i, &n) in s.n_values.iter().enumerate() {
        let r = &s.reports[i];
        let (ratio, pass) = match s.ratio_checks.iter().find(|c| c.n == n) {
            Some(c) if c.bound != 0.0 => (c.measured / c.bound, c.pass),
            Some(c) => (c.measured, c.pass),
            None => (0.0, true),
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            n,
            num(r.rel_entropy),
            num(r.fisher),
            num(r.frac_fisher_lambda),
            num(r.l1),
            num(r.tv),
            num(r.sobolev_k0),
            num(r.sobolev_k1),
            num(ratio),
            pass,
        );
    }
    out
}

/// JSON summary of a sweep: fitted decay slope, the per-level checks, and
/// the aggregate verdict.
pub fn sweep_summary(s: &SweepResult) -> Value {
    json!({
        "n_values": s.n_values,
        "rate_fit": s.rate_fit,
        "ratio_checks": s.ratio_checks,
        "all_passed": s.ratio_checks.iter().all(|c| c.pass),
    })
}

/// Pretty-printed JSON with a trailing newline (serde_json orders object
/// keys, so output is stable).
pub fn json_string(v: &Value) -> String {
    let mut out = serde_json::to_string_pretty(v).expect("report values are valid JSON");
    out.push('\n');
    out
}
