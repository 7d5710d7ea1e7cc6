//! Riesz fractional derivative as the odd Fourier multiplier
//! i sign(xi) |xi|^nu, Riesz potentials, and the masked score functions.

use rustfft::num_complex::Complex64;

use crate::density::Density;
use crate::error::{LabError, Result};
use crate::transforms::{forward_transform, inverse_complex, DensitySample, Spectrum};

/// density floor as a fraction of the peak; nodes below it are excluded from
/// score ratios and score-weighted integrals
pub(crate) const FLOOR_FRAC: f64 = 1e-12;

fn check_order(nu: f64) -> Result<()> {
    if nu > 0.0 && nu < 1.0 {
        Ok(())
    } else {
        Err(LabError::Config(format!("fractional order must lie in (0, 1), got {nu}")))
    }
}

/// apply i sign(xi) |xi|^nu on the dual grid (0 at xi = 0)
pub fn riesz_multiplier(s: &Spectrum, nu: f64) -> Spectrum {
    let values = s
        .grid
        .xis()
        .iter()
        .zip(&s.values)
        .map(|(&xi, &v)| Complex64::new(0.0, xi.signum() * xi.abs().powf(nu)) * v)
        .collect();
    Spectrum { grid: s.grid.clone(), values }
}

/// apply the even Riesz-potential weight |xi|^nu on the dual grid
pub fn modulus_multiplier(s: &Spectrum, nu: f64) -> Spectrum {
    let values = s
        .grid
        .xis()
        .iter()
        .zip(&s.values)
        .map(|(&xi, &v)| xi.abs().powf(nu) * v)
        .collect();
    Spectrum { grid: s.grid.clone(), values }
}

/// D_nu of a constructed density through its own spectrum, with the
/// beyond-Nyquist completion and image subtraction applied
pub fn riesz_derivative(d: &Density, nu: f64) -> Result<Vec<f64>> {
    check_order(nu)?;
    Ok(d.d_est(nu).as_ref().clone())
}

/// D_nu of raw samples: forward transform, multiplier, inverse. Accuracy is
/// limited by the window truncation of the samples themselves.
pub fn riesz_derivative_sampled(f: &DensitySample, nu: f64) -> Result<Vec<f64>> {
    check_order(nu)?;
    let sp = forward_transform(f);
    let m = riesz_multiplier(&sp, nu);
    let complex = inverse_complex(&f.grid, &m.values);
    let residue = complex.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
    if residue > 1e-6 {
        return Err(LabError::SymmetryViolation { residue });
    }
    Ok(complex.iter().map(|c| c.re).collect())
}

/// pointwise ratio restricted to nodes above the density floor
#[derive(Debug, Clone)]
pub struct MaskedScore {
    /// ratio values; exactly 0 at masked nodes
    pub values: Vec<f64>,
    pub mask: Vec<bool>,
    pub masked_fraction: f64,
}

pub(crate) fn masked_ratio(num: &[f64], den: &[f64]) -> Result<MaskedScore> {
    let fmax = den.iter().fold(0.0_f64, |a, &b| a.max(b));
    if !(fmax > 0.0) {
        return Err(LabError::DegenerateMask);
    }
    let floor = FLOOR_FRAC * fmax;
    let mut masked = 0usize;
    let mut values = Vec::with_capacity(den.len());
    let mut mask = Vec::with_capacity(den.len());
    for (&n, &d) in num.iter().zip(den) {
        if d >= floor && d > 0.0 {
            values.push(n / d);
            mask.push(true);
        } else {
            values.push(0.0);
            mask.push(false);
            masked += 1;
        }
    }
    if masked == den.len() {
        return Err(LabError::DegenerateMask);
    }
    Ok(MaskedScore { values, mask, masked_fraction: masked as f64 / den.len() as f64 })
}

/// D_nu f / f above the floor
pub fn fractional_score(d: &Density, nu: f64) -> Result<MaskedScore> {
    check_order(nu)?;
    let num = d.d_est(nu);
    masked_ratio(&num, d.f_est())
}

/// f' / f above the floor, with f' computed spectrally
pub fn classical_score(d: &Density) -> Result<MaskedScore> {
    masked_ratio(d.fp_est(), d.f_est())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use approx::assert_abs_diff_eq;
    use std::sync::Arc;

    fn grid(n: usize, l: f64) -> Arc<Grid> {
        Grid::new(n, l).unwrap()
    }

    #[test]
    fn rejects_out_of_range_order() {
        let g = grid(1024, 50.0);
        let w = Density::levy(&g, 1.5).unwrap();
        assert!(riesz_derivative(&w, 0.0).is_err());
        assert!(riesz_derivative(&w, 1.0).is_err());
        assert!(riesz_derivative(&w, -0.3).is_err());
        assert!(fractional_score(&w, 1.2).is_err());
    }

    #[test]
    fn stable_law_satisfies_the_score_identity() {
        // D_{lam-1} omega = -(x/lam) omega
        let g = grid(1 << 14, 100.0);
        let lam = 1.5;
        let w = Density::levy(&g, lam).unwrap();
        let d = riesz_derivative(&w, lam - 1.0).unwrap();
        let f = w.f_est();
        let mut sup20 = 0.0_f64;
        let mut sup_all = 0.0_f64;
        for (j, &x) in g.xs().iter().enumerate() {
            let r = (d[j] + x / lam * f[j]).abs();
            sup_all = sup_all.max(r);
            if x.abs() <= 20.0 {
                sup20 = sup20.max(r);
            }
        }
        assert!(sup20 < 1e-6, "sup residual on |x|<=20: {sup20}");
        assert!(sup_all < 1e-9, "sup residual everywhere: {sup_all}");
    }

    #[test]
    fn near_integer_order_approaches_classical_derivative() {
        let g = grid(1 << 13, 60.0);
        let d = Density::gaussian(&g, 2.0).unwrap();
        let dn = riesz_derivative(&d, 0.999).unwrap();
        let sup = dn
            .iter()
            .zip(g.xs())
            .zip(d.f_est())
            .map(|((&v, &x), &f)| (v - (-(x / 2.0) * f)).abs())
            .fold(0.0, f64::max);
        assert!(sup < 1e-2, "sup distance to f': {sup}");
    }

    #[test]
    fn sampled_route_output_is_odd_for_even_input() {
        let g = grid(1 << 12, 60.0);
        let narrow = Density::gaussian(&g, 0.01).unwrap().sample();
        let d = riesz_derivative_sampled(&narrow, 0.5).unwrap();
        let n = g.n;
        let sup = (1..n / 2)
            .map(|j| (d[j] + d[n - j]).abs())
            .fold(0.0, f64::max);
        assert!(sup < 1e-9, "odd-parity residue {sup}");
        assert_abs_diff_eq!(d[g.zero_index()], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn multipliers_compose() {
        let g = grid(1024, 50.0);
        let w = Density::levy(&g, 1.7).unwrap();
        let sp = w.spectrum();
        let a = modulus_multiplier(&riesz_multiplier(&sp, 0.3), 0.45);
        let b = riesz_multiplier(&sp, 0.75);
        let sup = a
            .values
            .iter()
            .zip(&b.values)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        assert!(sup < 1e-10, "composition mismatch {sup}");
    }

    #[test]
    fn sampled_route_is_linear() {
        let g = grid(1 << 12, 60.0);
        let f1 = Density::gaussian(&g, 1.0).unwrap().sample();
        let f2 = Density::gaussian(&g, 2.0).unwrap().sample();
        let mixed: Vec<f64> = f1
            .values
            .iter()
            .zip(&f2.values)
            .map(|(a, b)| 0.3 * a + 0.7 * b)
            .collect();
        let fm = DensitySample::from_values(&g, &mixed);
        let dm = riesz_derivative_sampled(&fm, 0.5).unwrap();
        let d1 = riesz_derivative_sampled(&f1, 0.5).unwrap();
        let d2 = riesz_derivative_sampled(&f2, 0.5).unwrap();
        let sup = dm
            .iter()
            .zip(d1.iter().zip(&d2))
            .map(|(&m, (&a, &b))| (m - (0.3 * a + 0.7 * b)).abs())
            .fold(0.0, f64::max);
        assert!(sup < 1e-12, "linearity residue {sup}");
    }

    #[test]
    fn score_ode_reproduces_the_stable_spectrum() {
        // phi' = -(1+nu) xi^nu phi integrated from phi(0) = 1 must land on
        // e^{-xi^{1+nu}}: the multiplier pins the law uniquely
        let nu = 0.5;
        let rhs = |xi: f64, phi: f64| -(1.0 + nu) * xi.abs().powf(nu) * phi;
        let h = 1e-4;
        let mut phi = 1.0_f64;
        let mut xi = 0.0_f64;
        let checkpoints = [0.5_f64, 1.0, 2.0, 5.0];
        let mut ci = 0;
        while ci < checkpoints.len() {
            let k1 = rhs(xi, phi);
            let k2 = rhs(xi + h / 2.0, phi + h / 2.0 * k1);
            let k3 = rhs(xi + h / 2.0, phi + h / 2.0 * k2);
            let k4 = rhs(xi + h, phi + h * k3);
            phi += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            xi += h;
            if (xi - checkpoints[ci]).abs() < h / 2.0 {
                let want = (-xi.powf(1.0 + nu)).exp();
                assert_abs_diff_eq!(phi, want, epsilon = 1e-6);
                ci += 1;
            }
        }
    }

    #[test]
    fn fractional_score_is_odd_with_small_mask() {
        let g = grid(1 << 14, 100.0);
        let p = Density::linnik_fourier(&g, 1.5).unwrap();
        let s = fractional_score(&p, 0.5).unwrap();
        assert_abs_diff_eq!(s.values[g.zero_index()], 0.0, epsilon = 1e-12);
        let n = g.n;
        let sup = (1..n / 2)
            .map(|j| (s.values[j] + s.values[n - j]).abs())
            .fold(0.0, f64::max);
        assert!(sup < 1e-6, "score parity residue {sup}");
        assert!(s.masked_fraction < 0.02, "masked fraction {}", s.masked_fraction);
    }

    #[test]
    fn stable_fractional_score_is_linear_in_x() {
        let g = grid(1 << 14, 100.0);
        let lam = 1.5;
        let w = Density::levy(&g, lam).unwrap();
        let s = fractional_score(&w, lam - 1.0).unwrap();
        let sup = g
            .xs()
            .iter()
            .zip(&s.values)
            .zip(&s.mask)
            .filter(|(_, &m)| m)
            .filter(|((&x, _), _)| x.abs() <= 20.0)
            .map(|((&x, &v), _)| (v + x / lam).abs())
            .fold(0.0, f64::max);
        assert!(sup < 1e-5, "score error {sup}");
    }

    #[test]
    fn gaussian_classical_score_accuracy_profile() {
        // spectral-derivative noise is an absolute ~1e-16 floor, so the
        // score error grows like eps/f toward the mask edge: the closed-form
        // comparison is exact where f is not vanishing, and the product
        // err * f stays at machine level on the whole unmasked set
        let g = grid(1 << 14, 100.0);
        let sigma = 2.0;
        let d = Density::gaussian(&g, sigma).unwrap();
        let s = classical_score(&d).unwrap();
        let f = d.f_est();
        let fmax = f.iter().fold(0.0_f64, |a, &b| a.max(b));
        let mut sup_inner = 0.0_f64;
        let mut sup_abs = 0.0_f64;
        for (j, &x) in g.xs().iter().enumerate() {
            if !s.mask[j] {
                continue;
            }
            let err = (s.values[j] + x / sigma).abs();
            sup_abs = sup_abs.max(err * f[j]);
            if f[j] >= 1e-7 * fmax {
                sup_inner = sup_inner.max(err);
            }
        }
        assert!(sup_inner < 1e-7, "inner-region score error {sup_inner}");
        assert!(sup_abs < 1e-14, "absolute derivative noise {sup_abs}");
    }

    #[test]
    fn laplace_classical_score_is_minus_sign() {
        let g = grid(1 << 14, 100.0);
        let d = Density::laplace(&g);
        let s = classical_score(&d).unwrap();
        let sup = g
            .xs()
            .iter()
            .enumerate()
            .filter(|&(j, &x)| s.mask[j] && x.abs() >= 3.0 * g.dx && x.abs() <= 20.0)
            .map(|(j, &x)| (s.values[j] + x.signum()).abs())
            .fold(0.0, f64::max);
        assert!(sup < 1e-3, "score error {sup}");
    }

    #[test]
    fn all_masked_is_an_error() {
        let g = grid(1024, 50.0);
        let zero = Density::from_samples(&g, 2.0, vec![0.0; g.n], None, None, None);
        assert!(matches!(classical_score(&zero), Err(LabError::DegenerateMask)));
    }
}
