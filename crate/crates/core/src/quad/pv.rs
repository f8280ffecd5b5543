//! Principal-value integrals along vertical lines.
//!
//! The value is the symmetric limit of integrals over `[gamma - iR, gamma + iR]`.
//! Truncation radii come from the configured schedule (doubling multiples of
//! 2 pi, so the `e^{iy}` phase at the cut points is pinned and the truncation
//! tail forms a near-geometric sequence); iterated Aitken acceleration then
//! extracts the limit. When the partial sums are already Cauchy well inside
//! the schedule the acceleration is a no-op.

use num_complex::Complex64;

use super::extrapolate::aitken_accelerate;
use super::gk::adaptive;
use super::{QuadError, QuadratureConfig};

/// PV integral of `g` over the vertical line `Re w = gamma`, oriented upward.
///
/// Returns `(value, err_est)`.
pub fn pv_vertical_line<F: FnMut(Complex64) -> Complex64>(
    mut g: F,
    gamma: f64,
    cfg: &QuadratureConfig,
) -> Result<(Complex64, f64), QuadError> {
    if !(gamma > 0.0) {
        return Err(QuadError::BadConfig(format!(
            "PV abscissa gamma = {gamma} must be strictly positive"
        )));
    }
    let schedule = &cfg.pv_r_schedule;
    if schedule.is_empty() {
        return Err(QuadError::BadConfig("empty pv_r_schedule".into()));
    }

    // f(y) dy parametrization of g(gamma + i y) * i, integrated in symmetric
    // pairs so each partial value corresponds to a symmetric truncation.
    let i = Complex64::new(0.0, 1.0);
    let band = |y0: f64, y1: f64, g: &mut F| -> Result<(Complex64, f64), QuadError> {
        let mut f = |y: f64| g(Complex64::new(gamma, y)) * i;
        match adaptive(&mut f, y0, y1, cfg.abs_tol, cfg.rel_tol, cfg.max_subdivisions) {
            Ok(ve) => Ok(ve),
            Err(QuadError::Tolerance { value, err_est }) => Ok((value, err_est)),
            Err(e) => Err(e),
        }
    };

    let mut partials = Vec::with_capacity(schedule.len());
    let mut quad_err: f64 = 0.0;
    let (v0, e0) = band(-schedule[0], schedule[0], &mut g)?;
    let mut acc = v0;
    quad_err += e0;
    partials.push(acc);
    for w in schedule.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let (vu, eu) = band(lo, hi, &mut g)?;
        let (vl, el) = band(-hi, -lo, &mut g)?;
        acc += vu + vl;
        quad_err += eu + el;
        partials.push(acc);
    }

    // Fast path: the tail already converged absolutely.
    let n = partials.len();
    if n >= 2 {
        let d_last = (partials[n - 1] - partials[n - 2]).norm();
        let scale = partials[n - 1].norm().max(1.0);
        if d_last <= (cfg.abs_tol).max(cfg.rel_tol * scale) {
            return Ok((partials[n - 1], d_last + quad_err));
        }
    }

    let (value, acc_err) = aitken_accelerate(&partials);
    let err_est = acc_err + quad_err;
    let scale = value.norm().max(1.0);
    if !value.re.is_finite() || !value.im.is_finite() {
        return Err(QuadError::Oscillatory { value, err_est });
    }
    if acc_err > 1e-3 * scale {
        return Err(QuadError::Oscillatory { value, err_est });
    }
    Ok((value, err_est))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use statrs::function::gamma::ln_gamma;
    use std::f64::consts::PI;

    #[test]
    fn residue_of_exp_over_w_squared() {
        // PV int e^w / w^2 dw over Re w = 1 equals 2 pi i (residue 1 at 0)
        let cfg = QuadratureConfig::default();
        let (v, _) = pv_vertical_line(|w| w.exp() / (w * w), 1.0, &cfg).unwrap();
        assert_relative_eq!(v.im, 2.0 * PI, epsilon = 1e-6);
        assert!(v.re.abs() < 1e-6);
    }

    #[test]
    fn residue_of_exp_over_w() {
        let cfg = QuadratureConfig::default();
        let (v, e) = pv_vertical_line(|w| w.exp() / w, 1.0, &cfg).unwrap();
        assert!((v.im - 2.0 * PI).abs() < 20.0 * e.max(1e-7), "im {} err {}", v.im, e);
        assert!(v.re.abs() < 20.0 * e.max(1e-7));
    }

    #[test]
    fn hankel_reciprocal_gamma() {
        // PV int e^w w^{-a} dw = 2 pi i / Gamma(a), principal branch, a = 1.7
        let a = 1.7;
        let cfg = QuadratureConfig::default();
        let (v, _) = pv_vertical_line(|w| w.exp() * w.powf(-a), 1.0, &cfg).unwrap();
        let oracle = 2.0 * PI / ln_gamma(a).exp();
        assert_relative_eq!(v.im, oracle, epsilon = 1e-6);
        assert!(v.re.abs() < 1e-6);
    }

    #[test]
    fn gamma_invariance() {
        // Cauchy's theorem: the PV value does not depend on the abscissa
        let a = 1.7;
        let cfg = QuadratureConfig::default();
        let (v1, e1) = pv_vertical_line(|w| w.exp() * w.powf(-a), 1.0, &cfg).unwrap();
        let (v2, e2) = pv_vertical_line(|w| w.exp() * w.powf(-a), 2.0, &cfg).unwrap();
        assert!((v1 - v2).norm() <= 10.0 * (e1 + e2).max(1e-8));
    }
}
