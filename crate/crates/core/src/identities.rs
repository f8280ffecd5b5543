//! Transform identities linking the parameter measure to the law of the
//! mean: the order-a Stieltjes transform (Markov-Krein), its order-c
//! generalization through a Beta mixture or a loop contour, and the
//! finite-support product/mixture consistency checks.

use num_complex::Complex64;
use statrs::function::gamma::ln_gamma;
use thiserror::Error;

use crate::measure::ParameterMeasure;
use crate::quad::{
    integrate_interval, integrate_loop01, pow_w_minus_one_loop, Endpoint, QuadError,
    QuadratureConfig,
};
use crate::zeta::{zeta, ZetaError};

#[derive(Debug, Error)]
pub enum IdentityError {
    #[error("log-moment of the parameter measure is infinite; the mean is a.s. infinite")]
    InfiniteLogMoment,
    #[error("order parameter must be strictly positive, got {0}")]
    BadOrder(f64),
    #[error(transparent)]
    Zeta(#[from] ZetaError),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error("{0}")]
    Input(String),
}

/// The mixing weight `B(du; c, a-c)`: the Beta(c, a-c) probability on [0,1],
/// degenerating to the point mass at 1 when `a = c`. Also carries the
/// complex kernel `b(w; c, a-c)`.
#[derive(Debug, Clone, Copy)]
pub struct BetaWeight {
    pub c: f64,
    pub a_minus_c: f64,
}

impl BetaWeight {
    pub fn new(c: f64, a_minus_c: f64) -> Result<Self, IdentityError> {
        if !(c > 0.0) {
            return Err(IdentityError::BadOrder(c));
        }
        if a_minus_c < 0.0 {
            return Err(IdentityError::Input(format!(
                "BetaWeight needs a - c >= 0, got {a_minus_c}"
            )));
        }
        Ok(BetaWeight { c, a_minus_c })
    }

    /// Point mass at 1 (the `a = c` case).
    pub fn is_degenerate(&self) -> bool {
        self.a_minus_c == 0.0
    }

    /// `ln Gamma(a) - ln Gamma(c) - ln Gamma(a-c)`, the log normalization.
    pub fn log_norm(&self) -> f64 {
        ln_gamma(self.c + self.a_minus_c) - ln_gamma(self.c) - ln_gamma(self.a_minus_c)
    }

    /// Beta density on (0, 1); callers handle the degenerate case.
    pub fn density(&self, u: f64) -> f64 {
        self.log_norm().exp() * u.powf(self.c - 1.0) * (1.0 - u).powf(self.a_minus_c - 1.0)
    }

    /// Endpoint exponents of the density at 0 and 1.
    pub fn exponents(&self) -> (f64, f64) {
        (self.c - 1.0, self.a_minus_c - 1.0)
    }
}

/// Structural shortcut for measures whose families all have finite
/// log-moment (every representable family does; custom tables are bounded).
pub(crate) fn ensure_log_moment(alpha: &ParameterMeasure) -> Result<(), IdentityError> {
    if alpha.total_mass() <= 0.0 {
        return Err(IdentityError::Input("measure must have positive total mass".into()));
    }
    Ok(())
}

/// Markov-Krein transform: `exp{-zeta(it; alpha, I)}`, the value of
/// `int (1 + i t x)^{-a} mu_alpha(dx)` without knowing `mu_alpha`.
pub fn mk_transform(
    t: f64,
    alpha: &ParameterMeasure,
    cfg: &QuadratureConfig,
) -> Result<Complex64, IdentityError> {
    ensure_log_moment(alpha)?;
    if t == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let z = zeta(Complex64::new(0.0, t), alpha, cfg)?;
    Ok((-z).exp())
}

/// Generalized Stieltjes transform of order `c`:
/// `int (1 + i t x)^{-c} mu_alpha(dx)` computed from the parameter measure.
///
/// `a >= c`: Beta-mixture quadrature over [0, 1] (point mass at 1 for a = c);
/// `c > a`: loop-contour form with prefactor
/// `Gamma(c-a+1) Gamma(a) / (2 pi i Gamma(c))`, evaluated in log-Gamma space.
pub fn lauricella_stieltjes(
    t: f64,
    alpha: &ParameterMeasure,
    c: f64,
    cfg: &QuadratureConfig,
) -> Result<Complex64, IdentityError> {
    ensure_log_moment(alpha)?;
    if !(c > 0.0) {
        return Err(IdentityError::BadOrder(c));
    }
    let a = alpha.total_mass();
    if c == a {
        // B degenerates to delta_1: exact branch, same code path as the
        // Markov-Krein transform
        return mk_transform(t, alpha, cfg);
    }
    if t == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    if c < a {
        let weight = BetaWeight::new(c, a - c)?;
        let norm = weight.log_norm().exp();
        let (p0, p1) = weight.exponents();
        let f = |u: f64| {
            let z = zeta(Complex64::new(0.0, u * t), alpha, cfg)
                .unwrap_or(Complex64::new(f64::NAN, 0.0));
            (-z).exp() * norm * u.powf(p0) * (1.0 - u).powf(p1)
        };
        let (v, _) = integrate_interval(f, 0.0, 1.0, Endpoint::Power(p0), Endpoint::Power(p1), cfg)?;
        Ok(v)
    } else {
        // c > a: loop around [0, 1]; singularities of the zeta factor sit on
        // the imaginary axis, away from the legs (slope <= 1/3)
        let beta = a - c - 1.0;
        let h = |w: Complex64| {
            let z = zeta(Complex64::new(0.0, t) * w, alpha, cfg)
                .unwrap_or(Complex64::new(f64::NAN, 0.0));
            (-z).exp() * w.powf(c - 1.0) * pow_w_minus_one_loop(w, beta)
        };
        let eps = cfg.loop_eps.min(0.25);
        let tau = cfg.loop_tau.min((1.0 - eps) / 3.0);
        let (loop_val, _) = integrate_loop01(h, c - 1.0, eps, tau, tau, cfg)?;
        // Gamma(c-a+1) Gamma(a) / (2 pi i Gamma(c)) in log space
        let log_pref = ln_gamma(c - a + 1.0) + ln_gamma(a) - ln_gamma(c);
        let pref = log_pref.exp() / (2.0 * std::f64::consts::PI);
        // division by i rotates by -pi/2
        Ok(loop_val * Complex64::new(0.0, -1.0) * pref)
    }
}

/// Two-sided finite-support check of the product/mixture identities.
///
/// Returns `(lhs, rhs)` where `lhs` is the Beta-mixture integral
/// `int_0^1 prod_k (1 - u x_k)^{-b_k} B(du; c, a-c)` and `rhs` is the
/// product form for `c = a` or a Monte Carlo Dirichlet average of
/// `(1 - <u, x>)^{-c}` with `Dirichlet(b_1..b_n, a - |b|)` weights otherwise.
pub fn fd_finite_check(
    a: f64,
    c: f64,
    b: &[f64],
    x: &[f64],
    cfg: &QuadratureConfig,
    mc_samples: usize,
    mc_seed: u64,
) -> Result<(Complex64, Complex64), IdentityError> {
    if b.len() != x.len() || b.is_empty() {
        return Err(IdentityError::Input("b and x must align and be nonempty".into()));
    }
    let b_sum: f64 = b.iter().sum();
    if b.iter().any(|&bk| !(bk > 0.0)) || b_sum > a {
        return Err(IdentityError::Input("need b_k > 0 and |b| <= a".into()));
    }
    if x.iter().any(|&xk| !(0.0..1.0).contains(&xk)) {
        return Err(IdentityError::Input("each x_k must lie in [0, 1)".into()));
    }
    if !(c > 0.0) || c > a {
        return Err(IdentityError::BadOrder(c));
    }

    let prod_at = |u: f64| -> Complex64 {
        let mut p = 1.0f64;
        for (bk, xk) in b.iter().zip(x.iter()) {
            p *= (1.0 - u * xk).powf(-bk);
        }
        Complex64::new(p, 0.0)
    };

    let lhs = if c == a {
        prod_at(1.0)
    } else {
        let weight = BetaWeight::new(c, a - c)?;
        let norm = weight.log_norm().exp();
        let (p0, p1) = weight.exponents();
        let f = |u: f64| prod_at(u) * norm * u.powf(p0) * (1.0 - u).powf(p1);
        let (v, _) =
            integrate_interval(f, 0.0, 1.0, Endpoint::Power(p0), Endpoint::Power(p1), cfg)?;
        v
    };

    let rhs = if c == a {
        prod_at(1.0)
    } else {
        // Dirichlet average of (1 - <u, x>)^{-c}, Dirichlet(b, a - |b|)
        let mut masses = b.to_vec();
        masses.push(a - b_sum);
        let x = x.to_vec();
        let (v, _) = crate::mc::dirichlet_average(
            &masses,
            move |u| {
                let dot: f64 = u.iter().zip(x.iter()).map(|(ui, xi)| ui * xi).sum();
                Complex64::new((1.0 - dot).powf(-c), 0.0)
            },
            mc_samples,
            mc_seed,
        )
        .map_err(|e| IdentityError::Input(e.to_string()))?;
        v
    };

    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn mk_examples() {
        // a delta_0 -> 1 for every t
        let m = ParameterMeasure::discrete(vec![(0.0, 2.7)]).unwrap();
        for t in [-2.0, 0.0, 0.4, 10.0] {
            let v = mk_transform(t, &m, &cfg()).unwrap();
            assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        }

        // t = 1, alpha = 2 delta_1 -> (1+i)^{-2} = -i/2
        let m = ParameterMeasure::discrete(vec![(1.0, 2.0)]).unwrap();
        let v = mk_transform(1.0, &m, &cfg()).unwrap();
        assert_relative_eq!(v.re, 0.0, epsilon = 1e-14);
        assert_relative_eq!(v.im, -0.5, epsilon = 1e-14);

        // t = 3, Cauchy(0,1) -> 1/(1+3) (residue oracle)
        let m = ParameterMeasure::cauchy(0.0, 1.0).unwrap();
        let v = mk_transform(3.0, &m, &cfg()).unwrap();
        assert_relative_eq!(v.re, 0.25, epsilon = 1e-12);
        assert_relative_eq!(v.im, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn mk_conjugation() {
        let m = ParameterMeasure::discrete(vec![(1.0, 0.5), (-0.7, 1.2)]).unwrap();
        for t in [0.3, 1.7, 4.0] {
            let p = mk_transform(t, &m, &cfg()).unwrap();
            let n = mk_transform(-t, &m, &cfg()).unwrap();
            assert!((p.conj() - n).norm() < 1e-13);
        }
    }

    #[test]
    fn lauricella_degenerate_and_zero_measure_cases() {
        // c = a reduces exactly to the Markov-Krein transform
        let m = ParameterMeasure::discrete(vec![(1.0, 1.2), (-0.5, 0.8)]).unwrap();
        let a = m.total_mass();
        let v1 = lauricella_stieltjes(0.9, &m, a, &cfg()).unwrap();
        let v2 = mk_transform(0.9, &m, &cfg()).unwrap();
        assert_eq!(v1, v2);

        // alpha = a delta_0: transform is 1 for every c (both branches)
        let m = ParameterMeasure::discrete(vec![(0.0, 1.5)]).unwrap();
        for c in [0.5, 1.5, 2.5, 4.0] {
            let v = lauricella_stieltjes(1.3, &m, c, &cfg()).unwrap();
            assert!(
                (v - Complex64::new(1.0, 0.0)).norm() < 1e-7,
                "c = {c}: {v}"
            );
        }
    }

    #[test]
    fn lauricella_two_point_uniform_against_direct_quadrature() {
        // alpha = delta_1 + delta_0 makes mu_alpha uniform on (0,1);
        // the order-1 transform is int_0^1 (1 + i t x)^{-1} dx
        let m = ParameterMeasure::discrete(vec![(0.0, 1.0), (1.0, 1.0)]).unwrap();
        let t = 1.0;
        let oracle = {
            // int_0^1 dx/(1 + i x) = [log(1 + i x)]_0^1 / i = -i log(1+i)
            let v = Complex64::new(1.0, 1.0).ln() * Complex64::new(0.0, -1.0);
            v
        };
        let v = lauricella_stieltjes(t, &m, 1.0, &cfg()).unwrap();
        assert!((v - oracle).norm() < 1e-8, "{v} vs {oracle}");
    }

    #[test]
    fn lauricella_continuity_across_c_at_a() {
        // a = 2: c -> 2^- converges to the c = a branch
        let m = ParameterMeasure::discrete(vec![(0.0, 1.0), (1.0, 1.0)]).unwrap();
        let t = 1.4;
        let exact = mk_transform(t, &m, &cfg()).unwrap();
        let near = lauricella_stieltjes(t, &m, 2.0 - 1e-3, &cfg()).unwrap();
        assert!((exact - near).norm() < 1e-2, "{exact} vs {near}");
        let nearer = lauricella_stieltjes(t, &m, 2.0 - 1e-5, &cfg()).unwrap();
        assert!((exact - nearer).norm() < 1e-4, "{exact} vs {nearer}");
    }

    #[test]
    fn lauricella_loop_vs_mixture_consistency() {
        // same transform reached from both sides of c = a on a two-point
        // measure: compare c slightly below vs above against each other
        // through the c-analytic family by checking both against MC
        let m = ParameterMeasure::discrete(vec![(0.3, 1.0), (0.9, 1.0)]).unwrap();
        let t = 0.8;
        let c_transform = |c: f64| lauricella_stieltjes(t, &m, c, &cfg()).unwrap();

        // Monte Carlo oracle for int (1+itx)^{-c} mu(dx): Dirichlet average
        let oracle = |c: f64| {
            let (v, se) = crate::mc::dirichlet_average(
                &[1.0, 1.0],
                move |u| {
                    let mean = 0.3 * u[0] + 0.9 * u[1];
                    let base = Complex64::new(1.0, t * mean);
                    base.powf(-c)
                },
                200_000,
                17,
            )
            .unwrap();
            (v, se)
        };
        for c in [1.3, 2.0, 3.1] {
            let v = c_transform(c);
            let (mc, se) = oracle(c);
            assert!((v - mc).norm() < 4.0 * se + 1e-4, "c={c}: {v} vs {mc} (se {se})");
        }
    }

    #[test]
    fn fd_product_form() {
        // n=1, b=(2), x=(0): both sides 1
        let (l, r) = fd_finite_check(3.0, 3.0, &[2.0], &[0.0], &cfg(), 1000, 1).unwrap();
        assert_eq!(l, r);
        assert!((l - Complex64::new(1.0, 0.0)).norm() < 1e-14);

        // n=2, a=c=3: product (1-x1)^{-b1} (1-x2)^{-b2} = 8/3
        let (l, r) =
            fd_finite_check(3.0, 3.0, &[1.0, 1.0], &[0.5, 0.25], &cfg(), 1000, 1).unwrap();
        assert_relative_eq!(l.re, 8.0 / 3.0, epsilon = 1e-12);
        assert_eq!(l, r);
    }

    #[test]
    fn fd_mixture_vs_dirichlet_average() {
        // n=2, a=3, c=1: Beta(1,2) mixture vs Dirichlet(1,1,1) MC average
        let (l, r) =
            fd_finite_check(3.0, 1.0, &[1.0, 1.0], &[0.5, 0.25], &cfg(), 400_000, 123).unwrap();
        assert!((l - r).norm() < 5e-3, "lhs {l} rhs {r}");
    }

    #[test]
    fn fd_rejects_bad_input() {
        assert!(fd_finite_check(1.0, 1.0, &[2.0], &[0.5], &cfg(), 10, 1).is_err()); // |b| > a
        assert!(fd_finite_check(3.0, 1.0, &[1.0], &[1.0], &cfg(), 10, 1).is_err()); // x = 1
        assert!(fd_finite_check(3.0, 0.0, &[1.0], &[0.5], &cfg(), 10, 1).is_err()); // c = 0
    }
}
