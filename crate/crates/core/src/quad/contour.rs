//! Discretized complex integration paths.
//!
//! A contour is an ordered list of parametrized pieces. The loop around
//! `[0, 1]` is built from two slanted segments that meet at the origin plus a
//! circular arc around 1; the segments touch the real axis only at the shared
//! origin endpoint, so branch functions that jump across the real axis left
//! of 1 stay continuous along the path while still picking up the sheet
//! change between the outgoing and returning legs.

use num_complex::Complex64;

use super::gk::adaptive;
use super::{QuadError, QuadratureConfig};

/// One parametrized piece of a contour.
#[derive(Debug, Clone)]
pub enum Segment {
    /// Straight segment from `z0` to `z1`.
    LineSegment { z0: Complex64, z1: Complex64 },
    /// Arc `center + radius e^{i theta}` with `theta` from `theta0` to `theta1`.
    CircularArc {
        center: Complex64,
        radius: f64,
        theta0: f64,
        theta1: f64,
    },
    /// Vertical principal-value line `Re w = gamma` with truncation schedule.
    VerticalPvLine { gamma: f64, r_schedule: Vec<f64> },
}

impl Segment {
    pub fn start(&self) -> Option<Complex64> {
        match self {
            Segment::LineSegment { z0, .. } => Some(*z0),
            Segment::CircularArc { center, radius, theta0, .. } => {
                Some(center + Complex64::from_polar(*radius, *theta0))
            }
            Segment::VerticalPvLine { .. } => None,
        }
    }

    pub fn end(&self) -> Option<Complex64> {
        match self {
            Segment::LineSegment { z1, .. } => Some(*z1),
            Segment::CircularArc { center, radius, theta1, .. } => {
                Some(center + Complex64::from_polar(*radius, *theta1))
            }
            Segment::VerticalPvLine { .. } => None,
        }
    }
}

/// An ordered list of endpoint-continuous pieces.
#[derive(Debug, Clone)]
pub struct Contour {
    pub segments: Vec<Segment>,
}

impl Contour {
    /// Checks endpoint continuity of consecutive pieces (PV lines stand
    /// alone and may not be mixed with other pieces).
    pub fn validate(&self) -> Result<(), QuadError> {
        if self.segments.is_empty() {
            return Err(QuadError::BadContour("empty contour".into()));
        }
        let has_pv = self
            .segments
            .iter()
            .any(|s| matches!(s, Segment::VerticalPvLine { .. }));
        if has_pv {
            if self.segments.len() != 1 {
                return Err(QuadError::BadContour(
                    "a PV line must be the only piece of its contour".into(),
                ));
            }
            return Ok(());
        }
        for w in self.segments.windows(2) {
            let e = w[0].end().unwrap();
            let s = w[1].start().unwrap();
            if (e - s).norm() > 1e-9 {
                return Err(QuadError::BadContour(format!(
                    "consecutive pieces are not endpoint-continuous: {e} vs {s}"
                )));
            }
        }
        Ok(())
    }

    /// True when the last endpoint returns to the first start point.
    pub fn is_closed(&self) -> bool {
        match (self.segments.first(), self.segments.last()) {
            (Some(f), Some(l)) => match (f.start(), l.end()) {
                (Some(a), Some(b)) => (a - b).norm() <= 1e-9,
                _ => false,
            },
            _ => None == Some(()),
        }
    }
}

/// The three pieces of the loop that starts and ends at the origin and
/// encircles 1: a slanted leg below the axis to `(1-eps) - i tau`, a circular
/// arc around 1 through `1 + r`, and the mirrored leg back to the origin.
///
/// Slopes of the two legs can differ (the inversion path needs asymmetric
/// clearance); `tau_lo` is the depth at the end of the lower leg, `tau_up`
/// the height at the start of the upper leg.
pub fn loop_pieces(eps: f64, tau_lo: f64, tau_up: f64) -> Vec<Segment> {
    let p_lo = Complex64::new(1.0 - eps, -tau_lo);
    let p_up = Complex64::new(1.0 - eps, tau_up);
    let one = Complex64::new(1.0, 0.0);
    let r_lo = (p_lo - one).norm();
    let r_up = (p_up - one).norm();
    // keep the arc a true circle: use the mean radius and land the legs on it
    let r = 0.5 * (r_lo + r_up);
    let scale_lo = r / r_lo;
    let scale_up = r / r_up;
    let a_lo = one + (p_lo - one) * scale_lo;
    let a_up = one + (p_up - one) * scale_up;
    let theta0 = (a_lo - one).arg(); // in (-pi, -pi/2)
    let theta1 = (a_up - one).arg(); // in (pi/2, pi)
    vec![
        Segment::LineSegment { z0: Complex64::new(0.0, 0.0), z1: a_lo },
        Segment::CircularArc { center: one, radius: r, theta0, theta1 },
        Segment::LineSegment { z0: a_up, z1: Complex64::new(0.0, 0.0) },
    ]
}

/// Loop contour around `[0, 1]` with the geometry from `cfg`.
pub fn build_loop_01(cfg: &QuadratureConfig) -> Result<Contour, QuadError> {
    if !(cfg.loop_eps > 0.0 && cfg.loop_eps < 1.0) {
        return Err(QuadError::BadContour(format!(
            "loop eps {} out of (0, 1)",
            cfg.loop_eps
        )));
    }
    if !(cfg.loop_tau > 0.0) {
        return Err(QuadError::BadContour(format!(
            "loop tau {} must be strictly positive",
            cfg.loop_tau
        )));
    }
    let c = Contour { segments: loop_pieces(cfg.loop_eps, cfg.loop_tau, cfg.loop_tau) };
    c.validate()?;
    Ok(c)
}

/// `(1 - w)^beta` with `arg(1 - w)` taken in `[0, 2pi)`.
///
/// Along the loop from the origin around 1 this is the continuous branch:
/// just below the segment `arg ~ 0`, on the arc it passes `pi` at `w = 1 + r`
/// without jumping, and on the return leg `arg ~ 2pi` realizes the factor
/// `e^{2 pi i beta}` picked up by encircling 1.
pub fn pow_one_minus_loop(w: Complex64, beta: f64) -> Complex64 {
    let z = Complex64::new(1.0, 0.0) - w;
    let mut th = z.arg();
    if th < 0.0 {
        th += 2.0 * std::f64::consts::PI;
    }
    Complex64::from_polar(z.norm().powf(beta), beta * th)
}

/// `(w - 1)^beta` with the principal argument: continuous along the loop
/// (its discontinuity line, the reals left of 1, is touched only at the
/// shared origin endpoint). Satisfies
/// `pow_one_minus_loop(w, b) = e^{i pi b} pow_w_minus_one_loop(w, b)`.
pub fn pow_w_minus_one_loop(w: Complex64, beta: f64) -> Complex64 {
    (w - Complex64::new(1.0, 0.0)).powf(beta)
}

/// Integral of `h` over the origin-anchored loop around 1, where `h` behaves
/// like `|w|^{pow_at_origin}` as `w -> 0` along the legs.
///
/// The caller's `h` must be branch-continuous along the path (use the
/// `pow_*_loop` helpers for the `(1-w)`/`(w-1)` factors).
pub fn integrate_loop01<F: Fn(Complex64) -> Complex64>(
    h: F,
    pow_at_origin: f64,
    eps: f64,
    tau_lo: f64,
    tau_up: f64,
    cfg: &QuadratureConfig,
) -> Result<(Complex64, f64), QuadError> {
    use super::interval::{integrate_interval, Endpoint};
    let pieces = loop_pieces(eps, tau_lo, tau_up);
    let origin_end = if pow_at_origin != 0.0 {
        Endpoint::Power(pow_at_origin)
    } else {
        Endpoint::Regular
    };
    let mut total = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    for seg in &pieces {
        match seg {
            Segment::LineSegment { z0, z1 } => {
                let d = *z1 - *z0;
                let from_origin = z0.norm() == 0.0;
                let anchor = if from_origin { *z0 } else { *z1 };
                // parametrize from the origin end so the declared power sits
                // at s = 0 in both legs
                let dir = if from_origin { d } else { -d };
                let base = anchor;
                let f = |s: f64| h(base + dir * s) * dir;
                let (v, e) =
                    integrate_interval(f, 0.0, 1.0, origin_end, Endpoint::Regular, cfg)?;
                if from_origin {
                    total += v;
                } else {
                    total -= v;
                }
                err += e;
            }
            Segment::CircularArc { center, radius, theta0, theta1 } => {
                let f = |th: f64| {
                    let e = Complex64::from_polar(*radius, th);
                    h(center + e) * Complex64::new(0.0, 1.0) * e
                };
                let (v, e) =
                    integrate_interval(f, *theta0, *theta1, Endpoint::Regular, Endpoint::Regular, cfg)?;
                total += v;
                err += e;
            }
            Segment::VerticalPvLine { .. } => unreachable!("loop_pieces emits no PV lines"),
        }
    }
    Ok((total, err))
}

/// Piecewise adaptive integral of `g` along the contour's parametrization.
///
/// The integrand is the caller's responsibility (including branch choices);
/// PV pieces are rejected here, use `pv_vertical_line` for those.
pub fn integrate_contour<F: FnMut(Complex64) -> Complex64>(
    mut g: F,
    contour: &Contour,
    cfg: &QuadratureConfig,
) -> Result<(Complex64, f64), QuadError> {
    contour.validate()?;
    let mut total = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    for seg in &contour.segments {
        let (v, e) = match seg {
            Segment::LineSegment { z0, z1 } => {
                let d = z1 - z0;
                let mut f = |s: f64| g(z0 + d * s) * d;
                adaptive(&mut f, 0.0, 1.0, cfg.abs_tol, cfg.rel_tol, cfg.max_subdivisions)?
            }
            Segment::CircularArc { center, radius, theta0, theta1 } => {
                let mut f = |th: f64| {
                    let e = Complex64::from_polar(*radius, th);
                    g(center + e) * Complex64::new(0.0, 1.0) * e
                };
                adaptive(&mut f, *theta0, *theta1, cfg.abs_tol, cfg.rel_tol, cfg.max_subdivisions)?
            }
            Segment::VerticalPvLine { .. } => {
                return Err(QuadError::BadContour(
                    "PV pieces are integrated by pv_vertical_line".into(),
                ))
            }
        };
        total += v;
        err += e;
    }
    Ok((total, err))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn loop_pieces_are_continuous_and_closed() {
        let cfg = QuadratureConfig { loop_eps: 0.1, loop_tau: 0.05, ..Default::default() };
        let c = build_loop_01(&cfg).unwrap();
        assert_eq!(c.segments.len(), 3);
        c.validate().unwrap();
        assert!(c.is_closed());
        for w in c.segments.windows(2) {
            let gap = (w[0].end().unwrap() - w[1].start().unwrap()).norm();
            assert!(gap < 1e-12, "gap {gap}");
        }
    }

    #[test]
    fn degenerate_tau_rejected() {
        let cfg = QuadratureConfig { loop_tau: 0.0, ..Default::default() };
        assert!(build_loop_01(&cfg).is_err());
    }

    #[test]
    fn constant_over_closed_loop_vanishes() {
        let cfg = QuadratureConfig::default();
        let c = build_loop_01(&cfg).unwrap();
        let (v, _) = integrate_contour(|_| Complex64::new(1.0, 0.0), &c, &cfg).unwrap();
        assert!(v.norm() < 1e-10, "got {v}");
    }

    #[test]
    fn cauchy_integral_unit_circle() {
        let cfg = QuadratureConfig::default();
        let circle = Contour {
            segments: vec![Segment::CircularArc {
                center: Complex64::new(0.0, 0.0),
                radius: 1.0,
                theta0: -PI,
                theta1: PI,
            }],
        };
        let (v, _) = integrate_contour(|w| 1.0 / w, &circle, &cfg).unwrap();
        assert_relative_eq!(v.im, 2.0 * PI, epsilon = 1e-10);
        assert!(v.re.abs() < 1e-10);
    }

    #[test]
    fn slater_loop_normalization() {
        // loop integral of w^{c-1} (w-1)^{a-c-1} = 2 pi i Gamma(c) / (Gamma(c-a+1) Gamma(a))
        // for c = 2, a = 0.5 the right side is 8i/3 (antiderivative check)
        let cfg = QuadratureConfig::default();
        let (c, a) = (2.0, 0.5);
        let h = |w: Complex64| w.powf(c - 1.0) * pow_w_minus_one_loop(w, a - c - 1.0);
        let (v, _) = integrate_loop01(h, c - 1.0, 0.25, 0.125, 0.125, &cfg).unwrap();
        assert_relative_eq!(v.im, 8.0 / 3.0, epsilon = 1e-8);
        assert!(v.re.abs() < 1e-8);

        // deformation invariance: halved geometry gives the same value
        let (v2, _) = integrate_loop01(h, c - 1.0, 0.125, 0.0625, 0.0625, &cfg).unwrap();
        assert!((v - v2).norm() < 1e-8);
    }

    #[test]
    fn loop_branch_helpers_are_consistent() {
        // (1-w)^b = e^{i pi b} (w-1)^b everywhere off the real axis
        let b = -2.3;
        for w in [Complex64::new(0.5, -0.1), Complex64::new(0.9, 0.2), Complex64::new(1.3, 0.01)] {
            let lhs = pow_one_minus_loop(w, b);
            let rhs = Complex64::from_polar(1.0, std::f64::consts::PI * b) * pow_w_minus_one_loop(w, b);
            assert!((lhs - rhs).norm() < 1e-12 * lhs.norm(), "w = {w}");
        }
    }

    #[test]
    fn winding_number_of_built_loop() {
        // integral of (w-1)^{-1} over the loop = 2 pi i
        let cfg = QuadratureConfig { loop_eps: 0.1, loop_tau: 0.05, ..Default::default() };
        let c = build_loop_01(&cfg).unwrap();
        let one = Complex64::new(1.0, 0.0);
        let (v, _) = integrate_contour(|w| 1.0 / (w - one), &c, &cfg).unwrap();
        assert_relative_eq!(v.im, 2.0 * PI, epsilon = 1e-8);
        assert!(v.re.abs() < 1e-8);
    }
}
