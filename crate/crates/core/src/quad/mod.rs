//! Complex-analytic quadrature engine.
//!
//! Everything numerical that the transform identities need lives here:
//! adaptive Gauss-Kronrod integration of complex-valued functions over real
//! intervals (with power-absorbing substitutions for endpoint singularities),
//! contour integration over piecewise paths, principal-value integrals along
//! vertical lines with sequence acceleration, and the eps -> 0 extraction used
//! by Stieltjes-Perron inversion.

mod contour;
mod extrapolate;
mod gk;
mod interval;
mod pv;

pub use contour::{
    build_loop_01, integrate_contour, integrate_loop01, loop_pieces, pow_one_minus_loop,
    pow_w_minus_one_loop, Contour, Segment,
};
pub use extrapolate::{aitken_accelerate, richardson_limit, stieltjes_perron_limit};
pub use interval::{integrate_interval, Endpoint};
pub use pv::pv_vertical_line;

use num_complex::Complex64;
use thiserror::Error;

/// Tolerances and geometric knobs shared by the quadrature routines.
///
/// `eps_schedule` drives Stieltjes-Perron limits; `loop_eps`/`loop_tau` fix
/// the default geometry of the loop around `[0, 1]`; `pv_r_schedule` is the
/// sequence of symmetric truncation radii for principal-value lines.
#[derive(Debug, Clone)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    pub eps_schedule: Vec<f64>,
    pub loop_eps: f64,
    pub loop_tau: f64,
    pub pv_r_schedule: Vec<f64>,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        // eps_j = 0.1 * 2^-j; Richardson assumes a leading O(eps) bias from
        // Poisson-kernel smoothing.
        let eps_schedule = (0..=12).map(|j| 0.1 * 0.5f64.powi(j)).collect();
        // R_j doubles from a multiple of 2*pi so the e^{iy} phase is pinned
        // at the truncation points and Aitken sees a geometric tail.
        let r0 = 16.0 * std::f64::consts::PI;
        let pv_r_schedule = (0..=6).map(|j| r0 * 2.0f64.powi(j)).collect();
        QuadratureConfig {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_subdivisions: 4000,
            eps_schedule,
            loop_eps: 0.25,
            loop_tau: 0.125,
            pv_r_schedule,
        }
    }
}

impl QuadratureConfig {
    /// Validates invariants: positive tolerances, strictly decreasing
    /// eps schedule, increasing PV radii.
    pub fn validate(&self) -> Result<(), QuadError> {
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) {
            return Err(QuadError::BadConfig("tolerances must be positive".into()));
        }
        if self.eps_schedule.is_empty()
            || self.eps_schedule.windows(2).any(|w| w[1] >= w[0])
            || self.eps_schedule.iter().any(|&e| !(e > 0.0))
        {
            return Err(QuadError::BadConfig(
                "eps_schedule must be strictly decreasing and positive".into(),
            ));
        }
        if self.pv_r_schedule.windows(2).any(|w| w[1] <= w[0]) {
            return Err(QuadError::BadConfig("pv_r_schedule must increase".into()));
        }
        if !(self.loop_eps > 0.0 && self.loop_eps < 1.0) || !(self.loop_tau > 0.0) {
            return Err(QuadError::BadConfig("loop geometry must be positive".into()));
        }
        Ok(())
    }

    /// Copy with a cap on the smallest eps used (the thin-loop inversion
    /// path stops the schedule early to contain cancellation growth).
    pub fn with_min_eps(&self, min_eps: f64) -> Self {
        let mut c = self.clone();
        c.eps_schedule.retain(|&e| e >= min_eps);
        if c.eps_schedule.is_empty() {
            c.eps_schedule.push(min_eps);
        }
        c
    }
}

/// Errors produced by the quadrature engine.
#[derive(Debug, Error)]
pub enum QuadError {
    #[error("quadrature tolerance not reached: best estimate {value}, err_est {err_est:.3e}")]
    Tolerance { value: Complex64, err_est: f64 },
    #[error("integrand is singular on the integration set: {0}")]
    SingularInput(String),
    #[error("eps->0 extrapolation did not converge: best {value:.6e}, err_est {err_est:.3e}")]
    LimitFailure { value: f64, err_est: f64 },
    #[error("principal value did not converge over the truncation schedule: best {value}, err_est {err_est:.3e}")]
    Oscillatory { value: Complex64, err_est: f64 },
    #[error("invalid quadrature configuration: {0}")]
    BadConfig(String),
    #[error("invalid contour: {0}")]
    BadContour(String),
}

impl QuadError {
    /// Best available estimate carried by the error, when meaningful.
    pub fn best_value(&self) -> Option<Complex64> {
        match self {
            QuadError::Tolerance { value, .. } => Some(*value),
            QuadError::LimitFailure { value, .. } => Some(Complex64::new(*value, 0.0)),
            QuadError::Oscillatory { value, .. } => Some(*value),
            _ => None,
        }
    }
}
