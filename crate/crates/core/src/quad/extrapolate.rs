//! Limit extraction: Richardson extrapolation over a halving eps schedule
//! and iterated Aitken acceleration for oscillatory tail sequences.

use num_complex::Complex64;

use super::{QuadError, QuadratureConfig};

/// Richardson extrapolation of `f(eps_j)` to `eps -> 0`, assuming an error
/// expansion `c1 eps + c2 eps^2 + ...` and a halving schedule.
///
/// Returns `(limit, err_est)`. The table is walked column by column and the
/// entry with the smallest internal discrepancy wins, so noisy deep columns
/// cannot degrade an already converged value.
pub fn richardson_limit(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::INFINITY);
    }
    if n == 1 {
        return (values[0], f64::INFINITY);
    }
    let mut table: Vec<Vec<f64>> = vec![values.to_vec()];
    for k in 1..n {
        let factor = 2.0f64.powi(k as i32) - 1.0;
        let prev = &table[k - 1];
        let mut col = Vec::with_capacity(prev.len() - 1);
        for j in 1..prev.len() {
            col.push(prev[j] + (prev[j] - prev[j - 1]) / factor);
        }
        table.push(col);
    }
    // last entry of each column approximates the limit; pick by discrepancy
    let mut best = *table[0].last().unwrap();
    let mut best_err = (values[n - 1] - values[n - 2]).abs();
    for k in 1..n {
        let col = &table[k];
        if col.is_empty() {
            break;
        }
        let cand = *col.last().unwrap();
        let prev_col_last = *table[k - 1].last().unwrap();
        let mut disc = (cand - prev_col_last).abs();
        if col.len() >= 2 {
            disc = disc.max((cand - col[col.len() - 2]).abs() * 0.5);
        }
        if disc < best_err {
            best = cand;
            best_err = disc;
        }
    }
    (best, best_err)
}

/// Stieltjes-Perron limit: `(1/pi) lim_{eps -> 0} Im F(lambda, eps)` over the
/// configured eps schedule, with Richardson extrapolation.
///
/// `inner_err(eps)` reported by the evaluation of F is folded into the error
/// estimate. Fails when the extrapolated discrepancy exceeds the tolerance
/// and the raw sequence is not Cauchy.
pub fn stieltjes_perron_limit<F>(
    mut f: F,
    lambda: f64,
    cfg: &QuadratureConfig,
) -> Result<(f64, f64), QuadError>
where
    F: FnMut(f64, f64) -> Result<(Complex64, f64), QuadError>,
{
    let mut ims = Vec::with_capacity(cfg.eps_schedule.len());
    let mut inner_err: f64 = 0.0;
    for &eps in &cfg.eps_schedule {
        let (v, e) = match f(lambda, eps) {
            Ok(ve) => ve,
            Err(QuadError::Tolerance { value, err_est }) => (value, err_est),
            Err(other) => return Err(other),
        };
        ims.push(v.im);
        inner_err = inner_err.max(e);
    }
    let (limit, extr_err) = richardson_limit(&ims);
    let err = (extr_err + inner_err) / std::f64::consts::PI;
    let value = limit / std::f64::consts::PI;
    if !value.is_finite() {
        return Err(QuadError::LimitFailure { value, err_est: err });
    }
    // Non-Cauchy guard: raw first differences should not grow at the tail.
    let n = ims.len();
    if n >= 3 {
        let d_last = (ims[n - 1] - ims[n - 2]).abs();
        let d_prev = (ims[n - 2] - ims[n - 3]).abs();
        let scale = ims[n - 1].abs().max(1.0);
        if d_last > 4.0 * d_prev && d_last > 1e-4 * scale && extr_err > 1e-4 * scale {
            return Err(QuadError::LimitFailure { value, err_est: err });
        }
    }
    Ok((value, err))
}

/// Iterated Aitken delta-squared acceleration of a complex sequence.
///
/// Returns `(limit, err_est)` where the error estimate is the distance
/// between the last two surviving entries.
pub fn aitken_accelerate(seq: &[Complex64]) -> (Complex64, f64) {
    let mut s: Vec<Complex64> = seq.to_vec();
    if s.is_empty() {
        return (Complex64::new(f64::NAN, f64::NAN), f64::INFINITY);
    }
    let mut best = *s.last().unwrap();
    let mut best_err = if s.len() >= 2 {
        (s[s.len() - 1] - s[s.len() - 2]).norm()
    } else {
        f64::INFINITY
    };
    while s.len() >= 3 {
        let mut nxt = Vec::with_capacity(s.len() - 2);
        for i in 0..s.len() - 2 {
            let d1 = s[i + 1] - s[i];
            let d2 = s[i + 2] - s[i + 1];
            let denom = d2 - d1;
            if denom.norm() < 1e-300 {
                nxt.push(s[i + 2]);
            } else {
                nxt.push(s[i + 2] - d2 * d2 / denom);
            }
        }
        let cand = *nxt.last().unwrap();
        let err = if nxt.len() >= 2 {
            (nxt[nxt.len() - 1] - nxt[nxt.len() - 2]).norm()
        } else {
            (cand - best).norm()
        };
        if err < best_err {
            best = cand;
            best_err = err;
        }
        s = nxt;
    }
    (best, best_err)
}
