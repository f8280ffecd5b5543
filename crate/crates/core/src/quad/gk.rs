//! Adaptive 15-point Gauss-Kronrod core for complex integrands.
//!
//! The node/weight tables and the QUADPACK error rescaling are standard; the
//! driver bisects the worst cell (by local error) until the global estimate
//! meets the requested tolerance or the subdivision budget runs out.

use num_complex::Complex64;
use std::collections::BinaryHeap;

use super::QuadError;

// 15-point Kronrod abscissae (positive half) and weights, with the embedded
// 7-point Gauss weights, as tabulated in QUADPACK.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

/// One GK15 panel on `[a, b]`. Returns (integral, error estimate).
fn gk15<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64) -> (Complex64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);

    let mut fv = [Complex64::new(0.0, 0.0); 15];
    fv[7] = f_center;
    let mut res_g = WG[3] * f_center;
    let mut res_k = WGK[7] * f_center;
    let mut res_abs = WGK[7] * f_center.norm();

    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv[j] = f1;
        fv[14 - j] = f2;
        let sum = f1 + f2;
        if j % 2 == 1 {
            res_g += WG[j / 2] * sum;
        }
        res_k += WGK[j] * sum;
        res_abs += WGK[j] * (f1.norm() + f2.norm());
    }

    let mean = res_k * 0.5;
    let mut res_asc = WGK[7] * (f_center - mean).norm();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv[j] - mean).norm() + (fv[14 - j] - mean).norm());
    }

    let err = ((res_k - res_g) * half).norm();
    let value = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    (value, rescale_error(err, res_abs, res_asc))
}

struct Cell {
    a: f64,
    b: f64,
    value: Complex64,
    err: f64,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Globally adaptive bisection on `[a, b]`.
///
/// Returns the best estimate even on tolerance failure (inside the error).
pub fn adaptive<F: FnMut(f64) -> Complex64>(
    f: &mut F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_subdivisions: usize,
) -> Result<(Complex64, f64), QuadError> {
    if a == b {
        return Ok((Complex64::new(0.0, 0.0), 0.0));
    }
    let (v0, e0) = gk15(f, a, b);
    if !v0.re.is_finite() || !v0.im.is_finite() {
        return Err(QuadError::SingularInput(format!(
            "non-finite integrand values on [{a}, {b}]"
        )));
    }
    let mut heap = BinaryHeap::new();
    heap.push(Cell { a, b, value: v0, err: e0 });
    let mut total = v0;
    let mut total_err = e0;

    for _ in 0..max_subdivisions {
        if total_err <= abs_tol.max(rel_tol * total.norm()) {
            break;
        }
        let worst = match heap.pop() {
            Some(c) => c,
            None => break,
        };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // cell is at floating-point resolution; keep its estimate
            total_err -= worst.err;
            total_err += worst.err.min(f64::EPSILON * worst.value.norm());
            continue;
        }
        let (v1, e1) = gk15(f, worst.a, mid);
        let (v2, e2) = gk15(f, mid, worst.b);
        if !(v1 + v2).re.is_finite() || !(v1 + v2).im.is_finite() {
            return Err(QuadError::SingularInput(format!(
                "non-finite integrand values near [{}, {}]",
                worst.a, worst.b
            )));
        }
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.err;
        heap.push(Cell { a: worst.a, b: mid, value: v1, err: e1 });
        heap.push(Cell { a: mid, b: worst.b, value: v2, err: e2 });
    }

    if total_err <= abs_tol.max(rel_tol * total.norm()) {
        Ok((total, total_err))
    } else {
        Err(QuadError::Tolerance { value: total, err_est: total_err })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_is_exact() {
        let mut f = |x: f64| Complex64::new(x * x * x - 2.0 * x + 1.0, 0.0);
        let (v, e) = adaptive(&mut f, 0.0, 2.0, 1e-12, 1e-12, 100).unwrap();
        assert_relative_eq!(v.re, 2.0, epsilon = 1e-12);
        assert!(e < 1e-10);
    }

    #[test]
    fn oscillatory_complex() {
        // int_0^pi e^{i x} dx = 2i
        let mut f = |x: f64| Complex64::new(0.0, x).exp();
        let (v, _) = adaptive(&mut f, 0.0, std::f64::consts::PI, 1e-12, 1e-12, 200).unwrap();
        assert_relative_eq!(v.re, 0.0, epsilon = 1e-11);
        assert_relative_eq!(v.im, 2.0, epsilon = 1e-11);
    }
}
