//! Seeded Monte Carlo ground truth: stick-breaking draws of the mean of a
//! Dirichlet process, exact finite-dimensional Dirichlet means, gamma-process
//! functionals, and the empirical estimators used to cross-check the
//! transform computations.
//!
//! Streams are ChaCha12, seeded from a single `u64` and split per chunk via
//! the generator's stream counter, so a fixed `(seed, config, measure)`
//! triple yields bit-identical samples regardless of thread count.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;
use thiserror::Error;

use crate::measure::ParameterMeasure;

/// Samples per parallel chunk; part of the reproducibility contract.
pub const CHUNK: usize = 8192;

/// Identifier of the generator algorithm, recorded in output metadata.
pub const RNG_ALGORITHM: &str = "ChaCha12";

/// Stick-breaking truncation policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StickTruncation {
    /// Break exactly this many sticks, then assign the residual mass.
    Fixed(usize),
    /// Break sticks until the residual mass falls below `rho`.
    Adaptive { rho: f64 },
}

/// Sampler configuration. Identical configs (plus measure) give identical
/// sample streams.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub n_samples: usize,
    pub seed: u64,
    pub stick_truncation: StickTruncation,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            n_samples: 100_000,
            seed: 0x5EED_CAFE,
            stick_truncation: StickTruncation::Adaptive { rho: 1e-12 },
        }
    }
}

impl McConfig {
    /// Default truncation for a measure: heavy-tailed parameters get a
    /// tighter residual bound so truncation bias stays far below MC noise.
    /// Returns the config and an optional bias note for run metadata.
    pub fn for_measure(self, alpha: &ParameterMeasure) -> (Self, Option<String>) {
        if alpha.has_bounded_support() {
            (self, None)
        } else {
            let mut c = self;
            c.stick_truncation = StickTruncation::Adaptive { rho: 1e-14 };
            (
                c,
                Some(
                    "unbounded parameter support: stick residual bound tightened to 1e-14; \
                     residual-mass assignment adds a small truncation bias"
                        .to_string(),
                ),
            )
        }
    }
}

#[derive(Debug, Error)]
pub enum McError {
    #[error("empty sample list")]
    Empty,
    #[error("sampler refused: {0}")]
    Refused(String),
}

fn chunk_rng(seed: u64, chunk_index: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(chunk_index);
    rng
}

fn sample_chunked<F>(n: usize, seed: u64, per_draw: F) -> Vec<f64>
where
    F: Fn(&mut ChaCha12Rng) -> f64 + Sync,
{
    let n_chunks = n.div_ceil(CHUNK);
    (0..n_chunks)
        .into_par_iter()
        .flat_map_iter(|ci| {
            let mut rng = chunk_rng(seed, ci as u64);
            let take = CHUNK.min(n - ci * CHUNK);
            let per_draw = &per_draw;
            (0..take).map(move |_| per_draw(&mut rng)).collect::<Vec<f64>>()
        })
        .collect()
}

/// One stick-breaking draw of `sum_j p_j Y_j` with `V_j ~ Beta(1, a)` sticks
/// and `Y_j ~ alpha / a`; the residual mass goes onto one extra draw.
fn draw_mean(
    alpha: &ParameterMeasure,
    a: f64,
    trunc: StickTruncation,
    rng: &mut ChaCha12Rng,
) -> f64 {
    let mut remaining = 1.0f64;
    let mut total = 0.0f64;
    let mut draw_y = |rng: &mut ChaCha12Rng| {
        let u1: f64 = rng.random();
        let u2: f64 = rng.random();
        alpha.sample_point(u1, u2)
    };
    match trunc {
        StickTruncation::Fixed(levels) => {
            for _ in 0..levels {
                let u: f64 = rng.random();
                let v = 1.0 - u.powf(1.0 / a);
                let p = v * remaining;
                total += p * draw_y(rng);
                remaining *= 1.0 - v;
            }
        }
        StickTruncation::Adaptive { rho } => {
            while remaining >= rho {
                let u: f64 = rng.random();
                let v = 1.0 - u.powf(1.0 / a);
                let p = v * remaining;
                total += p * draw_y(rng);
                remaining *= 1.0 - v;
                if remaining == 0.0 {
                    break;
                }
            }
        }
    }
    total + remaining * draw_y(rng)
}

/// i.i.d. draws of the Dirichlet-process mean under `alpha` (Sethuraman
/// stick-breaking with the configured truncation).
pub fn sample_mean(alpha: &ParameterMeasure, cfg: &McConfig) -> Vec<f64> {
    let a = alpha.total_mass();
    let trunc = cfg.stick_truncation;
    sample_chunked(cfg.n_samples, cfg.seed, |rng| draw_mean(alpha, a, trunc, rng))
}

/// Exact draws of `<u, x>` with `u ~ Dirichlet(masses)` via normalized
/// gamma variates.
pub fn sample_finite_dirichlet_mean(
    atoms: &[f64],
    masses: &[f64],
    cfg: &McConfig,
) -> Result<Vec<f64>, McError> {
    if atoms.len() != masses.len() || atoms.is_empty() {
        return Err(McError::Refused("atoms and masses must align and be nonempty".into()));
    }
    if masses.iter().any(|&m| !(m > 0.0)) {
        return Err(McError::Refused("masses must be strictly positive".into()));
    }
    let gammas: Vec<Gamma<f64>> =
        masses.iter().map(|&m| Gamma::new(m, 1.0).expect("positive shape")).collect();
    let atoms = atoms.to_vec();
    Ok(sample_chunked(cfg.n_samples, cfg.seed, move |rng| {
        let mut num = 0.0;
        let mut den = 0.0;
        for (x, g) in atoms.iter().zip(gammas.iter()) {
            let gv = g.sample(rng);
            num += x * gv;
            den += gv;
        }
        if den > 0.0 {
            num / den
        } else {
            0.0
        }
    }))
}

/// Draws of `sum_k f(x_k) G_k` with independent `G_k ~ Gamma(mass_k, 1)`
/// over the atoms of a discrete measure.
pub fn sample_gamma_functional<F: Fn(f64) -> f64 + Sync>(
    alpha: &ParameterMeasure,
    f: F,
    cfg: &McConfig,
) -> Result<Vec<f64>, McError> {
    if !alpha.is_discrete() {
        return Err(McError::Refused(
            "gamma functional sampling needs a discrete measure (discretize first)".into(),
        ));
    }
    let parts: Vec<(f64, Gamma<f64>)> = alpha
        .atoms()
        .iter()
        .map(|a| (f(a.x), Gamma::new(a.mass, 1.0).expect("positive mass")))
        .collect();
    Ok(sample_chunked(cfg.n_samples, cfg.seed, move |rng| {
        parts.iter().map(|(fx, g)| fx * g.sample(rng)).sum()
    }))
}

/// Monte Carlo Dirichlet average: mean of `f(u)` over `u ~ Dirichlet(masses)`
/// (the full simplex vector, last coordinate included). Returns the mean and
/// its standard error.
pub fn dirichlet_average<F: Fn(&[f64]) -> Complex64 + Sync>(
    masses: &[f64],
    f: F,
    n: usize,
    seed: u64,
) -> Result<(Complex64, f64), McError> {
    if masses.is_empty() || masses.iter().any(|&m| !(m > 0.0)) {
        return Err(McError::Refused("Dirichlet masses must be strictly positive".into()));
    }
    let gammas: Vec<Gamma<f64>> =
        masses.iter().map(|&m| Gamma::new(m, 1.0).expect("positive shape")).collect();
    let n_chunks = n.div_ceil(CHUNK);
    let vals: Vec<Complex64> = (0..n_chunks)
        .into_par_iter()
        .flat_map_iter(|ci| {
            let mut rng = chunk_rng(seed, ci as u64);
            let take = CHUNK.min(n - ci * CHUNK);
            let gammas = gammas.clone();
            let f = &f;
            (0..take)
                .map(move |_| {
                    let mut u: Vec<f64> = gammas.iter().map(|g| g.sample(&mut rng)).collect();
                    let s: f64 = u.iter().sum();
                    if s > 0.0 {
                        for v in &mut u {
                            *v /= s;
                        }
                    }
                    f(&u)
                })
                .collect::<Vec<Complex64>>()
        })
        .collect();
    let mean = vals.iter().sum::<Complex64>() / vals.len() as f64;
    let var = vals.iter().map(|v| (v - mean).norm_sqr()).sum::<f64>()
        / (vals.len() as f64 * (vals.len() as f64 - 1.0));
    Ok((mean, var.sqrt()))
}

// ----------------------------------------------------------------------
// empirical estimators

fn jackknife_mean<F: Fn(f64) -> f64>(samples: &[f64], map: F) -> (f64, f64) {
    let n = samples.len() as f64;
    let vals: Vec<f64> = samples.iter().map(|&s| map(s)).collect();
    let mean = vals.iter().sum::<f64>() / n;
    // jackknife std error of the sample mean
    let ss: f64 = vals.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n * (n - 1.0).max(1.0))).sqrt())
}

/// Empirical characteristic function at `t` with jackknife standard error
/// (component errors combined in quadrature).
pub fn ecf(samples: &[f64], t: f64) -> Result<(Complex64, f64), McError> {
    if samples.is_empty() {
        return Err(McError::Empty);
    }
    let (re, se_re) = jackknife_mean(samples, |x| (t * x).cos());
    let (im, se_im) = jackknife_mean(samples, |x| (t * x).sin());
    Ok((Complex64::new(re, im), se_re.hypot(se_im)))
}

/// Empirical `E[e^{-t X}]` with jackknife standard error.
pub fn mgf(samples: &[f64], t: f64) -> Result<(f64, f64), McError> {
    if samples.is_empty() {
        return Err(McError::Empty);
    }
    Ok(jackknife_mean(samples, |x| (-t * x).exp()))
}

/// Silverman-rule bandwidth: `0.9 min(sd, iqr/1.34) n^{-1/5}`.
pub fn silverman_bandwidth(samples: &[f64]) -> f64 {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let sd = (samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0).max(1.0))
        .sqrt();
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q = |p: f64| {
        let idx = (p * (sorted.len() - 1) as f64).round() as usize;
        sorted[idx.min(sorted.len() - 1)]
    };
    let iqr = q(0.75) - q(0.25);
    let scale = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    0.9 * scale.max(f64::MIN_POSITIVE) * n.powf(-0.2)
}

/// Gaussian kernel density estimate at `xi` with jackknife standard error.
pub fn kde(samples: &[f64], xi: f64) -> Result<(f64, f64), McError> {
    if samples.is_empty() {
        return Err(McError::Empty);
    }
    let h = silverman_bandwidth(samples);
    let norm = 1.0 / (h * (2.0 * std::f64::consts::PI).sqrt());
    Ok(jackknife_mean(samples, |x| {
        let z = (xi - x) / h;
        norm * (-0.5 * z * z).exp()
    }))
}

/// Kolmogorov-Smirnov statistic against a reference cdf. The second value is
/// the 95% null quantile `1.36 / sqrt(n)`, the natural comparison scale.
pub fn ks_against<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<(f64, f64), McError> {
    if samples.is_empty() {
        return Err(McError::Empty);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs());
        d = d.max(((i + 1) as f64 / n - f).abs());
    }
    Ok((d, 1.36 / n.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn two_point() -> ParameterMeasure {
        ParameterMeasure::discrete(vec![(0.0, 1.0), (1.0, 1.0)]).unwrap()
    }

    #[test]
    fn determinism_same_seed_same_stream() {
        let m = two_point();
        let cfg = McConfig { n_samples: 4096, seed: 7, ..Default::default() };
        let s1 = sample_mean(&m, &cfg);
        let s2 = sample_mean(&m, &cfg);
        assert_eq!(s1, s2);
        let cfg2 = McConfig { seed: 8, ..cfg };
        assert_ne!(sample_mean(&m, &cfg2), s1);
    }

    #[test]
    fn degenerate_measure_gives_constant_samples() {
        let m = ParameterMeasure::discrete(vec![(2.5, 0.7)]).unwrap();
        let cfg = McConfig { n_samples: 100, ..Default::default() };
        assert!(sample_mean(&m, &cfg).iter().all(|&x| x == 2.5));
    }

    #[test]
    fn two_point_mean_is_beta11() {
        // mean of 1e5 draws within 0.5 +/- 0.005; KS against uniform cdf
        let m = two_point();
        let cfg = McConfig { n_samples: 100_000, seed: 42, ..Default::default() };
        let s = sample_mean(&m, &cfg);
        let mean = s.iter().sum::<f64>() / s.len() as f64;
        assert!((mean - 0.5).abs() < 0.005, "mean {mean}");
        let (d, _) = ks_against(&s, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(d <= 0.01, "KS {d}");
    }

    #[test]
    fn two_point_variance_matches_beta() {
        // two-point {0,1} with masses (b, a-b): Var = b(a-b)/(a^2(a+1))
        let (a, b) = (2.5, 1.0);
        let m = ParameterMeasure::discrete(vec![(0.0, a - b), (1.0, b)]).unwrap();
        let cfg = McConfig { n_samples: 100_000, seed: 21, ..Default::default() };
        let s = sample_mean(&m, &cfg);
        let n = s.len() as f64;
        let mean = s.iter().sum::<f64>() / n;
        let var = s.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
        let expect = b * (a - b) / (a * a * (a + 1.0));
        // 4 standard errors of a variance estimate ~ var sqrt(2/n)
        let tol = 4.0 * expect * (2.0 / n).sqrt() + 4.0 * expect / n.sqrt();
        assert!((var - expect).abs() < tol, "var {var} vs {expect}");
    }

    #[test]
    fn finite_dirichlet_examples() {
        let cfg = McConfig { n_samples: 100_000, seed: 3, ..Default::default() };
        // single atom: constant
        let s = sample_finite_dirichlet_mean(&[2.0], &[1.5], &cfg).unwrap();
        assert!(s.iter().all(|&x| x == 2.0));
        // {0,1} masses (1,1): uniform
        let s = sample_finite_dirichlet_mean(&[0.0, 1.0], &[1.0, 1.0], &cfg).unwrap();
        let (d, _) = ks_against(&s, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(d <= 0.01, "KS {d}");
        // {-1,0,1} masses (1,1,1): mean near 0
        let s = sample_finite_dirichlet_mean(&[-1.0, 0.0, 1.0], &[1.0, 1.0, 1.0], &cfg).unwrap();
        let mean = s.iter().sum::<f64>() / s.len() as f64;
        assert!(mean.abs() < 0.006, "mean {mean}");
    }

    #[test]
    fn gamma_functional_moments_and_normalization() {
        let cfg = McConfig { n_samples: 100_000, seed: 11, ..Default::default() };
        // Gamma(a) draws for a single atom at 1
        let m = ParameterMeasure::discrete(vec![(1.0, 2.0)]).unwrap();
        let s = sample_gamma_functional(&m, |x| x, &cfg).unwrap();
        let mean = s.iter().sum::<f64>() / s.len() as f64;
        assert!((mean - 2.0).abs() < 4.0 * (2.0f64 / 1e5).sqrt(), "mean {mean}");

        // G1 + 2 G2 has mean 3
        let m = ParameterMeasure::discrete(vec![(1.0, 1.0), (2.0, 1.0)]).unwrap();
        let s = sample_gamma_functional(&m, |x| x, &cfg).unwrap();
        let mean = s.iter().sum::<f64>() / s.len() as f64;
        assert!((mean - 3.0).abs() < 4.0 * (5.0f64 / 1e5).sqrt(), "mean {mean}");

        // normalized gamma vector reproduces the Dirichlet mean law
        let m = ParameterMeasure::discrete(vec![(0.0, 1.0), (1.0, 1.0)]).unwrap();
        let num = sample_gamma_functional(&m, |x| x, &cfg).unwrap();
        let den = sample_gamma_functional(&m, |_| 1.0, &cfg).unwrap();
        let ratio: Vec<f64> = num.iter().zip(den.iter()).map(|(a, b)| a / b).collect();
        let (d, _) = ks_against(&ratio, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(d <= 0.01, "KS {d}");
    }

    #[test]
    fn estimator_edge_cases() {
        let (v, _) = ecf(&[1.0, 2.0, 3.0], 0.0).unwrap();
        assert_eq!(v, Complex64::new(1.0, 0.0));
        let (v, _) = mgf(&[0.0; 10], 3.0).unwrap();
        assert_eq!(v, 1.0);
        assert!(ecf(&[], 1.0).is_err());
        assert!(mgf(&[], 1.0).is_err());
    }

    #[test]
    fn ks_null_quantile_on_uniform_samples() {
        let mut rng = chunk_rng(99, 0);
        let s: Vec<f64> = (0..100_000).map(|_| rng.random::<f64>()).collect();
        let (d, q95) = ks_against(&s, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(d <= q95 * 1.5, "KS {d} vs null q95 {q95}");
        assert_relative_eq!(q95, 1.36 / (1e5f64).sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn cauchy_fixed_point_in_distribution() {
        // the sampled mean of a Cauchy parameter has the arctan law
        let m = ParameterMeasure::cauchy(0.0, 1.0).unwrap();
        let (cfg, note) =
            McConfig { n_samples: 100_000, seed: 5, ..Default::default() }.for_measure(&m);
        assert!(note.is_some());
        let s = sample_mean(&m, &cfg);
        let (d, _) = ks_against(&s, |x| 0.5 + x.atan() / std::f64::consts::PI).unwrap();
        assert!(d <= 0.01, "KS {d}");
    }
}
