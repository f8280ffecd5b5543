//! The parameter measure: a finite measure on the line given by atoms plus
//! continuous components (named families or tabulated densities, optionally
//! window-restricted). Truncation, pushforward, the reciprocal image measure
//! and the log-moment test all live here, together with the JSON measure
//! definition format.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::erf::{erf, erf_inv};
use thiserror::Error;

use crate::quad::QuadratureConfig;

/// A point mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub x: f64,
    pub mass: f64,
}

/// Continuous density families. `Cauchy` uses the parametrization with
/// density `sigma / (pi (1 + sigma^2 (x - theta)^2))`, so larger `sigma`
/// means tighter concentration and `sigma = +inf` degenerates to a point
/// mass (represented as an atom, never as a family value).
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    Cauchy { theta: f64, sigma: f64 },
    Gaussian { mass: f64, theta: f64, sigma: f64 },
    Uniform01 { mass: f64 },
    /// Piecewise-linear density on the knots `xs` (sorted); carries its own
    /// total mass (the tabulated pdf is scaled at construction to integrate
    /// to it exactly).
    Table { xs: Vec<f64>, pdf: Vec<f64>, mass: f64 },
}

/// One continuous component: a family, possibly restricted to a window.
#[derive(Debug, Clone, PartialEq)]
pub struct ContComponent {
    pub family: Family,
    /// Restriction `(lo, hi)`; `None` means the family's natural support.
    pub window: Option<(f64, f64)>,
}

/// A finite measure `alpha` on the real line: atoms plus continuous
/// components. Immutable after construction; all operations are pure.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterMeasure {
    atoms: Vec<Atom>,
    cont: Vec<ContComponent>,
}

#[derive(Debug, Error)]
pub enum MeasureError {
    #[error("invalid measure: {0}")]
    Invalid(String),
    #[error("measure definition parse error: {0}")]
    Parse(String),
    #[error("operation refused: {0}")]
    Refused(String),
    #[error("log-moment integral is indeterminate: {0}")]
    Indeterminate(String),
}

const MASS_TOL: f64 = 1e-6;

fn merge_atoms(mut atoms: Vec<Atom>) -> Vec<Atom> {
    atoms.sort_by(|a, b| a.x.total_cmp(&b.x));
    let mut out: Vec<Atom> = Vec::with_capacity(atoms.len());
    for a in atoms {
        match out.last_mut() {
            Some(last) if last.x == a.x => last.mass += a.mass,
            _ => out.push(a),
        }
    }
    out.retain(|a| a.mass > 0.0);
    out
}

impl Family {
    fn mass(&self) -> f64 {
        match self {
            Family::Cauchy { .. } => 1.0,
            Family::Gaussian { mass, .. } => *mass,
            Family::Uniform01 { mass } => *mass,
            Family::Table { mass, .. } => *mass,
        }
    }

    /// Natural support of the unrestricted family.
    fn support(&self) -> (f64, f64) {
        match self {
            Family::Cauchy { .. } | Family::Gaussian { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            Family::Uniform01 { .. } => (0.0, 1.0),
            Family::Table { xs, .. } => (xs[0], *xs.last().unwrap()),
        }
    }

    /// Unrestricted cumulative mass up to `u`.
    fn cdf(&self, u: f64) -> f64 {
        match self {
            Family::Cauchy { theta, sigma } => {
                0.5 + (sigma * (u - theta)).atan() / std::f64::consts::PI
            }
            Family::Gaussian { mass, theta, sigma } => {
                mass * 0.5 * (1.0 + erf((u - theta) / (sigma * std::f64::consts::SQRT_2)))
            }
            Family::Uniform01 { mass } => mass * u.clamp(0.0, 1.0),
            Family::Table { xs, pdf, .. } => {
                if u <= xs[0] {
                    return 0.0;
                }
                let mut acc = 0.0;
                for i in 1..xs.len() {
                    if u >= xs[i] {
                        acc += 0.5 * (pdf[i - 1] + pdf[i]) * (xs[i] - xs[i - 1]);
                    } else {
                        let h = u - xs[i - 1];
                        let w = xs[i] - xs[i - 1];
                        if w > 0.0 && h > 0.0 {
                            let p_u = pdf[i - 1] + (pdf[i] - pdf[i - 1]) * h / w;
                            acc += 0.5 * (pdf[i - 1] + p_u) * h;
                        }
                        break;
                    }
                }
                acc
            }
        }
    }

    fn pdf(&self, x: f64) -> f64 {
        match self {
            Family::Cauchy { theta, sigma } => {
                let d = sigma * (x - theta);
                sigma / (std::f64::consts::PI * (1.0 + d * d))
            }
            Family::Gaussian { mass, theta, sigma } => {
                let z = (x - theta) / sigma;
                mass * (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
            }
            Family::Uniform01 { mass } => {
                if (0.0..=1.0).contains(&x) {
                    *mass
                } else {
                    0.0
                }
            }
            Family::Table { xs, pdf, .. } => {
                if x < xs[0] || x > *xs.last().unwrap() {
                    return 0.0;
                }
                let i = xs.partition_point(|&k| k <= x).min(xs.len() - 1).max(1);
                let w = xs[i] - xs[i - 1];
                if w <= 0.0 {
                    return pdf[i];
                }
                pdf[i - 1] + (pdf[i] - pdf[i - 1]) * (x - xs[i - 1]) / w
            }
        }
    }

    /// Quantile of the normalized (probability) version of the family.
    fn quantile(&self, p: f64) -> f64 {
        match self {
            Family::Cauchy { theta, sigma } => {
                theta + (std::f64::consts::PI * (p - 0.5)).tan() / sigma
            }
            Family::Gaussian { theta, sigma, .. } => {
                theta + sigma * std::f64::consts::SQRT_2 * erf_inv(2.0 * p - 1.0)
            }
            Family::Uniform01 { .. } => p,
            Family::Table { xs, pdf, mass } => {
                let target = p * mass;
                let mut acc = 0.0;
                for i in 1..xs.len() {
                    let w = xs[i] - xs[i - 1];
                    let seg = 0.5 * (pdf[i - 1] + pdf[i]) * w;
                    if acc + seg >= target || i == xs.len() - 1 {
                        let need = (target - acc).max(0.0);
                        let (p0, p1) = (pdf[i - 1], pdf[i]);
                        let slope = (p1 - p0) / w;
                        // solve p0 h + slope h^2 / 2 = need for h in [0, w]
                        let h = if slope.abs() < 1e-14 * (p0.abs() + 1.0) {
                            if p0 > 0.0 {
                                need / p0
                            } else {
                                w
                            }
                        } else {
                            let disc = (p0 * p0 + 2.0 * slope * need).max(0.0);
                            (disc.sqrt() - p0) / slope
                        };
                        return xs[i - 1] + h.clamp(0.0, w);
                    }
                    acc += seg;
                }
                *xs.last().unwrap()
            }
        }
    }
}

impl ContComponent {
    fn effective_window(&self) -> (f64, f64) {
        let (slo, shi) = self.family.support();
        match self.window {
            None => (slo, shi),
            Some((lo, hi)) => (lo.max(slo), hi.min(shi)),
        }
    }

    pub fn mass(&self) -> f64 {
        let (lo, hi) = self.effective_window();
        if lo >= hi {
            return 0.0;
        }
        match self.window {
            None => self.family.mass(),
            Some(_) => self.family.cdf(hi) - self.family.cdf(lo),
        }
    }

    fn cdf(&self, u: f64) -> f64 {
        let (lo, hi) = self.effective_window();
        if u <= lo {
            return 0.0;
        }
        self.family.cdf(u.min(hi)) - self.family.cdf(lo)
    }

    pub fn pdf(&self, x: f64) -> f64 {
        let (lo, hi) = self.effective_window();
        if x < lo || x > hi {
            return 0.0;
        }
        self.family.pdf(x)
    }

    /// Quantile of the component normalized to a probability.
    fn quantile(&self, p: f64) -> f64 {
        match self.window {
            None => self.family.quantile(p),
            Some(_) => {
                let (lo, hi) = self.effective_window();
                let (flo, fhi) = (self.family.cdf(lo), self.family.cdf(hi));
                let target = (flo + p * (fhi - flo)) / self.family.mass();
                self.family.quantile(target.clamp(0.0, 1.0)).clamp(lo, hi)
            }
        }
    }
}

impl ParameterMeasure {
    // ------------------------------------------------------------------
    // constructors

    pub fn discrete(atoms: Vec<(f64, f64)>) -> Result<Self, MeasureError> {
        let atoms: Vec<Atom> = atoms.into_iter().map(|(x, mass)| Atom { x, mass }).collect();
        for a in &atoms {
            if !(a.mass > 0.0) || !a.x.is_finite() {
                return Err(MeasureError::Invalid(format!(
                    "atom at {} with mass {} (need finite location, positive mass)",
                    a.x, a.mass
                )));
            }
        }
        let mut sorted = atoms.clone();
        sorted.sort_by(|a, b| a.x.total_cmp(&b.x));
        if sorted.windows(2).any(|w| w[0].x == w[1].x) {
            return Err(MeasureError::Invalid("atom locations must be distinct".into()));
        }
        if sorted.is_empty() {
            return Err(MeasureError::Invalid("measure must have positive total mass".into()));
        }
        Ok(ParameterMeasure { atoms: sorted, cont: vec![] })
    }

    /// The Cauchy probability measure with density
    /// `sigma / (pi (1 + sigma^2 (x - theta)^2))`; `sigma = +inf` is the
    /// point mass at `theta`.
    pub fn cauchy(theta: f64, sigma: f64) -> Result<Self, MeasureError> {
        if !theta.is_finite() || !(sigma > 0.0) {
            return Err(MeasureError::Invalid("cauchy needs finite theta, sigma > 0".into()));
        }
        if sigma.is_infinite() {
            return Self::discrete(vec![(theta, 1.0)]);
        }
        Ok(ParameterMeasure {
            atoms: vec![],
            cont: vec![ContComponent { family: Family::Cauchy { theta, sigma }, window: None }],
        })
    }

    pub fn gaussian_scaled(mass: f64, theta: f64, sigma: f64) -> Result<Self, MeasureError> {
        if !(mass > 0.0) || !theta.is_finite() || !(sigma > 0.0) || !sigma.is_finite() {
            return Err(MeasureError::Invalid(
                "gaussian needs mass > 0, finite theta, finite sigma > 0".into(),
            ));
        }
        Ok(ParameterMeasure {
            atoms: vec![],
            cont: vec![ContComponent { family: Family::Gaussian { mass, theta, sigma }, window: None }],
        })
    }

    pub fn uniform01_scaled(mass: f64) -> Result<Self, MeasureError> {
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(MeasureError::Invalid("uniform01 needs finite mass > 0".into()));
        }
        Ok(ParameterMeasure {
            atoms: vec![],
            cont: vec![ContComponent { family: Family::Uniform01 { mass }, window: None }],
        })
    }

    /// Piecewise-linear density from `(x, pdf)` knots; the tabulated values
    /// are rescaled so the trapezoid integral equals `mass` exactly (rejected
    /// when they disagree by more than 0.1%).
    pub fn custom_density(points: Vec<(f64, f64)>, mass: f64) -> Result<Self, MeasureError> {
        if points.len() < 2 {
            return Err(MeasureError::Invalid("density table needs at least 2 knots".into()));
        }
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(MeasureError::Invalid("density table needs finite mass > 0".into()));
        }
        let mut pts = points;
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        if pts.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(MeasureError::Invalid("density table knots must be strictly increasing".into()));
        }
        if pts.iter().any(|&(x, p)| !x.is_finite() || !(p >= 0.0) || !p.is_finite()) {
            return Err(MeasureError::Invalid("density values must be finite and nonnegative".into()));
        }
        let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let mut pdf: Vec<f64> = pts.iter().map(|p| p.1).collect();
        let raw: f64 = (1..xs.len())
            .map(|i| 0.5 * (pdf[i - 1] + pdf[i]) * (xs[i] - xs[i - 1]))
            .sum();
        if raw <= 0.0 {
            return Err(MeasureError::Invalid("density table integrates to zero".into()));
        }
        if (raw - mass).abs() > 1e-3 * mass {
            return Err(MeasureError::Invalid(format!(
                "density table integrates to {raw}, declared total_mass {mass}"
            )));
        }
        let scale = mass / raw;
        for p in &mut pdf {
            *p *= scale;
        }
        Ok(ParameterMeasure {
            atoms: vec![],
            cont: vec![ContComponent { family: Family::Table { xs, pdf, mass }, window: None }],
        })
    }

    pub(crate) fn from_parts(atoms: Vec<Atom>, cont: Vec<ContComponent>) -> Self {
        ParameterMeasure { atoms: merge_atoms(atoms), cont }
    }

    // ------------------------------------------------------------------
    // accessors

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn continuous(&self) -> &[ContComponent] {
        &self.cont
    }

    pub fn is_discrete(&self) -> bool {
        self.cont.iter().all(|c| c.mass() <= 0.0)
    }

    /// Total mass `a = alpha(R)`.
    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum::<f64>()
            + self.cont.iter().map(|c| c.mass()).sum::<f64>()
    }

    /// Distribution function `A(u) = alpha(-inf, u]`.
    pub fn cdf(&self, u: f64) -> f64 {
        self.atoms.iter().filter(|a| a.x <= u).map(|a| a.mass).sum::<f64>()
            + self.cont.iter().map(|c| c.cdf(u)).sum::<f64>()
    }

    /// Closed convex hull of the support, possibly unbounded.
    pub fn support(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for a in &self.atoms {
            lo = lo.min(a.x);
            hi = hi.max(a.x);
        }
        for c in &self.cont {
            if c.mass() > 0.0 {
                let (wlo, whi) = c.effective_window();
                lo = lo.min(wlo);
                hi = hi.max(whi);
            }
        }
        (lo, hi)
    }

    pub fn has_bounded_support(&self) -> bool {
        let (lo, hi) = self.support();
        lo.is_finite() && hi.is_finite()
    }

    /// Mass of the atom at `x` (0 when there is none).
    pub fn mass_at(&self, x: f64) -> f64 {
        self.atoms.iter().find(|a| a.x == x).map(|a| a.mass).unwrap_or(0.0)
    }

    /// True when all mass sits at a single point.
    pub fn is_degenerate(&self) -> bool {
        self.atoms.len() == 1 && self.cont.iter().all(|c| c.mass() <= 0.0)
    }

    pub fn max_atom_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).fold(0.0, f64::max)
    }

    // ------------------------------------------------------------------
    // measure-weighted integration

    /// `int g d alpha` for complex-valued g, with family-aware substitutions
    /// (heavy tails are mapped to compact parameter ranges).
    pub fn integrate_complex<F: Fn(f64) -> Complex64>(
        &self,
        g: F,
        cfg: &QuadratureConfig,
    ) -> Result<Complex64, MeasureError> {
        self.integrate_complex_windowed(g, f64::NEG_INFINITY, f64::INFINITY, cfg)
    }

    /// Same as `integrate_complex`, restricted to `x in [lo, hi]` (atoms on
    /// the boundary included).
    pub fn integrate_complex_windowed<F: Fn(f64) -> Complex64>(
        &self,
        g: F,
        lo: f64,
        hi: f64,
        cfg: &QuadratureConfig,
    ) -> Result<Complex64, MeasureError> {
        let mut total = Complex64::new(0.0, 0.0);
        for a in &self.atoms {
            if a.x >= lo && a.x <= hi {
                total += g(a.x) * a.mass;
            }
        }
        for c in &self.cont {
            total += integrate_component(c, &g, lo, hi, cfg)?;
        }
        Ok(total)
    }

    /// `int g d alpha` for real-valued g.
    pub fn integrate<F: Fn(f64) -> f64>(
        &self,
        g: F,
        cfg: &QuadratureConfig,
    ) -> Result<f64, MeasureError> {
        self.integrate_complex(|x| Complex64::new(g(x), 0.0), cfg).map(|v| v.re)
    }

    /// Power moments `int x^m d alpha` for m = 1..=k. `None` when a component
    /// has unbounded support with non-integrable tails (full-line Cauchy).
    pub fn power_moments(&self, k: usize, cfg: &QuadratureConfig) -> Option<Vec<f64>> {
        for c in &self.cont {
            let (lo, hi) = c.effective_window();
            if matches!(c.family, Family::Cauchy { .. }) && (lo.is_infinite() || hi.is_infinite()) {
                return None;
            }
        }
        let mut out = Vec::with_capacity(k);
        for m in 1..=k {
            match self.integrate(|x| x.powi(m as i32), cfg) {
                Ok(v) if v.is_finite() => out.push(v),
                _ => return None,
            }
        }
        Some(out)
    }

    // ------------------------------------------------------------------
    // spec operations

    /// `int log(1 + |x|) d alpha`, with geometric-decay divergence detection
    /// on dyadic tail windows. Returns `(value, finite)`.
    pub fn log_moment(&self, cfg: &QuadratureConfig) -> Result<(f64, bool), MeasureError> {
        let mut total: f64 = self.atoms.iter().map(|a| a.mass * (1.0 + a.x.abs()).ln()).sum();
        let h = |x: f64| (1.0 + x.abs()).ln();
        for c in &self.cont {
            let (lo, hi) = c.effective_window();
            if lo.is_finite() && hi.is_finite() {
                total += integrate_component(c, &|x| Complex64::new(h(x), 0.0), lo, hi, cfg)?.re;
                continue;
            }
            // central part
            total += integrate_component(c, &|x| Complex64::new(h(x), 0.0), lo.max(-1.0), hi.min(1.0), cfg)?.re;
            // dyadic tails with divergence detection
            for sign in [1.0f64, -1.0] {
                let open = if sign > 0.0 { hi.is_infinite() } else { lo.is_infinite() };
                if !open {
                    let (wlo, whi) = if sign > 0.0 {
                        (1.0f64.min(hi), hi)
                    } else {
                        (lo, (-1.0f64).max(lo))
                    };
                    if whi > wlo {
                        total +=
                            integrate_component(c, &|x| Complex64::new(h(x), 0.0), wlo, whi, cfg)?.re;
                    }
                    continue;
                }
                let mut slow_octaves = 0usize;
                let mut prev: Option<f64> = None;
                let mut j = 0;
                loop {
                    let (a, b) = (2.0f64.powi(j), 2.0f64.powi(j + 1));
                    let (wlo, whi) = if sign > 0.0 { (a, b) } else { (-b, -a) };
                    let piece =
                        integrate_component(c, &|x| Complex64::new(h(x), 0.0), wlo, whi, cfg)?.re;
                    total += piece;
                    if let Some(p) = prev {
                        if piece >= 0.9 * p && piece > 0.0 {
                            slow_octaves += 1;
                            if slow_octaves >= 8 {
                                return Ok((f64::INFINITY, false));
                            }
                        } else {
                            slow_octaves = 0;
                        }
                    }
                    prev = Some(piece);
                    if piece.abs() < 1e-14 * (1.0 + total.abs()) && j > 8 {
                        break;
                    }
                    j += 1;
                    if j > 220 {
                        return Err(MeasureError::Indeterminate(
                            "tail quadrature did not settle".into(),
                        ));
                    }
                }
            }
        }
        Ok((total, true))
    }

    /// Collapses all mass outside `(-k, k)` onto atoms at `-k` and `k`.
    pub fn truncate(&self, k: f64) -> Result<Self, MeasureError> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(MeasureError::Invalid(format!("truncation level {k} must be positive")));
        }
        let mut atoms: Vec<Atom> = Vec::new();
        let mut mass_lo = 0.0;
        let mut mass_hi = 0.0;
        for a in &self.atoms {
            if a.x <= -k {
                mass_lo += a.mass;
            } else if a.x >= k {
                mass_hi += a.mass;
            } else {
                atoms.push(*a);
            }
        }
        let mut cont = Vec::new();
        for c in &self.cont {
            let (lo, hi) = c.effective_window();
            if lo >= hi {
                continue;
            }
            mass_lo += c.cdf(-k);
            mass_hi += (c.mass() - c.cdf(k)).max(0.0);
            let nlo = lo.max(-k);
            let nhi = hi.min(k);
            if nlo < nhi {
                cont.push(ContComponent { family: c.family.clone(), window: Some((nlo, nhi)) });
            }
        }
        if mass_lo > 0.0 {
            atoms.push(Atom { x: -k, mass: mass_lo });
        }
        if mass_hi > 0.0 {
            atoms.push(Atom { x: k, mass: mass_hi });
        }
        Ok(ParameterMeasure::from_parts(atoms, cont))
    }

    /// Image measure under an affine map `x -> scale x + shift` (exact for
    /// every family).
    pub fn pushforward_affine(&self, scale: f64, shift: f64) -> Result<Self, MeasureError> {
        if !scale.is_finite() || !shift.is_finite() {
            return Err(MeasureError::Invalid("affine coefficients must be finite".into()));
        }
        if scale == 0.0 {
            return ParameterMeasure::discrete(vec![(shift, self.total_mass())]);
        }
        let atoms: Vec<Atom> =
            self.atoms.iter().map(|a| Atom { x: scale * a.x + shift, mass: a.mass }).collect();
        let mut cont = Vec::new();
        for c in &self.cont {
            let map_window = |w: Option<(f64, f64)>| {
                w.map(|(lo, hi)| {
                    let (a, b) = (scale * lo + shift, scale * hi + shift);
                    (a.min(b), a.max(b))
                })
            };
            let mapped = match &c.family {
                Family::Cauchy { theta, sigma } => ContComponent {
                    family: Family::Cauchy {
                        theta: scale * theta + shift,
                        sigma: sigma / scale.abs(),
                    },
                    window: map_window(c.window),
                },
                Family::Gaussian { mass, theta, sigma } => ContComponent {
                    family: Family::Gaussian {
                        mass: *mass,
                        theta: scale * theta + shift,
                        sigma: scale.abs() * sigma,
                    },
                    window: map_window(c.window),
                },
                Family::Uniform01 { mass } => {
                    // affine image of the flat density: a two-knot table
                    let (a, b) = (shift, scale + shift);
                    let (lo, hi) = (a.min(b), a.max(b));
                    ContComponent {
                        family: Family::Table {
                            xs: vec![lo, hi],
                            pdf: vec![mass / (hi - lo); 2],
                            mass: *mass,
                        },
                        window: map_window(c.window),
                    }
                }
                Family::Table { xs, pdf, mass } => {
                    let mut pts: Vec<(f64, f64)> = xs
                        .iter()
                        .zip(pdf.iter())
                        .map(|(&x, &p)| (scale * x + shift, p / scale.abs()))
                        .collect();
                    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
                    ContComponent {
                        family: Family::Table {
                            xs: pts.iter().map(|p| p.0).collect(),
                            pdf: pts.iter().map(|p| p.1).collect(),
                            mass: *mass,
                        },
                        window: map_window(c.window),
                    }
                }
            };
            cont.push(mapped);
        }
        Ok(ParameterMeasure::from_parts(atoms, cont))
    }

    /// Image measure under a general measurable map. Atoms map exactly;
    /// continuous components require a grid level and are first discretized
    /// into mass-equalized bins.
    pub fn pushforward_map<F: Fn(f64) -> f64>(
        &self,
        f: F,
        grid: Option<usize>,
    ) -> Result<Self, MeasureError> {
        let mut atoms: Vec<Atom> =
            self.atoms.iter().map(|a| Atom { x: f(a.x), mass: a.mass }).collect();
        if self.cont.iter().any(|c| c.mass() > 0.0) {
            let n = grid.ok_or_else(|| {
                MeasureError::Refused(
                    "non-affine pushforward of a continuous measure needs a grid level".into(),
                )
            })?;
            for c in &self.cont {
                for a in discretize_component(c, n) {
                    atoms.push(Atom { x: f(a.x), mass: a.mass });
                }
            }
        }
        if atoms.iter().any(|a| !a.x.is_finite()) {
            return Err(MeasureError::Invalid("map produced non-finite locations".into()));
        }
        Ok(ParameterMeasure::from_parts(atoms, vec![]))
    }

    /// Image measure under `x -> 1/x`; mass at 0 is dropped and reported.
    /// Continuous components are discretized into `grid` mass-equalized bins.
    pub fn thorin_measure(&self, grid: usize) -> Result<(Self, f64), MeasureError> {
        let mut dropped = 0.0;
        let mut atoms: Vec<Atom> = Vec::new();
        for a in &self.atoms {
            if a.x == 0.0 {
                dropped += a.mass;
            } else {
                atoms.push(Atom { x: 1.0 / a.x, mass: a.mass });
            }
        }
        for c in &self.cont {
            for a in discretize_component(c, grid) {
                if a.x == 0.0 {
                    dropped += a.mass;
                } else {
                    atoms.push(Atom { x: 1.0 / a.x, mass: a.mass });
                }
            }
        }
        if atoms.is_empty() {
            // empty measure: represent as an empty atom list
            return Ok((ParameterMeasure { atoms: vec![], cont: vec![] }, dropped));
        }
        Ok((ParameterMeasure::from_parts(atoms, vec![]), dropped))
    }

    /// Mass-equalized discretization of the whole measure into about `n`
    /// atoms (continuous components only; existing atoms pass through).
    pub fn discretize(&self, n: usize) -> Self {
        let mut atoms = self.atoms.clone();
        for c in &self.cont {
            atoms.extend(discretize_component(c, n));
        }
        ParameterMeasure::from_parts(atoms, vec![])
    }

    /// Reflection `x -> -x` (exact).
    pub fn reflect(&self) -> Self {
        self.pushforward_affine(-1.0, 0.0).expect("reflection is total")
    }

    /// Max deviation `|A(-u-) + A(u) - a|` over probe points: 0 for measures
    /// symmetric about the origin.
    pub fn asymmetry_defect(&self, probes: &[f64]) -> f64 {
        let refl = self.reflect();
        probes
            .iter()
            .map(|&u| (self.cdf(u) - refl.cdf(u)).abs())
            .fold(0.0, f64::max)
    }

    /// Draw one point from the normalized measure given uniforms
    /// `(component_select, within_component)` in [0,1). Deterministic.
    pub fn sample_point(&self, u_select: f64, u_within: f64) -> f64 {
        let total = self.total_mass();
        let mut acc = 0.0;
        let target = u_select * total;
        for a in &self.atoms {
            acc += a.mass;
            if target < acc {
                return a.x;
            }
        }
        for c in &self.cont {
            acc += c.mass();
            if target < acc {
                return c.quantile(u_within);
            }
        }
        // fall through on rounding: last support point
        if let Some(c) = self.cont.last() {
            c.quantile(u_within)
        } else {
            self.atoms.last().map(|a| a.x).unwrap_or(0.0)
        }
    }
}

/// Mass-equalized bins: `n` atoms, each carrying `mass/n`, placed at the
/// quantiles of the bin midpoints.
fn discretize_component(c: &ContComponent, n: usize) -> Vec<Atom> {
    let mass = c.mass();
    if mass <= 0.0 || n == 0 {
        return vec![];
    }
    let w = mass / n as f64;
    (0..n)
        .map(|j| {
            let p = (j as f64 + 0.5) / n as f64;
            Atom { x: c.quantile(p), mass: w }
        })
        .collect()
}

/// Integral of `g` against one continuous component over `[lo, hi]`, using a
/// tail-compactifying substitution for the Cauchy family.
fn integrate_component<F: Fn(f64) -> Complex64>(
    c: &ContComponent,
    g: &F,
    lo: f64,
    hi: f64,
    cfg: &QuadratureConfig,
) -> Result<Complex64, MeasureError> {
    let (wlo, whi) = c.effective_window();
    let (a, b) = (wlo.max(lo), whi.min(hi));
    if a >= b {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let to_err = |e: crate::quad::QuadError| MeasureError::Invalid(format!("quadrature failed: {e}"));
    match &c.family {
        Family::Cauchy { theta, sigma } => {
            if a.is_finite() && b.is_finite() {
                // finite window: integrate in x-space (the substitution below
                // would wreck oscillatory integrands near its endpoints)
                let fam = c.family.clone();
                let mut f = |x: f64| g(x) * fam.pdf(x);
                let (v, _) = crate::quad::integrate_interval(
                    &mut f,
                    a,
                    b,
                    crate::quad::Endpoint::Regular,
                    crate::quad::Endpoint::Regular,
                    cfg,
                )
                .map_err(to_err)?;
                return Ok(v);
            }
            // x = theta + tan(phi)/sigma maps the density to dphi/pi
            let phi_of = |x: f64| {
                if x == f64::NEG_INFINITY {
                    -std::f64::consts::FRAC_PI_2
                } else if x == f64::INFINITY {
                    std::f64::consts::FRAC_PI_2
                } else {
                    (sigma * (x - theta)).atan()
                }
            };
            let (p0, p1) = (phi_of(a), phi_of(b));
            let mut f = |phi: f64| g(theta + phi.tan() / sigma) / std::f64::consts::PI;
            let (v, _) = crate::quad::integrate_interval(
                &mut f,
                p0,
                p1,
                crate::quad::Endpoint::Regular,
                crate::quad::Endpoint::Regular,
                cfg,
            )
            .map_err(to_err)?;
            Ok(v)
        }
        Family::Gaussian { theta, sigma, .. } => {
            let (a, b) = (a.max(theta - 12.0 * sigma), b.min(theta + 12.0 * sigma));
            if a >= b {
                return Ok(Complex64::new(0.0, 0.0));
            }
            let fam = c.family.clone();
            let mut f = |x: f64| g(x) * fam.pdf(x);
            let (v, _) = crate::quad::integrate_interval(
                &mut f,
                a,
                b,
                crate::quad::Endpoint::Regular,
                crate::quad::Endpoint::Regular,
                cfg,
            )
            .map_err(to_err)?;
            Ok(v)
        }
        Family::Uniform01 { .. } | Family::Table { .. } => {
            let fam = c.family.clone();
            let mut f = |x: f64| g(x) * fam.pdf(x);
            let (v, _) = crate::quad::integrate_interval(
                &mut f,
                a,
                b,
                crate::quad::Endpoint::Regular,
                crate::quad::Endpoint::Regular,
                cfg,
            )
            .map_err(to_err)?;
            Ok(v)
        }
    }
}

// ----------------------------------------------------------------------
// measure definition files

#[derive(Debug, Serialize, Deserialize)]
struct ParamsDef {
    #[serde(default)]
    theta: Option<f64>,
    #[serde(default)]
    sigma: Option<serde_json::Value>,
}

#[derive(Debug, Serialize, Deserialize)]
struct MeasureDef {
    kind: String,
    #[serde(default)]
    total_mass: Option<f64>,
    #[serde(default)]
    atoms: Option<Vec<Atom>>,
    #[serde(default)]
    params: Option<ParamsDef>,
    #[serde(default)]
    density_table: Option<Vec<[f64; 2]>>,
}

impl ParameterMeasure {
    /// Parses a measure-definition file (JSON syntax; see the README for the
    /// schema). The only non-decimal token accepted is `"sigma": "inf"`.
    pub fn from_json(text: &str) -> Result<Self, MeasureError> {
        let def: MeasureDef =
            serde_json::from_str(text).map_err(|e| MeasureError::Parse(e.to_string()))?;
        let sigma_of = |p: &Option<ParamsDef>| -> Result<Option<f64>, MeasureError> {
            match p.as_ref().and_then(|p| p.sigma.as_ref()) {
                None => Ok(None),
                Some(serde_json::Value::Number(n)) => Ok(n.as_f64()),
                Some(serde_json::Value::String(s)) if s == "inf" => Ok(Some(f64::INFINITY)),
                Some(v) => Err(MeasureError::Parse(format!(
                    "sigma must be a number or \"inf\", got {v}"
                ))),
            }
        };
        match def.kind.as_str() {
            "discrete" => {
                let atoms = def
                    .atoms
                    .ok_or_else(|| MeasureError::Parse("discrete measure needs atoms".into()))?;
                let m = ParameterMeasure::discrete(atoms.iter().map(|a| (a.x, a.mass)).collect())?;
                if let Some(tm) = def.total_mass {
                    let got = m.total_mass();
                    if (got - tm).abs() > MASS_TOL * tm.max(1.0) {
                        return Err(MeasureError::Parse(format!(
                            "total_mass {tm} disagrees with atom masses {got}"
                        )));
                    }
                }
                Ok(m)
            }
            "cauchy" => {
                let theta = def.params.as_ref().and_then(|p| p.theta).unwrap_or(0.0);
                let sigma = sigma_of(&def.params)?.unwrap_or(1.0);
                if let Some(tm) = def.total_mass {
                    if (tm - 1.0).abs() > MASS_TOL {
                        return Err(MeasureError::Parse(
                            "cauchy parameter measures carry total_mass 1".into(),
                        ));
                    }
                }
                ParameterMeasure::cauchy(theta, sigma)
            }
            "gaussian" => {
                let theta = def.params.as_ref().and_then(|p| p.theta).unwrap_or(0.0);
                let sigma = sigma_of(&def.params)?.unwrap_or(1.0);
                let mass = def
                    .total_mass
                    .ok_or_else(|| MeasureError::Parse("gaussian needs total_mass".into()))?;
                ParameterMeasure::gaussian_scaled(mass, theta, sigma)
            }
            "uniform01" => {
                let mass = def
                    .total_mass
                    .ok_or_else(|| MeasureError::Parse("uniform01 needs total_mass".into()))?;
                ParameterMeasure::uniform01_scaled(mass)
            }
            "density-table" => {
                let table = def.density_table.ok_or_else(|| {
                    MeasureError::Parse("density-table measure needs density_table".into())
                })?;
                let mass = def
                    .total_mass
                    .ok_or_else(|| MeasureError::Parse("density-table needs total_mass".into()))?;
                ParameterMeasure::custom_density(
                    table.iter().map(|p| (p[0], p[1])).collect(),
                    mass,
                )
            }
            other => Err(MeasureError::Parse(format!("unknown measure kind \"{other}\""))),
        }
    }

    /// Serializes back to the definition format (discrete and single-family
    /// measures only; mixed measures are emitted as `discrete` after
    /// discretization and are not round-trippable).
    pub fn to_json(&self) -> serde_json::Value {
        if self.cont.is_empty() {
            return serde_json::json!({
                "kind": "discrete",
                "total_mass": self.total_mass(),
                "atoms": self.atoms,
            });
        }
        if self.atoms.is_empty() && self.cont.len() == 1 && self.cont[0].window.is_none() {
            match &self.cont[0].family {
                Family::Cauchy { theta, sigma } => {
                    return serde_json::json!({
                        "kind": "cauchy",
                        "total_mass": 1.0,
                        "params": {"theta": theta, "sigma": sigma},
                    })
                }
                Family::Gaussian { mass, theta, sigma } => {
                    return serde_json::json!({
                        "kind": "gaussian",
                        "total_mass": mass,
                        "params": {"theta": theta, "sigma": sigma},
                    })
                }
                Family::Uniform01 { mass } => {
                    return serde_json::json!({"kind": "uniform01", "total_mass": mass})
                }
                Family::Table { xs, pdf, mass } => {
                    let table: Vec<[f64; 2]> =
                        xs.iter().zip(pdf.iter()).map(|(&x, &p)| [x, p]).collect();
                    return serde_json::json!({
                        "kind": "density-table",
                        "total_mass": mass,
                        "density_table": table,
                    });
                }
            }
        }
        let d = self.discretize(4096);
        serde_json::json!({
            "kind": "discrete",
            "total_mass": d.total_mass(),
            "atoms": d.atoms,
        })
    }
}
