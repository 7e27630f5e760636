//! Sample-based bound on the probability that a fixed solution violates a row.
//!
//! For independent coefficients `a_ij` supported on `[a - d⁻, a + d⁺]` and
//! any `t >= 0`,
//!
//! ```text
//! P[a_i'x > b_i] <= exp(-t b_i + sum_j ln B_ij(t, x))
//! ```
//!
//! where `B_ij` bounds `E[exp(t x_j a_ij)]` by convexity of the exponential
//! between the ends of the support, using a Hoeffding upper estimate of the
//! unknown mean from `W` samples. The estimate holds with probability at
//! least `1 - beta` per coefficient, so the bound holds with probability at
//! least the product of those terms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::TOL;

/// Support of one coefficient: `[nominal - down, nominal + up]`, with
/// `down` and `up` nonnegative magnitudes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Support {
    pub nominal: f64,
    pub down: f64,
    pub up: f64,
}

impl Support {
    /// From signed extreme thresholds `d^{K-} <= 0 <= d^{K+}`.
    pub fn from_thresholds(nominal: f64, lowest: f64, highest: f64) -> Result<Self> {
        Self::new(nominal, -lowest, highest)
    }

    pub fn new(nominal: f64, down: f64, up: f64) -> Result<Self> {
        if !(down >= 0.0 && up >= 0.0 && nominal.is_finite() && down.is_finite() && up.is_finite())
        {
            return Err(Error::InvalidArgument(format!(
                "support needs finite nonnegative widths, got down {down} and up {up}"
            )));
        }
        Ok(Self { nominal, down, up })
    }

    pub fn lo(&self) -> f64 {
        self.nominal - self.down
    }

    pub fn hi(&self) -> f64 {
        self.nominal + self.up
    }

    pub fn width(&self) -> f64 {
        self.down + self.up
    }

    fn contains(&self, v: f64) -> bool {
        v >= self.lo() - TOL && v <= self.hi() + TOL
    }
}

/// How the Hoeffding radius scales with `x_j`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Radius {
    /// `x (d⁺ + d⁻) sqrt(ln(1/beta) / 2W)`, from `beta = exp(-2 tau² W / (x⁴ (d⁺ + d⁻)²))`.
    #[default]
    Quartic,
    /// `(d⁺ + d⁻) sqrt(ln(1/beta) / 2W)`, Hoeffding applied to `a_ij` directly.
    Quadratic,
}

/// One coefficient of the row: support, sample summary and confidence parameter.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Coefficient {
    pub support: Support,
    /// Sample mean `mu_ij`.
    pub mean: f64,
    /// Number of samples `W`.
    pub count: usize,
    pub beta: f64,
}

impl Coefficient {
    /// Summarizes samples, which must lie in the support.
    pub fn from_samples(support: Support, samples: &[f64], beta: f64) -> Result<Self> {
        if let Some(v) = samples.iter().find(|&&v| !support.contains(v)) {
            return Err(Error::InvalidArgument(format!(
                "sample {v} outside [{}, {}]",
                support.lo(),
                support.hi()
            )));
        }
        let c = Self {
            support,
            mean: sample_mean(samples)?,
            count: samples.len(),
            beta,
        };
        c.check()?;
        Ok(c)
    }

    /// A coefficient that never deviates.
    pub fn certain(value: f64) -> Self {
        Self {
            support: Support {
                nominal: value,
                down: 0.0,
                up: 0.0,
            },
            mean: value,
            count: 1,
            beta: 0.5,
        }
    }

    fn check(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "beta must lie in (0, 1), got {}",
                self.beta
            )));
        }
        if self.support.width() > 0.0 && (self.count == 0 || !self.support.contains(self.mean)) {
            return Err(Error::InvalidArgument(format!(
                "mean {} of {} samples is not inside [{}, {}]",
                self.mean,
                self.count,
                self.support.lo(),
                self.support.hi()
            )));
        }
        Ok(())
    }
}

pub fn sample_mean(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("sample mean of no samples".into()));
    }
    Ok(samples.iter().sum::<f64>() / samples.len() as f64)
}

/// Hoeffding radius added to the sample mean.
pub fn mean_radius(support: &Support, x: f64, w: usize, beta: f64, radius: Radius) -> f64 {
    let base = support.width() * ((1.0 / beta).ln() / (2.0 * w as f64)).sqrt();
    match radius {
        Radius::Quartic => x * base,
        Radius::Quadratic => base,
    }
}

/// `((u - m) e^{g l} + (m - l) e^{g u}) / (u - l)`, the convexity bound on
/// `E[e^{g V}]` for `l <= V <= u` with `E[V] = m`.
pub fn convexity_bound(l: f64, u: f64, mean: f64, gamma: f64) -> f64 {
    ((u - mean) * (gamma * l).exp() + (mean - l) * (gamma * u).exp()) / (u - l)
}

fn log_convexity_bound(l: f64, u: f64, mean: f64, g: f64) -> f64 {
    let d = u - l;
    let terms = [((u - mean) / d, g * l), ((mean - l) / d, g * u)];
    let hi = terms
        .iter()
        .filter(|(w, _)| *w > 0.0)
        .map(|(_, e)| *e)
        .fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = terms
        .iter()
        .filter(|(w, _)| *w > 0.0)
        .map(|(w, e)| w * (e - hi).exp())
        .sum();
    hi + s.ln()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MomentBound {
    pub log_b: f64,
    /// Mean estimate used, after clamping into the support.
    pub mean: f64,
    /// `x_j = 0`: the term is exactly one and takes no part in the confidence.
    pub excluded: bool,
}

impl MomentBound {
    pub fn value(&self) -> f64 {
        self.log_b.exp()
    }
}

/// `B_ij[t, x]` in log form.
pub fn moment_bound(coef: &Coefficient, x: f64, t: f64, radius: Radius) -> Result<MomentBound> {
    coef.check()?;
    if !(t >= 0.0) || !(x >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "t and x must be nonnegative, got {t} and {x}"
        )));
    }
    let s = coef.support;
    if x == 0.0 {
        return Ok(MomentBound {
            log_b: 0.0,
            mean: s.nominal,
            excluded: true,
        });
    }
    if s.width() == 0.0 {
        return Ok(MomentBound {
            log_b: t * x * s.nominal,
            mean: s.nominal,
            excluded: false,
        });
    }
    let m = (coef.mean + mean_radius(&s, x, coef.count, coef.beta, radius)).clamp(s.lo(), s.hi());
    let log_b = if t == 0.0 {
        0.0
    } else {
        log_convexity_bound(s.lo(), s.hi(), m, t * x)
    };
    Ok(MomentBound {
        log_b,
        mean: m,
        excluded: false,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ViolationBound {
    pub t: f64,
    pub log_bound: f64,
    pub bound_raw: f64,
    pub bound_clamped: f64,
    pub confidence: f64,
    pub excluded_vars: Vec<usize>,
}

fn check_row(coefs: &[Coefficient], x: &[f64]) -> Result<()> {
    if coefs.len() != x.len() {
        return Err(Error::Dimension(format!(
            "{} coefficients for {} variables",
            coefs.len(),
            x.len()
        )));
    }
    coefs.iter().try_for_each(Coefficient::check)
}

fn log_bound_at(coefs: &[Coefficient], x: &[f64], b: f64, t: f64, radius: Radius) -> Result<f64> {
    let mut s = -t * b;
    for (c, &xj) in coefs.iter().zip(x) {
        s += moment_bound(c, xj, t, radius)?.log_b;
    }
    Ok(s)
}

/// The bound at a fixed `t`.
pub fn violation_bound(
    coefs: &[Coefficient],
    x: &[f64],
    b: f64,
    t: f64,
    radius: Radius,
) -> Result<ViolationBound> {
    check_row(coefs, x)?;
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "t must be nonnegative, got {t}"
        )));
    }
    let log_bound = log_bound_at(coefs, x, b, t, radius)?;
    let mut confidence = 1.0;
    let mut excluded_vars = Vec::new();
    for (j, (c, &xj)) in coefs.iter().zip(x).enumerate() {
        if xj == 0.0 {
            excluded_vars.push(j);
        } else if c.support.width() > 0.0 {
            confidence *= 1.0 - c.beta;
        }
    }
    let bound_raw = log_bound.exp();
    Ok(ViolationBound {
        t,
        log_bound,
        bound_raw,
        bound_clamped: bound_raw.min(1.0),
        confidence,
        excluded_vars,
    })
}

const GOLDEN_STEPS: usize = 40;

/// Minimizes the bound over `t in (0, t_max]`.
///
/// Evaluates a geometric grid from `t_max * 1e-6` to `t_max` (and `t = 1`
/// when it lies in range), then refines with golden-section search between
/// the neighbours of the best grid point. Returns the best point evaluated.
pub fn optimize_t(
    coefs: &[Coefficient],
    x: &[f64],
    b: f64,
    t_max: f64,
    grid: usize,
    radius: Radius,
) -> Result<ViolationBound> {
    check_row(coefs, x)?;
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "t_max must be positive, got {t_max}"
        )));
    }
    let grid = grid.max(1);
    let lo = t_max * 1e-6;
    let mut ts: Vec<f64> = if grid == 1 {
        vec![t_max]
    } else {
        (0..grid)
            .map(|k| lo * (t_max / lo).powf(k as f64 / (grid - 1) as f64))
            .collect()
    };
    *ts.last_mut().unwrap() = t_max;
    let f = |t: f64| log_bound_at(coefs, x, b, t, radius);
    let vals = ts.iter().map(|&t| f(t)).collect::<Result<Vec<_>>>()?;
    let mut k = 0;
    for (idx, &v) in vals.iter().enumerate() {
        if v < vals[k] {
            k = idx;
        }
    }
    let (mut best_t, mut best_v) = (ts[k], vals[k]);
    if t_max >= 1.0 {
        let v = f(1.0)?;
        if v < best_v {
            (best_t, best_v) = (1.0, v);
        }
    }
    let (mut a, mut c) = (ts[k.saturating_sub(1)], ts[(k + 1).min(grid - 1)]);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut p = c - phi * (c - a);
    let mut q = a + phi * (c - a);
    let (mut fp, mut fq) = (f(p)?, f(q)?);
    for _ in 0..GOLDEN_STEPS {
        for (t, v) in [(p, fp), (q, fq)] {
            if v < best_v {
                (best_t, best_v) = (t, v);
            }
        }
        if fp <= fq {
            c = q;
            (q, fq) = (p, fp);
            p = c - phi * (c - a);
            fp = f(p)?;
        } else {
            a = p;
            (p, fp) = (q, fq);
            q = a + phi * (c - a);
            fq = f(q)?;
        }
    }
    for (t, v) in [(p, fp), (q, fq)] {
        if v < best_v {
            (best_t, best_v) = (t, v);
        }
    }
    violation_bound(coefs, x, b, best_t, radius)
}

/// Law of one coefficient in a Monte-Carlo experiment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Distribution {
    Constant(f64),
    Uniform { lo: f64, hi: f64 },
}

impl Distribution {
    fn draw(&self, rng: &mut impl Rng) -> f64 {
        match *self {
            Distribution::Constant(v) => v,
            Distribution::Uniform { lo, hi } => {
                if hi > lo {
                    rng.gen_range(lo..hi)
                } else {
                    lo
                }
            }
        }
    }

    fn within(&self, s: &Support) -> bool {
        match *self {
            Distribution::Constant(v) => s.contains(v),
            Distribution::Uniform { lo, hi } => lo <= hi && s.contains(lo) && s.contains(hi),
        }
    }
}

#[derive(Clone, Debug)]
pub struct MonteCarloSetup {
    pub supports: Vec<Support>,
    pub laws: Vec<Distribution>,
    pub x: Vec<f64>,
    pub b: f64,
    /// Samples per coefficient for each bound.
    pub w: usize,
    pub beta: f64,
    pub radius: Radius,
    pub t_max: f64,
    pub grid: usize,
    pub trials: usize,
    pub resamples: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonteCarloReport {
    /// Mean over resamples of the violation frequency.
    pub empirical_violation: f64,
    /// Fraction of resamples whose violation frequency stays within the bound.
    pub coverage: f64,
    /// Confidence the bound claims.
    pub confidence: f64,
    pub bounds: Vec<f64>,
    pub frequencies: Vec<f64>,
}

/// For each resample, draws `w` samples per coefficient, computes the
/// optimized bound, then draws `trials` fresh rows and counts violations.
/// Resample `r` uses stream `r` of a ChaCha8 generator seeded with `seed`.
pub fn monte_carlo_check(setup: &MonteCarloSetup) -> Result<MonteCarloReport> {
    let n = setup.x.len();
    if setup.supports.len() != n || setup.laws.len() != n {
        return Err(Error::Dimension(
            "one support and one law per variable required".into(),
        ));
    }
    if setup.w == 0 || setup.trials == 0 || setup.resamples == 0 {
        return Err(Error::InvalidArgument(
            "sample, trial and resample counts must be positive".into(),
        ));
    }
    if let Some(j) = (0..n).find(|&j| !setup.laws[j].within(&setup.supports[j])) {
        return Err(Error::InvalidArgument(format!(
            "law of coefficient {j} leaves its support"
        )));
    }
    let mut bounds = Vec::with_capacity(setup.resamples);
    let mut frequencies = Vec::with_capacity(setup.resamples);
    let mut confidence = 1.0;
    for r in 0..setup.resamples {
        let mut rng = ChaCha8Rng::seed_from_u64(setup.seed);
        rng.set_stream(r as u64);
        let coefs = (0..n)
            .map(|j| {
                let samples: Vec<f64> =
                    (0..setup.w).map(|_| setup.laws[j].draw(&mut rng)).collect();
                Coefficient::from_samples(setup.supports[j], &samples, setup.beta)
            })
            .collect::<Result<Vec<_>>>()?;
        let vb = optimize_t(
            &coefs,
            &setup.x,
            setup.b,
            setup.t_max,
            setup.grid,
            setup.radius,
        )?;
        confidence = vb.confidence;
        let mut hits = 0usize;
        for _ in 0..setup.trials {
            let lhs: f64 = (0..n)
                .map(|j| setup.laws[j].draw(&mut rng) * setup.x[j])
                .sum();
            if lhs > setup.b {
                hits += 1;
            }
        }
        bounds.push(vb.bound_raw);
        frequencies.push(hits as f64 / setup.trials as f64);
    }
    let covered = bounds
        .iter()
        .zip(&frequencies)
        .filter(|(b, f)| f <= b)
        .count();
    Ok(MonteCarloReport {
        empirical_violation: frequencies.iter().sum::<f64>() / frequencies.len() as f64,
        coverage: covered as f64 / setup.resamples as f64,
        confidence,
        bounds,
        frequencies,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn symmetric(w: usize) -> Coefficient {
        Coefficient {
            support: Support::new(0.0, 1.0, 1.0).unwrap(),
            mean: 0.0,
            count: w,
            beta: 0.05,
        }
    }

    #[test]
    fn sample_means() {
        assert_eq!(sample_mean(&[2.0, 2.0, 2.0]).unwrap(), 2.0);
        assert_eq!(sample_mean(&[1.0, 3.0]).unwrap(), 2.0);
        assert!(sample_mean(&[]).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v: Vec<f64> = (0..1000).map(|_| rng.gen_range(0.0..1.0)).collect();
        assert!((sample_mean(&v).unwrap() - 0.5).abs() < 0.05);
    }

    #[test]
    fn samples_must_fit_the_support() {
        let s = Support::new(0.0, 1.0, 1.0).unwrap();
        assert!(Coefficient::from_samples(s, &[0.5, 1.5], 0.1).is_err());
        assert!(Coefficient::from_samples(s, &[], 0.1).is_err());
        assert!(Coefficient::from_samples(s, &[0.5], 1.0).is_err());
    }

    #[test]
    fn trivial_moment_bounds() {
        let c = symmetric(10);
        let z = moment_bound(&c, 0.0, 3.0, Radius::Quartic).unwrap();
        assert_eq!((z.log_b, z.excluded), (0.0, true));
        assert_eq!(
            moment_bound(&c, 2.0, 0.0, Radius::Quartic).unwrap().log_b,
            0.0
        );
        assert!(moment_bound(&c, 1.0, -1.0, Radius::Quartic).is_err());
    }

    #[test]
    fn cosh_case() {
        assert!((convexity_bound(-1.0, 1.0, 0.0, 1.0) - 1f64.cosh()).abs() < 1e-12);
        // radius 2 sqrt(ln 20 / 2W) shrinks with W
        let far = moment_bound(&symmetric(100_000_000), 1.0, 1.0, Radius::Quartic).unwrap();
        assert!((far.value() - 1f64.cosh()).abs() < 1e-3);
        assert!(far.value() >= 1f64.cosh());
    }

    #[test]
    fn mean_estimate_is_clamped() {
        let c =
            Coefficient::from_samples(Support::new(1.0, 1.0, 1.0).unwrap(), &[2.0], 0.01).unwrap();
        let m = moment_bound(&c, 3.0, 1.0, Radius::Quartic).unwrap();
        assert_eq!(m.mean, 2.0);
        assert!((m.log_b - 6.0).abs() < 1e-12);
    }

    #[test]
    fn radius_forms() {
        let s = Support::new(0.0, 1.0, 3.0).unwrap();
        let q = mean_radius(&s, 2.0, 8, 0.5, Radius::Quadratic);
        assert!((q - 4.0 * (2f64.ln() / 16.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean_radius(&s, 2.0, 8, 0.5, Radius::Quartic), 2.0 * q);
    }

    #[test]
    fn certain_coefficients() {
        let v = violation_bound(
            &[Coefficient::certain(2.0)],
            &[1.5],
            4.0,
            2.0,
            Radius::Quartic,
        )
        .unwrap();
        assert!((v.log_bound - (-8.0 + 6.0)).abs() < 1e-12);
        assert_eq!(v.confidence, 1.0);
    }

    #[test]
    fn zero_solution() {
        let c = [symmetric(5), symmetric(5)];
        let v = violation_bound(&c, &[0.0, 0.0], 1.0, 3.0, Radius::Quartic).unwrap();
        assert!((v.bound_raw - (-3f64).exp()).abs() < 1e-15);
        assert_eq!(v.excluded_vars, vec![0, 1]);
        assert_eq!(v.confidence, 1.0);
        assert_eq!(
            violation_bound(&c, &[1.0, 2.0], 1.0, 0.0, Radius::Quartic)
                .unwrap()
                .bound_raw,
            1.0
        );
        let o = optimize_t(&c, &[0.0, 0.0], 1.0, 10.0, 16, Radius::Quartic).unwrap();
        assert_eq!(o.t, 10.0);
    }

    #[test]
    fn optimizer_matches_dense_sweep() {
        let c = [symmetric(1_000_000_000)];
        let b = 0.5;
        let o = optimize_t(&c, &[1.0], b, 10.0, 64, Radius::Quartic).unwrap();
        let f = |t: f64| log_bound_at(&c, &[1.0], b, t, Radius::Quartic).unwrap();
        let dense = (1..=10_000)
            .map(|k| f(k as f64 * 1e-3))
            .fold(f64::INFINITY, f64::min);
        assert!(o.log_bound <= dense + 1e-9);
        assert!(o.log_bound <= f(1.0));
        assert!((o.t - b.atanh()).abs() < 1e-3);
    }

    #[test]
    fn deterministic_rows() {
        let setup = MonteCarloSetup {
            supports: vec![Support::new(1.0, 0.5, 0.5).unwrap()],
            laws: vec![Distribution::Constant(1.0)],
            x: vec![2.0],
            b: 1.5,
            w: 10,
            beta: 0.05,
            radius: Radius::Quartic,
            t_max: 10.0,
            grid: 16,
            trials: 100,
            resamples: 3,
            seed: 9,
        };
        let r = monte_carlo_check(&setup).unwrap();
        assert_eq!(r.empirical_violation, 1.0);
        assert!(r.bounds.iter().all(|&b| b >= 1.0));
        let ok = MonteCarloSetup {
            b: 2.5,
            ..setup.clone()
        };
        assert_eq!(monte_carlo_check(&ok).unwrap().empirical_violation, 0.0);
        assert_eq!(monte_carlo_check(&setup).unwrap(), r);
    }
}
