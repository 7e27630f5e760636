//! Nominal problems, multi-band uncertainty sets and scenarios.
//!
//! A [`NominalProblem`] is a max-form mixed-integer program
//! `max c'x, Ax <= b, x >= 0`. Each coefficient `a_ij` may carry a vector of
//! deviation thresholds `d_ij^{K-} < ... < d_ij^0 = 0 < ... < d_ij^{K+}`
//! stored in a [`BandScheme`], together with the per-band cardinality bounds
//! `l_k <= u_k`. Band `k > K-` is the half-open interval `(d^{k-1}, d^k]`;
//! the lowest band is the single value `d^{K-}`.
//!
//! Coefficients without thresholds are certain. They never deviate and are
//! excluded from band counting, so the profile of row `i` is computed over
//! the `n_i` uncertain coefficients of that row.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Comparison tolerance for coefficients and deviations.
pub const TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Max,
    Min,
}

/// `max c'x  s.t.  Ax <= b, x >= 0, x_j integer for j in int_vars`.
///
/// Minimization instances are stored negated; [`NominalProblem::reported`]
/// restores the caller's sign. Variables listed in `free_vars` are sign
/// unrestricted; this only appears in extended programs such as the compact
/// counterpart.
#[derive(Clone, Debug, PartialEq)]
pub struct NominalProblem {
    sense: Sense,
    c: Vec<f64>,
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    int_vars: Vec<usize>,
    free_vars: Vec<usize>,
}

impl NominalProblem {
    /// Builds a problem from costs given in the caller's `sense`.
    pub fn new(sense: Sense, c: Vec<f64>, a: Vec<Vec<f64>>, b: Vec<f64>) -> Result<Self> {
        let n = c.len();
        if a.len() != b.len() {
            return Err(Error::Dimension(format!(
                "A has {} rows but b has {} entries",
                a.len(),
                b.len()
            )));
        }
        for (i, row) in a.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Dimension(format!(
                    "row {i} of A has {} entries, expected {n}",
                    row.len()
                )));
            }
        }
        let finite = c
            .iter()
            .chain(b.iter())
            .chain(a.iter().flatten())
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidInstance("non-finite problem data".into()));
        }
        let c = match sense {
            Sense::Max => c,
            Sense::Min => c.into_iter().map(|v| -v).collect(),
        };
        Ok(Self {
            sense,
            c,
            a,
            b,
            int_vars: Vec::new(),
            free_vars: Vec::new(),
        })
    }

    pub fn maximize(c: Vec<f64>, a: Vec<Vec<f64>>, b: Vec<f64>) -> Result<Self> {
        Self::new(Sense::Max, c, a, b)
    }

    pub fn with_int_vars(mut self, vars: impl IntoIterator<Item = usize>) -> Result<Self> {
        self.int_vars = self.checked_index_set(vars, "int_vars")?;
        Ok(self)
    }

    pub fn with_free_vars(mut self, vars: impl IntoIterator<Item = usize>) -> Result<Self> {
        self.free_vars = self.checked_index_set(vars, "free_vars")?;
        Ok(self)
    }

    fn checked_index_set(
        &self,
        vars: impl IntoIterator<Item = usize>,
        what: &str,
    ) -> Result<Vec<usize>> {
        let mut v: Vec<usize> = vars.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        if let Some(&j) = v.iter().find(|&&j| j >= self.n()) {
            return Err(Error::InvalidInstance(format!(
                "{what} contains index {j} but n = {}",
                self.n()
            )));
        }
        Ok(v)
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn n(&self) -> usize {
        self.c.len()
    }

    pub fn m(&self) -> usize {
        self.b.len()
    }

    /// Max-form costs.
    pub fn c(&self) -> &[f64] {
        &self.c
    }

    /// Costs in the caller's sense.
    pub fn original_costs(&self) -> Vec<f64> {
        match self.sense {
            Sense::Max => self.c.clone(),
            Sense::Min => self.c.iter().map(|v| -v).collect(),
        }
    }

    pub fn a(&self) -> &[Vec<f64>] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn int_vars(&self) -> &[usize] {
        &self.int_vars
    }

    pub fn free_vars(&self) -> &[usize] {
        &self.free_vars
    }

    pub fn is_integer(&self, j: usize) -> bool {
        self.int_vars.binary_search(&j).is_ok()
    }

    pub fn is_free(&self, j: usize) -> bool {
        self.free_vars.binary_search(&j).is_ok()
    }

    /// Max-form objective value of `x`.
    pub fn objective(&self, x: &[f64]) -> f64 {
        dot(&self.c, x)
    }

    /// Converts a max-form objective value back to the caller's sense.
    pub fn reported(&self, value: f64) -> f64 {
        match self.sense {
            Sense::Max => value,
            Sense::Min => -value,
        }
    }

    pub fn row_activity(&self, i: usize, x: &[f64]) -> f64 {
        dot(&self.a[i], x)
    }

    /// Appends a certain row `coeffs'x <= rhs`.
    pub fn push_row(&mut self, coeffs: Vec<f64>, rhs: f64) -> Result<usize> {
        if coeffs.len() != self.n() {
            return Err(Error::Dimension(format!(
                "new row has {} entries, expected {}",
                coeffs.len(),
                self.n()
            )));
        }
        self.a.push(coeffs);
        self.b.push(rhs);
        Ok(self.m() - 1)
    }

    pub(crate) fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n() {
            return Err(Error::Dimension(format!(
                "point has {} entries, expected {}",
                x.len(),
                self.n()
            )));
        }
        if x.iter().any(|v| !v.is_finite() || *v < -TOL) {
            return Err(Error::InvalidArgument(
                "point must be finite and nonnegative".into(),
            ));
        }
        Ok(())
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Band index range `K = {K-, ..., K+}` with cardinality bounds `l_k, u_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BandBounds {
    k_minus: i32,
    k_plus: i32,
    lower: Vec<u32>,
    upper: Vec<u32>,
}

impl BandBounds {
    /// `lower` and `upper` are indexed by band position `k - K-`.
    pub fn new(k_minus: i32, k_plus: i32, lower: Vec<u32>, upper: Vec<u32>) -> Result<Self> {
        if k_minus > 0 || k_plus < 0 {
            return Err(Error::InvalidScheme(vec![SchemeViolation::BandRange {
                k_minus,
                k_plus,
            }]));
        }
        let len = (k_plus - k_minus + 1) as usize;
        if lower.len() != len || upper.len() != len {
            return Err(Error::InvalidScheme(vec![SchemeViolation::BoundLength {
                expected: len,
                lower: lower.len(),
                upper: upper.len(),
            }]));
        }
        Ok(Self {
            k_minus,
            k_plus,
            lower,
            upper,
        })
    }

    /// Single positive band holding at most `gamma` deviations out of `n`.
    pub fn bertsimas_sim(n: usize, gamma: u32) -> Self {
        Self {
            k_minus: 0,
            k_plus: 1,
            lower: vec![0, 0],
            upper: vec![n as u32, gamma],
        }
    }

    /// Only the nominal band.
    pub fn nominal(n: usize) -> Self {
        Self {
            k_minus: 0,
            k_plus: 0,
            lower: vec![0],
            upper: vec![n as u32],
        }
    }

    pub fn k_minus(&self) -> i32 {
        self.k_minus
    }

    pub fn k_plus(&self) -> i32 {
        self.k_plus
    }

    pub fn bands(&self) -> RangeInclusive<i32> {
        self.k_minus..=self.k_plus
    }

    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    pub fn pos(&self, k: i32) -> usize {
        debug_assert!(self.bands().contains(&k));
        (k - self.k_minus) as usize
    }

    pub fn band(&self, pos: usize) -> i32 {
        self.k_minus + pos as i32
    }

    /// Position of band 0.
    pub fn zero_pos(&self) -> usize {
        (-self.k_minus) as usize
    }

    pub fn lower(&self) -> &[u32] {
        &self.lower
    }

    pub fn upper(&self) -> &[u32] {
        &self.upper
    }

    pub fn lower_of(&self, k: i32) -> u32 {
        self.lower[self.pos(k)]
    }

    pub fn upper_of(&self, k: i32) -> u32 {
        self.upper[self.pos(k)]
    }

    fn violations(&self, row: Option<usize>, n: usize, available: usize) -> Vec<SchemeViolation> {
        let mut out = Vec::new();
        for pos in 0..self.len() {
            let k = self.band(pos);
            let (l, u) = (self.lower[pos], self.upper[pos]);
            if l > u {
                out.push(SchemeViolation::BoundOrder {
                    row,
                    k,
                    lower: l,
                    upper: u,
                });
            }
            if u as usize > n {
                out.push(SchemeViolation::UpperExceedsN {
                    row,
                    k,
                    upper: u,
                    n,
                });
            }
        }
        let u0 = self.upper[self.zero_pos()];
        if u0 as usize != n {
            out.push(SchemeViolation::ZeroBandUpper { row, upper: u0, n });
        }
        let sum: u64 = self.lower.iter().map(|&l| l as u64).sum();
        if sum > available as u64 {
            out.push(SchemeViolation::LowerSum {
                row,
                sum,
                available,
            });
        }
        out
    }
}

/// The profile `(p, theta)` of a band scheme for `n` deviating coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Profile {
    pub k_minus: i32,
    pub p: i32,
    pub theta: Vec<u32>,
}

impl Profile {
    pub fn theta_of(&self, k: i32) -> u32 {
        self.theta[(k - self.k_minus) as usize]
    }

    pub fn total(&self) -> u32 {
        self.theta.iter().sum()
    }
}

/// Computes `p = min{k : sum_{i<=k} l_i + sum_{i>k} u_i <= n}` and the
/// per-band counts `theta_k` (`l_k` below `p`, `u_k` above, remainder at `p`).
///
/// `p` is taken literally from the minimum; it can be negative when every
/// negative band has `l = 0` and every positive band `u = 0`.
pub fn compute_profile(bounds: &BandBounds, n: usize) -> Result<Profile> {
    let n64 = n as i64;
    let mut bad = Vec::new();
    for pos in 0..bounds.len() {
        if bounds.lower[pos] > bounds.upper[pos] {
            bad.push(SchemeViolation::BoundOrder {
                row: None,
                k: bounds.band(pos),
                lower: bounds.lower[pos],
                upper: bounds.upper[pos],
            });
        }
    }
    let u0 = bounds.upper[bounds.zero_pos()];
    if (u0 as usize) < n {
        bad.push(SchemeViolation::ZeroBandUpper {
            row: None,
            upper: u0,
            n,
        });
    }
    let lsum: i64 = bounds.lower.iter().map(|&v| v as i64).sum();
    if lsum > n64 {
        bad.push(SchemeViolation::LowerSum {
            row: None,
            sum: lsum as u64,
            available: n,
        });
    }
    if !bad.is_empty() {
        return Err(Error::InvalidScheme(bad));
    }

    let len = bounds.len();
    let lo: Vec<i64> = bounds.lower.iter().map(|&v| v as i64).collect();
    let up: Vec<i64> = bounds.upper.iter().map(|&v| v as i64).collect();
    let p_pos = (0..len)
        .find(|&pos| {
            let below: i64 = lo[..=pos].iter().sum();
            let above: i64 = up[pos + 1..].iter().sum();
            below + above <= n64
        })
        .expect("last band always satisfies the profile condition when sum(l) <= n");
    let mut theta: Vec<i64> = (0..len)
        .map(|pos| match pos.cmp(&p_pos) {
            std::cmp::Ordering::Less => lo[pos],
            std::cmp::Ordering::Greater => up[pos],
            std::cmp::Ordering::Equal => 0,
        })
        .collect();
    theta[p_pos] = n64 - theta.iter().sum::<i64>();
    debug_assert!(theta[p_pos] >= lo[p_pos] && theta[p_pos] <= up[p_pos]);
    Ok(Profile {
        k_minus: bounds.k_minus,
        p: bounds.band(p_pos),
        theta: theta.into_iter().map(|v| v as u32).collect(),
    })
}

/// One broken rule of a band scheme.
#[derive(Clone, Debug, PartialEq)]
pub enum SchemeViolation {
    BandRange {
        k_minus: i32,
        k_plus: i32,
    },
    BoundLength {
        expected: usize,
        lower: usize,
        upper: usize,
    },
    BoundOrder {
        row: Option<usize>,
        k: i32,
        lower: u32,
        upper: u32,
    },
    UpperExceedsN {
        row: Option<usize>,
        k: i32,
        upper: u32,
        n: usize,
    },
    ZeroBandUpper {
        row: Option<usize>,
        upper: u32,
        n: usize,
    },
    LowerSum {
        row: Option<usize>,
        sum: u64,
        available: usize,
    },
    IndexOutOfRange {
        i: usize,
        j: usize,
    },
    ThresholdCount {
        i: usize,
        j: usize,
        expected: usize,
        got: usize,
    },
    ZeroThreshold {
        i: usize,
        j: usize,
        value: f64,
    },
    ThresholdOrder {
        i: usize,
        j: usize,
        k: i32,
    },
    NonFinite {
        i: usize,
        j: usize,
    },
    RowOutOfRange {
        row: usize,
    },
}

fn scope(row: &Option<usize>) -> String {
    match row {
        Some(i) => format!("row {i}: "),
        None => String::new(),
    }
}

impl fmt::Display for SchemeViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use SchemeViolation::*;
        match self {
            BandRange { k_minus, k_plus } => {
                write!(f, "band range requires K_minus <= 0 <= K_plus, got {k_minus}..{k_plus}")
            }
            BoundLength { expected, lower, upper } => write!(
                f,
                "expected {expected} band bounds, got {lower} lower and {upper} upper"
            ),
            BoundOrder { row, k, lower, upper } => {
                write!(f, "{}band {k}: l = {lower} exceeds u = {upper}", scope(row))
            }
            UpperExceedsN { row, k, upper, n } => {
                write!(f, "{}band {k}: u = {upper} exceeds n = {n}", scope(row))
            }
            ZeroBandUpper { row, upper, n } => write!(
                f,
                "{}u_0 rule: the nominal band must allow all coefficients (u_0 = n = {n}), got {upper}",
                scope(row)
            ),
            LowerSum { row, sum, available } => write!(
                f,
                "{}sum of lower bounds {sum} exceeds the {available} deviating coefficients",
                scope(row)
            ),
            IndexOutOfRange { i, j } => write!(f, "deviation entry ({i}, {j}) is outside A"),
            ThresholdCount { i, j, expected, got } => write!(
                f,
                "coefficient ({i}, {j}): expected {expected} thresholds, got {got}"
            ),
            ZeroThreshold { i, j, value } => {
                write!(f, "coefficient ({i}, {j}): d^0 must be 0, got {value}")
            }
            ThresholdOrder { i, j, k } => write!(
                f,
                "coefficient ({i}, {j}): thresholds not strictly increasing at band {k}"
            ),
            NonFinite { i, j } => write!(f, "coefficient ({i}, {j}): non-finite threshold"),
            RowOutOfRange { row } => write!(f, "row bound override for missing row {row}"),
        }
    }
}

/// Multi-band scenario set over an `m x n` coefficient matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct BandScheme {
    n: usize,
    m: usize,
    bounds: BandBounds,
    row_bounds: BTreeMap<usize, BandBounds>,
    dev: BTreeMap<(usize, usize), Vec<f64>>,
}

impl BandScheme {
    /// A scheme where every coefficient is certain.
    pub fn certain(n: usize, m: usize) -> Self {
        Self {
            n,
            m,
            bounds: BandBounds::nominal(n),
            row_bounds: BTreeMap::new(),
            dev: BTreeMap::new(),
        }
    }

    /// Starts a scheme with shared band bounds and no uncertain coefficient.
    pub fn builder(n: usize, m: usize, bounds: BandBounds) -> SchemeBuilder {
        SchemeBuilder {
            scheme: Self {
                n,
                m,
                bounds,
                row_bounds: BTreeMap::new(),
                dev: BTreeMap::new(),
            },
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k_minus(&self) -> i32 {
        self.bounds.k_minus
    }

    pub fn k_plus(&self) -> i32 {
        self.bounds.k_plus
    }

    pub fn band_count(&self) -> usize {
        self.bounds.len()
    }

    pub fn shared_bounds(&self) -> &BandBounds {
        &self.bounds
    }

    pub fn row_overrides(&self) -> &BTreeMap<usize, BandBounds> {
        &self.row_bounds
    }

    pub fn row_bounds(&self, i: usize) -> &BandBounds {
        self.row_bounds.get(&i).unwrap_or(&self.bounds)
    }

    /// Thresholds of `a_ij` indexed by band position, or `None` when certain.
    pub fn thresholds(&self, i: usize, j: usize) -> Option<&[f64]> {
        self.dev.get(&(i, j)).map(Vec::as_slice)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(usize, usize), &Vec<f64>)> {
        self.dev.iter()
    }

    pub fn is_uncertain(&self, i: usize, j: usize) -> bool {
        self.dev.contains_key(&(i, j))
    }

    /// Columns of row `i` that carry thresholds, ascending.
    pub fn uncertain_columns(&self, i: usize) -> Vec<usize> {
        self.dev
            .range((i, 0)..(i + 1, 0))
            .map(|(&(_, j), _)| j)
            .collect()
    }

    /// Profile of row `i`, over its uncertain coefficients only.
    pub fn profile(&self, i: usize) -> Result<Profile> {
        compute_profile(self.row_bounds(i), self.uncertain_columns(i).len())
    }

    /// Band of `value` for coefficient `(i, j)`: the smallest `k` with
    /// `value <= d^k + TOL`, or `None` outside `[d^{K-}, d^{K+}]`.
    pub fn band_of(&self, i: usize, j: usize, value: f64) -> Option<i32> {
        match self.thresholds(i, j) {
            None => (value.abs() <= TOL).then_some(0),
            Some(d) => {
                if value < d[0] - TOL {
                    return None;
                }
                d.iter()
                    .position(|&t| value <= t + TOL)
                    .map(|pos| self.bounds.band(pos))
            }
        }
    }

    /// Every broken invariant; empty when the scheme is valid.
    pub fn violations(&self) -> Vec<SchemeViolation> {
        let mut out = Vec::new();
        let len = self.bounds.len();
        out.extend(self.bounds.violations(None, self.n, self.n));
        for (&row, b) in &self.row_bounds {
            if row >= self.m {
                out.push(SchemeViolation::RowOutOfRange { row });
            }
            if b.k_minus != self.bounds.k_minus || b.k_plus != self.bounds.k_plus {
                out.push(SchemeViolation::BandRange {
                    k_minus: b.k_minus,
                    k_plus: b.k_plus,
                });
            }
        }
        for (&(i, j), d) in &self.dev {
            if i >= self.m || j >= self.n {
                out.push(SchemeViolation::IndexOutOfRange { i, j });
            }
            if d.len() != len {
                out.push(SchemeViolation::ThresholdCount {
                    i,
                    j,
                    expected: len,
                    got: d.len(),
                });
                continue;
            }
            if d.iter().any(|v| !v.is_finite()) {
                out.push(SchemeViolation::NonFinite { i, j });
                continue;
            }
            let z = d[self.bounds.zero_pos()];
            if z != 0.0 {
                out.push(SchemeViolation::ZeroThreshold { i, j, value: z });
            }
            if let Some(pos) = (1..len).find(|&p| d[p] <= d[p - 1]) {
                out.push(SchemeViolation::ThresholdOrder {
                    i,
                    j,
                    k: self.bounds.band(pos),
                });
            }
        }
        for i in 0..self.m {
            let b = self.row_bounds(i);
            let available = self.uncertain_columns(i).len();
            let row = self.row_bounds.contains_key(&i).then_some(i);
            if row.is_some() {
                out.extend(b.violations(row, self.n, available));
            } else {
                let sum: u64 = b.lower.iter().map(|&l| l as u64).sum();
                if sum > available as u64 && sum <= self.n as u64 {
                    out.push(SchemeViolation::LowerSum {
                        row: Some(i),
                        sum,
                        available,
                    });
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidScheme(v))
        }
    }

    pub(crate) fn check_dims(&self, prob: &NominalProblem) -> Result<()> {
        if prob.n() != self.n || prob.m() != self.m {
            return Err(Error::Dimension(format!(
                "problem is {}x{} but band scheme is {}x{}",
                prob.m(),
                prob.n(),
                self.m,
                self.n
            )));
        }
        Ok(())
    }
}

/// Accumulates thresholds and overrides; `build` checks every invariant.
#[derive(Clone, Debug)]
pub struct SchemeBuilder {
    scheme: BandScheme,
}

impl SchemeBuilder {
    /// Full threshold vector of `a_ij` indexed by band position, `d^0 = 0` included.
    pub fn thresholds(mut self, i: usize, j: usize, d: Vec<f64>) -> Self {
        self.scheme.dev.insert((i, j), d);
        self
    }

    /// Thresholds keyed by band index; band 0 is implicit.
    pub fn deviation(self, i: usize, j: usize, d: &BTreeMap<i32, f64>) -> Result<Self> {
        let bounds = &self.scheme.bounds;
        let mut v = vec![0.0; bounds.len()];
        for k in bounds.bands().filter(|&k| k != 0) {
            v[bounds.pos(k)] = *d.get(&k).ok_or_else(|| {
                Error::InvalidInstance(format!(
                    "coefficient ({i}, {j}) has no threshold for band {k}"
                ))
            })?;
        }
        if let Some(k) = d.keys().find(|k| !bounds.bands().contains(k) || **k == 0) {
            return Err(Error::InvalidInstance(format!(
                "coefficient ({i}, {j}) lists threshold for band {k}, which is implicit or out of range"
            )));
        }
        Ok(self.thresholds(i, j, v))
    }

    pub fn row_bounds(mut self, i: usize, bounds: BandBounds) -> Self {
        self.scheme.row_bounds.insert(i, bounds);
        self
    }

    pub fn build(self) -> Result<BandScheme> {
        self.scheme.validate()?;
        Ok(self.scheme)
    }

    /// Skips validation; callers must run [`BandScheme::violations`] themselves.
    pub fn build_unchecked(self) -> BandScheme {
        self.scheme
    }
}

/// A concrete deviation matrix `d^S`.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    dev: Vec<Vec<f64>>,
}

impl Scenario {
    pub fn new(dev: Vec<Vec<f64>>) -> Self {
        Self { dev }
    }

    pub fn zeros(m: usize, n: usize) -> Self {
        Self {
            dev: vec![vec![0.0; n]; m],
        }
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.dev
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.dev[i]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.dev[i][j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.dev[i][j] = v;
    }

    fn dims(&self) -> (usize, Option<usize>) {
        let n = self.dev.first().map(Vec::len);
        (self.dev.len(), n)
    }

    fn check_dims(&self, m: usize, n: usize) -> Result<()> {
        if self.dev.len() != m || self.dev.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension(format!("scenario must be {m}x{n}")));
        }
        Ok(())
    }
}

/// First broken scenario property.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    /// Deviation outside `[d^{K-}, d^{K+}]` (property 1).
    OutOfRange { i: usize, j: usize, value: f64 },
    /// Band count outside `[l_k, u_k]`; `property` is 3 for band `K-`, 2 otherwise.
    BandCount {
        property: u8,
        i: usize,
        k: i32,
        count: usize,
        lower: u32,
        upper: u32,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::OutOfRange { i, j, value } => write!(
                f,
                "property (1): deviation {value} of coefficient ({i}, {j}) lies outside its range"
            ),
            Violation::BandCount {
                property,
                i,
                k,
                count,
                lower,
                upper,
            } => write!(
                f,
                "property ({property}): row {i} band {k} holds {count} deviations, allowed [{lower}, {upper}]"
            ),
        }
    }
}

/// Outcome of a feasibility check.
#[derive(Clone, Debug, PartialEq)]
pub enum Check<T> {
    Feasible(T),
    Infeasible(Violation),
}

impl<T> Check<T> {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Check::Feasible(_))
    }

    pub fn feasible(self) -> Option<T> {
        match self {
            Check::Feasible(t) => Some(t),
            Check::Infeasible(_) => None,
        }
    }
}

/// `J_ik(S)` for one row: uncertain columns per band position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowPartition {
    pub k_minus: i32,
    pub sets: Vec<Vec<usize>>,
}

impl RowPartition {
    pub fn set(&self, k: i32) -> &[usize] {
        &self.sets[(k - self.k_minus) as usize]
    }

    pub fn counts(&self) -> Vec<usize> {
        self.sets.iter().map(Vec::len).collect()
    }
}

/// Checks one row of deviations against properties (1)-(3).
pub fn validate_row(scheme: &BandScheme, i: usize, dev: &[f64]) -> Result<Check<RowPartition>> {
    if i >= scheme.m || dev.len() != scheme.n {
        return Err(Error::Dimension(format!(
            "row {i} with {} deviations against a {}x{} scheme",
            dev.len(),
            scheme.m,
            scheme.n
        )));
    }
    let bounds = scheme.row_bounds(i);
    let mut sets = vec![Vec::new(); bounds.len()];
    for (j, &v) in dev.iter().enumerate() {
        match scheme.band_of(i, j, v) {
            None => return Ok(Check::Infeasible(Violation::OutOfRange { i, j, value: v })),
            Some(k) => {
                if scheme.is_uncertain(i, j) {
                    sets[bounds.pos(k)].push(j);
                }
            }
        }
    }
    for (pos, set) in sets.iter().enumerate() {
        let (l, u) = (bounds.lower[pos], bounds.upper[pos]);
        if set.len() < l as usize || set.len() > u as usize {
            return Ok(Check::Infeasible(Violation::BandCount {
                property: if pos == 0 { 3 } else { 2 },
                i,
                k: bounds.band(pos),
                count: set.len(),
                lower: l,
                upper: u,
            }));
        }
    }
    Ok(Check::Feasible(RowPartition {
        k_minus: bounds.k_minus,
        sets,
    }))
}

/// Checks a scenario against properties (1)-(3) and returns its band partition.
pub fn validate_scenario(
    prob: &NominalProblem,
    scheme: &BandScheme,
    s: &Scenario,
) -> Result<Check<Vec<RowPartition>>> {
    scheme.check_dims(prob)?;
    s.check_dims(prob.m(), prob.n())?;
    let mut parts = Vec::with_capacity(prob.m());
    for i in 0..prob.m() {
        match validate_row(scheme, i, s.row(i))? {
            Check::Feasible(p) => parts.push(p),
            Check::Infeasible(v) => return Ok(Check::Infeasible(v)),
        }
    }
    Ok(Check::Feasible(parts))
}

/// `S` dominates `S2` when `d^S_ij >= d^S2_ij - TOL` everywhere.
pub fn dominates(s: &Scenario, s2: &Scenario) -> Result<bool> {
    if s.dims() != s2.dims() || s.dev.iter().zip(&s2.dev).any(|(a, b)| a.len() != b.len()) {
        return Err(Error::Dimension("scenarios have different shapes".into()));
    }
    Ok(s.dev
        .iter()
        .flatten()
        .zip(s2.dev.iter().flatten())
        .all(|(a, b)| *a >= *b - TOL))
}

/// Lifts a feasible scenario to a dominating profile-and-bound-valid one.
///
/// Every deviation is raised to its band's upper threshold; then, while some
/// band is under-full, a coefficient of the lowest over-full band (smallest
/// column first) is moved up to the highest under-full band.
pub fn canonicalize_scenario(
    prob: &NominalProblem,
    scheme: &BandScheme,
    s: &Scenario,
) -> Result<Scenario> {
    let parts = match validate_scenario(prob, scheme, s)? {
        Check::Feasible(p) => p,
        Check::Infeasible(v) => return Err(Error::InfeasibleScenario(v)),
    };
    let mut out = s.clone();
    for (i, mut part) in parts.into_iter().enumerate() {
        let theta = scheme.profile(i)?.theta;
        loop {
            let counts = part.counts();
            let Some(up) = (0..counts.len())
                .rev()
                .find(|&p| counts[p] < theta[p] as usize)
            else {
                break;
            };
            let down = (0..up)
                .find(|&p| counts[p] > theta[p] as usize)
                .expect("an under-full band has an over-full band below it");
            let j = part.sets[down].remove(0);
            let pos = part.sets[up].partition_point(|&c| c < j);
            part.sets[up].insert(pos, j);
        }
        for (pos, set) in part.sets.iter().enumerate() {
            for &j in set {
                let d = scheme
                    .thresholds(i, j)
                    .expect("partition holds uncertain columns");
                out.set(i, j, d[pos]);
            }
        }
    }
    Ok(out)
}
