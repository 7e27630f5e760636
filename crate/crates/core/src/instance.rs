//! JSON instance formats.
//!
//! A robust instance looks like
//!
//! ```json
//! { "sense": "max", "n": 3, "m": 1,
//!   "c": [1, 1, 1], "A": [[1, 1, 1]], "b": [8], "int_vars": [],
//!   "bands": { "K_minus": 0, "K_plus": 2,
//!              "l": {"0": 0, "1": 0, "2": 0}, "u": {"0": 3, "1": 2, "2": 1},
//!              "dev": [ {"i": 0, "j": 0, "d": {"1": 4, "2": 6}} ] } }
//! ```
//!
//! Indices are 0-based. `d^0` is implicit and must not be listed. Missing
//! `l_k` default to 0 and missing `u_k` to `n`. Coefficients without a
//! `dev` entry are certain. `bands` may be omitted altogether, and
//! `"row_bounds": [{"i", "l", "u"}]` overrides the bounds of single rows.
//! An optional `"samples": [{"i", "j", "values"}]` carries observations of
//! the coefficients.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BandBounds, BandScheme, NominalProblem, SchemeViolation, Sense};
use crate::probbound::{Coefficient, Support};
use crate::robust01::{
    CombinatorialInstance, ExplicitSet, NominalOracle, ShortestPath, SpanningTree,
};

#[derive(Clone, Debug, Serialize, Deserialize)]
struct RawInstance {
    sense: Sense,
    n: usize,
    m: usize,
    c: Vec<f64>,
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    #[serde(default)]
    int_vars: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    free_vars: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bands: Option<RawBands>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    samples: Vec<RawSamples>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[allow(non_snake_case)]
struct RawBands {
    K_minus: i32,
    K_plus: i32,
    #[serde(default)]
    l: BTreeMap<i32, u32>,
    #[serde(default)]
    u: BTreeMap<i32, u32>,
    #[serde(default)]
    dev: Vec<RawDev>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    row_bounds: Vec<RawRowBounds>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct RawDev {
    i: usize,
    j: usize,
    d: BTreeMap<i32, f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct RawRowBounds {
    i: usize,
    #[serde(default)]
    l: BTreeMap<i32, u32>,
    #[serde(default)]
    u: BTreeMap<i32, u32>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct RawSamples {
    i: usize,
    j: usize,
    values: Vec<f64>,
}

/// A nominal problem with its band scheme and optional samples.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub problem: NominalProblem,
    pub scheme: BandScheme,
    pub samples: BTreeMap<(usize, usize), Vec<f64>>,
}

/// An instance whose band scheme has not been checked yet.
#[derive(Clone, Debug)]
pub struct UncheckedInstance {
    pub problem: NominalProblem,
    pub scheme: BandScheme,
    pub samples: BTreeMap<(usize, usize), Vec<f64>>,
}

impl UncheckedInstance {
    pub fn violations(&self) -> Vec<SchemeViolation> {
        self.scheme.violations()
    }

    pub fn check(self) -> Result<Instance> {
        self.scheme.validate()?;
        Ok(Instance {
            problem: self.problem,
            scheme: self.scheme,
            samples: self.samples,
        })
    }
}

fn bounds_from_maps(
    k_minus: i32,
    k_plus: i32,
    l: &BTreeMap<i32, u32>,
    u: &BTreeMap<i32, u32>,
    n: usize,
) -> Result<BandBounds> {
    if let Some(k) = l
        .keys()
        .chain(u.keys())
        .find(|&&k| k < k_minus || k > k_plus)
    {
        return Err(Error::InvalidInstance(format!(
            "bound given for band {k} outside {k_minus}..{k_plus}"
        )));
    }
    let lower = (k_minus..=k_plus)
        .map(|k| l.get(&k).copied().unwrap_or(0))
        .collect();
    let upper = (k_minus..=k_plus)
        .map(|k| u.get(&k).copied().unwrap_or(n as u32))
        .collect();
    BandBounds::new(k_minus, k_plus, lower, upper)
}

fn maps_from_bounds(b: &BandBounds) -> (BTreeMap<i32, u32>, BTreeMap<i32, u32>) {
    let l = b.bands().map(|k| (k, b.lower_of(k))).collect();
    let u = b.bands().map(|k| (k, b.upper_of(k))).collect();
    (l, u)
}

impl Instance {
    pub fn new(problem: NominalProblem, scheme: BandScheme) -> Result<Self> {
        scheme.validate()?;
        scheme.check_dims(&problem)?;
        Ok(Self {
            problem,
            scheme,
            samples: BTreeMap::new(),
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::parse(text)?.check()
    }

    /// Parses the structure and builds the scheme without validating it.
    pub fn parse(text: &str) -> Result<UncheckedInstance> {
        let raw: RawInstance = serde_json::from_str(text)?;
        if raw.c.len() != raw.n || raw.a.len() != raw.m || raw.b.len() != raw.m {
            return Err(Error::Dimension(format!(
                "declared n = {}, m = {} but c has {}, A has {} rows and b has {} entries",
                raw.n,
                raw.m,
                raw.c.len(),
                raw.a.len(),
                raw.b.len()
            )));
        }
        let problem = NominalProblem::new(raw.sense, raw.c, raw.a, raw.b)?
            .with_int_vars(raw.int_vars)?
            .with_free_vars(raw.free_vars)?;
        let scheme = match raw.bands {
            None => BandScheme::certain(raw.n, raw.m),
            Some(bands) => {
                let shared =
                    bounds_from_maps(bands.K_minus, bands.K_plus, &bands.l, &bands.u, raw.n)?;
                let mut builder = BandScheme::builder(raw.n, raw.m, shared);
                for d in &bands.dev {
                    builder = builder.deviation(d.i, d.j, &d.d)?;
                }
                for r in &bands.row_bounds {
                    let b = bounds_from_maps(bands.K_minus, bands.K_plus, &r.l, &r.u, raw.n)?;
                    builder = builder.row_bounds(r.i, b);
                }
                builder.build_unchecked()
            }
        };
        let mut samples = BTreeMap::new();
        for s in raw.samples {
            if s.i >= raw.m || s.j >= raw.n {
                return Err(Error::InvalidInstance(format!(
                    "samples for ({}, {}) outside A",
                    s.i, s.j
                )));
            }
            samples.insert((s.i, s.j), s.values);
        }
        Ok(UncheckedInstance {
            problem,
            scheme,
            samples,
        })
    }

    fn raw(&self) -> RawInstance {
        let p = &self.problem;
        let s = &self.scheme;
        let bands =
            (s.entries().next().is_some() || s.band_count() > 1 || !s.row_overrides().is_empty())
                .then(|| {
                    let (l, u) = maps_from_bounds(s.shared_bounds());
                    RawBands {
                        K_minus: s.k_minus(),
                        K_plus: s.k_plus(),
                        l,
                        u,
                        dev: s
                            .entries()
                            .map(|(&(i, j), d)| RawDev {
                                i,
                                j,
                                d: s.shared_bounds()
                                    .bands()
                                    .zip(d)
                                    .filter(|(k, _)| *k != 0)
                                    .map(|(k, &v)| (k, v))
                                    .collect(),
                            })
                            .collect(),
                        row_bounds: s
                            .row_overrides()
                            .iter()
                            .map(|(&i, b)| {
                                let (l, u) = maps_from_bounds(b);
                                RawRowBounds { i, l, u }
                            })
                            .collect(),
                    }
                });
        RawInstance {
            sense: p.sense(),
            n: p.n(),
            m: p.m(),
            c: p.original_costs(),
            a: p.a().to_vec(),
            b: p.b().to_vec(),
            int_vars: p.int_vars().to_vec(),
            free_vars: p.free_vars().to_vec(),
            bands,
            samples: self
                .samples
                .iter()
                .map(|(&(i, j), v)| RawSamples {
                    i,
                    j,
                    values: v.clone(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.raw()).expect("instance serializes")
    }

    /// Sample summaries for the coefficients of row `i`, all with the same
    /// `beta`. Certain coefficients need no samples.
    pub fn row_coefficients(&self, i: usize, beta: f64) -> Result<Vec<Coefficient>> {
        if i >= self.problem.m() {
            return Err(Error::Dimension(format!("row {i} out of range")));
        }
        (0..self.problem.n())
            .map(|j| {
                let nominal = self.problem.a()[i][j];
                match self.scheme.thresholds(i, j) {
                    None => Ok(Coefficient::certain(nominal)),
                    Some(d) => {
                        let support = Support::from_thresholds(nominal, d[0], d[d.len() - 1])?;
                        let values = self.samples.get(&(i, j)).ok_or_else(|| {
                            Error::InvalidInstance(format!(
                                "no samples for uncertain coefficient ({i}, {j})"
                            ))
                        })?;
                        Coefficient::from_samples(support, values, beta)
                    }
                }
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleKind {
    ShortestPath,
    SpanningTree,
    Explicit,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct RawEdge {
    u: usize,
    v: usize,
    c: f64,
    #[serde(default)]
    d: BTreeMap<i32, f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[allow(non_snake_case)]
struct RawBinary {
    #[serde(default)]
    nodes: Option<usize>,
    #[serde(default)]
    edges: Vec<RawEdge>,
    #[serde(default)]
    source: Option<usize>,
    #[serde(default)]
    target: Option<usize>,
    #[serde(default)]
    n: Option<usize>,
    #[serde(default)]
    c: Vec<f64>,
    #[serde(default)]
    d: Vec<BTreeMap<i32, f64>>,
    #[serde(default)]
    points: Vec<Vec<u8>>,
    #[serde(default)]
    K_plus: Option<i32>,
    #[serde(default)]
    l: BTreeMap<i32, u32>,
    #[serde(default)]
    u: BTreeMap<i32, u32>,
}

/// A cost-uncertain binary instance with its nominal oracle.
pub struct BinaryInstance {
    pub instance: CombinatorialInstance,
    pub oracle: Box<dyn NominalOracle>,
}

fn thresholds(d: &[BTreeMap<i32, f64>], k_plus: i32) -> Result<Vec<Vec<f64>>> {
    d.iter()
        .enumerate()
        .map(|(j, dj)| {
            if let Some(k) = dj.keys().find(|&&k| k < 1 || k > k_plus) {
                return Err(Error::InvalidInstance(format!(
                    "element {j}: band {k} outside 1..{k_plus}"
                )));
            }
            let mut v = vec![0.0];
            for k in 1..=k_plus {
                v.push(*dj.get(&k).ok_or_else(|| {
                    Error::InvalidInstance(format!("element {j} has no threshold for band {k}"))
                })?);
            }
            Ok(v)
        })
        .collect()
}

/// Parses a graph (`sp`, `mst`) or explicit-set instance.
///
/// Graphs: `{"nodes", "edges": [{"u", "v", "c", "d": {"k": number}}],
/// "source", "target"}`; explicit sets: `{"n", "c", "d": [{"k": number}],
/// "points": [[0/1...]]}`. Both take `"K_plus"` (inferred from the largest
/// listed band when absent) and `"l"`, `"u"` maps as in robust instances.
pub fn parse_binary(text: &str, kind: OracleKind) -> Result<BinaryInstance> {
    let raw: RawBinary = serde_json::from_str(text)?;
    let (c, d): (Vec<f64>, Vec<BTreeMap<i32, f64>>) = match kind {
        OracleKind::Explicit => (raw.c.clone(), raw.d.clone()),
        _ => raw.edges.iter().map(|e| (e.c, e.d.clone())).unzip(),
    };
    let k_plus = raw.K_plus.unwrap_or_else(|| {
        d.iter()
            .flat_map(|m| m.keys().copied())
            .max()
            .unwrap_or(0)
            .max(0)
    });
    let n = c.len();
    let bounds = bounds_from_maps(0, k_plus, &raw.l, &raw.u, n)?;
    if d.len() != n {
        return Err(Error::Dimension(format!(
            "{n} costs but {} deviation maps",
            d.len()
        )));
    }
    let instance = CombinatorialInstance::new(c, thresholds(&d, k_plus)?, bounds)?;
    let need = |v: Option<usize>, what: &str| {
        v.ok_or_else(|| Error::InvalidInstance(format!("missing \"{what}\"")))
    };
    let edges: Vec<(usize, usize)> = raw.edges.iter().map(|e| (e.u, e.v)).collect();
    let oracle: Box<dyn NominalOracle> = match kind {
        OracleKind::ShortestPath => Box::new(ShortestPath::new(
            need(raw.nodes, "nodes")?,
            edges,
            need(raw.source, "source")?,
            need(raw.target, "target")?,
        )?),
        OracleKind::SpanningTree => Box::new(SpanningTree::new(need(raw.nodes, "nodes")?, edges)?),
        OracleKind::Explicit => {
            let declared = need(raw.n, "n")?;
            if declared != n {
                return Err(Error::Dimension(format!(
                    "declared n = {declared} but {n} costs given"
                )));
            }
            Box::new(ExplicitSet::new(n, raw.points)?)
        }
    };
    Ok(BinaryInstance { instance, oracle })
}
