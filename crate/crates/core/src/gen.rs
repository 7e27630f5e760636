//! Seeded random instances with integer data.
//!
//! Generated robust instances keep every coefficient positive in every
//! scenario, so the feasible region is bounded, and set
//! `b_i = a_i'1 + DEV_i(1) + slack`, so `x = 1` is robust feasible.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::flowsep::separate_row;
use crate::instance::{BinaryInstance, Instance, OracleKind};
use crate::model::{BandBounds, BandScheme, NominalProblem, Scenario};
use crate::robust01::{CombinatorialInstance, ExplicitSet, ShortestPath, SpanningTree};

#[derive(Clone, Debug, PartialEq)]
pub struct GenOptions {
    pub n: usize,
    pub m: usize,
    /// Number of negative bands.
    pub negative: u32,
    /// Number of positive bands.
    pub positive: u32,
    /// Probability that a coefficient is certain.
    pub certain: f64,
    pub integer: bool,
    /// Integer variables with `x <= 1` rows appended.
    pub binary: bool,
    pub seed: u64,
}

impl Default for GenOptions {
    fn default() -> Self {
        Self {
            n: 3,
            m: 1,
            negative: 0,
            positive: 1,
            certain: 0.0,
            integer: false,
            binary: false,
            seed: 0,
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random strictly increasing thresholds with `|d^{K-}| < nominal`.
fn thresholds(rng: &mut impl Rng, nominal: i64, negative: u32, positive: u32) -> Vec<f64> {
    let mut mags: Vec<i64> = (1..nominal).collect();
    mags.shuffle(rng);
    let mut neg: Vec<i64> = mags.into_iter().take(negative as usize).collect();
    neg.sort_unstable_by(|a, b| b.cmp(a));
    let mut d: Vec<f64> = neg.into_iter().map(|v| -v as f64).collect();
    d.push(0.0);
    let mut last = 0;
    for _ in 0..positive {
        last += rng.gen_range(1..=3);
        d.push(last as f64);
    }
    d
}

fn random_bounds(
    rng: &mut impl Rng,
    negative: u32,
    positive: u32,
    n: usize,
    budget: usize,
) -> BandBounds {
    let k_minus = -(negative as i32);
    let k_plus = positive as i32;
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    let mut left = budget;
    for k in k_minus..=k_plus {
        if k == 0 {
            lower.push(0);
            upper.push(n as u32);
            continue;
        }
        let l = if left > 0 && rng.gen_bool(0.3) { 1 } else { 0 };
        left -= l;
        lower.push(l as u32);
        upper.push(rng.gen_range(l.max(1)..=n.max(1)) as u32);
    }
    BandBounds::new(k_minus, k_plus, lower, upper).expect("consistent band range")
}

pub fn generate(opts: &GenOptions) -> Result<Instance> {
    if opts.n == 0 || opts.m == 0 {
        return Err(Error::InvalidArgument("n and m must be positive".into()));
    }
    let mut rng = rng(opts.seed);
    let (n, m) = (opts.n, opts.m);
    let lo = opts.negative as i64 + 1;
    let a: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..n).map(|_| rng.gen_range(lo..lo + 9) as f64).collect())
        .collect();
    let c: Vec<f64> = (0..n).map(|_| rng.gen_range(1..=9) as f64).collect();
    let mut dev = Vec::new();
    for (i, row) in a.iter().enumerate() {
        for (j, &aij) in row.iter().enumerate() {
            if opts.certain > 0.0 && rng.gen_bool(opts.certain.min(1.0)) {
                continue;
            }
            dev.push((
                i,
                j,
                thresholds(&mut rng, aij as i64, opts.negative, opts.positive),
            ));
        }
    }
    let budget = (0..m)
        .map(|i| dev.iter().filter(|e| e.0 == i).count())
        .min()
        .unwrap_or(0);
    let rows = if opts.binary { m + n } else { m };
    let bounds = random_bounds(&mut rng, opts.negative, opts.positive, n, budget);
    let free = BandBounds::new(
        bounds.k_minus(),
        bounds.k_plus(),
        vec![0; bounds.len()],
        bounds.upper().to_vec(),
    )?;
    let mut builder = BandScheme::builder(n, rows, bounds);
    for (i, j, d) in dev {
        builder = builder.thresholds(i, j, d);
    }
    for i in m..rows {
        builder = builder.row_bounds(i, free.clone());
    }
    let scheme = builder.build()?;

    let mut full_a = a.clone();
    let mut b = vec![0.0; m];
    if opts.binary {
        for j in 0..n {
            let mut r = vec![0.0; n];
            r[j] = 1.0;
            full_a.push(r);
            b.push(1.0);
        }
    }
    let probe = NominalProblem::maximize(c.clone(), full_a.clone(), vec![0.0; rows])?;
    let ones = vec![1.0; n];
    for (i, bi) in b.iter_mut().enumerate().take(m) {
        let worst = separate_row(&probe, &scheme, &ones, i)?.check.lhs;
        *bi = worst + rng.gen_range(0..=5) as f64;
    }
    let mut problem = NominalProblem::maximize(c, full_a, b)?;
    if opts.integer || opts.binary {
        problem = problem.with_int_vars(0..n)?;
    }
    Instance::new(problem, scheme)
}

/// Random point of `[0, hi]^n` on a grid of quarter steps.
pub fn random_point(rng: &mut impl Rng, n: usize, hi: f64) -> Vec<f64> {
    let steps = (hi * 4.0).round() as i64;
    (0..n)
        .map(|_| rng.gen_range(0..=steps) as f64 / 4.0)
        .collect()
}

/// Random scenario satisfying the band bounds of every row.
///
/// Band counts start at `l_k` and the remaining columns are spread over
/// bands with spare capacity; deviations are uniform inside their band
/// `(d^{k-1}, d^k]`, and equal to `d^{K-}` in the lowest band.
pub fn random_scenario(rng: &mut impl Rng, scheme: &BandScheme) -> Scenario {
    let mut s = Scenario::zeros(scheme.m(), scheme.n());
    for i in 0..scheme.m() {
        let bounds = scheme.row_bounds(i);
        let mut cols = scheme.uncertain_columns(i);
        let mut counts: Vec<usize> = bounds.lower().iter().map(|&l| l as usize).collect();
        for _ in counts.iter().sum::<usize>()..cols.len() {
            let open: Vec<usize> = (0..counts.len())
                .filter(|&p| counts[p] < bounds.upper()[p] as usize)
                .collect();
            counts[*open.choose(rng).expect("u_0 = n leaves room")] += 1;
        }
        cols.shuffle(rng);
        let mut next = cols.into_iter();
        for (pos, &c) in counts.iter().enumerate() {
            for j in next.by_ref().take(c) {
                let d = scheme.thresholds(i, j).unwrap();
                let v = if pos == 0 {
                    d[0]
                } else {
                    d[pos] - (d[pos] - d[pos - 1]) * rng.gen::<f64>()
                };
                s.set(i, j, v);
            }
        }
    }
    s
}

#[derive(Clone, Debug, PartialEq)]
pub struct BinaryGenOptions {
    pub kind: OracleKind,
    /// Positive bands.
    pub bands: u32,
    pub max_nodes: usize,
    pub max_edges: usize,
    /// Ground-set size for explicit sets.
    pub max_n: usize,
    pub max_points: usize,
    pub seed: u64,
}

impl BinaryGenOptions {
    pub fn new(kind: OracleKind, bands: u32, seed: u64) -> Self {
        Self {
            kind,
            bands,
            max_nodes: if kind == OracleKind::SpanningTree {
                5
            } else {
                6
            },
            max_edges: 10,
            max_n: 6,
            max_points: 20,
            seed,
        }
    }
}

fn cost_instance(rng: &mut impl Rng, n: usize, bands: u32) -> Result<CombinatorialInstance> {
    let c: Vec<f64> = (0..n).map(|_| rng.gen_range(0..=9) as f64).collect();
    let d: Vec<Vec<f64>> = (0..n).map(|_| thresholds(rng, 1, 0, bands)).collect();
    let bounds = random_bounds(rng, 0, bands, n, n);
    CombinatorialInstance::new(c, d, bounds)
}

/// Random instance for the cost-uncertain binary solver.
///
/// Digraphs always contain a `0 -> nodes-1` path and undirected graphs are
/// connected.
pub fn generate_binary(opts: &BinaryGenOptions) -> Result<BinaryInstance> {
    let mut rng = rng(opts.seed);
    match opts.kind {
        OracleKind::ShortestPath => {
            let nodes = rng.gen_range(2..=opts.max_nodes.max(2));
            let mut inner: Vec<usize> = (1..nodes - 1).collect();
            inner.shuffle(&mut rng);
            inner.truncate(rng.gen_range(0..=inner.len()));
            let mut walk = vec![0];
            walk.extend(inner);
            walk.push(nodes - 1);
            let mut edges: Vec<(usize, usize)> = walk.windows(2).map(|w| (w[0], w[1])).collect();
            let mut pool: Vec<(usize, usize)> = (0..nodes)
                .flat_map(|u| (0..nodes).map(move |v| (u, v)))
                .filter(|&(u, v)| u != v && !edges.contains(&(u, v)))
                .collect();
            pool.shuffle(&mut rng);
            let target = rng.gen_range(edges.len()..=opts.max_edges.max(edges.len()));
            edges.extend(pool.into_iter().take(target - edges.len()));
            edges.shuffle(&mut rng);
            let instance = cost_instance(&mut rng, edges.len(), opts.bands)?;
            let oracle = ShortestPath::new(nodes, edges, 0, nodes - 1)?;
            Ok(BinaryInstance {
                instance,
                oracle: Box::new(oracle),
            })
        }
        OracleKind::SpanningTree => {
            let nodes = rng.gen_range(2..=opts.max_nodes.max(2));
            let mut edges: Vec<(usize, usize)> =
                (1..nodes).map(|v| (rng.gen_range(0..v), v)).collect();
            let mut pool: Vec<(usize, usize)> = (0..nodes)
                .flat_map(|u| (u + 1..nodes).map(move |v| (u, v)))
                .filter(|e| !edges.contains(e))
                .collect();
            pool.shuffle(&mut rng);
            let target = rng.gen_range(edges.len()..=opts.max_edges.max(edges.len()));
            edges.extend(pool.into_iter().take(target.saturating_sub(edges.len())));
            edges.shuffle(&mut rng);
            let instance = cost_instance(&mut rng, edges.len(), opts.bands)?;
            let oracle = SpanningTree::new(nodes, edges)?;
            Ok(BinaryInstance {
                instance,
                oracle: Box::new(oracle),
            })
        }
        OracleKind::Explicit => {
            let n = rng.gen_range(1..=opts.max_n.max(1));
            let count = rng.gen_range(1..=opts.max_points.max(1));
            let points: Vec<Vec<u8>> = (0..count)
                .map(|_| (0..n).map(|_| rng.gen_range(0..=1)).collect())
                .collect();
            let instance = cost_instance(&mut rng, n, opts.bands)?;
            Ok(BinaryInstance {
                instance,
                oracle: Box::new(ExplicitSet::new(n, points)?),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flowsep::check_robust;

    #[test]
    fn same_seed_same_instance() {
        let o = GenOptions {
            n: 4,
            m: 2,
            negative: 1,
            positive: 2,
            certain: 0.2,
            seed: 11,
            ..Default::default()
        };
        assert_eq!(
            generate(&o).unwrap().to_json(),
            generate(&o).unwrap().to_json()
        );
        let other = GenOptions {
            seed: 12,
            ..o.clone()
        };
        assert_ne!(
            generate(&o).unwrap().to_json(),
            generate(&other).unwrap().to_json()
        );
    }

    #[test]
    fn ones_are_robust() {
        for seed in 0..30 {
            let o = GenOptions {
                n: 1 + seed as usize % 5,
                m: 1 + seed as usize % 3,
                negative: (seed % 2) as u32,
                positive: 1 + (seed % 3) as u32,
                certain: 0.25,
                binary: seed % 2 == 0,
                seed,
                ..Default::default()
            };
            let inst = generate(&o).unwrap();
            let x = vec![1.0; o.n];
            assert!(check_robust(&inst.problem, &inst.scheme, &x)
                .unwrap()
                .iter()
                .all(|r| r.robust));
            for (&(i, j), d) in inst.scheme.entries() {
                assert!(inst.problem.a()[i][j] + d[0] > 0.0);
            }
        }
    }

    #[test]
    fn single_band_is_budgeted() {
        let inst = generate(&GenOptions {
            n: 3,
            m: 1,
            seed: 7,
            ..Default::default()
        })
        .unwrap();
        assert_eq!((inst.scheme.k_minus(), inst.scheme.k_plus()), (0, 1));
        assert!(inst.scheme.validate().is_ok());
    }

    #[test]
    fn binary_generators() {
        for seed in 0..20 {
            for kind in [
                OracleKind::ShortestPath,
                OracleKind::SpanningTree,
                OracleKind::Explicit,
            ] {
                let b = generate_binary(&BinaryGenOptions::new(kind, 2, seed)).unwrap();
                assert!(b.oracle.n() <= 10);
                assert!(!b.oracle.enumerate().unwrap().is_empty());
                assert!(b.instance.thresholds(0).iter().all(|&d| d <= 9.0));
            }
        }
    }

    #[test]
    fn random_scenarios_are_feasible() {
        use crate::model::validate_scenario;
        let mut r = rng(5);
        for seed in 0..20 {
            let inst = generate(&GenOptions {
                n: 5,
                m: 2,
                negative: 1,
                positive: 2,
                certain: 0.2,
                seed,
                ..Default::default()
            })
            .unwrap();
            for _ in 0..20 {
                let s = random_scenario(&mut r, &inst.scheme);
                assert!(validate_scenario(&inst.problem, &inst.scheme, &s)
                    .unwrap()
                    .is_feasible());
            }
        }
    }
}
