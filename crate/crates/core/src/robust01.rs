//! Robust binary programs with uncertain costs.
//!
//! `min c'x + DEV(x)` over `x in X ⊆ {0,1}^n` where the costs deviate
//! upwards in bands `0 = d_j^0 < d_j^1 < ... < d_j^{K+}`. For fixed dual
//! multipliers `w >= 0` the problem reduces to one nominal solve with costs
//! `c_j + max(0, max_k (d_j^k - w_k))`, and an optimal `w` is found among
//! the maximal solutions of small difference-constraint systems built from
//! threshold differences.
//!
//! This module is min-form throughout.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{compute_profile, BandBounds, Profile};
use crate::oracle::{max_deviation, EnumerationMode};

/// Largest feasible set the brute-force reference will list.
pub const MAX_ENUM_SOLUTIONS: usize = 5_000;

/// Slack accepted when closing a cycle of difference constraints.
const CYCLE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct CombinatorialInstance {
    c: Vec<f64>,
    /// Per element, thresholds by band `0..=K+`.
    d: Vec<Vec<f64>>,
    bounds: BandBounds,
    profile: Profile,
}

impl CombinatorialInstance {
    pub fn new(c: Vec<f64>, d: Vec<Vec<f64>>, bounds: BandBounds) -> Result<Self> {
        let n = c.len();
        if d.len() != n {
            return Err(Error::Dimension(format!(
                "{n} costs but {} threshold vectors",
                d.len()
            )));
        }
        if bounds.k_minus() != 0 {
            return Err(Error::InvalidInstance(
                "cost deviations must use positive bands only".into(),
            ));
        }
        if let Some(j) = (0..n).find(|&j| !(c[j] >= 0.0 && c[j].is_finite())) {
            return Err(Error::InvalidInstance(format!(
                "cost of element {j} must be finite and nonnegative"
            )));
        }
        for (j, dj) in d.iter().enumerate() {
            if dj.len() != bounds.len() {
                return Err(Error::Dimension(format!(
                    "element {j} has {} thresholds, expected {}",
                    dj.len(),
                    bounds.len()
                )));
            }
            if dj[0] != 0.0
                || dj.windows(2).any(|w| !(w[1] > w[0]))
                || dj.iter().any(|v| !v.is_finite())
            {
                return Err(Error::InvalidInstance(format!(
                    "element {j}: thresholds must start at 0 and increase strictly"
                )));
            }
        }
        if bounds.upper()[0] as usize != n {
            return Err(Error::InvalidInstance(format!(
                "u_0 rule: the nominal band must allow all {n} elements, got {}",
                bounds.upper()[0]
            )));
        }
        let profile = compute_profile(&bounds, n)?;
        Ok(Self {
            c,
            d,
            bounds,
            profile,
        })
    }

    pub fn n(&self) -> usize {
        self.c.len()
    }

    pub fn costs(&self) -> &[f64] {
        &self.c
    }

    pub fn thresholds(&self, j: usize) -> &[f64] {
        &self.d[j]
    }

    pub fn bounds(&self) -> &BandBounds {
        &self.bounds
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    /// Bands with `theta_k > 0`; the others carry no deviation and are dropped.
    pub fn active_bands(&self) -> Vec<usize> {
        (0..self.bounds.len())
            .filter(|&k| self.profile.theta[k] > 0)
            .collect()
    }

    /// Worst-case cost `c'x + DEV(x)` of a 0/1 vector, by enumeration.
    pub fn robust_cost(&self, x: &[u8]) -> Result<f64> {
        if x.len() != self.n() {
            return Err(Error::Dimension(format!(
                "point of length {}, expected {}",
                x.len(),
                self.n()
            )));
        }
        let d: Vec<&[f64]> = self.d.iter().map(Vec::as_slice).collect();
        let w: Vec<f64> = x.iter().map(|&v| v as f64).collect();
        let dev = max_deviation(&d, &w, &self.bounds, EnumerationMode::Profile)?;
        Ok(self.c.iter().zip(&w).map(|(c, x)| c * x).sum::<f64>() + dev)
    }
}

/// Exact (or `alpha`-approximate) solver of the nominal problem
/// `min c'x, x in X`.
pub trait NominalOracle {
    fn n(&self) -> usize;

    fn solve(&self, costs: &[f64]) -> Result<(Vec<u8>, f64)>;

    /// Approximation guarantee of [`NominalOracle::solve`]; `1` means exact.
    fn alpha(&self) -> f64 {
        1.0
    }

    /// Every point of `X`, for brute-force checks.
    fn enumerate(&self) -> Result<Vec<Vec<u8>>>;
}

fn value_of(costs: &[f64], x: &[u8]) -> f64 {
    costs
        .iter()
        .zip(x)
        .filter(|(_, &v)| v == 1)
        .map(|(c, _)| c)
        .sum()
}

fn check_costs(n: usize, costs: &[f64]) -> Result<()> {
    if costs.len() != n {
        return Err(Error::Dimension(format!(
            "{} costs for {n} elements",
            costs.len()
        )));
    }
    if costs.iter().any(|&c| !(c >= 0.0)) {
        return Err(Error::InvalidArgument(
            "nominal costs must be nonnegative".into(),
        ));
    }
    Ok(())
}

/// Directed `source`-`target` paths; element `e` is arc `edges[e]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ShortestPath {
    pub nodes: usize,
    pub edges: Vec<(usize, usize)>,
    pub source: usize,
    pub target: usize,
}

impl ShortestPath {
    pub fn new(
        nodes: usize,
        edges: Vec<(usize, usize)>,
        source: usize,
        target: usize,
    ) -> Result<Self> {
        if source >= nodes
            || target >= nodes
            || edges.iter().any(|&(u, v)| u >= nodes || v >= nodes)
        {
            return Err(Error::InvalidInstance(
                "edge or terminal outside the node range".into(),
            ));
        }
        if source == target {
            return Err(Error::InvalidInstance("source and target coincide".into()));
        }
        Ok(Self {
            nodes,
            edges,
            source,
            target,
        })
    }
}

impl NominalOracle for ShortestPath {
    fn n(&self) -> usize {
        self.edges.len()
    }

    fn solve(&self, costs: &[f64]) -> Result<(Vec<u8>, f64)> {
        check_costs(self.n(), costs)?;
        let mut dist = vec![f64::INFINITY; self.nodes];
        let mut pred = vec![usize::MAX; self.nodes];
        let mut done = vec![false; self.nodes];
        dist[self.source] = 0.0;
        loop {
            let u = (0..self.nodes)
                .filter(|&v| !done[v] && dist[v].is_finite())
                .min_by(|&a, &b| dist[a].total_cmp(&dist[b]));
            let Some(u) = u else { break };
            done[u] = true;
            for (e, &(a, b)) in self.edges.iter().enumerate() {
                if a == u && !done[b] && dist[u] + costs[e] < dist[b] {
                    dist[b] = dist[u] + costs[e];
                    pred[b] = e;
                }
            }
        }
        if !dist[self.target].is_finite() {
            return Err(Error::Infeasible(format!(
                "node {} unreachable from {}",
                self.target, self.source
            )));
        }
        let mut x = vec![0u8; self.n()];
        let mut v = self.target;
        while v != self.source {
            x[pred[v]] = 1;
            v = self.edges[pred[v]].0;
        }
        Ok((x.clone(), value_of(costs, &x)))
    }

    fn enumerate(&self) -> Result<Vec<Vec<u8>>> {
        let mut out = Vec::new();
        let mut x = vec![0u8; self.n()];
        let mut seen = vec![false; self.nodes];
        seen[self.source] = true;
        self.paths(self.source, &mut seen, &mut x, &mut out)?;
        if out.is_empty() {
            return Err(Error::Infeasible("no source-target path".into()));
        }
        Ok(out)
    }
}

impl ShortestPath {
    fn paths(
        &self,
        u: usize,
        seen: &mut [bool],
        x: &mut [u8],
        out: &mut Vec<Vec<u8>>,
    ) -> Result<()> {
        if u == self.target {
            if out.len() >= MAX_ENUM_SOLUTIONS {
                return Err(Error::GuardExceeded(format!(
                    "more than {MAX_ENUM_SOLUTIONS} paths"
                )));
            }
            out.push(x.to_vec());
            return Ok(());
        }
        for (e, &(a, b)) in self.edges.iter().enumerate() {
            if a == u && !seen[b] {
                seen[b] = true;
                x[e] = 1;
                self.paths(b, seen, x, out)?;
                x[e] = 0;
                seen[b] = false;
            }
        }
        Ok(())
    }
}

/// Spanning trees of an undirected graph; element `e` is edge `edges[e]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpanningTree {
    pub nodes: usize,
    pub edges: Vec<(usize, usize)>,
}

impl SpanningTree {
    pub fn new(nodes: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if nodes == 0 || edges.iter().any(|&(u, v)| u >= nodes || v >= nodes) {
            return Err(Error::InvalidInstance("edge outside the node range".into()));
        }
        Ok(Self { nodes, edges })
    }
}

fn find(parent: &mut [usize], mut v: usize) -> usize {
    while parent[v] != v {
        parent[v] = parent[parent[v]];
        v = parent[v];
    }
    v
}

impl NominalOracle for SpanningTree {
    fn n(&self) -> usize {
        self.edges.len()
    }

    fn solve(&self, costs: &[f64]) -> Result<(Vec<u8>, f64)> {
        check_costs(self.n(), costs)?;
        let mut order: Vec<usize> = (0..self.n()).collect();
        order.sort_by(|&a, &b| costs[a].total_cmp(&costs[b]));
        let mut parent: Vec<usize> = (0..self.nodes).collect();
        let mut x = vec![0u8; self.n()];
        let mut picked = 0;
        for e in order {
            let (u, v) = self.edges[e];
            let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
            if ru != rv {
                parent[ru] = rv;
                x[e] = 1;
                picked += 1;
            }
        }
        if picked + 1 != self.nodes {
            return Err(Error::Infeasible("graph is disconnected".into()));
        }
        let v = value_of(costs, &x);
        Ok((x, v))
    }

    fn enumerate(&self) -> Result<Vec<Vec<u8>>> {
        let need = self.nodes - 1;
        let mut out = Vec::new();
        let mut chosen = Vec::with_capacity(need);
        self.trees(0, need, &mut chosen, &mut out)?;
        if out.is_empty() {
            return Err(Error::Infeasible("graph is disconnected".into()));
        }
        Ok(out)
    }
}

impl SpanningTree {
    fn trees(
        &self,
        from: usize,
        need: usize,
        chosen: &mut Vec<usize>,
        out: &mut Vec<Vec<u8>>,
    ) -> Result<()> {
        if chosen.len() == need {
            let mut parent: Vec<usize> = (0..self.nodes).collect();
            for &e in chosen.iter() {
                let (u, v) = self.edges[e];
                let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
                if ru == rv {
                    return Ok(());
                }
                parent[ru] = rv;
            }
            if out.len() >= MAX_ENUM_SOLUTIONS {
                return Err(Error::GuardExceeded(format!(
                    "more than {MAX_ENUM_SOLUTIONS} trees"
                )));
            }
            let mut x = vec![0u8; self.n()];
            for &e in chosen.iter() {
                x[e] = 1;
            }
            out.push(x);
            return Ok(());
        }
        for e in from..self.n() {
            if self.n() - e < need - chosen.len() {
                break;
            }
            chosen.push(e);
            self.trees(e + 1, need, chosen, out)?;
            chosen.pop();
        }
        Ok(())
    }
}

/// A feasible set given point by point.
#[derive(Clone, Debug, PartialEq)]
pub struct ExplicitSet {
    n: usize,
    points: Vec<Vec<u8>>,
}

impl ExplicitSet {
    pub fn new(n: usize, points: Vec<Vec<u8>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInstance("explicit set is empty".into()));
        }
        if points
            .iter()
            .any(|p| p.len() != n || p.iter().any(|&v| v > 1))
        {
            return Err(Error::InvalidInstance(format!(
                "points must be 0/1 vectors of length {n}"
            )));
        }
        Ok(Self { n, points })
    }

    pub fn points(&self) -> &[Vec<u8>] {
        &self.points
    }
}

impl NominalOracle for ExplicitSet {
    fn n(&self) -> usize {
        self.n
    }

    fn solve(&self, costs: &[f64]) -> Result<(Vec<u8>, f64)> {
        check_costs(self.n, costs)?;
        let mut best: Option<(usize, f64)> = None;
        for (idx, p) in self.points.iter().enumerate() {
            let v = value_of(costs, p);
            if best.is_none_or(|(_, b)| v < b) {
                best = Some((idx, v));
            }
        }
        let (idx, v) = best.expect("nonempty");
        Ok((self.points[idx].clone(), v))
    }

    fn enumerate(&self) -> Result<Vec<Vec<u8>>> {
        Ok(self.points.clone())
    }
}

/// `c_j + max(0, max_k (d_j^k - w_k))` over the active bands; `w` is
/// indexed like [`CombinatorialInstance::active_bands`].
pub fn modified_costs(inst: &CombinatorialInstance, w: &[f64]) -> Result<Vec<f64>> {
    let active = inst.active_bands();
    if w.len() != active.len() {
        return Err(Error::Dimension(format!(
            "{} multipliers for {} active bands",
            w.len(),
            active.len()
        )));
    }
    if w.iter().any(|&v| !(v >= 0.0)) {
        return Err(Error::InvalidArgument(
            "multipliers must be nonnegative".into(),
        ));
    }
    Ok((0..inst.n())
        .map(|j| {
            let extra = active
                .iter()
                .zip(w)
                .map(|(&k, &wk)| inst.d[j][k] - wk)
                .fold(0.0, f64::max);
            inst.c[j] + extra
        })
        .collect())
}

/// Candidate right-hand sides over the active bands.
#[derive(Clone, Debug, PartialEq)]
pub struct CandidateSets {
    /// Active band indices.
    pub bands: Vec<i32>,
    /// `B_{kk'}` for ordered pairs of active bands, ascending, lexicographic in `(k, k')`.
    pub pairs: BTreeMap<(i32, i32), Vec<f64>>,
    /// `C_k`, ascending.
    pub caps: BTreeMap<i32, Vec<f64>>,
}

impl CandidateSets {
    pub fn combinations(&self) -> u128 {
        self.pairs
            .values()
            .chain(self.caps.values())
            .map(|v| v.len() as u128)
            .product()
    }
}

fn sorted_set(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.chain([0.0]).collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

pub fn candidate_sets(inst: &CombinatorialInstance) -> CandidateSets {
    let active = inst.active_bands();
    let mut pairs = BTreeMap::new();
    let mut caps = BTreeMap::new();
    for &k in &active {
        for &k2 in &active {
            if k != k2 {
                let set = sorted_set(inst.d.iter().map(|d| d[k] - d[k2]));
                pairs.insert((k as i32, k2 as i32), set);
            }
        }
        caps.insert(k as i32, sorted_set(inst.d.iter().map(|d| d[k])));
    }
    CandidateSets {
        bands: active.iter().map(|&k| k as i32).collect(),
        pairs,
        caps,
    }
}

/// Maximal solution of `w_k - w_k' >= b_kk'`, `0 <= w_k <= c_k`, or
/// `None` when the system is infeasible.
///
/// Bands are positions `0..caps.len()`; `pairs` lists `(k, k', b_kk')`.
/// The system is a set of difference constraints solved by Bellman-Ford
/// from a root node fixed at zero.
pub fn feasible_w(pairs: &[(usize, usize, f64)], caps: &[f64]) -> Result<Option<Vec<f64>>> {
    let nb = caps.len();
    let root = nb;
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    for &(k, k2, b) in pairs {
        if k >= nb || k2 >= nb || k == k2 {
            return Err(Error::InvalidArgument(format!("bad band pair ({k}, {k2})")));
        }
        edges.push((k, k2, -b));
    }
    for (k, &c) in caps.iter().enumerate() {
        edges.push((root, k, c));
        edges.push((k, root, 0.0));
    }
    let mut dist = vec![f64::INFINITY; nb + 1];
    dist[root] = 0.0;
    for _ in 0..nb {
        for &(u, v, wt) in &edges {
            if dist[u] + wt < dist[v] {
                dist[v] = dist[u] + wt;
            }
        }
    }
    if edges
        .iter()
        .any(|&(u, v, wt)| dist[u] + wt < dist[v] - CYCLE_TOL)
    {
        return Ok(None);
    }
    Ok(Some(dist[..nb].iter().map(|&v| v.max(0.0)).collect()))
}

/// All-pairs closure of a growing difference-constraint system.
#[derive(Clone)]
struct Closure {
    size: usize,
    dist: Vec<f64>,
}

impl Closure {
    fn new(bands: usize) -> Self {
        let size = bands + 1;
        let mut dist = vec![f64::INFINITY; size * size];
        for v in 0..size {
            dist[v * size + v] = 0.0;
        }
        // w_k >= 0
        for k in 0..bands {
            dist[k * size + bands] = 0.0;
        }
        Self { size, dist }
    }

    fn at(&self, u: usize, v: usize) -> f64 {
        self.dist[u * self.size + v]
    }

    /// Adds `x_v - x_u <= wt`; false when it closes a negative cycle.
    fn add(&mut self, u: usize, v: usize, wt: f64) -> bool {
        if self.at(v, u) + wt < -CYCLE_TOL {
            return false;
        }
        if self.at(u, v) <= wt {
            return true;
        }
        let s = self.size;
        for a in 0..s {
            let au = self.at(a, u);
            if !au.is_finite() {
                continue;
            }
            for b in 0..s {
                let cand = au + wt + self.at(v, b);
                if cand < self.dist[a * s + b] {
                    self.dist[a * s + b] = cand;
                }
            }
        }
        true
    }

    fn key(&self) -> Vec<u64> {
        self.dist.iter().map(|v| v.to_bits()).collect()
    }
}

/// Every distinct maximal solution `w` reached by some combination of
/// candidate values, in sweep order: band pairs `(k, k')` lexicographic,
/// then the caps, each with values ascending.
///
/// Partial combinations are abandoned as soon as they are infeasible, and
/// a closure already explored at the same depth is not explored again,
/// since the remaining choices only depend on it.
pub fn sweep_candidates(sets: &CandidateSets, mut visit: impl FnMut(&[f64])) {
    let nb = sets.bands.len();
    let pos = |k: i32| sets.bands.iter().position(|&b| b == k).unwrap();
    let root = nb;
    let mut slots: Vec<(usize, usize, &[f64])> = Vec::new();
    for (&(k, k2), vals) in &sets.pairs {
        // w_k - w_k' >= b  <=>  x_k' - x_k <= -b
        slots.push((pos(k), pos(k2), vals));
    }
    for (&k, vals) in &sets.caps {
        slots.push((root, pos(k), vals));
    }
    let mut memo: HashSet<(usize, Vec<u64>)> = HashSet::new();
    let mut emitted: HashSet<Vec<u64>> = HashSet::new();
    descend(
        &slots,
        0,
        Closure::new(nb),
        &mut memo,
        &mut emitted,
        &mut visit,
    );
}

fn descend(
    slots: &[(usize, usize, &[f64])],
    depth: usize,
    closure: Closure,
    memo: &mut HashSet<(usize, Vec<u64>)>,
    emitted: &mut HashSet<Vec<u64>>,
    visit: &mut impl FnMut(&[f64]),
) {
    if !memo.insert((depth, closure.key())) {
        return;
    }
    if depth == slots.len() {
        let root = closure.size - 1;
        let w: Vec<f64> = (0..root).map(|k| closure.at(root, k).max(0.0)).collect();
        if emitted.insert(w.iter().map(|v| v.to_bits()).collect()) {
            visit(&w);
        }
        return;
    }
    let (u, v, vals) = slots[depth];
    let is_cap = u == closure.size - 1;
    for &val in vals {
        let mut next = closure.clone();
        let wt = if is_cap { val } else { -val };
        if next.add(u, v, wt) {
            descend(slots, depth + 1, next, memo, emitted, visit);
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct RobustBinaryOptions {
    /// Skip candidates with `theta'w` at or above the incumbent.
    pub prune: bool,
}

/// One evaluated candidate: `theta'w + Z(w)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Candidate {
    pub w: Vec<f64>,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RobustBinarySolution {
    pub x: Vec<u8>,
    pub value: f64,
    /// Multipliers of the active bands.
    pub w: Vec<f64>,
    pub active_bands: Vec<i32>,
    pub nominal_solves: usize,
    pub candidates: usize,
    /// Guarantee of the nominal oracle; above 1 the value is an approximation.
    pub alpha: f64,
}

/// `(n + 1)^{|K|^2}`, saturating.
pub fn work_bound(n: usize, bands: usize) -> u128 {
    let e = (bands * bands) as u32;
    (n as u128 + 1).checked_pow(e).unwrap_or(u128::MAX)
}

pub fn solve_robust_binary(
    inst: &CombinatorialInstance,
    oracle: &dyn NominalOracle,
    opts: &RobustBinaryOptions,
) -> Result<RobustBinarySolution> {
    solve_robust_binary_with(inst, oracle, opts, |_| {})
}

/// As [`solve_robust_binary`], reporting every evaluated candidate.
pub fn solve_robust_binary_with(
    inst: &CombinatorialInstance,
    oracle: &dyn NominalOracle,
    opts: &RobustBinaryOptions,
    mut observe: impl FnMut(&Candidate),
) -> Result<RobustBinarySolution> {
    if oracle.n() != inst.n() {
        return Err(Error::Dimension(format!(
            "oracle has {} elements, instance {}",
            oracle.n(),
            inst.n()
        )));
    }
    let sets = candidate_sets(inst);
    let theta: Vec<f64> = inst
        .active_bands()
        .iter()
        .map(|&k| inst.profile.theta[k] as f64)
        .collect();
    let mut cache: HashMap<Vec<u64>, (Vec<u8>, f64)> = HashMap::new();
    let mut best: Option<(Vec<u8>, f64, Vec<f64>)> = None;
    let mut candidates = 0;
    let mut failure = None;
    sweep_candidates(&sets, |w| {
        if failure.is_some() {
            return;
        }
        candidates += 1;
        let base: f64 = theta.iter().zip(w).map(|(t, w)| t * w).sum();
        if opts.prune && best.as_ref().is_some_and(|b| base >= b.1) {
            return;
        }
        let key: Vec<u64> = w.iter().map(|v| v.to_bits()).collect();
        let (x, z) = match cache.get(&key) {
            Some(hit) => hit.clone(),
            None => {
                let res = modified_costs(inst, w).and_then(|cbar| oracle.solve(&cbar));
                match res {
                    Ok(r) => {
                        cache.insert(key, r.clone());
                        r
                    }
                    Err(e) => {
                        failure = Some(e);
                        return;
                    }
                }
            }
        };
        let bound = base + z;
        observe(&Candidate {
            w: w.to_vec(),
            bound,
        });
        if best.as_ref().is_none_or(|b| bound < b.1) {
            best = Some((x, bound, w.to_vec()));
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    let (x, value, w) =
        best.ok_or_else(|| Error::Numerical("no feasible multiplier vector".into()))?;
    let nominal_solves = cache.len();
    let limit = work_bound(inst.n(), inst.bounds.len());
    if nominal_solves as u128 > limit {
        return Err(Error::Numerical(format!(
            "{nominal_solves} nominal solves exceed the bound {limit}"
        )));
    }
    Ok(RobustBinarySolution {
        x,
        value,
        w,
        active_bands: sets.bands,
        nominal_solves,
        candidates,
        alpha: oracle.alpha(),
    })
}

/// Minimum worst-case cost over the whole feasible set, by enumeration.
pub fn robust_value_bruteforce(
    inst: &CombinatorialInstance,
    oracle: &dyn NominalOracle,
) -> Result<(Vec<u8>, f64)> {
    let mut best: Option<(Vec<u8>, f64)> = None;
    for x in oracle.enumerate()? {
        let v = inst.robust_cost(&x)?;
        if best.as_ref().is_none_or(|b| v < b.1) {
            best = Some((x, v));
        }
    }
    best.ok_or_else(|| Error::Infeasible("empty feasible set".into()))
}
