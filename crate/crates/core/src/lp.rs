//! Dense two-phase simplex and best-bound branch and bound.
//!
//! Sized for desk-scale programs: counterparts with a few dozen columns and
//! rows. Pivoting uses the largest reduced cost and switches to Bland's rule
//! after `3 (n + m)` consecutive degenerate pivots.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::model::NominalProblem;

const PIVOT_EPS: f64 = 1e-9;
const COST_EPS: f64 = 1e-9;
const FEAS_EPS: f64 = 1e-7;
const INT_EPS: f64 = 1e-6;
const BNB_GAP: f64 = 1e-7;

pub const DEFAULT_NODE_LIMIT: usize = 100_000;
pub const DEFAULT_PIVOT_LIMIT: usize = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

/// `max objective'x` over rows, with `x_j >= 0` unless marked free.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram {
    objective: Vec<f64>,
    rows: Vec<Row>,
    free: Vec<bool>,
    integer: Vec<bool>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub status: Status,
    pub x: Vec<f64>,
    /// Max-form objective value; meaningless unless `status` is optimal.
    pub value: f64,
    pub pivots: usize,
    pub nodes: usize,
}

impl Solution {
    fn without_point(status: Status, n: usize, pivots: usize) -> Self {
        Self {
            status,
            x: vec![0.0; n],
            value: match status {
                Status::Unbounded => f64::INFINITY,
                _ => f64::NEG_INFINITY,
            },
            pivots,
            nodes: 0,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }
}

impl LinearProgram {
    pub fn maximize(objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            objective,
            rows: Vec::new(),
            free: vec![false; n],
            integer: vec![false; n],
        }
    }

    pub fn from_problem(prob: &NominalProblem) -> Self {
        let mut lp = Self::maximize(prob.c().to_vec());
        for (row, &rhs) in prob.a().iter().zip(prob.b()) {
            lp.add_row(row.clone(), Relation::Le, rhs);
        }
        for &j in prob.free_vars() {
            lp.free[j] = true;
        }
        for &j in prob.int_vars() {
            lp.integer[j] = true;
        }
        lp
    }

    pub fn n(&self) -> usize {
        self.objective.len()
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn add_row(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) -> &mut Self {
        assert_eq!(
            coeffs.len(),
            self.n(),
            "row length must equal variable count"
        );
        self.rows.push(Row {
            coeffs,
            relation,
            rhs,
        });
        self
    }

    pub fn set_free(&mut self, j: usize) -> &mut Self {
        self.free[j] = true;
        self
    }

    pub fn set_integer(&mut self, j: usize) -> &mut Self {
        self.integer[j] = true;
        self
    }

    pub fn is_integer(&self, j: usize) -> bool {
        self.integer[j]
    }

    /// Largest violation of any row or sign restriction at `x`.
    pub fn max_residual(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for r in &self.rows {
            let lhs: f64 = r.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
            let v = match r.relation {
                Relation::Le => lhs - r.rhs,
                Relation::Ge => r.rhs - lhs,
                Relation::Eq => (lhs - r.rhs).abs(),
            };
            worst = worst.max(v);
        }
        for (j, &v) in x.iter().enumerate() {
            if !self.free[j] {
                worst = worst.max(-v);
            }
        }
        worst
    }

    /// Solves the continuous relaxation.
    pub fn solve_relaxation(&self) -> Result<Solution> {
        Tableau::build(self, &[]).solve(self)
    }

    /// Branch and bound over the integer-marked columns.
    pub fn solve_integer(&self, node_limit: usize) -> Result<Solution> {
        if !self.integer.iter().any(|&b| b) {
            return self.solve_relaxation();
        }
        branch_and_bound(self, node_limit)
    }
}

/// LP relaxation of a nominal problem (integrality ignored).
pub fn solve_lp(prob: &NominalProblem) -> Result<Solution> {
    LinearProgram::from_problem(prob).solve_relaxation()
}

/// Mixed-integer solve of a nominal problem.
pub fn solve_milp(prob: &NominalProblem) -> Result<Solution> {
    LinearProgram::from_problem(prob).solve_integer(DEFAULT_NODE_LIMIT)
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Bound {
    var: usize,
    relation: Relation,
    value: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum ColKind {
    Structural { var: usize, negated: bool },
    Slack,
    Artificial,
}

struct Tableau {
    /// rows x (cols + 1); the last column holds the right-hand side.
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    kinds: Vec<ColKind>,
    n_orig: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram, extra: &[Bound]) -> Self {
        let n = lp.n();
        let mut kinds = Vec::new();
        let mut col_of = Vec::with_capacity(n);
        for j in 0..n {
            col_of.push(kinds.len());
            kinds.push(ColKind::Structural {
                var: j,
                negated: false,
            });
            if lp.free[j] {
                kinds.push(ColKind::Structural {
                    var: j,
                    negated: true,
                });
            }
        }
        let n_struct = kinds.len();

        let mut rows: Vec<(Vec<f64>, Relation, f64)> =
            Vec::with_capacity(lp.rows.len() + extra.len());
        let expand = |coeffs: &[f64]| {
            let mut out = vec![0.0; n_struct];
            for (j, &a) in coeffs.iter().enumerate() {
                out[col_of[j]] = a;
                if lp.free[j] {
                    out[col_of[j] + 1] = -a;
                }
            }
            out
        };
        for r in &lp.rows {
            rows.push((expand(&r.coeffs), r.relation, r.rhs));
        }
        for b in extra {
            let mut coeffs = vec![0.0; n];
            coeffs[b.var] = 1.0;
            rows.push((expand(&coeffs), b.relation, b.value));
        }
        for (coeffs, rel, rhs) in rows.iter_mut() {
            if *rhs < 0.0 {
                coeffs.iter_mut().for_each(|v| *v = -*v);
                *rhs = -*rhs;
                *rel = match rel {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
            }
        }

        let m = rows.len();
        let n_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
        let n_art = rows.iter().filter(|r| r.1 != Relation::Le).count();
        let cols = n_struct + n_slack + n_art;
        kinds.extend(std::iter::repeat_n(ColKind::Slack, n_slack));
        kinds.extend(std::iter::repeat_n(ColKind::Artificial, n_art));

        let mut t = vec![vec![0.0; cols + 1]; m];
        let mut basis = vec![0; m];
        let (mut s, mut a) = (n_struct, n_struct + n_slack);
        for (i, (coeffs, rel, rhs)) in rows.into_iter().enumerate() {
            t[i][..n_struct].copy_from_slice(&coeffs);
            t[i][cols] = rhs;
            match rel {
                Relation::Le => {
                    t[i][s] = 1.0;
                    basis[i] = s;
                    s += 1;
                }
                Relation::Ge => {
                    t[i][s] = -1.0;
                    s += 1;
                    t[i][a] = 1.0;
                    basis[i] = a;
                    a += 1;
                }
                Relation::Eq => {
                    t[i][a] = 1.0;
                    basis[i] = a;
                    a += 1;
                }
            }
        }
        Self {
            t,
            basis,
            kinds,
            n_orig: n,
        }
    }

    fn cols(&self) -> usize {
        self.kinds.len()
    }

    fn rhs(&self, i: usize) -> f64 {
        self.t[i][self.cols()]
    }

    fn solve(mut self, lp: &LinearProgram) -> Result<Solution> {
        let n = self.n_orig;
        let mut pivots = 0;

        if self.kinds.contains(&ColKind::Artificial) {
            let cost: Vec<f64> = self
                .kinds
                .iter()
                .map(|k| if *k == ColKind::Artificial { -1.0 } else { 0.0 })
                .collect();
            let phase1 = self.optimize(&cost, true, &mut pivots)?;
            debug_assert!(phase1.is_some(), "phase one is bounded");
            let infeas: f64 = (0..self.basis.len())
                .filter(|&i| self.kinds[self.basis[i]] == ColKind::Artificial)
                .map(|i| self.rhs(i))
                .sum();
            let scale = 1.0
                + self
                    .t
                    .iter()
                    .map(|r| r[r.len() - 1].abs())
                    .fold(0.0, f64::max);
            if infeas > FEAS_EPS * scale {
                return Ok(Solution::without_point(Status::Infeasible, n, pivots));
            }
            self.evict_artificials();
        }

        let cost: Vec<f64> = self
            .kinds
            .iter()
            .map(|k| match k {
                ColKind::Structural { var, negated } => {
                    if *negated {
                        -lp.objective[*var]
                    } else {
                        lp.objective[*var]
                    }
                }
                _ => 0.0,
            })
            .collect();
        if self.optimize(&cost, false, &mut pivots)?.is_none() {
            return Ok(Solution::without_point(Status::Unbounded, n, pivots));
        }

        let mut x = vec![0.0; n];
        for (i, &col) in self.basis.iter().enumerate() {
            if let ColKind::Structural { var, negated } = self.kinds[col] {
                let v = self.rhs(i);
                if negated {
                    x[var] -= v;
                } else {
                    x[var] += v;
                }
            }
        }
        let value = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        Ok(Solution {
            status: Status::Optimal,
            x,
            value,
            pivots,
            nodes: 0,
        })
    }

    /// Primal simplex on the current basis. Returns `None` when unbounded.
    fn optimize(
        &mut self,
        cost: &[f64],
        allow_artificial: bool,
        pivots: &mut usize,
    ) -> Result<Option<()>> {
        let cols = self.cols();
        let m = self.basis.len();
        let mut reduced = vec![0.0; cols];
        for (j, r) in reduced.iter_mut().enumerate() {
            *r = cost[j]
                - (0..m)
                    .map(|i| cost[self.basis[i]] * self.t[i][j])
                    .sum::<f64>();
        }
        let bland_after = 3 * (self.n_orig + m);
        let mut degenerate_run = 0usize;
        let mut local = 0usize;

        loop {
            let bland = degenerate_run >= bland_after;
            let eligible = |j: usize| allow_artificial || self.kinds[j] != ColKind::Artificial;
            let entering = if bland {
                (0..cols).find(|&j| eligible(j) && reduced[j] > COST_EPS)
            } else {
                let mut best: Option<usize> = None;
                for j in (0..cols).filter(|&j| eligible(j) && reduced[j] > COST_EPS) {
                    if best.is_none_or(|b| reduced[j] > reduced[b]) {
                        best = Some(j);
                    }
                }
                best
            };
            let Some(e) = entering else {
                return Ok(Some(()));
            };

            let mut leave: Option<(usize, f64)> = None;
            for i in 0..m {
                let a = self.t[i][e];
                if a > PIVOT_EPS {
                    let ratio = self.rhs(i) / a;
                    let better = match leave {
                        None => true,
                        Some((li, lr)) => {
                            ratio < lr - 1e-12
                                || (ratio <= lr + 1e-12 && self.basis[i] < self.basis[li])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((r, ratio)) = leave else {
                return Ok(None);
            };
            if ratio <= PIVOT_EPS {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }

            self.pivot(r, e);
            let f = reduced[e];
            if f != 0.0 {
                for (j, red) in reduced.iter_mut().enumerate() {
                    *red -= f * self.t[r][j];
                }
            }
            reduced[e] = 0.0;

            *pivots += 1;
            local += 1;
            if local > DEFAULT_PIVOT_LIMIT {
                return Err(Error::Limit(format!(
                    "simplex exceeded {DEFAULT_PIVOT_LIMIT} pivots"
                )));
            }
        }
    }

    fn pivot(&mut self, r: usize, e: usize) {
        let width = self.t[r].len();
        let p = self.t[r][e];
        for v in self.t[r].iter_mut() {
            *v /= p;
        }
        self.t[r][e] = 1.0;
        let pivot_row = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[e];
            if f == 0.0 {
                continue;
            }
            for j in 0..width {
                row[j] -= f * pivot_row[j];
                if row[j].abs() < 1e-13 {
                    row[j] = 0.0;
                }
            }
            row[e] = 0.0;
        }
        self.basis[r] = e;
    }

    /// Pivots zero-level artificials out of the basis, dropping redundant rows.
    fn evict_artificials(&mut self) {
        let mut i = 0;
        while i < self.basis.len() {
            if self.kinds[self.basis[i]] == ColKind::Artificial {
                let col = (0..self.cols())
                    .filter(|&j| self.kinds[j] != ColKind::Artificial)
                    .max_by(|&a, &b| {
                        self.t[i][a]
                            .abs()
                            .partial_cmp(&self.t[i][b].abs())
                            .unwrap_or(Ordering::Equal)
                            .then(b.cmp(&a))
                    })
                    .filter(|&j| self.t[i][j].abs() > PIVOT_EPS);
                match col {
                    Some(j) => self.pivot(i, j),
                    None => {
                        self.t.remove(i);
                        self.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
    }
}

struct Node {
    bound: f64,
    id: usize,
    bounds: Vec<Bound>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // Max-heap on bound, earlier nodes first on ties.
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound
            .total_cmp(&other.bound)
            .then(other.id.cmp(&self.id))
    }
}

fn branch_and_bound(lp: &LinearProgram, node_limit: usize) -> Result<Solution> {
    let n = lp.n();
    let root = Tableau::build(lp, &[]).solve(lp)?;
    let mut pivots = root.pivots;
    match root.status {
        Status::Optimal => {}
        status => return Ok(Solution::without_point(status, n, pivots)),
    }

    let mut incumbent: Option<(Vec<f64>, f64)> = None;
    let mut heap = BinaryHeap::new();
    let mut next_id = 0usize;
    let mut nodes = 0usize;
    let mut pending = Some((root, Vec::<Bound>::new()));

    loop {
        if let Some((sol, bounds)) = pending.take() {
            nodes += 1;
            if nodes > node_limit {
                return Err(Error::Limit(format!(
                    "branch and bound exceeded {node_limit} nodes"
                )));
            }
            let cutoff = incumbent
                .as_ref()
                .map_or(f64::NEG_INFINITY, |(_, v)| *v + BNB_GAP);
            if sol.value > cutoff {
                match most_fractional(lp, &sol.x) {
                    None => {
                        let mut x = sol.x.clone();
                        for (j, v) in x.iter_mut().enumerate() {
                            if lp.integer[j] {
                                *v = v.round();
                            }
                        }
                        let value = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
                        incumbent = Some((x, value));
                    }
                    Some(j) => {
                        let v = sol.x[j];
                        for (relation, value) in
                            [(Relation::Le, v.floor()), (Relation::Ge, v.ceil())]
                        {
                            let mut child = bounds.clone();
                            child.push(Bound {
                                var: j,
                                relation,
                                value,
                            });
                            heap.push(Node {
                                bound: sol.value,
                                id: next_id,
                                bounds: child,
                            });
                            next_id += 1;
                        }
                    }
                }
            }
        }

        let Some(node) = heap.pop() else { break };
        if let Some((_, v)) = &incumbent {
            if node.bound <= v + BNB_GAP {
                break;
            }
        }
        let sol = Tableau::build(lp, &node.bounds).solve(lp)?;
        pivots += sol.pivots;
        match sol.status {
            Status::Optimal => pending = Some((sol, node.bounds)),
            Status::Infeasible => {}
            Status::Unbounded => {
                return Ok(Solution::without_point(Status::Unbounded, n, pivots));
            }
        }
    }

    Ok(match incumbent {
        Some((x, value)) => Solution {
            status: Status::Optimal,
            x,
            value,
            pivots,
            nodes,
        },
        None => {
            let mut s = Solution::without_point(Status::Infeasible, n, pivots);
            s.nodes = nodes;
            s
        }
    })
}

fn most_fractional(lp: &LinearProgram, x: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (j, &v) in x.iter().enumerate() {
        if !lp.integer[j] {
            continue;
        }
        let frac = v - v.floor();
        let dist = frac.min(1.0 - frac);
        if dist > INT_EPS && best.is_none_or(|(_, d)| dist > d + 1e-12) {
            best = Some((j, dist));
        }
    }
    best.map(|(j, _)| j)
}
