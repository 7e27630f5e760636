//! Robustness testing and cut separation through a bipartite min-cost flow.
//!
//! For row `i` and a point `x >= 0` the network has a source, one node per
//! uncertain column, one node per band and a sink. Column `j` sends its unit
//! of flow to band `k` at cost `-d_ij^k x_j`; band `k` forwards at most
//! `theta_k` units. A min-cost flow of value `n_i` is a worst-case
//! profile-valid scenario, and its cost is `-DEV_i(x)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{validate_row, BandScheme, Check, NominalProblem, RowPartition};

/// Violations at or below this are treated as satisfied.
pub const ROBUST_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct Arc {
    pub tail: usize,
    pub head: usize,
    pub capacity: u32,
    pub cost: f64,
}

/// The network for one row at one point.
///
/// Nodes are numbered source `0`, columns `1..=c`, bands `c+1..=c+b`, sink
/// `c+b+1`. Arcs are stored source arcs first, then column-band arcs in
/// column-major order, then band-sink arcs.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowNet {
    pub row: usize,
    /// Uncertain columns of the row, one node each.
    pub columns: Vec<usize>,
    pub k_minus: i32,
    pub band_count: usize,
    pub arcs: Vec<Arc>,
    /// Flow value to route from source to sink.
    pub demand: u32,
}

impl FlowNet {
    pub fn node_count(&self) -> usize {
        self.columns.len() + self.band_count + 2
    }

    pub fn source(&self) -> usize {
        0
    }

    pub fn sink(&self) -> usize {
        self.columns.len() + self.band_count + 1
    }

    pub fn column_node(&self, idx: usize) -> usize {
        1 + idx
    }

    pub fn band_node(&self, pos: usize) -> usize {
        1 + self.columns.len() + pos
    }

    /// Index of the arc from column `idx` to band position `pos`.
    pub fn assignment_arc(&self, idx: usize, pos: usize) -> usize {
        self.columns.len() + idx * self.band_count + pos
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Flow {
    /// Units on each arc of the network, in arc order.
    pub arcs: Vec<u32>,
    pub cost: f64,
}

impl Flow {
    /// Band position receiving each column's unit.
    pub fn assignment(&self, net: &FlowNet) -> Vec<usize> {
        (0..net.columns.len())
            .map(|idx| {
                (0..net.band_count)
                    .find(|&pos| self.arcs[net.assignment_arc(idx, pos)] > 0)
                    .expect("every column routes its unit through one band")
            })
            .collect()
    }
}

pub fn build_flow_instance(
    prob: &NominalProblem,
    scheme: &BandScheme,
    x: &[f64],
    i: usize,
) -> Result<FlowNet> {
    scheme.check_dims(prob)?;
    prob.check_point(x)?;
    if i >= prob.m() {
        return Err(Error::InvalidArgument(format!(
            "row {i} out of range (m = {})",
            prob.m()
        )));
    }
    let columns = scheme.uncertain_columns(i);
    let theta = scheme.profile(i)?.theta;
    let nb = theta.len();
    let nc = columns.len();
    let mut arcs = Vec::with_capacity(nc + nc * nb + nb);
    for idx in 0..nc {
        arcs.push(Arc {
            tail: 0,
            head: 1 + idx,
            capacity: 1,
            cost: 0.0,
        });
    }
    for (idx, &j) in columns.iter().enumerate() {
        let d = scheme.thresholds(i, j).expect("uncertain column");
        for (pos, &dk) in d.iter().enumerate() {
            // written as 0.0 - d*x so zero weights give +0.0 costs
            arcs.push(Arc {
                tail: 1 + idx,
                head: 1 + nc + pos,
                capacity: 1,
                cost: 0.0 - dk * x[j],
            });
        }
    }
    for (pos, &t) in theta.iter().enumerate() {
        arcs.push(Arc {
            tail: 1 + nc + pos,
            head: 1 + nc + nb,
            capacity: t,
            cost: 0.0,
        });
    }
    Ok(FlowNet {
        row: i,
        columns,
        k_minus: scheme.k_minus(),
        band_count: nb,
        arcs,
        demand: nc as u32,
    })
}

/// Residual graph edge; edges `2a` and `2a + 1` are arc `a` and its reverse.
struct Edge {
    to: usize,
    residual: u32,
    cost: f64,
}

/// Integral min-cost flow of value `net.demand` by successive shortest
/// paths with node potentials.
///
/// Initial potentials come from one relaxation pass in topological order,
/// so the network must be acyclic. Among equal-cost paths Dijkstra settles
/// the lowest node index first.
pub fn min_cost_flow(net: &FlowNet) -> Result<Flow> {
    let nodes = net.node_count();
    let (s, t) = (net.source(), net.sink());
    let mut edges: Vec<Edge> = Vec::with_capacity(2 * net.arcs.len());
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); nodes];
    for a in &net.arcs {
        if a.tail >= nodes || a.head >= nodes {
            return Err(Error::InvalidArgument(
                "arc endpoint outside the network".into(),
            ));
        }
        out[a.tail].push(edges.len());
        edges.push(Edge {
            to: a.head,
            residual: a.capacity,
            cost: a.cost,
        });
        out[a.head].push(edges.len());
        edges.push(Edge {
            to: a.tail,
            residual: 0,
            cost: -a.cost,
        });
    }

    let order = topological_order(net, nodes)?;
    let mut potential = vec![f64::INFINITY; nodes];
    potential[s] = 0.0;
    for &u in &order {
        if potential[u].is_infinite() {
            continue;
        }
        for a in net.arcs.iter().filter(|a| a.tail == u && a.capacity > 0) {
            let nd = potential[u] + a.cost;
            if nd < potential[a.head] {
                potential[a.head] = nd;
            }
        }
    }
    let reach_max = potential
        .iter()
        .copied()
        .filter(|p| p.is_finite())
        .fold(0.0, f64::max);
    for p in potential.iter_mut().filter(|p| p.is_infinite()) {
        *p = reach_max;
    }

    let mut remaining = net.demand;
    let mut dist = vec![f64::INFINITY; nodes];
    let mut pred = vec![usize::MAX; nodes];
    let mut done = vec![false; nodes];
    while remaining > 0 {
        dist.fill(f64::INFINITY);
        pred.fill(usize::MAX);
        done.fill(false);
        dist[s] = 0.0;
        loop {
            let mut u = usize::MAX;
            for v in 0..nodes {
                if !done[v] && dist[v].is_finite() && (u == usize::MAX || dist[v] < dist[u]) {
                    u = v;
                }
            }
            if u == usize::MAX {
                break;
            }
            done[u] = true;
            for &e in &out[u] {
                let edge = &edges[e];
                if edge.residual == 0 || done[edge.to] {
                    continue;
                }
                let reduced = (edge.cost + potential[u] - potential[edge.to]).max(0.0);
                let nd = dist[u] + reduced;
                if nd < dist[edge.to] - 1e-12 {
                    dist[edge.to] = nd;
                    pred[edge.to] = e;
                }
            }
        }
        if !dist[t].is_finite() {
            return Err(Error::Infeasible(format!(
                "network carries only {} of {} units",
                net.demand - remaining,
                net.demand
            )));
        }

        let mut push = remaining;
        let mut v = t;
        while v != s {
            let e = pred[v];
            push = push.min(edges[e].residual);
            v = edges[e ^ 1].to;
        }
        let mut v = t;
        while v != s {
            let e = pred[v];
            edges[e].residual -= push;
            edges[e ^ 1].residual += push;
            v = edges[e ^ 1].to;
        }
        remaining -= push;

        let dmax = dist
            .iter()
            .copied()
            .filter(|d| d.is_finite())
            .fold(0.0, f64::max);
        for (p, d) in potential.iter_mut().zip(&dist) {
            *p += if d.is_finite() { *d } else { dmax };
        }
    }

    let arcs: Vec<u32> = (0..net.arcs.len())
        .map(|a| edges[2 * a + 1].residual)
        .collect();
    let cost = net
        .arcs
        .iter()
        .zip(&arcs)
        .map(|(a, &f)| a.cost * f as f64)
        .sum();
    Ok(Flow { arcs, cost })
}

fn topological_order(net: &FlowNet, nodes: usize) -> Result<Vec<usize>> {
    let mut indeg = vec![0usize; nodes];
    for a in &net.arcs {
        indeg[a.head] += 1;
    }
    let mut ready: Vec<usize> = (0..nodes).filter(|&v| indeg[v] == 0).rev().collect();
    let mut order = Vec::with_capacity(nodes);
    while let Some(u) = ready.pop() {
        order.push(u);
        for a in net.arcs.iter().filter(|a| a.tail == u) {
            indeg[a.head] -= 1;
            if indeg[a.head] == 0 {
                ready.push(a.head);
            }
        }
    }
    if order.len() != nodes {
        return Err(Error::InvalidArgument(
            "flow network must be acyclic".into(),
        ));
    }
    Ok(order)
}

/// Robustness of one row: `lhs = a_i'x - c*_i(x)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RowCheck {
    pub row: usize,
    pub lhs: f64,
    pub slack: f64,
    pub robust: bool,
}

/// Separation result for one row.
#[derive(Clone, Debug)]
pub struct RowSeparation {
    pub check: RowCheck,
    pub net: FlowNet,
    pub flow: Flow,
}

pub fn separate_row(
    prob: &NominalProblem,
    scheme: &BandScheme,
    x: &[f64],
    i: usize,
) -> Result<RowSeparation> {
    let net = build_flow_instance(prob, scheme, x, i)?;
    let flow = min_cost_flow(&net)?;
    let lhs = prob.row_activity(i, x) - flow.cost;
    let slack = prob.b()[i] - lhs;
    Ok(RowSeparation {
        check: RowCheck {
            row: i,
            lhs,
            slack,
            robust: slack >= -ROBUST_TOL,
        },
        net,
        flow,
    })
}

/// Per-row robustness of `x`; `x` is robust iff every record is.
pub fn check_robust(
    prob: &NominalProblem,
    scheme: &BandScheme,
    x: &[f64],
) -> Result<Vec<RowCheck>> {
    (0..prob.m())
        .map(|i| separate_row(prob, scheme, x, i).map(|s| s.check))
        .collect()
}

/// A robustness cut `coeffs'x <= rhs` realising one profile-valid scenario of `row`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cut {
    pub row: usize,
    pub coeffs: Vec<f64>,
    pub rhs: f64,
    /// Scenario deviations of the row, `0` on certain columns.
    pub deviations: Vec<f64>,
    /// Band of each column; `None` for certain columns.
    pub bands: Vec<Option<i32>>,
    /// `coeffs'x - rhs` at the separated point.
    pub violation: f64,
}

impl Cut {
    /// Checks the embedded scenario against the scheme and returns its partition.
    pub fn validate(&self, scheme: &BandScheme) -> Result<Check<RowPartition>> {
        validate_row(scheme, self.row, &self.deviations)
    }

    /// Coefficients rounded to `1e-9`, for exact duplicate detection.
    pub fn key(&self) -> (usize, Vec<i64>, i64) {
        let r = |v: f64| (v * 1e9).round() as i64;
        (
            self.row,
            self.coeffs.iter().map(|&v| r(v)).collect(),
            r(self.rhs),
        )
    }
}

/// The row of the scenario carried by a flow, as a cut. `violation` may be
/// of either sign.
pub fn realize_flow(
    prob: &NominalProblem,
    scheme: &BandScheme,
    x: &[f64],
    net: &FlowNet,
    flow: &Flow,
) -> Cut {
    let i = net.row;
    let mut coeffs = prob.a()[i].clone();
    let mut deviations = vec![0.0; prob.n()];
    let mut bands = vec![None; prob.n()];
    for (idx, pos) in flow.assignment(net).into_iter().enumerate() {
        let j = net.columns[idx];
        let d = scheme.thresholds(i, j).expect("uncertain column")[pos];
        coeffs[j] += d;
        deviations[j] = d;
        bands[j] = Some(scheme.row_bounds(i).band(pos));
    }
    let rhs = prob.b()[i];
    let violation = crate::model::dot(&coeffs, x) - rhs;
    Cut {
        row: i,
        coeffs,
        rhs,
        deviations,
        bands,
        violation,
    }
}

/// Builds the cut of a violated row from an optimal flow.
pub fn extract_cut(
    prob: &NominalProblem,
    scheme: &BandScheme,
    x: &[f64],
    net: &FlowNet,
    flow: &Flow,
) -> Result<Cut> {
    let cut = realize_flow(prob, scheme, x, net, flow);
    if cut.violation <= ROBUST_TOL {
        return Err(Error::InvalidArgument(format!(
            "row {} is not violated at this point (excess {:e})",
            cut.row, cut.violation
        )));
    }
    Ok(cut)
}

/// Cuts for every violated row, in row order.
pub fn separate(prob: &NominalProblem, scheme: &BandScheme, x: &[f64]) -> Result<Vec<Cut>> {
    let mut cuts = Vec::new();
    for i in 0..prob.m() {
        let sep = separate_row(prob, scheme, x, i)?;
        if !sep.check.robust {
            cuts.push(extract_cut(prob, scheme, x, &sep.net, &sep.flow)?);
        }
    }
    Ok(cuts)
}
