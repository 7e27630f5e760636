//! Cutting-plane solver: solve the master, separate every row with the flow
//! network, add the violated cuts and resolve until the master point is robust.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::flowsep::{build_flow_instance, min_cost_flow, realize_flow, separate, Cut};
use crate::lp::{LinearProgram, Relation, Solution, Status, DEFAULT_NODE_LIMIT};
use crate::model::{BandScheme, NominalProblem};

#[derive(Clone, Debug)]
pub struct CuttingPlaneOptions {
    pub max_iterations: usize,
    pub node_limit: usize,
}

impl Default for CuttingPlaneOptions {
    fn default() -> Self {
        Self {
            max_iterations: 10_000,
            node_limit: DEFAULT_NODE_LIMIT,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Max-form master objective; never increases.
    pub objective: f64,
    pub max_violation: f64,
    pub cuts_added: usize,
}

#[derive(Clone, Debug)]
pub struct CuttingPlaneResult {
    pub x: Vec<f64>,
    /// Max-form objective value.
    pub value: f64,
    /// Objective in the problem's own sense.
    pub reported: f64,
    pub iterations: usize,
    pub cuts: Vec<Cut>,
    pub log: Vec<IterationRecord>,
}

fn solve_master(
    master: &LinearProgram,
    integer: bool,
    opts: &CuttingPlaneOptions,
) -> Result<Solution> {
    let sol = if integer {
        master.solve_integer(opts.node_limit)?
    } else {
        master.solve_relaxation()?
    };
    match sol.status {
        Status::Optimal => Ok(sol),
        Status::Infeasible => Err(Error::Infeasible(
            "master problem has no feasible point".into(),
        )),
        Status::Unbounded => Err(Error::Unbounded(
            "master problem is unbounded; bound the variables explicitly".into(),
        )),
    }
}

/// The nominal problem, except that a row whose bounds force some
/// coefficients out of band 0 (`l_k > 0` for some `k != 0`) starts from one
/// admissible scenario instead, since its nominal row is then no relaxation.
fn initial_master(prob: &NominalProblem, scheme: &BandScheme) -> Result<LinearProgram> {
    let mut master = LinearProgram::maximize(prob.c().to_vec());
    let origin = vec![0.0; prob.n()];
    for i in 0..prob.m() {
        let bounds = scheme.row_bounds(i);
        let forced = bounds.bands().any(|k| k != 0 && bounds.lower_of(k) > 0);
        let row = if forced && !scheme.uncertain_columns(i).is_empty() {
            let net = build_flow_instance(prob, scheme, &origin, i)?;
            realize_flow(prob, scheme, &origin, &net, &min_cost_flow(&net)?).coeffs
        } else {
            prob.a()[i].clone()
        };
        master.add_row(row, Relation::Le, prob.b()[i]);
    }
    for &j in prob.free_vars() {
        master.set_free(j);
    }
    for &j in prob.int_vars() {
        master.set_integer(j);
    }
    Ok(master)
}

/// Solves the robust problem by separating robustness cuts.
///
/// The first master is the nominal problem, with rows that force deviations
/// replaced by one of their scenarios. Each round adds one cut per
/// violated row; a cut that was already added for the same row means the
/// master is returning points that violate its own constraints, which is
/// reported as a numerical failure.
pub fn solve_by_cuts(
    prob: &NominalProblem,
    scheme: &BandScheme,
    opts: &CuttingPlaneOptions,
) -> Result<CuttingPlaneResult> {
    scheme.validate()?;
    scheme.check_dims(prob)?;
    let integer = !prob.int_vars().is_empty();
    let mut master = initial_master(prob, scheme)?;
    let mut seen = BTreeSet::new();
    let mut cuts = Vec::new();
    let mut log = Vec::new();
    for iteration in 1..=opts.max_iterations {
        let sol = solve_master(&master, integer, opts)?;
        let x: Vec<f64> = sol
            .x
            .iter()
            .map(|&v| if v.abs() < 1e-12 { 0.0 } else { v })
            .collect();
        let found = separate(prob, scheme, &x)?;
        let max_violation = found.iter().map(|c| c.violation).fold(0.0, f64::max);
        log.push(IterationRecord {
            iteration,
            objective: sol.value,
            max_violation,
            cuts_added: found.len(),
        });
        if found.is_empty() {
            return Ok(CuttingPlaneResult {
                value: sol.value,
                reported: prob.reported(sol.value),
                x,
                iterations: iteration,
                cuts,
                log,
            });
        }
        for cut in found {
            if !seen.insert(cut.key()) {
                return Err(Error::Numerical(format!(
                    "cut for row {} generated twice (violation {:e})",
                    cut.row, cut.violation
                )));
            }
            master.add_row(cut.coeffs.clone(), Relation::Le, cut.rhs);
            cuts.push(cut);
        }
    }
    Err(Error::Limit(format!(
        "{} cutting-plane iterations",
        opts.max_iterations
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flowsep::check_robust;
    use crate::lp::solve_lp;
    use crate::model::BandBounds;
    use crate::reformulation::build_compact;

    fn fixture(boxed: bool) -> (NominalProblem, BandScheme) {
        let mut a = vec![vec![1.0; 3]];
        let mut b = vec![8.0];
        let mut builder = BandScheme::builder(
            3,
            if boxed { 4 } else { 1 },
            BandBounds::new(0, 2, vec![0, 0, 0], vec![3, 2, 1]).unwrap(),
        )
        .thresholds(0, 0, vec![0.0, 4.0, 6.0])
        .thresholds(0, 1, vec![0.0, 2.0, 5.0])
        .thresholds(0, 2, vec![0.0, 1.0, 2.0]);
        if boxed {
            for j in 0..3 {
                let mut r = vec![0.0; 3];
                r[j] = 1.0;
                a.push(r);
                b.push(3.0);
            }
            builder = builder.thresholds(1, 0, vec![0.0, 0.5, 1.0]);
        }
        let prob = NominalProblem::maximize(vec![1.0, 2.0, 1.0], a, b).unwrap();
        (prob, builder.build().unwrap())
    }

    #[test]
    fn certain_instance_stops_at_once() {
        let p = NominalProblem::maximize(vec![1.0, 1.0], vec![vec![1.0, 2.0]], vec![4.0]).unwrap();
        let r = solve_by_cuts(&p, &BandScheme::certain(2, 1), &Default::default()).unwrap();
        assert_eq!((r.iterations, r.cuts.len()), (1, 0));
        assert_eq!(r.value, 4.0);
    }

    #[test]
    fn fixture_matches_compact() {
        for boxed in [false, true] {
            let (p, s) = fixture(boxed);
            let r = solve_by_cuts(&p, &s, &Default::default()).unwrap();
            let compact = solve_lp(&build_compact(&p, &s).unwrap().problem).unwrap();
            assert!(
                (r.value - compact.value).abs() < 1e-6,
                "{} vs {}",
                r.value,
                compact.value
            );
            assert!(check_robust(&p, &s, &r.x).unwrap().iter().all(|c| c.robust));
            assert!(r
                .log
                .windows(2)
                .all(|w| w[1].objective <= w[0].objective + 1e-9));
            for c in &r.cuts {
                assert!(c.violation > 1e-6);
                assert!(c.validate(&s).unwrap().is_feasible());
            }
        }
    }

    #[test]
    fn unbounded_and_infeasible_masters() {
        let p = NominalProblem::maximize(vec![1.0, 1.0], vec![vec![1.0, -1.0]], vec![1.0]).unwrap();
        let r = solve_by_cuts(&p, &BandScheme::certain(2, 1), &Default::default());
        assert!(matches!(r, Err(Error::Unbounded(_))));
        let p = NominalProblem::maximize(vec![1.0], vec![vec![-1.0], vec![1.0]], vec![-1.0, 5.0])
            .unwrap();
        let s = BandScheme::builder(1, 2, BandBounds::new(0, 1, vec![0, 1], vec![1, 1]).unwrap())
            .thresholds(0, 0, vec![0.0, 2.0])
            .row_bounds(1, BandBounds::new(0, 1, vec![0, 0], vec![1, 1]).unwrap())
            .build()
            .unwrap();
        // the first row always deviates to x <= -1
        assert!(matches!(
            solve_by_cuts(&p, &s, &Default::default()),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn iteration_cap() {
        let (p, s) = fixture(true);
        let opts = CuttingPlaneOptions {
            max_iterations: 1,
            ..Default::default()
        };
        assert!(matches!(solve_by_cuts(&p, &s, &opts), Err(Error::Limit(_))));
    }

    #[test]
    fn forced_negative_band_is_not_cut_off() {
        // the only scenario is 0 x <= 0, so x reaches its box
        let p = NominalProblem::maximize(vec![1.0], vec![vec![2.0], vec![1.0]], vec![0.0, 3.0])
            .unwrap();
        let s = BandScheme::builder(
            1,
            2,
            BandBounds::new(-1, 0, vec![1, 0], vec![1, 1]).unwrap(),
        )
        .thresholds(0, 0, vec![-2.0, 0.0])
        .row_bounds(1, BandBounds::new(-1, 0, vec![0, 0], vec![1, 1]).unwrap())
        .build()
        .unwrap();
        let r = solve_by_cuts(&p, &s, &Default::default()).unwrap();
        assert_eq!((r.value, r.iterations), (3.0, 1));
    }
}
