//! Compact robust counterpart and the liftings of uncertain right-hand sides
//! and costs into the coefficient matrix.
//!
//! Dualizing the relaxation of the row's worst-case deviation problem gives,
//! for every row `i`,
//!
//! ```text
//! a_i'x + sum_k theta_k w_i^k + sum_j z_ij <= b_i
//! w_i^k + z_ij >= d_ij^k x_j          for uncertain (i, j) and every band k
//! w_i^k free, z_ij >= 0
//! ```

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::lp::{LinearProgram, Relation};
use crate::model::{BandBounds, BandScheme, NominalProblem, Sense};

/// Positions of `x`, `w` and `z` in the extended variable vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VarMap {
    pub n: usize,
    pub m: usize,
    pub k_minus: i32,
    pub band_count: usize,
}

impl VarMap {
    pub fn x(&self, j: usize) -> usize {
        j
    }

    pub fn w(&self, i: usize, k: i32) -> usize {
        self.n + i * self.band_count + (k - self.k_minus) as usize
    }

    pub fn z(&self, i: usize, j: usize) -> usize {
        self.n + self.band_count * self.m + i * self.n + j
    }

    pub fn len(&self) -> usize {
        self.n + self.band_count * self.m + self.n * self.m
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompactCounterpart {
    pub problem: NominalProblem,
    pub var_map: VarMap,
}

impl CompactCounterpart {
    /// The original variables of an extended solution.
    pub fn project(&self, extended: &[f64]) -> Vec<f64> {
        extended[..self.var_map.n].to_vec()
    }
}

/// Builds the compact counterpart.
///
/// Link rows are emitted for every band of every uncertain coefficient,
/// the zero band included: without `w^0 + z >= 0` a positive `theta_0`
/// would let `w^0` run to minus infinity. Certain coefficients get no link
/// rows and their `z` columns stay unused.
pub fn build_compact(prob: &NominalProblem, scheme: &BandScheme) -> Result<CompactCounterpart> {
    scheme.validate()?;
    scheme.check_dims(prob)?;
    let (n, m) = (prob.n(), prob.m());
    let map = VarMap {
        n,
        m,
        k_minus: scheme.k_minus(),
        band_count: scheme.band_count(),
    };
    let total = map.len();

    let mut c = prob.original_costs();
    c.resize(total, 0.0);
    let mut a = Vec::new();
    let mut b = Vec::new();
    let mut links = Vec::new();
    for i in 0..m {
        let mut row = vec![0.0; total];
        row[..n].copy_from_slice(&prob.a()[i]);
        let profile = scheme.profile(i)?;
        for (pos, &t) in profile.theta.iter().enumerate() {
            row[map.w(i, scheme.shared_bounds().band(pos))] = t as f64;
        }
        for j in scheme.uncertain_columns(i) {
            row[map.z(i, j)] = 1.0;
            for (pos, &d) in scheme.thresholds(i, j).unwrap().iter().enumerate() {
                let mut link = vec![0.0; total];
                link[j] = d;
                link[map.w(i, scheme.shared_bounds().band(pos))] = -1.0;
                link[map.z(i, j)] = -1.0;
                links.push(link);
            }
        }
        a.push(row);
        b.push(prob.b()[i]);
    }
    b.resize(m + links.len(), 0.0);
    a.extend(links);

    let free = prob
        .free_vars()
        .iter()
        .copied()
        .chain((0..m).flat_map(|i| scheme.shared_bounds().bands().map(move |k| map.w(i, k))));
    let problem = NominalProblem::new(prob.sense(), c, a, b)?
        .with_int_vars(prob.int_vars().iter().copied())?
        .with_free_vars(free)?;
    Ok(CompactCounterpart {
        problem,
        var_map: map,
    })
}

/// Relaxation of the 0-1 program computing `DEV_i(x)`:
/// `max sum d_ij^k x_j y_jk` subject to `sum_j y_jk = theta_k` for every band,
/// `sum_k y_jk <= 1` for every uncertain column, `y >= 0`.
///
/// Variable `idx * bands + pos` is `y` for the `idx`-th uncertain column of
/// the row and band position `pos`.
pub fn dev01_relaxation(scheme: &BandScheme, i: usize, x: &[f64]) -> Result<LinearProgram> {
    if i >= scheme.m() || x.len() != scheme.n() {
        return Err(Error::Dimension(format!(
            "row {i} / point of length {}",
            x.len()
        )));
    }
    let cols = scheme.uncertain_columns(i);
    let theta = scheme.profile(i)?.theta;
    let nb = theta.len();
    let mut obj = Vec::with_capacity(cols.len() * nb);
    for &j in &cols {
        obj.extend(scheme.thresholds(i, j).unwrap().iter().map(|d| d * x[j]));
    }
    let mut lp = LinearProgram::maximize(obj);
    for (pos, &t) in theta.iter().enumerate() {
        let mut row = vec![0.0; cols.len() * nb];
        for idx in 0..cols.len() {
            row[idx * nb + pos] = 1.0;
        }
        lp.add_row(row, Relation::Eq, t as f64);
    }
    for idx in 0..cols.len() {
        let mut row = vec![0.0; cols.len() * nb];
        row[idx * nb..(idx + 1) * nb].fill(1.0);
        lp.add_row(row, Relation::Le, 1.0);
    }
    Ok(lp)
}

fn widen(bounds: &BandBounds, n: usize) -> BandBounds {
    let mut upper = bounds.upper().to_vec();
    upper[bounds.zero_pos()] = n as u32;
    BandBounds::new(
        bounds.k_minus(),
        bounds.k_plus(),
        bounds.lower().to_vec(),
        upper,
    )
    .expect("same band range")
}

fn release(bounds: &BandBounds, n: usize) -> BandBounds {
    let b = widen(bounds, n);
    BandBounds::new(
        b.k_minus(),
        b.k_plus(),
        vec![0; b.len()],
        b.upper().to_vec(),
    )
    .expect("same band range")
}

/// Moves the right-hand side into a new column fixed to one.
///
/// Row `i` becomes `a_i'x - b_i x_{n+1} <= 0`, and two certain rows
/// `x_{n+1} <= 1`, `-x_{n+1} <= -1` are appended. `rhs[i]` lists thresholds
/// of the new coefficient `-b_i` by band position; threshold `t` stands for
/// the right-hand side `b_i - t`. The two fixing rows get their own band
/// bounds with every `l_k = 0` so they never need deviating coefficients.
pub fn lift_rhs_uncertainty(
    prob: &NominalProblem,
    scheme: &BandScheme,
    rhs: &BTreeMap<usize, Vec<f64>>,
) -> Result<(NominalProblem, BandScheme)> {
    scheme.check_dims(prob)?;
    let (n, m) = (prob.n(), prob.m());
    let mut a: Vec<Vec<f64>> = prob
        .a()
        .iter()
        .zip(prob.b())
        .map(|(row, &bi)| {
            let mut r = row.clone();
            r.push(-bi);
            r
        })
        .collect();
    let mut fix = vec![0.0; n + 1];
    fix[n] = 1.0;
    a.push(fix.clone());
    fix[n] = -1.0;
    a.push(fix);
    let mut b = vec![0.0; m];
    b.extend([1.0, -1.0]);
    let mut c = prob.original_costs();
    c.push(0.0);
    let lifted = NominalProblem::new(prob.sense(), c, a, b)?
        .with_int_vars(prob.int_vars().iter().copied())?
        .with_free_vars(prob.free_vars().iter().copied())?;

    let shared = scheme.shared_bounds();
    let mut builder = BandScheme::builder(n + 1, m + 2, widen(shared, n + 1));
    for (&(i, j), d) in scheme.entries() {
        builder = builder.thresholds(i, j, d.clone());
    }
    for (&i, d) in rhs {
        if i >= m {
            return Err(Error::InvalidArgument(format!(
                "rhs deviation for missing row {i}"
            )));
        }
        builder = builder.thresholds(i, n, d.clone());
    }
    for (&i, bnd) in scheme.row_overrides() {
        builder = builder.row_bounds(i, widen(bnd, n + 1));
    }
    let free_rows = release(shared, n + 1);
    builder = builder
        .row_bounds(m, free_rows.clone())
        .row_bounds(m + 1, free_rows);
    Ok((lifted, builder.build()?))
}

/// Replaces an uncertain objective by an epigraph variable.
///
/// A free variable `L` is appended with objective `max L` (`min -L` for
/// minimization problems), and one row `L - c'x <= 0` in max form is added
/// as row `m`. `cost[j]` lists the thresholds of that row's coefficient of
/// `x_j` by band position; threshold `t` means the cost of `x_j` is worse by
/// `t`, i.e. larger for a minimization problem and smaller for a
/// maximization problem. `bounds` overrides the band bounds of the new row.
pub fn lift_cost_uncertainty(
    prob: &NominalProblem,
    scheme: &BandScheme,
    cost: &BTreeMap<usize, Vec<f64>>,
    bounds: Option<BandBounds>,
) -> Result<(NominalProblem, BandScheme)> {
    scheme.check_dims(prob)?;
    let (n, m) = (prob.n(), prob.m());
    let mut a: Vec<Vec<f64>> = prob
        .a()
        .iter()
        .map(|row| {
            let mut r = row.clone();
            r.push(0.0);
            r
        })
        .collect();
    let mut epi: Vec<f64> = prob.c().iter().map(|&v| -v).collect();
    epi.push(1.0);
    a.push(epi);
    let mut b = prob.b().to_vec();
    b.push(0.0);
    let mut c = vec![0.0; n];
    c.push(match prob.sense() {
        Sense::Max => 1.0,
        Sense::Min => -1.0,
    });
    let lifted = NominalProblem::new(prob.sense(), c, a, b)?
        .with_int_vars(prob.int_vars().iter().copied())?
        .with_free_vars(prob.free_vars().iter().copied().chain([n]))?;

    let shared = scheme.shared_bounds();
    let certain = scheme.entries().next().is_none() && scheme.row_overrides().is_empty();
    let (shared_new, row_new) = match bounds {
        Some(bnd)
            if certain && (bnd.k_minus(), bnd.k_plus()) != (shared.k_minus(), shared.k_plus()) =>
        {
            (release(&bnd, n + 1), widen(&bnd, n + 1))
        }
        Some(bnd) => (widen(shared, n + 1), widen(&bnd, n + 1)),
        None => (widen(shared, n + 1), widen(shared, n + 1)),
    };
    let mut builder = BandScheme::builder(n + 1, m + 1, shared_new).row_bounds(m, row_new);
    for (&(i, j), d) in scheme.entries() {
        builder = builder.thresholds(i, j, d.clone());
    }
    for (&i, bnd) in scheme.row_overrides() {
        builder = builder.row_bounds(i, widen(bnd, n + 1));
    }
    for (&j, d) in cost {
        if j >= n {
            return Err(Error::InvalidArgument(format!(
                "cost deviation for missing column {j}"
            )));
        }
        builder = builder.thresholds(m, j, d.clone());
    }
    Ok((lifted, builder.build()?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{solve_lp, solve_milp};
    use crate::oracle::{dev_bruteforce, scenario_expansion, EnumerationMode};

    fn fixture(b: f64) -> (NominalProblem, BandScheme) {
        let prob = NominalProblem::maximize(vec![1.0; 3], vec![vec![1.0; 3]], vec![b]).unwrap();
        let scheme = BandScheme::builder(
            3,
            1,
            BandBounds::new(0, 2, vec![0, 0, 0], vec![3, 2, 1]).unwrap(),
        )
        .thresholds(0, 0, vec![0.0, 4.0, 6.0])
        .thresholds(0, 1, vec![0.0, 2.0, 5.0])
        .thresholds(0, 2, vec![0.0, 1.0, 2.0])
        .build()
        .unwrap();
        (prob, scheme)
    }

    #[test]
    fn counterpart_size() {
        let (p, s) = fixture(8.0);
        let cc = build_compact(&p, &s).unwrap();
        assert_eq!(cc.problem.n(), 9);
        assert_eq!(cc.problem.m(), 10);
        assert_eq!(cc.problem.free_vars(), &[3, 4, 5]);
        assert_eq!(cc.var_map.w(0, 2), 5);
        assert_eq!(cc.var_map.z(0, 1), 7);
        assert_eq!(
            &cc.problem.a()[0],
            &[1.0, 1.0, 1.0, 0.0, 2.0, 1.0, 1.0, 1.0, 1.0]
        );
        // link for (0, 1, band 2): 5 x_1 - w^2 - z_01 <= 0
        assert_eq!(
            &cc.problem.a()[6],
            &[0.0, 5.0, 0.0, 0.0, 0.0, -1.0, 0.0, -1.0, 0.0]
        );
    }

    #[test]
    fn fixture_optimum_matches_scenario_rows() {
        let (p, s) = fixture(8.0);
        let cc = build_compact(&p, &s).unwrap();
        let sol = solve_lp(&cc.problem).unwrap();
        let reference = solve_lp(&scenario_expansion(&p, &s).unwrap()).unwrap();
        assert!((sol.value - reference.value).abs() < 1e-9);
        // rows (5,3,3), (5,6,2), (7,3,2) <= 8: optimum at x2 = 1, x3 = 5/3 - ...
        assert!((sol.value - 8.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn certain_problem_keeps_nominal_optimum() {
        let p = NominalProblem::maximize(
            vec![3.0, 2.0],
            vec![vec![2.0, 2.0], vec![1.0, 0.0]],
            vec![3.0, 1.0],
        )
        .unwrap()
        .with_int_vars([0, 1])
        .unwrap();
        let cc = build_compact(&p, &BandScheme::certain(2, 2)).unwrap();
        assert_eq!(cc.problem.m(), 2);
        assert_eq!(
            solve_milp(&cc.problem).unwrap().value,
            solve_milp(&p).unwrap().value
        );
    }

    #[test]
    fn bertsimas_sim_counterpart() {
        let d = [3.0, 5.0, 2.0, 7.0];
        let mut bld = BandScheme::builder(4, 5, BandBounds::bertsimas_sim(4, 2));
        for (j, &dj) in d.iter().enumerate() {
            bld = bld.thresholds(0, j, vec![0.0, dj]);
        }
        let s = bld.build().unwrap();
        let mut a = vec![vec![1.0; 4]];
        for j in 0..4 {
            let mut r = vec![0.0; 4];
            r[j] = 1.0;
            a.push(r);
        }
        let p =
            NominalProblem::maximize(vec![1.0, 2.0, 1.0, 3.0], a, vec![10.0, 2.0, 2.0, 2.0, 2.0])
                .unwrap();
        let ours = solve_lp(&build_compact(&p, &s).unwrap().problem)
            .unwrap()
            .value;

        // classical form: x, p, q_j; sum x + 2p + sum q <= 10, p + q_j >= d_j x_j, x <= 2
        let mut lp = LinearProgram::maximize(vec![1.0, 2.0, 1.0, 3.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        lp.add_row(
            vec![1.0, 1.0, 1.0, 1.0, 2.0, 1.0, 1.0, 1.0, 1.0],
            Relation::Le,
            10.0,
        );
        for j in 0..4 {
            let mut r = vec![0.0; 9];
            r[j] = d[j];
            r[4] = -1.0;
            r[5 + j] = -1.0;
            lp.add_row(r, Relation::Le, 0.0);
            let mut r = vec![0.0; 9];
            r[j] = 1.0;
            lp.add_row(r, Relation::Le, 2.0);
        }
        let theirs = lp.solve_relaxation().unwrap().value;
        assert!((ours - theirs).abs() < 1e-9, "{ours} vs {theirs}");
    }

    #[test]
    fn dev01_relaxation_is_integral() {
        let (_, s) = fixture(8.0);
        for x in [[1.0, 1.0, 1.0], [0.5, 2.0, 3.0], [0.0, 0.0, 0.0]] {
            let sol = dev01_relaxation(&s, 0, &x)
                .unwrap()
                .solve_relaxation()
                .unwrap();
            assert!(sol
                .x
                .iter()
                .all(|&y| y.abs() < 1e-7 || (y - 1.0).abs() < 1e-7));
            let brute = dev_bruteforce(&s, 0, &x, EnumerationMode::Profile).unwrap();
            assert!((sol.value - brute).abs() < 1e-9);
        }
        let sol = dev01_relaxation(&s, 0, &[1.0; 3])
            .unwrap()
            .solve_relaxation()
            .unwrap();
        assert_eq!(sol.value, 10.0);
    }

    #[test]
    fn rhs_lifting() {
        let p = NominalProblem::maximize(vec![1.0], vec![vec![1.0]], vec![5.0]).unwrap();
        let s = BandScheme::builder(1, 1, BandBounds::new(0, 1, vec![0, 0], vec![1, 1]).unwrap())
            .build()
            .unwrap();
        let rhs = BTreeMap::from([(0, vec![0.0, 1.0])]);
        let (lp, ls) = lift_rhs_uncertainty(&p, &s, &rhs).unwrap();
        assert_eq!((lp.n(), lp.m()), (2, 3));
        assert_eq!(lp.a()[0], vec![1.0, -5.0]);
        let v = solve_lp(&build_compact(&lp, &ls).unwrap().problem)
            .unwrap()
            .value;
        assert!((v - 4.0).abs() < 1e-9);

        let (lp, ls) = lift_rhs_uncertainty(&p, &s, &BTreeMap::new()).unwrap();
        let v = solve_lp(&build_compact(&lp, &ls).unwrap().problem)
            .unwrap()
            .value;
        assert!((v - 5.0).abs() < 1e-9);
    }

    #[test]
    fn cost_lifting() {
        let p = NominalProblem::new(
            Sense::Min,
            vec![1.0, 2.0],
            vec![vec![-1.0, -1.0]],
            vec![-1.0],
        )
        .unwrap()
        .with_int_vars([0, 1])
        .unwrap();
        let s = BandScheme::certain(2, 1);
        let (lp, ls) = lift_cost_uncertainty(&p, &s, &BTreeMap::new(), None).unwrap();
        assert_eq!((lp.n(), lp.m()), (3, 2));
        assert_eq!(lp.free_vars(), &[2]);
        let v = solve_milp(&build_compact(&lp, &ls).unwrap().problem)
            .unwrap()
            .value;
        assert!((lp.reported(v) - 1.0).abs() < 1e-9);

        let cost = BTreeMap::from([(0, vec![0.0, 5.0]), (1, vec![0.0, 0.5])]);
        let bounds = BandBounds::new(0, 1, vec![0, 0], vec![2, 1]).unwrap();
        let (lp, ls) = lift_cost_uncertainty(&p, &s, &cost, Some(bounds)).unwrap();
        assert_eq!(ls.uncertain_columns(1), vec![0, 1]);
        let v = solve_milp(&build_compact(&lp, &ls).unwrap().problem)
            .unwrap()
            .value;
        assert!((lp.reported(v) - 2.5).abs() < 1e-9);
    }
}
