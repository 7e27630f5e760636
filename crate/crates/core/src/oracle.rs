//! Exhaustive reference oracles for small instances.
//!
//! These enumerate band assignments directly and are only meant to certify
//! the fast paths (flow separation, compact counterpart, cutting planes).

use crate::error::{Error, Result};
use crate::model::{compute_profile, BandBounds, BandScheme, NominalProblem};

pub const MAX_ENUM_COLUMNS: usize = 10;
pub const MAX_ENUM_BANDS: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnumerationMode {
    /// Band counts within `[l_k, u_k]`.
    Bounds,
    /// Band counts exactly `theta_k`.
    Profile,
}

fn guard(n: usize, bands: usize) -> Result<()> {
    if n > MAX_ENUM_COLUMNS || bands > MAX_ENUM_BANDS {
        return Err(Error::GuardExceeded(format!(
            "{n} columns and {bands} bands (limits {MAX_ENUM_COLUMNS} and {MAX_ENUM_BANDS})"
        )));
    }
    Ok(())
}

/// Calls `visit` with every admissible map column -> band position, in
/// lexicographic order over columns then bands.
pub fn for_each_assignment(
    bounds: &BandBounds,
    n: usize,
    mode: EnumerationMode,
    mut visit: impl FnMut(&[usize]),
) -> Result<()> {
    guard(n, bounds.len())?;
    let (lower, upper): (Vec<usize>, Vec<usize>) = match mode {
        EnumerationMode::Bounds => (
            bounds.lower().iter().map(|&v| v as usize).collect(),
            bounds.upper().iter().map(|&v| v as usize).collect(),
        ),
        EnumerationMode::Profile => {
            let theta: Vec<usize> = compute_profile(bounds, n)?
                .theta
                .iter()
                .map(|&v| v as usize)
                .collect();
            (theta.clone(), theta)
        }
    };
    let mut counts = vec![0usize; bounds.len()];
    let mut assign = vec![0usize; n];
    descend(0, &lower, &upper, &mut counts, &mut assign, &mut visit);
    Ok(())
}

fn descend(
    j: usize,
    lower: &[usize],
    upper: &[usize],
    counts: &mut [usize],
    assign: &mut [usize],
    visit: &mut impl FnMut(&[usize]),
) {
    let n = assign.len();
    let deficit: usize = lower
        .iter()
        .zip(counts.iter())
        .map(|(l, c)| l.saturating_sub(*c))
        .sum();
    if deficit > n - j {
        return;
    }
    if j == n {
        visit(assign);
        return;
    }
    for pos in 0..counts.len() {
        if counts[pos] < upper[pos] {
            counts[pos] += 1;
            assign[j] = pos;
            descend(j + 1, lower, upper, counts, assign, visit);
            counts[pos] -= 1;
        }
    }
}

/// All admissible assignments as band indices.
pub fn enumerate_assignments(
    bounds: &BandBounds,
    n: usize,
    mode: EnumerationMode,
) -> Result<Vec<Vec<i32>>> {
    let mut out = Vec::new();
    for_each_assignment(bounds, n, mode, |a| {
        out.push(a.iter().map(|&p| bounds.band(p)).collect());
    })?;
    Ok(out)
}

/// `max sum_j d_j^{k(j)} w_j` over admissible assignments, where
/// `thresholds[j]` is indexed by band position.
pub fn max_deviation(
    thresholds: &[&[f64]],
    weights: &[f64],
    bounds: &BandBounds,
    mode: EnumerationMode,
) -> Result<f64> {
    if thresholds.len() != weights.len() {
        return Err(Error::Dimension("one weight per column required".into()));
    }
    let mut best = f64::NEG_INFINITY;
    for_each_assignment(bounds, thresholds.len(), mode, |a| {
        let v: f64 = a
            .iter()
            .enumerate()
            .map(|(j, &pos)| thresholds[j][pos] * weights[j])
            .sum();
        if v > best {
            best = v;
        }
    })?;
    if best == f64::NEG_INFINITY {
        return Err(Error::Infeasible("no admissible band assignment".into()));
    }
    Ok(best)
}

/// Maximum deviation `DEV_i(x)` of row `i` by enumeration.
pub fn dev_bruteforce(
    scheme: &BandScheme,
    i: usize,
    x: &[f64],
    mode: EnumerationMode,
) -> Result<f64> {
    if i >= scheme.m() || x.len() != scheme.n() {
        return Err(Error::Dimension(format!(
            "row {i} / point of length {}",
            x.len()
        )));
    }
    let cols = scheme.uncertain_columns(i);
    let d: Vec<&[f64]> = cols
        .iter()
        .map(|&j| scheme.thresholds(i, j).unwrap())
        .collect();
    let w: Vec<f64> = cols.iter().map(|&j| x[j]).collect();
    max_deviation(&d, &w, scheme.row_bounds(i), mode)
}

/// `a_i'x + DEV_i(x) <= b_i + 1e-9` for every row, by enumeration.
pub fn robust_feasible_enum(prob: &NominalProblem, scheme: &BandScheme, x: &[f64]) -> Result<bool> {
    scheme.check_dims(prob)?;
    prob.check_point(x)?;
    for i in 0..prob.m() {
        let dev = dev_bruteforce(scheme, i, x, EnumerationMode::Profile)?;
        if prob.row_activity(i, x) + dev > prob.b()[i] + 1e-9 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Rows of the explicit robust program beyond which [`scenario_expansion`] refuses.
pub const MAX_EXPANDED_ROWS: usize = 20_000;

/// The robust program written out scenario by scenario: every uncertain row
/// is replaced by one copy per profile-valid band assignment, with each
/// coefficient raised to its band threshold. Certain rows are kept as they are.
pub fn scenario_expansion(prob: &NominalProblem, scheme: &BandScheme) -> Result<NominalProblem> {
    scheme.check_dims(prob)?;
    let mut a = Vec::new();
    let mut b = Vec::new();
    for i in 0..prob.m() {
        let cols = scheme.uncertain_columns(i);
        if cols.is_empty() {
            a.push(prob.a()[i].clone());
            b.push(prob.b()[i]);
            continue;
        }
        let mut err = None;
        for_each_assignment(
            scheme.row_bounds(i),
            cols.len(),
            EnumerationMode::Profile,
            |asg| {
                if a.len() >= MAX_EXPANDED_ROWS {
                    err.get_or_insert(());
                    return;
                }
                let mut row = prob.a()[i].clone();
                for (&j, &pos) in cols.iter().zip(asg) {
                    row[j] += scheme.thresholds(i, j).unwrap()[pos];
                }
                a.push(row);
                b.push(prob.b()[i]);
            },
        )?;
        if err.is_some() {
            return Err(Error::GuardExceeded(format!(
                "more than {MAX_EXPANDED_ROWS} scenario rows"
            )));
        }
    }
    NominalProblem::new(prob.sense(), prob.original_costs(), a, b)?
        .with_int_vars(prob.int_vars().iter().copied())?
        .with_free_vars(prob.free_vars().iter().copied())
}

/// Best robust 0-1 point by enumerating `{0,1}^n`, or `None` when no point
/// is robust feasible. Returns the point and its max-form objective.
pub fn robust_binary_enum(
    prob: &NominalProblem,
    scheme: &BandScheme,
) -> Result<Option<(Vec<f64>, f64)>> {
    if prob.n() > MAX_ENUM_COLUMNS {
        return Err(Error::GuardExceeded(format!(
            "{} binary variables (limit {MAX_ENUM_COLUMNS})",
            prob.n()
        )));
    }
    let mut best: Option<(Vec<f64>, f64)> = None;
    for mask in 0u32..1 << prob.n() {
        let x: Vec<f64> = (0..prob.n()).map(|j| (mask >> j & 1) as f64).collect();
        if !robust_feasible_enum(prob, scheme, &x)? {
            continue;
        }
        let v = prob.objective(&x);
        if best.as_ref().is_none_or(|b| v > b.1) {
            best = Some((x, v));
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture() -> BandScheme {
        BandScheme::builder(
            3,
            1,
            BandBounds::new(0, 2, vec![0, 0, 0], vec![3, 2, 1]).unwrap(),
        )
        .thresholds(0, 0, vec![0.0, 4.0, 6.0])
        .thresholds(0, 1, vec![0.0, 2.0, 5.0])
        .thresholds(0, 2, vec![0.0, 1.0, 2.0])
        .build()
        .unwrap()
    }

    #[test]
    fn assignment_counts() {
        let b = BandBounds::new(0, 1, vec![0, 0], vec![2, 1]).unwrap();
        let prof = BandBounds::new(0, 1, vec![0, 0], vec![2, 1]).unwrap();
        // n=2, theta=(1,1)
        let a = enumerate_assignments(&prof, 2, EnumerationMode::Profile).unwrap();
        assert_eq!(a, vec![vec![0, 1], vec![1, 0]]);
        let a = enumerate_assignments(&b, 2, EnumerationMode::Bounds).unwrap();
        assert_eq!(a, vec![vec![0, 0], vec![0, 1], vec![1, 0]]);

        let b = BandBounds::new(0, 2, vec![0, 0, 0], vec![3, 2, 1]).unwrap();
        assert_eq!(
            enumerate_assignments(&b, 3, EnumerationMode::Profile)
                .unwrap()
                .len(),
            3
        );
    }

    #[test]
    fn guard_is_a_hard_error() {
        let b = BandBounds::nominal(11);
        assert!(matches!(
            enumerate_assignments(&b, 11, EnumerationMode::Bounds),
            Err(Error::GuardExceeded(_))
        ));
        let b = BandBounds::new(-3, 2, vec![0; 6], vec![2; 6]).unwrap();
        assert!(enumerate_assignments(&b, 2, EnumerationMode::Bounds).is_err());
    }

    #[test]
    fn dev_examples() {
        let s = fixture();
        let v = dev_bruteforce(&s, 0, &[1.0, 1.0, 1.0], EnumerationMode::Profile).unwrap();
        assert_eq!(v, 10.0);
        assert_eq!(
            dev_bruteforce(&s, 0, &[0.0; 3], EnumerationMode::Profile).unwrap(),
            0.0
        );

        let mut bs = BandScheme::builder(4, 1, BandBounds::bertsimas_sim(4, 2));
        for (j, d) in [3.0, 5.0, 2.0, 7.0].into_iter().enumerate() {
            bs = bs.thresholds(0, j, vec![0.0, d]);
        }
        let bs = bs.build().unwrap();
        assert_eq!(
            dev_bruteforce(&bs, 0, &[1.0; 4], EnumerationMode::Profile).unwrap(),
            12.0
        );
        assert_eq!(
            dev_bruteforce(&bs, 0, &[1.0; 4], EnumerationMode::Bounds).unwrap(),
            12.0
        );
    }

    #[test]
    fn robust_feasibility_examples() {
        let s = fixture();
        let p = NominalProblem::maximize(vec![1.0; 3], vec![vec![1.0; 3]], vec![8.0]).unwrap();
        assert!(robust_feasible_enum(&p, &s, &[0.0; 3]).unwrap());
        assert!(!robust_feasible_enum(&p, &s, &[1.0; 3]).unwrap());
        let p = NominalProblem::maximize(vec![1.0; 3], vec![vec![1.0; 3]], vec![13.0]).unwrap();
        assert!(robust_feasible_enum(&p, &s, &[1.0; 3]).unwrap());
    }

    #[test]
    fn expansion_lists_profile_scenarios() {
        let s = fixture();
        let p = NominalProblem::maximize(vec![1.0; 3], vec![vec![1.0; 3]], vec![8.0]).unwrap();
        let e = scenario_expansion(&p, &s).unwrap();
        assert_eq!(
            e.a(),
            &[
                vec![5.0, 3.0, 3.0],
                vec![5.0, 6.0, 2.0],
                vec![7.0, 3.0, 2.0]
            ]
        );
        assert_eq!(e.b(), &[8.0; 3]);
    }

    #[test]
    fn binary_enumeration() {
        let p =
            NominalProblem::maximize(vec![1.0, 2.0, 1.0], vec![vec![1.0; 3]], vec![8.0]).unwrap();
        let (x, v) = robust_binary_enum(&p, &fixture()).unwrap().unwrap();
        assert_eq!((x, v), (vec![0.0, 1.0, 1.0], 3.0));
        let p = NominalProblem::maximize(vec![1.0], vec![vec![-1.0]], vec![-2.0]).unwrap();
        assert!(robust_binary_enum(&p, &BandScheme::certain(1, 1))
            .unwrap()
            .is_none());
    }
}
