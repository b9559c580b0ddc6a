//! Iterative proportional fitting.
//!
//! Each sweep rescales the table once per axis, in declared axis order:
//! every slice along the axis is multiplied by `target / current_marginal`,
//! so after the step that axis's marginals match exactly and earlier axes
//! drift slightly. Sweeps repeat until the largest relative marginal gap
//! falls inside the tolerance or the iteration budget runs out. The
//! two-axis case is the classical alternating row/column scaling.
//!
//! Infeasible problems (an all-zero slice with a positive target) do not
//! error: the fitter runs its budget and reports `converged = false` with
//! the offending gap, because partial fits are still useful diagnostics.

use std::collections::BTreeMap;

use serde::Serialize;

use super::table::{ContingencyTable, MarginalTargets};
use crate::Result;

/// Stopping rule for [`ipf_fit`].
#[derive(Debug, Clone, Copy)]
pub struct IpfOptions {
    /// Convergence threshold on the max relative marginal gap.
    pub tolerance: f64,
    /// Sweep budget; one sweep rescales every axis once.
    pub max_iterations: usize,
}

impl Default for IpfOptions {
    fn default() -> Self {
        IpfOptions { tolerance: 1e-6, max_iterations: 1000 }
    }
}

/// Outcome of a fit. `fitted` is always populated, converged or not.
#[derive(Debug, Clone, Serialize)]
pub struct IpfResult {
    pub fitted: ContingencyTable,
    /// Sweeps actually performed (>= 1).
    pub iterations: usize,
    /// Whether the gap fell inside the tolerance within the budget.
    pub converged: bool,
    /// Largest relative marginal gap at the final sweep.
    pub max_relative_gap: f64,
    /// Per-attribute relative gaps at the final sweep, in axis category order.
    pub gaps: BTreeMap<String, Vec<f64>>,
    /// Max relative gap after each sweep (diagnostic trace).
    pub gap_history: Vec<f64>,
}

/// Relative gap of one marginal entry against its target.
///
/// Zero targets are satisfied only by zero mass; a positive target over an
/// all-zero slice can never be met, which surfaces as an infinite gap.
fn relative_gap(marginal: f64, target: f64) -> f64 {
    if target > 0.0 {
        (marginal - target).abs() / target
    } else if marginal == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Fit `seed` to `targets` by iterative proportional scaling.
///
/// Structural zeros in the seed are preserved exactly (scaling never revives
/// a zero cell), and total mass equals the targets' shared mass after every
/// sweep. Errors cover malformed input only — shape mismatches and
/// inconsistent target masses — never lack of convergence.
pub fn ipf_fit(
    seed: &ContingencyTable,
    targets: &MarginalTargets,
    options: IpfOptions,
) -> Result<IpfResult> {
    let aligned = targets.aligned_to(seed)?;
    let n_axes = seed.axes().len();

    // Precompute each cell's coordinate per axis once; the sweep loop then
    // touches cells linearly.
    let coords: Vec<Vec<usize>> = (0..seed.cells().len()).map(|i| seed.coords_of(i)).collect();

    let mut fitted = seed.clone();
    let mut gap_history = Vec::new();
    let mut iterations = 0;
    let mut converged = false;

    for _sweep in 0..options.max_iterations.max(1) {
        iterations += 1;
        for axis in 0..n_axes {
            let k = fitted.axes()[axis].len();
            let mut marginal = vec![0.0; k];
            for (i, &cell) in fitted.cells().iter().enumerate() {
                marginal[coords[i][axis]] += cell;
            }
            let factors: Vec<f64> = marginal
                .iter()
                .zip(&aligned[axis])
                .map(|(&m, &t)| if m > 0.0 { t / m } else { 1.0 })
                .collect();
            let cells = fitted.cells_mut();
            for (i, cell) in cells.iter_mut().enumerate() {
                *cell *= factors[coords[i][axis]];
            }
        }

        // Measure all marginals at the end of the sweep.
        let mut max_gap = 0f64;
        for axis in 0..n_axes {
            let marginal = fitted.marginal(axis);
            for (m, t) in marginal.iter().zip(&aligned[axis]) {
                max_gap = max_gap.max(relative_gap(*m, *t));
            }
        }
        gap_history.push(max_gap);
        if max_gap <= options.tolerance {
            converged = true;
            break;
        }
    }

    let mut gaps = BTreeMap::new();
    for (axis_idx, axis) in fitted.axes().iter().enumerate() {
        let marginal = fitted.marginal(axis_idx);
        let v: Vec<f64> = marginal
            .iter()
            .zip(&aligned[axis_idx])
            .map(|(&m, &t)| relative_gap(m, t))
            .collect();
        gaps.insert(axis.name.clone(), v);
    }
    let max_relative_gap = *gap_history.last().expect("at least one sweep runs");

    Ok(IpfResult { fitted, iterations, converged, max_relative_gap, gaps, gap_history })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthesis::table::Axis;
    use std::collections::BTreeMap;

    fn targets(pairs: &[(&str, &[(&str, f64)])]) -> MarginalTargets {
        let map = pairs
            .iter()
            .map(|(attr, cats)| {
                (
                    attr.to_string(),
                    cats.iter().map(|(c, m)| (c.to_string(), *m)).collect::<BTreeMap<_, _>>(),
                )
            })
            .collect();
        MarginalTargets::new(map)
    }

    #[test]
    fn one_sweep_settles_the_classic_two_by_two() {
        let seed = ContingencyTable::uniform_seed(vec![
            Axis::new("row", ["a", "b"].map(String::from)),
            Axis::new("col", ["x", "y"].map(String::from)),
        ])
        .unwrap();
        let t = targets(&[
            ("row", &[("a", 3.0), ("b", 1.0)]),
            ("col", &[("x", 2.0), ("y", 2.0)]),
        ]);
        let r = ipf_fit(&seed, &t, IpfOptions::default()).unwrap();
        assert!(r.converged);
        assert_eq!(r.iterations, 1);
        let want = [1.5, 1.5, 0.5, 0.5];
        for (g, w) in r.fitted.cells().iter().zip(want) {
            assert!((g - w).abs() < 1e-12);
        }
    }

    #[test]
    fn three_axis_fit_matches_all_marginals() {
        let seed = ContingencyTable::new(
            vec![
                Axis::new("a", ["0", "1"].map(String::from)),
                Axis::new("b", ["0", "1", "2"].map(String::from)),
                Axis::new("c", ["0", "1"].map(String::from)),
            ],
            (1..=12).map(|i| i as f64).collect(),
        )
        .unwrap();
        let t = targets(&[
            ("a", &[("0", 40.0), ("1", 60.0)]),
            ("b", &[("0", 20.0), ("1", 30.0), ("2", 50.0)]),
            ("c", &[("0", 45.0), ("1", 55.0)]),
        ]);
        let r = ipf_fit(&seed, &t, IpfOptions::default()).unwrap();
        assert!(r.converged);
        for (axis, want) in [(0, vec![40.0, 60.0]), (1, vec![20.0, 30.0, 50.0]), (2, vec![45.0, 55.0])] {
            for (m, w) in r.fitted.marginal(axis).iter().zip(want) {
                assert!((m - w).abs() < 1e-4 * w, "axis {axis}: {m} vs {w}");
            }
        }
        assert!((r.fitted.total() - 100.0).abs() < 1e-6 * 100.0);
    }

    #[test]
    fn gap_history_length_matches_iterations() {
        // Asymmetric seed so the fit is asymptotic rather than exact.
        let seed = ContingencyTable::new(
            vec![
                Axis::new("row", ["a", "b"].map(String::from)),
                Axis::new("col", ["x", "y"].map(String::from)),
            ],
            vec![1.0, 2.0, 3.0, 4.0],
        )
        .unwrap();
        let t = targets(&[
            ("row", &[("a", 3.0), ("b", 1.0)]),
            ("col", &[("x", 1.1), ("y", 2.9)]),
        ]);
        let r = ipf_fit(&seed, &t, IpfOptions { tolerance: 0.0, max_iterations: 7 }).unwrap();
        assert_eq!(r.iterations, 7);
        assert_eq!(r.gap_history.len(), 7);
        assert!(!r.converged);
    }
}
