//! Minimum-cost rectangular assignment (Hungarian method, O(n^3)).

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RectAssignment {
    /// `row_to_col[i]` is the column given to row `i`, if any.
    pub row_to_col: Vec<Option<usize>>,
    /// Summed cost of the assigned pairs.
    pub cost: f64,
}

impl RectAssignment {
    pub fn assigned(&self) -> usize {
        self.row_to_col.iter().flatten().count()
    }
}

/// Assigns rows to distinct columns. `None` marks a forbidden pair. The
/// number of assigned rows is maximized first, then the summed cost is
/// minimized. Costs must be finite and non-negative.
pub fn solve_rectangular(costs: &[Vec<Option<f64>>]) -> RectAssignment {
    let rows = costs.len();
    let cols = costs.iter().map(Vec::len).max().unwrap_or(0);
    let n = rows.max(cols);
    if n == 0 {
        return RectAssignment { row_to_col: Vec::new(), cost: 0.0 };
    }
    let finite_sum: f64 = costs.iter().flatten().flatten().sum();
    // any single forbidden pair outweighs every finite assignment
    let big = (finite_sum + 1.0) * 2.0;
    let at = |i: usize, j: usize| -> f64 {
        if i >= rows {
            0.0
        } else {
            costs[i].get(j).copied().flatten().unwrap_or(big)
        }
    };

    // potentials u (rows) and v (cols), 1-based with column 0 as the root
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = at(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut row_to_col = vec![None; rows];
    let mut cost = 0.0;
    for j in 1..=n {
        let i = p[j];
        if i == 0 || i > rows {
            continue;
        }
        if let Some(c) = costs[i - 1].get(j - 1).copied().flatten() {
            row_to_col[i - 1] = Some(j - 1);
            cost += c;
        }
    }
    RectAssignment { row_to_col, cost }
}

#[cfg(test)]
mod tests {
    use super::*;
    use itertools::Itertools;
    use proptest::prelude::*;

    fn full(m: &[&[f64]]) -> Vec<Vec<Option<f64>>> {
        m.iter().map(|r| r.iter().map(|c| Some(*c)).collect()).collect()
    }

    #[test]
    fn diagonal_example() {
        let a = solve_rectangular(&full(&[&[1.0, 10.0], &[10.0, 1.0]]));
        assert_eq!(a.row_to_col, vec![Some(0), Some(1)]);
        assert_eq!(a.cost, 2.0);
    }

    #[test]
    fn forbidden_pairs_and_cardinality() {
        // row 0 can only take column 0; taking it there beats a cheaper
        // assignment that leaves row 0 out
        let m = vec![vec![Some(100.0), None], vec![Some(1.0), Some(50.0)]];
        let a = solve_rectangular(&m);
        assert_eq!(a.row_to_col, vec![Some(0), Some(1)]);
        assert_eq!(a.cost, 150.0);

        let m = vec![vec![None, None], vec![Some(3.0), None]];
        let a = solve_rectangular(&m);
        assert_eq!(a.row_to_col, vec![None, Some(0)]);
        assert_eq!(a.assigned(), 1);
    }

    #[test]
    fn more_rows_than_columns() {
        let a = solve_rectangular(&full(&[&[5.0], &[2.0], &[9.0]]));
        assert_eq!(a.row_to_col, vec![None, Some(0), None]);
        assert_eq!(a.cost, 2.0);
        assert_eq!(solve_rectangular(&[]).cost, 0.0);
    }

    fn brute(m: &[Vec<f64>]) -> f64 {
        let cols = m[0].len();
        (0..cols)
            .permutations(m.len())
            .map(|perm| perm.iter().enumerate().map(|(i, j)| m[i][*j]).sum::<f64>())
            .fold(f64::INFINITY, f64::min)
    }

    proptest! {
        #[test]
        fn matches_enumeration(rows in 1usize..6, extra in 0usize..3, seed in prop::collection::vec(0.0f64..1000.0, 64)) {
            let cols = rows + extra;
            let m: Vec<Vec<f64>> = (0..rows).map(|i| (0..cols).map(|j| seed[(i * cols + j) % 64]).collect()).collect();
            let a = solve_rectangular(&m.iter().map(|r| r.iter().map(|c| Some(*c)).collect()).collect::<Vec<_>>());
            prop_assert_eq!(a.assigned(), rows);
            prop_assert!((a.cost - brute(&m)).abs() < 1e-9);
        }

        #[test]
        fn cost_invariant_under_row_order(m in prop::collection::vec(prop::collection::vec(0.0f64..100.0, 5), 4)) {
            let a = solve_rectangular(&m.iter().map(|r| r.iter().map(|c| Some(*c)).collect()).collect::<Vec<_>>());
            let rev: Vec<Vec<Option<f64>>> = m.iter().rev().map(|r| r.iter().map(|c| Some(*c)).collect()).collect();
            let b = solve_rectangular(&rev);
            prop_assert!((a.cost - b.cost).abs() < 1e-9);
        }
    }
}
