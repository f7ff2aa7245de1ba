//! Exact minimum-cost assignment over square cost matrices.
//!
//! This is the cubic-time Hungarian algorithm with row/column potentials.
//! Infinite cells are admitted: internally they become a big-M value larger
//! than any feasible total, so the solver first minimizes the number of
//! infeasible pairings and only then the finite cost. Callers receive
//! [`Cost::Infinite`] as the total whenever no fully-feasible assignment
//! exists.

use crate::cost::Cost;

/// A dense square matrix of assignment costs.
#[derive(Debug, Clone)]
pub struct CostMatrix {
    n: usize,
    cells: Vec<Cost>,
}

impl CostMatrix {
    pub fn new(n: usize) -> CostMatrix {
        CostMatrix {
            n,
            cells: vec![Cost::ZERO; n * n],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Cost) -> CostMatrix {
        let mut m = CostMatrix::new(n);
        for i in 0..n {
            for j in 0..n {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn set(&mut self, row: usize, col: usize, cost: Cost) {
        self.cells[row * self.n + col] = cost;
    }

    pub fn get(&self, row: usize, col: usize) -> Cost {
        self.cells[row * self.n + col]
    }
}

/// A full row-to-column matching and its total cost under the original
/// matrix (infinite when the optimum is forced through an infeasible cell).
#[derive(Debug, Clone)]
pub struct Assignment {
    pub row_to_col: Vec<usize>,
    pub total: Cost,
}

impl Assignment {
    /// True when every selected cell was finite.
    pub fn is_feasible(&self) -> bool {
        self.total.is_finite()
    }
}

/// Solve the assignment problem exactly in O(n^3).
pub fn solve(matrix: &CostMatrix) -> Assignment {
    let n = matrix.n;
    if n == 0 {
        return Assignment {
            row_to_col: Vec::new(),
            total: Cost::ZERO,
        };
    }

    // Big-M substitution for infinite cells: any total using one exceeds
    // every fully-finite total, so feasibility is decided after the solve.
    let finite_sum: f64 = matrix.cells.iter().filter_map(|c| c.value()).sum();
    let big_m = finite_sum + 1.0;
    let cell = |i: usize, j: usize| -> f64 {
        match matrix.get(i, j) {
            Cost::Finite(v) => v,
            Cost::Infinite => big_m,
        }
    };

    // Potentials over rows (u) and columns (v); p[j] = row matched to
    // column j, with index 0 as the virtual unmatched marker.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cell(i0 - 1, j - 1) - u[i0] - v[j];
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

    let mut row_to_col = vec![0usize; n];
    for j in 1..=n {
        row_to_col[p[j] - 1] = j - 1;
    }
    let total: Cost = (0..n).map(|i| matrix.get(i, row_to_col[i])).sum();
    Assignment { row_to_col, total }
}
