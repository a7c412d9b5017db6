//! Exact solver for the dense transportation problem.
//!
//! Classic transportation simplex: northwest-corner starting basis, duals
//! propagated over the basis tree, most-negative-reduced-cost pivoting with a
//! Bland-style fallback under degeneracy. Exact (no entropic regularization),
//! so oracle tests can compare objectives against brute-force vertex
//! enumeration.

use crate::scalar::Real;

/// A transportation plan between `supplies` and `demands`.
#[derive(Debug, Clone)]
pub struct TransportPlan<F> {
    pub n_rows: usize,
    pub n_cols: usize,
    /// Row-major flow matrix.
    pub flow: Vec<F>,
    pub objective: F,
}

impl<F: Real> TransportPlan<F> {
    pub fn flow_at(&self, i: usize, j: usize) -> F {
        self.flow[i * self.n_cols + j]
    }

    pub fn transposed(&self) -> TransportPlan<F> {
        let mut flow = vec![F::zero(); self.flow.len()];
        for i in 0..self.n_rows {
            for j in 0..self.n_cols {
                flow[j * self.n_rows + i] = self.flow_at(i, j);
            }
        }
        TransportPlan {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            flow,
            objective: self.objective,
        }
    }
}

/// Solve min sum(flow * cost) subject to row sums = supplies, column sums =
/// demands, flow >= 0. `cost` is row-major `supplies.len() x demands.len()`.
///
/// Supplies and demands must be nonnegative with (near-)equal totals; small
/// floating-point imbalance is absorbed by the final basic cell.
pub fn solve_transport_with_masses<F: Real>(
    cost: &[F],
    supplies: &[F],
    demands: &[F],
) -> TransportPlan<F> {
    let n = supplies.len();
    let m = demands.len();
    assert!(n > 0 && m > 0, "transport requires nonempty marginals");
    assert_eq!(cost.len(), n * m, "cost matrix shape mismatch");
    debug_assert!(cost.iter().all(|c| c.is_finite()));

    let mut simplex = Simplex::new(cost, supplies, demands);
    simplex.optimize();
    simplex.into_plan()
}

/// A basic cell of the simplex tableau.
#[derive(Debug, Clone, Copy)]
struct Basic<F> {
    row: usize,
    col: usize,
    flow: F,
}

struct Simplex<'a, F> {
    cost: &'a [F],
    n: usize,
    m: usize,
    basis: Vec<Basic<F>>,
    /// Row-major membership mask mirroring `basis`.
    in_basis: Vec<bool>,
}

impl<'a, F: Real> Simplex<'a, F> {
    fn new(cost: &'a [F], supplies: &[F], demands: &[F]) -> Self {
        let n = supplies.len();
        let m = demands.len();
        // Northwest-corner starting basis: exactly n + m - 1 cells forming a
        // spanning tree of the bipartite row/column graph.
        let mut a = supplies.to_vec();
        let mut b = demands.to_vec();
        let mut basis = Vec::with_capacity(n + m - 1);
        let mut in_basis = vec![false; n * m];
        let (mut i, mut j) = (0, 0);
        loop {
            let q = a[i].min(b[j]).max(F::zero());
            basis.push(Basic {
                row: i,
                col: j,
                flow: q,
            });
            in_basis[i * m + j] = true;
            a[i] = a[i] - q;
            b[j] = b[j] - q;
            if i == n - 1 && j == m - 1 {
                break;
            }
            if a[i] <= F::zero() && i < n - 1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        debug_assert_eq!(basis.len(), n + m - 1);
        Simplex {
            cost,
            n,
            m,
            basis,
            in_basis,
        }
    }

    fn cost_at(&self, i: usize, j: usize) -> F {
        self.cost[i * self.m + j]
    }

    /// Adjacency of the basis tree over nodes rows 0..n, cols n..n+m;
    /// entries are (neighbor node, basis index).
    fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); self.n + self.m];
        for (idx, cell) in self.basis.iter().enumerate() {
            adj[cell.row].push((self.n + cell.col, idx));
            adj[self.n + cell.col].push((cell.row, idx));
        }
        adj
    }

    /// Duals u (rows) and v (cols) with u[0] = 0, solved over the basis tree.
    fn duals(&self, adj: &[Vec<(usize, usize)>]) -> (Vec<F>, Vec<F>) {
        let mut u = vec![F::zero(); self.n];
        let mut v = vec![F::zero(); self.m];
        let mut seen = vec![false; self.n + self.m];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(node) = stack.pop() {
            for &(next, idx) in &adj[node] {
                if seen[next] {
                    continue;
                }
                seen[next] = true;
                let cell = &self.basis[idx];
                let c = self.cost_at(cell.row, cell.col);
                if next >= self.n {
                    v[next - self.n] = c - u[cell.row];
                } else {
                    u[next] = c - v[cell.col];
                }
                stack.push(next);
            }
        }
        debug_assert!(seen.iter().all(|&s| s), "basis tree spans all nodes");
        (u, v)
    }

    /// Entering cell under the given rule; None when optimal.
    fn entering(&self, u: &[F], v: &[F], bland: bool) -> Option<(usize, usize)> {
        let tol = -F::from_f64_c(1e-12);
        let mut best: Option<((usize, usize), F)> = None;
        for i in 0..self.n {
            for j in 0..self.m {
                if self.in_basis[i * self.m + j] {
                    continue;
                }
                let reduced = self.cost_at(i, j) - u[i] - v[j];
                if reduced < tol {
                    if bland {
                        return Some((i, j));
                    }
                    match best {
                        Some((_, r)) if reduced >= r => {}
                        _ => best = Some(((i, j), reduced)),
                    }
                }
            }
        }
        best.map(|(cell, _)| cell)
    }

    /// Basis cells on the tree path from the entering cell's row node to its
    /// column node. Position 0 shares the entering row, so flows along the
    /// path alternate lose, gain, lose, ... once the entering cell gains.
    fn cycle(&self, adj: &[Vec<(usize, usize)>], enter: (usize, usize)) -> Vec<usize> {
        let total = self.n + self.m;
        let start = enter.0;
        let goal = self.n + enter.1;
        let mut prev: Vec<Option<(usize, usize)>> = vec![None; total];
        let mut visited = vec![false; total];
        let mut stack = vec![start];
        visited[start] = true;
        while let Some(node) = stack.pop() {
            if node == goal {
                break;
            }
            for &(next, edge) in &adj[node] {
                if !visited[next] {
                    visited[next] = true;
                    prev[next] = Some((node, edge));
                    stack.push(next);
                }
            }
        }
        let mut path = Vec::new();
        let mut node = goal;
        while node != start {
            let (parent, edge) = prev[node].expect("basis tree is connected");
            path.push(edge);
            node = parent;
        }
        path.reverse();
        path
    }

    fn optimize(&mut self) {
        let max_iters = 200 * (self.n + self.m) * (self.n + self.m) + 1000;
        let mut stalls = 0usize;
        for _ in 0..max_iters {
            let adj = self.adjacency();
            let (u, v) = self.duals(&adj);
            let bland = stalls > self.n + self.m;
            let Some(enter) = self.entering(&u, &v, bland) else {
                return;
            };
            let cycle = self.cycle(&adj, enter);
            let mut theta: Option<(F, usize)> = None;
            for (pos, &edge) in cycle.iter().enumerate() {
                if pos % 2 == 0 {
                    let f = self.basis[edge].flow;
                    let better = match theta {
                        None => true,
                        Some((t, best_edge)) => {
                            f < t
                                || (f == t
                                    && (self.basis[edge].row, self.basis[edge].col)
                                        < (self.basis[best_edge].row, self.basis[best_edge].col))
                        }
                    };
                    if better {
                        theta = Some((f, edge));
                    }
                }
            }
            let (theta, leaving) = theta.expect("cycle has a leaving cell");
            if theta <= F::zero() {
                stalls += 1;
            } else {
                stalls = 0;
            }
            for (pos, &edge) in cycle.iter().enumerate() {
                if pos % 2 == 0 {
                    self.basis[edge].flow = (self.basis[edge].flow - theta).max(F::zero());
                } else {
                    self.basis[edge].flow = self.basis[edge].flow + theta;
                }
            }
            let out = self.basis[leaving];
            self.in_basis[out.row * self.m + out.col] = false;
            self.in_basis[enter.0 * self.m + enter.1] = true;
            self.basis[leaving] = Basic {
                row: enter.0,
                col: enter.1,
                flow: theta,
            };
        }
        debug_assert!(false, "transport simplex exceeded iteration budget");
    }

    fn into_plan(self) -> TransportPlan<F> {
        let mut flow = vec![F::zero(); self.n * self.m];
        for cell in &self.basis {
            flow[cell.row * self.m + cell.col] = flow[cell.row * self.m + cell.col] + cell.flow;
        }
        let objective = flow
            .iter()
            .zip(self.cost.iter())
            .map(|(&f, &c)| f * c)
            .sum();
        TransportPlan {
            n_rows: self.n,
            n_cols: self.m,
            flow,
            objective,
        }
    }
}
