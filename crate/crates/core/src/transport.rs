//! Exact transportation problem solver (primal simplex on the
//! transportation tableau, a.k.a. MODI).
//!
//! The basis is kept as a spanning tree over `m` supply and `k` demand
//! nodes with exactly `m + k - 1` basic cells, some of which may carry
//! zero flow. Entering cells are priced in row blocks; the cycle for a
//! pivot is the tree path between the entering cell's two endpoints.

use std::collections::VecDeque;

use crate::error::{Error, Result};

pub const MAX_CELLS: usize = 1_000_000;

const PRICE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct TransportSolution {
    pub cost: f64,
    /// Basic cells `(row, col, flow)`; flows may be zero.
    pub plan: Vec<(usize, usize, f64)>,
    /// Row and column potentials: `u_i + v_j = c_ij` on basic cells.
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

struct Tableau<'a> {
    m: usize,
    k: usize,
    cost: &'a [f64],
    /// Basic cells as `(row, col)` with their flows.
    cells: Vec<(usize, usize)>,
    flow: Vec<f64>,
    /// For every node, the indices of incident basic cells.
    adj: Vec<Vec<usize>>,
}

impl<'a> Tableau<'a> {
    fn c(&self, i: usize, j: usize) -> f64 {
        self.cost[i * self.k + j]
    }

    fn col_node(&self, j: usize) -> usize {
        self.m + j
    }

    fn add_cell(&mut self, i: usize, j: usize, x: f64) -> usize {
        let id = self.cells.len();
        self.cells.push((i, j));
        self.flow.push(x);
        self.adj[i].push(id);
        let cn = self.col_node(j);
        self.adj[cn].push(id);
        id
    }

    fn replace_cell(&mut self, id: usize, i: usize, j: usize, x: f64) {
        let (oi, oj) = self.cells[id];
        let ocn = self.col_node(oj);
        self.adj[oi].retain(|&c| c != id);
        self.adj[ocn].retain(|&c| c != id);
        self.cells[id] = (i, j);
        self.flow[id] = x;
        self.adj[i].push(id);
        let cn = self.col_node(j);
        self.adj[cn].push(id);
    }

    fn other_end(&self, id: usize, node: usize) -> usize {
        let (i, j) = self.cells[id];
        if node == i {
            self.col_node(j)
        } else {
            i
        }
    }

    fn potentials(&self, u: &mut [f64], v: &mut [f64]) {
        let total = self.m + self.k;
        let mut seen = vec![false; total];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        u[0] = 0.0;
        while let Some(node) = queue.pop_front() {
            for &id in &self.adj[node] {
                let next = self.other_end(id, node);
                if seen[next] {
                    continue;
                }
                seen[next] = true;
                let (i, j) = self.cells[id];
                if next >= self.m {
                    v[j] = self.c(i, j) - u[i];
                } else {
                    u[i] = self.c(i, j) - v[j];
                }
                queue.push_back(next);
            }
        }
    }

    /// Basic cells on the tree path from column node of `j` to row `i`,
    /// in order starting next to the column.
    fn path(&self, i: usize, j: usize) -> Vec<usize> {
        let total = self.m + self.k;
        let mut via = vec![usize::MAX; total];
        let mut seen = vec![false; total];
        let mut queue = VecDeque::from([i]);
        seen[i] = true;
        let target = self.col_node(j);
        while let Some(node) = queue.pop_front() {
            if node == target {
                break;
            }
            for &id in &self.adj[node] {
                let next = self.other_end(id, node);
                if !seen[next] {
                    seen[next] = true;
                    via[next] = id;
                    queue.push_back(next);
                }
            }
        }
        let mut out = Vec::new();
        let mut node = target;
        while node != i {
            let id = via[node];
            out.push(id);
            node = self.other_end(id, node);
        }
        out
    }
}

/// Minimizes `Σ c_ij x_ij` subject to row sums `supply` and column sums
/// `demand`. `cost` is row-major `m × k`. Totals must agree to `1e-9`;
/// the demand side is rescaled to match exactly.
pub fn solve(supply: &[f64], demand: &[f64], cost: &[f64]) -> Result<TransportSolution> {
    let m = supply.len();
    let k = demand.len();
    if m == 0 || k == 0 {
        return Err(Error::invalid("transport problem needs nonempty supply and demand"));
    }
    if m.saturating_mul(k) > MAX_CELLS {
        return Err(Error::ProblemTooLarge {
            cells: m.saturating_mul(k),
            limit: MAX_CELLS,
        });
    }
    if cost.len() != m * k {
        return Err(Error::DimensionMismatch {
            expected: m * k,
            found: cost.len(),
        });
    }
    if supply.iter().chain(demand).any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(Error::invalid("masses must be finite and nonnegative"));
    }
    let total_a: f64 = supply.iter().sum();
    let total_b: f64 = demand.iter().sum();
    if (total_a - total_b).abs() > 1e-9 * total_a.max(1.0) {
        return Err(Error::Solver(format!(
            "unbalanced problem: supply {} vs demand {}",
            total_a, total_b
        )));
    }

    let mut t = Tableau {
        m,
        k,
        cost,
        cells: Vec::with_capacity(m + k - 1),
        flow: Vec::with_capacity(m + k - 1),
        adj: vec![Vec::new(); m + k],
    };

    // Northwest corner start. When a row and a column run out together
    // the walk still advances along one side only, which leaves a
    // zero-flow basic cell and keeps the basis a spanning tree.
    let mut ra = supply.to_vec();
    let mut rb: Vec<f64> = demand.iter().map(|b| b * total_a / total_b).collect();
    let (mut i, mut j) = (0, 0);
    loop {
        let x = ra[i].min(rb[j]);
        t.add_cell(i, j, x);
        ra[i] -= x;
        rb[j] -= x;
        if i == m - 1 && j == k - 1 {
            break;
        }
        if (ra[i] <= rb[j] && i < m - 1) || j == k - 1 {
            i += 1;
        } else {
            j += 1;
        }
    }
    debug_assert_eq!(t.cells.len(), m + k - 1);

    let mut u = vec![0.0; m];
    let mut v = vec![0.0; k];
    let block = ((m as f64).sqrt().ceil() as usize).max(1);
    let mut start_row = 0usize;
    let max_pivots = 50 * (m + k) * (m + k) + 1000;
    for _ in 0..max_pivots {
        t.potentials(&mut u, &mut v);

        // Block pricing: scan `block` rows at a time, starting where the
        // previous search left off, and take the best cell of the first
        // block holding a negative reduced cost.
        let mut entering = None;
        let mut scanned = 0;
        let mut row = start_row;
        while scanned < m && entering.is_none() {
            let mut best = -PRICE_TOL;
            for _ in 0..block.min(m - scanned) {
                for col in 0..k {
                    let r = t.c(row, col) - u[row] - v[col];
                    if r < best {
                        best = r;
                        entering = Some((row, col));
                    }
                }
                row = (row + 1) % m;
                scanned += 1;
            }
        }
        start_row = row;
        let Some((ei, ej)) = entering else {
            let plan: Vec<(usize, usize, f64)> =
                t.cells.iter().zip(&t.flow).map(|(&(i, j), &x)| (i, j, x)).collect();
            let cost = plan.iter().map(|&(i, j, x)| x * t.c(i, j)).sum();
            return Ok(TransportSolution { cost, plan, u, v });
        };

        // Cycle: entering cell (+), then alternating − / + along the path.
        let path = t.path(ei, ej);
        let mut theta = f64::INFINITY;
        let mut leaving = usize::MAX;
        for (pos, &id) in path.iter().enumerate() {
            if pos % 2 == 0 && t.flow[id] < theta {
                theta = t.flow[id];
                leaving = id;
            }
        }
        for (pos, &id) in path.iter().enumerate() {
            if pos % 2 == 0 {
                t.flow[id] -= theta;
            } else {
                t.flow[id] += theta;
            }
        }
        t.flow[leaving] = 0.0;
        t.replace_cell(leaving, ei, ej, theta);
    }
    Err(Error::Solver(format!("no optimum after {} pivots", max_pivots)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_instance() {
        // Classic 3×4 example with optimum 743.
        let supply = [7.0, 9.0, 18.0];
        let demand = [5.0, 8.0, 7.0, 14.0];
        let cost = [19.0, 30.0, 50.0, 10.0, 70.0, 30.0, 40.0, 60.0, 40.0, 8.0, 70.0, 20.0];
        let s = solve(&supply, &demand, &cost).unwrap();
        assert!((s.cost - 743.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_start() {
        // Row and column totals coincide repeatedly.
        let supply = [1.0, 1.0, 1.0];
        let demand = [1.0, 1.0, 1.0];
        let cost = [3.0, 1.0, 2.0, 1.0, 3.0, 2.0, 2.0, 2.0, 0.0];
        let s = solve(&supply, &demand, &cost).unwrap();
        assert!((s.cost - 2.0).abs() < 1e-12);
        assert_eq!(s.plan.len(), 5);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(solve(&[1.0], &[2.0], &[0.0]).is_err());
        assert!(solve(&[1.0], &[1.0], &[0.0, 1.0]).is_err());
        assert!(matches!(
            solve(&vec![1.0; 1001], &vec![1.0; 1001], &[]),
            Err(Error::ProblemTooLarge { .. })
        ));
    }
}
