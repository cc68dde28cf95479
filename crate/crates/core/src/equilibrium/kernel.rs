//! Logarithmic potential `U[rho](x) = ∫ log|x - y| rho(y) dy` of a
//! piecewise-linear density.
//!
//! Each grid cell is integrated exactly against the linear interpolant using
//! the antiderivatives
//!
//! ```text
//! ∫ log|t| dt   = t log|t| - t
//! ∫ t log|t| dt = t²/2 log|t| - t²/4
//! ```
//!
//! with `0 log 0 = 0`, so the cell holding the singularity needs no special
//! treatment. On a uniform grid the weight of node `j` seen from node `i`
//! depends only on `j - i`, which makes the operator a Toeplitz matrix built
//! once per grid.

use rayon::prelude::*;

use crate::potential::{DensityOnGrid, Grid};

fn xlogx(t: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        t * t.abs().ln()
    }
}

fn log_antiderivative(t: f64) -> f64 {
    xlogx(t) - t
}

fn xlog_antiderivative(t: f64) -> f64 {
    0.5 * t * xlogx(t) - 0.25 * t * t
}

/// Weights `(left, right)` such that
/// `∫_{x+t0}^{x+t1} log|x - y| rho(y) dy = left * rho(x+t0) + right * rho(x+t1)`
/// for `rho` linear on the cell.
pub(crate) fn cell_weights(t0: f64, t1: f64) -> (f64, f64) {
    let h = t1 - t0;
    let i0 = log_antiderivative(t1) - log_antiderivative(t0);
    let i1 = xlog_antiderivative(t1) - xlog_antiderivative(t0);
    ((t1 * i0 - i1) / h, (i1 - t0 * i0) / h)
}

/// Precomputed log-kernel operator for one grid.
#[derive(Debug, Clone)]
pub struct LogKernel {
    grid: Grid,
    /// Weight of cell offset `d = k - i` on its left node, index `d + n - 1`.
    left: Vec<f64>,
    /// Weight of cell offset `d` on its right node.
    right: Vec<f64>,
    /// Combined interior node weights for node offset `m = j - i`.
    node: Vec<f64>,
}

impl LogKernel {
    pub fn new(grid: &Grid) -> Self {
        let n = grid.len() as i64;
        let h = grid.spacing();
        let offsets = -(n - 1)..=(n - 1);
        let (left, right): (Vec<f64>, Vec<f64>) = offsets
            .clone()
            .map(|d| cell_weights(d as f64 * h, (d + 1) as f64 * h))
            .unzip();
        let node = offsets
            .map(|m| {
                let idx = (m + n - 1) as usize;
                let from_left_cell = if idx > 0 { right[idx - 1] } else { 0.0 };
                left[idx] + from_left_cell
            })
            .collect();
        Self {
            grid: *grid,
            left,
            right,
            node,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn offset(&self, m: i64) -> usize {
        (m + self.grid.len() as i64 - 1) as usize
    }

    /// `U_i = ∫ log|x_i - y| rho(y) dy` for every node. The summation order per
    /// node is fixed, so results do not depend on the thread count.
    pub fn apply(&self, rho: &[f64]) -> Vec<f64> {
        let n = self.grid.len();
        assert_eq!(rho.len(), n, "density length does not match kernel grid");
        (0..n)
            .into_par_iter()
            .map(|i| {
                let base = n - 1 - i;
                let interior: f64 = self.node[base..base + n]
                    .iter()
                    .zip(rho)
                    .map(|(w, r)| w * r)
                    .sum();
                // Node 0 has no cell on its left and node n-1 none on its right.
                let first = self.offset(-(i as i64) - 1);
                let last = self.offset(n as i64 - 1 - i as i64);
                let left_edge = if first < self.right.len() { self.right[first] } else { 0.0 };
                let right_edge = if last < self.left.len() { self.left[last] } else { 0.0 };
                interior - left_edge * rho[0] - right_edge * rho[n - 1]
            })
            .collect()
    }
}

/// `U[rho]` at every node of `rho`'s grid.
pub fn log_kernel_apply(rho: &DensityOnGrid) -> Vec<f64> {
    LogKernel::new(rho.grid()).apply(rho.values())
}

/// `U[rho](x)` at an arbitrary point, summing the exact cell integrals.
pub fn log_potential_at(rho: &DensityOnGrid, x: f64) -> f64 {
    let grid = rho.grid();
    let values = rho.values();
    (0..grid.len() - 1)
        .map(|k| {
            let (w0, w1) = cell_weights(grid.node(k) - x, grid.node(k + 1) - x);
            w0 * values[k] + w1 * values[k + 1]
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(n: usize) -> DensityOnGrid {
        let grid = Grid::new(-1.0, 1.0, n).unwrap();
        DensityOnGrid::new(grid, vec![0.5; n]).unwrap()
    }

    #[test]
    fn uniform_density_potentials() {
        let rho = uniform(201);
        let u = log_kernel_apply(&rho);
        assert!((u[100] + 1.0).abs() < 1e-12, "U(0) = {}", u[100]);
        let expected = (3.0 * 3f64.ln() - 2.0) / 2.0;
        assert!((log_potential_at(&rho, 2.0) - expected).abs() < 1e-12);
        assert!((log_potential_at(&rho, -2.0) - expected).abs() < 1e-12);
        // U(±1) = log 2 - 1
        assert!((u[0] - (2f64.ln() - 1.0)).abs() < 1e-12);
        assert!((u[200] - (2f64.ln() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn toeplitz_matches_direct_sum() {
        let grid = Grid::new(-3.0, 2.0, 57).unwrap();
        let rho = DensityOnGrid::from_fn(grid, |x| (-(x - 0.3) * (x - 0.3)).exp() + 0.1).unwrap();
        let fast = log_kernel_apply(&rho);
        for (i, u) in fast.iter().enumerate() {
            let direct = log_potential_at(&rho, grid.node(i));
            assert!((u - direct).abs() < 1e-13, "node {i}: {u} vs {direct}");
        }
    }

    #[test]
    fn cell_weights_integrate_constants() {
        // ∫_0^1 log t dt = -1, split as half-weights on a constant density.
        let (a, b) = cell_weights(0.0, 1.0);
        assert!((a + b + 1.0).abs() < 1e-15);
        // linear density y on [0,1]: ∫ y log y = -1/4
        assert!((b + 0.25).abs() < 1e-15);
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let grid = Grid::new(-5.0, 5.0, 301).unwrap();
        let rho = DensityOnGrid::from_fn(grid, |x| (-x * x).exp()).unwrap();
        let k = LogKernel::new(&grid);
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| k.apply(rho.values()));
        let many = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| k.apply(rho.values()));
        assert_eq!(one, many);
    }
}
