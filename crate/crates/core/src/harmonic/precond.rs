//! Sparse Laplacian preconditioner on vertex classes.

use nalgebra::DMatrix;
use nalgebra_sparse::factorization::CscCholesky;
use nalgebra_sparse::{CooMatrix, CscMatrix};
use std::collections::VecDeque;

/// Reverse Cuthill–McKee ordering of a symmetric sparsity graph.
pub(crate) fn rcm(n: usize, adj: &[Vec<usize>]) -> Vec<usize> {
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    let deg = |v: usize| adj[v].len();
    let mut starts: Vec<usize> = (0..n).collect();
    starts.sort_by_key(|&v| deg(v));
    for s in starts {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut q = VecDeque::from([s]);
        while let Some(v) = q.pop_front() {
            order.push(v);
            let mut nb: Vec<usize> = adj[v].iter().copied().filter(|&u| !seen[u]).collect();
            nb.sort_by_key(|&u| deg(u));
            nb.dedup();
            for u in nb {
                if !seen[u] {
                    seen[u] = true;
                    q.push_back(u);
                }
            }
        }
    }
    order.reverse();
    order
}

/// Cholesky factor of a symmetric positive definite matrix given by triplets,
/// applied in a bandwidth-reducing ordering.
pub(crate) struct SparseSpd {
    perm: Vec<usize>,
    chol: CscCholesky<f64>,
}

impl SparseSpd {
    pub fn new(n: usize, triplets: &[(usize, usize, f64)]) -> Option<Self> {
        let mut adj = vec![Vec::new(); n];
        for &(i, j, _) in triplets {
            if i != j {
                adj[i].push(j);
            }
        }
        let perm = rcm(n, &adj);
        let mut inv = vec![0; n];
        for (k, &v) in perm.iter().enumerate() {
            inv[v] = k;
        }
        let mut coo = CooMatrix::new(n, n);
        for &(i, j, v) in triplets {
            coo.push(inv[i], inv[j], v);
        }
        let csc = CscMatrix::from(&coo);
        let chol = CscCholesky::factor(&csc).ok()?;
        Some(SparseSpd { perm, chol })
    }

    /// Solve for several right-hand sides stored as columns.
    pub fn solve(&self, rhs: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let n = self.perm.len();
        let mut b = DMatrix::zeros(n, rhs.len());
        for (c, col) in rhs.iter().enumerate() {
            for (k, &v) in self.perm.iter().enumerate() {
                b[(k, c)] = col[v];
            }
        }
        let x = self.chol.solve(&b);
        (0..rhs.len())
            .map(|c| {
                let mut out = vec![0.0; n];
                for (k, &v) in self.perm.iter().enumerate() {
                    out[v] = x[(k, c)];
                }
                out
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_path_laplacian() {
        let n = 50;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.1));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        let s = SparseSpd::new(n, &t).unwrap();
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let x = &s.solve(&[b.clone()])[0];
        for i in 0..n {
            let mut r = 2.1 * x[i];
            if i > 0 {
                r -= x[i - 1];
            }
            if i + 1 < n {
                r -= x[i + 1];
            }
            assert!((r - b[i]).abs() < 1e-10);
        }
    }
}
