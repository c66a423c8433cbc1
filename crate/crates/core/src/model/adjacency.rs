//! Symmetrically normalized user-item adjacency in CSR form.
//!
//! Nodes are ordered users first, then items. The entry for an edge (u, i)
//! is 1/sqrt(deg(u) * deg(i)); there are no self-loops, so the matrix is
//! exactly the off-diagonal bipartite block structure.

use ndarray::Array2;

use crate::dataset::InteractionDataset;
use crate::error::{CoreError, Result};

#[derive(Debug, Clone)]
pub struct NormalizedAdjacency {
    num_users: usize,
    num_items: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl NormalizedAdjacency {
    pub fn num_users(&self) -> usize {
        self.num_users
    }

    pub fn num_items(&self) -> usize {
        self.num_items
    }

    pub fn num_nodes(&self) -> usize {
        self.num_users + self.num_items
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Entry at (row, col) in node space, or 0 if absent.
    pub fn entry(&self, row: usize, col: usize) -> f64 {
        let lo = self.row_ptr[row];
        let hi = self.row_ptr[row + 1];
        match self.cols[lo..hi].binary_search(&col) {
            Ok(k) => self.vals[lo + k],
            Err(_) => 0.0,
        }
    }

    /// One application of the normalized adjacency: out = A_hat * m.
    pub fn apply(&self, m: &Array2<f64>) -> Array2<f64> {
        let d = m.ncols();
        let mut out = Array2::zeros((self.num_nodes(), d));
        for row in 0..self.num_nodes() {
            let mut acc = out.row_mut(row);
            for k in self.row_ptr[row]..self.row_ptr[row + 1] {
                let col = self.cols[k];
                let v = self.vals[k];
                acc.scaled_add(v, &m.row(col));
            }
        }
        out
    }

    /// Weighted layer combination: sum_k weights[k] * A_hat^k * m0.
    ///
    /// The operator is symmetric, hence self-adjoint: applying it to a
    /// gradient with respect to the output yields the gradient with respect
    /// to the input.
    pub fn propagate_matrix(&self, m0: &Array2<f64>, weights: &[f64]) -> Array2<f64> {
        let mut combined = weights[0] * m0;
        let mut layer = m0.clone();
        for &w in &weights[1..] {
            layer = self.apply(&layer);
            combined.scaled_add(w, &layer);
        }
        combined
    }
}

/// Build the normalized adjacency from the train split.
///
/// Every node must have degree >= 1 (guaranteed after splitting, since users
/// and items absent from train are dropped).
pub fn build_normalized_adjacency(ds: &InteractionDataset) -> Result<NormalizedAdjacency> {
    let nu = ds.num_users();
    let ni = ds.num_items();
    if ds.train().is_empty() {
        return Err(CoreError::EmptyDataset);
    }
    for u in 0..nu {
        if ds.user_hist(u).is_empty() {
            return Err(CoreError::IsolatedNode(format!("user {u}")));
        }
    }
    for i in 0..ni {
        if ds.item_users(i).is_empty() {
            return Err(CoreError::IsolatedNode(format!("item {i}")));
        }
    }

    let n = nu + ni;
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut cols = Vec::with_capacity(2 * ds.train().len());
    let mut vals = Vec::with_capacity(2 * ds.train().len());
    row_ptr.push(0);
    for u in 0..nu {
        let du = ds.user_hist(u).len() as f64;
        for &i in ds.user_hist(u) {
            let di = ds.item_users(i).len() as f64;
            cols.push(nu + i);
            vals.push(1.0 / (du * di).sqrt());
        }
        row_ptr.push(cols.len());
    }
    for i in 0..ni {
        let di = ds.item_users(i).len() as f64;
        for &u in ds.item_users(i) {
            let du = ds.user_hist(u).len() as f64;
            cols.push(u);
            vals.push(1.0 / (du * di).sqrt());
        }
        row_ptr.push(cols.len());
    }

    Ok(NormalizedAdjacency {
        num_users: nu,
        num_items: ni,
        row_ptr,
        cols,
        vals,
    })
}
