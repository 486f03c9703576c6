use nalgebra::DMatrix;

use super::gmm::{gmm_fit_with, GmmOptions};
use super::Clustering;
use crate::error::{Result, RlgError};
use crate::graph::Graph;
use crate::linalg::sym_eigen_desc;

/// Rows of `U |Λ|^{1/2}` for the `d` eigenvalues of `A(G)` largest in
/// magnitude.
pub fn adjacency_spectral_embedding(g: &Graph, d: usize) -> Result<DMatrix<f64>> {
    let n = g.n();
    if n == 0 {
        return Err(RlgError::InvalidParameter("empty graph".into()));
    }
    if d == 0 || d > n {
        return Err(RlgError::InvalidParameter(format!("embedding dimension {d} outside 1..={n}")));
    }
    let (values, vectors) = sym_eigen_desc(&g.adjacency());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[b].abs().total_cmp(&values[a].abs()));
    let mut out = DMatrix::zeros(n, d);
    for (c, &i) in order.iter().take(d).enumerate() {
        let mut col = vectors.column(i).into_owned();
        let (mut best, mut best_abs) = (0, 0.0);
        for (r, v) in col.iter().enumerate() {
            if v.abs() > best_abs + 1e-12 {
                best = r;
                best_abs = v.abs();
            }
        }
        if col[best] < 0.0 {
            col.neg_mut();
        }
        out.set_column(c, &(col * values[i].abs().sqrt()));
    }
    Ok(out)
}

/// Gaussian-mixture clustering of the adjacency spectral embedding. When
/// possible every cluster keeps at least two vertices so the estimate can
/// induce an edge partition.
pub fn ase_vertex_partition(g: &Graph, d: usize, k: usize, seed: u64) -> Result<Clustering> {
    let x = adjacency_spectral_embedding(g, d)?;
    let opts = GmmOptions {
        min_component_size: if g.n() >= 2 * k { 2 } else { 1 },
        ..GmmOptions::default()
    };
    Ok(gmm_fit_with(&x, k, seed, &opts)?.clustering)
}
