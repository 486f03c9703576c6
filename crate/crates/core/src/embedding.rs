//! Edge latent positions: projected, naive and padded embeddings, the
//! block-level theoretical positions, and Procrustes alignment.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Result, RlgError};
use crate::graph::{pair_count, pair_of, Graph, SbmModel};
use crate::line_graph::{CompleteLineOperator, LineOperator};
use crate::linalg::{fix_signs, sym_eigen_desc, thin_svd};
use crate::partition::{block_means, build_m, build_q, build_qhat, signal_basis, InducedEdgePartition};
use crate::spectral::{partial_svd, TRANSFER_MAX_N};

/// Singular values below this fraction of the largest count as zero.
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbeddingMode {
    Projected,
    Naive,
    Padded,
}

/// Rows are edges (all canonical pairs in padded mode).
#[derive(Debug, Clone)]
pub struct EmbeddingResult {
    pub edges: Vec<(usize, usize)>,
    pub positions: DMatrix<f64>,
    pub singular_values: Vec<f64>,
    pub mode: EmbeddingMode,
}

impl EmbeddingResult {
    pub fn dim(&self) -> usize {
        self.positions.ncols()
    }

    /// The given (0-based) singular-vector columns.
    pub fn columns(&self, cols: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(self.positions.nrows(), cols.len(), |r, c| self.positions[(r, cols[c])])
    }

    /// Positions with each column multiplied by its singular value.
    pub fn scaled(&self) -> DMatrix<f64> {
        let mut out = self.positions.clone();
        for (c, s) in self.singular_values.iter().enumerate().take(out.ncols()) {
            out.column_mut(c).scale_mut(*s);
        }
        out
    }
}

/// Scales every nonzero row to unit length.
pub fn row_normalized(x: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = x.clone();
    for mut row in out.row_iter_mut() {
        let norm = row.norm();
        if norm > 0.0 {
            row.unscale_mut(norm);
        }
    }
    out
}

fn check_dim(d: usize, max: usize) -> Result<()> {
    if d == 0 || d > max {
        return Err(RlgError::InvalidParameter(format!("embedding dimension {d} outside 1..={max}")));
    }
    Ok(())
}

fn top_left_vectors(x: &DMatrix<f64>, d: usize) -> Result<(DMatrix<f64>, Vec<f64>)> {
    let svd = thin_svd(x);
    let top = svd.singular_values.first().copied().unwrap_or(0.0);
    let nonzero = svd.singular_values.iter().filter(|&&s| s > RANK_TOL * top.max(1.0)).count();
    if nonzero < d {
        return Err(RlgError::RankDeficient(format!(
            "{nonzero} nonzero singular values, {d} requested"
        )));
    }
    let svd = svd.truncate(d);
    Ok((svd.u, svd.singular_values))
}

/// `A(L(G)) Q̂`, formed through the incidence operator.
pub fn projected_line_matrix(g: &Graph, part: &InducedEdgePartition) -> Result<DMatrix<f64>> {
    let (qhat, _) = build_qhat(g, part)?;
    LineOperator::new(g).try_apply(&qhat.to_dense())
}

/// Top-`d` left singular vectors of `A(L(G)) Q̂`.
pub fn estimate_edge_positions(g: &Graph, part: &InducedEdgePartition, d: usize) -> Result<EmbeddingResult> {
    check_dim(d, part.num_blocks())?;
    if g.edge_count() < d {
        return Err(RlgError::RankDeficient(format!("{} edges, {d} dimensions requested", g.edge_count())));
    }
    let x = projected_line_matrix(g, part)?;
    let (positions, singular_values) = top_left_vectors(&x, d)?;
    Ok(EmbeddingResult {
        edges: g.edges().to_vec(),
        positions,
        singular_values,
        mode: EmbeddingMode::Projected,
    })
}

/// Top-`d` left singular vectors of `A(L(G))` itself.
///
/// Uses the eigenpairs of `BB^T`: each `(μ, u)` with `μ > 0` gives the line
/// eigenpair `(μ - 2, B^T u / sqrt(μ))`, and the rest of the spectrum is
/// `-2`. When the `-2` family would enter the top `d` the operator is handed
/// to randomized subspace iteration instead.
pub fn naive_line_embedding(g: &Graph, d: usize) -> Result<EmbeddingResult> {
    let m = g.edge_count();
    check_dim(d, m.max(1))?;
    if m == 0 {
        return Err(RlgError::RankDeficient("graph has no edges".into()));
    }
    let (positions, singular_values) = if g.n() <= TRANSFER_MAX_N {
        match naive_via_transfer(g, d)? {
            Some(found) => found,
            None => naive_via_iteration(g, d)?,
        }
    } else {
        naive_via_iteration(g, d)?
    };
    Ok(EmbeddingResult {
        edges: g.edges().to_vec(),
        positions,
        singular_values,
        mode: EmbeddingMode::Naive,
    })
}

fn naive_via_transfer(g: &Graph, d: usize) -> Result<Option<(DMatrix<f64>, Vec<f64>)>> {
    let (mu, vecs) = sym_eigen_desc(&g.signless_laplacian());
    let scale = mu.first().copied().unwrap_or(0.0).max(1.0);
    let mut pairs: Vec<(f64, usize)> = mu
        .iter()
        .enumerate()
        .filter(|(_, &x)| x > 1e-9 * scale)
        .map(|(i, &x)| ((x - 2.0).abs(), i))
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    if pairs.len() < d || pairs[d - 1].0 <= 2.0 + 1e-8 * scale {
        return Ok(None);
    }
    let incidence = g.incidence();
    let chosen = DMatrix::from_fn(g.n(), d, |r, c| vecs[(r, pairs[c].1)]);
    let mut u = incidence.tr_mul(&chosen)?;
    for (c, &(_, i)) in pairs.iter().take(d).enumerate() {
        u.column_mut(c).unscale_mut(mu[i].sqrt());
    }
    let mut dummy = DMatrix::zeros(0, 0);
    fix_signs(&mut u, &mut dummy);
    Ok(Some((u, pairs.iter().take(d).map(|p| p.0).collect())))
}

fn naive_via_iteration(g: &Graph, d: usize) -> Result<(DMatrix<f64>, Vec<f64>)> {
    let op = LineOperator::new(g);
    let svd = partial_svd(&op, d, 1e-10, 0)?;
    Ok((svd.u, svd.singular_values))
}

/// Top-`d` left singular vectors of `A(L(K_n)) Q̄̂`, rows over all pairs.
///
/// On present edges the rows of `A(L(K_n)) Q̄̂` coincide with those of
/// `A(L(G)) Q̂`; absent pairs still receive rows.
pub fn padded_embedding(g: &Graph, part: &InducedEdgePartition, d: usize) -> Result<EmbeddingResult> {
    check_dim(d, part.num_blocks())?;
    let x = padded_line_matrix(g, part)?;
    let (positions, singular_values) = top_left_vectors(&x, d)?;
    let n = g.n();
    let edges = (0..pair_count(n)).map(|id| pair_of(id, n).expect("in range")).collect();
    Ok(EmbeddingResult {
        edges,
        positions,
        singular_values,
        mode: EmbeddingMode::Padded,
    })
}

/// `A(L(K_n)) Q̄̂`.
pub fn padded_line_matrix(g: &Graph, part: &InducedEdgePartition) -> Result<DMatrix<f64>> {
    let (_, padded) = build_qhat(g, part)?;
    CompleteLineOperator::new(g.n()).try_apply(&padded.to_dense())
}

/// Block latent positions in `R^k`, one row per block in column order.
#[derive(Debug, Clone)]
pub struct TheoreticalPositions {
    pub partition: InducedEdgePartition,
    pub means: Vec<f64>,
    pub blocks: DMatrix<f64>,
}

impl TheoreticalPositions {
    /// Position of block `(r, s)`.
    pub fn block(&self, r: usize, s: usize) -> DVector<f64> {
        self.blocks.row(self.partition.block_index(r, s)).transpose()
    }

    /// One row per listed edge.
    pub fn for_edges(&self, edges: &[(usize, usize)]) -> DMatrix<f64> {
        let k = self.blocks.ncols();
        let mut out = DMatrix::zeros(edges.len(), k);
        for (row, &(i, j)) in edges.iter().enumerate() {
            out.row_mut(row).copy_from(&self.blocks.row(self.partition.block_of(i, j)));
        }
        out
    }
}

/// `(2μ_(i,i)/sqrt(n_i)) e_i` and `μ_(i,j) (e_i/sqrt(n_i) + e_j/sqrt(n_j))`.
pub fn theoretical_positions(model: &SbmModel) -> Result<TheoreticalPositions> {
    let partition = InducedEdgePartition::from_model(model)?;
    let means = block_means(&partition, model.block_matrix());
    let k = partition.k();
    let c = partition.num_blocks();
    let sizes: Vec<f64> = partition.sizes().iter().map(|&s| s as f64).collect();
    let mut blocks = DMatrix::zeros(c, k);
    for b in 0..c {
        let (r, s) = partition.block_pair(b);
        if r == s {
            blocks[(b, r)] = 2.0 * means[b] / sizes[r].sqrt();
        } else {
            blocks[(b, r)] = means[b] / sizes[r].sqrt();
            blocks[(b, s)] = means[b] / sizes[s].sqrt();
        }
    }
    Ok(TheoreticalPositions { partition, means, blocks })
}

/// `Q diag(μ) F D^{1/2}` built from the matrices, rows over all pairs.
pub fn theoretical_matrix(part: &InducedEdgePartition, means: &[f64]) -> Result<DMatrix<f64>> {
    let q = build_q(part).scaled_dense(means);
    let basis = signal_basis(&build_m(part))?;
    Ok(q * basis.scaled())
}

/// The orthogonal `O` minimizing `‖X - Y O‖_F`, and that minimum.
pub fn procrustes_align(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<(DMatrix<f64>, f64)> {
    if x.shape() != y.shape() {
        return Err(RlgError::DimensionMismatch {
            expected: format!("{:?}", x.shape()),
            got: format!("{:?}", y.shape()),
        });
    }
    let svd = (y.transpose() * x).svd(true, true);
    let o = svd.u.expect("u requested") * svd.v_t.expect("v_t requested");
    let residual = (x - y * &o).norm();
    Ok((o, residual))
}

/// `diag(μ) M diag(μ)`.
pub fn scaled_core(part: &InducedEdgePartition, means: &[f64]) -> DMatrix<f64> {
    let d = DMatrix::from_diagonal(&DVector::from_column_slice(means));
    &d * build_m(part) * &d
}

/// `H = A(L(K_n)) (Q̄̂ - Q diag(μ))`.
pub fn h_matrix(g: &Graph, part: &InducedEdgePartition, means: &[f64]) -> Result<DMatrix<f64>> {
    let (_, padded) = build_qhat(g, part)?;
    let diff = padded.to_dense() - build_q(part).scaled_dense(means);
    CompleteLineOperator::new(g.n()).try_apply(&diff)
}

/// `‖Q̂^T A(L(G)) Q̂ - diag(μ) M diag(μ)‖_F`.
pub fn core_residual(g: &Graph, part: &InducedEdgePartition, means: &[f64]) -> Result<f64> {
    let (qhat, _) = build_qhat(g, part)?;
    let q = qhat.to_dense();
    let projected = LineOperator::new(g).try_apply(&q)?;
    Ok((q.transpose() * projected - scaled_core(part, means)).norm())
}

/// Top-`d` left singular vectors of `Q̂ diag(μ) M diag(μ)`.
pub fn reference_vectors(g: &Graph, part: &InducedEdgePartition, means: &[f64], d: usize) -> Result<DMatrix<f64>> {
    check_dim(d, part.num_blocks())?;
    let (qhat, _) = build_qhat(g, part)?;
    let x = qhat.to_dense() * scaled_core(part, means);
    Ok(top_left_vectors(&x, d)?.0)
}

/// `min_O ‖Û - U O‖_F` between the estimated and reference `d`-dimensional
/// singular vectors; with `unit_rows` both are row-normalized first.
pub fn singular_vector_residual(
    g: &Graph,
    part: &InducedEdgePartition,
    means: &[f64],
    d: usize,
    unit_rows: bool,
) -> Result<f64> {
    let estimated = estimate_edge_positions(g, part, d)?.positions;
    let reference = reference_vectors(g, part, means, d)?;
    let (x, y) = if unit_rows {
        (row_normalized(&estimated), row_normalized(&reference))
    } else {
        (estimated, reference)
    };
    Ok(procrustes_align(&x, &y)?.1)
}
