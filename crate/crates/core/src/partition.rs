//! Edge partitions induced by a vertex partition, the block-indicator
//! isometries `Q`, `Q̂`, `Q̄̂`, the core matrix `M = Q^T A(L(K_n)) Q`, its
//! signal factor `F`, and the counting table `η`.
//!
//! Blocks (equivalently, columns of `Q`) are ordered `(0,0), (1,1), …,
//! (k-1,k-1)`, then the off-diagonal pairs `(0,1), (0,2), …, (k-2,k-1)`
//! lexicographically.

use nalgebra::{DMatrix, DVector};

use crate::cluster::Clustering;
use crate::damped_binomial::block_mean;
use crate::error::{Result, RlgError};
use crate::graph::{edge_index_unchecked, pair_count, pair_of, Graph, SbmModel};
use crate::line_graph::{complete_line_adjacency, mean_line_matrix};
use crate::linalg::sym_eigenvalues_desc;

/// A vertex partition; labels are contiguous from 0.
pub type VertexPartition = Clustering;

/// The partition of all vertex pairs into blocks `C_(r,s)`, `r <= s`.
#[derive(Debug, Clone, PartialEq)]
pub struct InducedEdgePartition {
    labels: Vec<usize>,
    k: usize,
    sizes: Vec<usize>,
    block_sizes: Vec<u64>,
}

impl InducedEdgePartition {
    /// Fails if any cluster has fewer than two vertices.
    pub fn new(partition: &VertexPartition) -> Result<Self> {
        let k = partition.k();
        let mut sizes = vec![0usize; k];
        for &l in partition.labels() {
            sizes[l] += 1;
        }
        if let Some(r) = sizes.iter().position(|&s| s < 2) {
            return Err(RlgError::InvalidPartition(format!(
                "cluster {r} has {} vertices, need at least 2",
                sizes[r]
            )));
        }
        let mut block_sizes = Vec::with_capacity(k * (k + 1) / 2);
        for &s in &sizes {
            block_sizes.push((s * (s - 1) / 2) as u64);
        }
        for r in 0..k {
            for s in (r + 1)..k {
                block_sizes.push((sizes[r] * sizes[s]) as u64);
            }
        }
        Ok(InducedEdgePartition {
            labels: partition.labels().to_vec(),
            k,
            sizes,
            block_sizes,
        })
    }

    pub fn from_model(model: &SbmModel) -> Result<Self> {
        Self::new(&Clustering::new(model.labels().to_vec(), model.k())?)
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Cluster sizes `n_r`.
    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// `C(k+1, 2)`.
    pub fn num_blocks(&self) -> usize {
        self.block_sizes.len()
    }

    /// Block sizes `m_(r,s)` in column order.
    pub fn block_sizes(&self) -> &[u64] {
        &self.block_sizes
    }

    /// Column of block `(r, s)` (either order).
    pub fn block_index(&self, r: usize, s: usize) -> usize {
        block_column(r, s, self.k)
    }

    /// `(r, s)`, `r <= s`, of column `col`.
    pub fn block_pair(&self, col: usize) -> (usize, usize) {
        if col < self.k {
            (col, col)
        } else {
            pair_of(col - self.k, self.k).expect("column in range")
        }
    }

    /// Column of the block containing the vertex pair `{i, j}`.
    pub fn block_of(&self, i: usize, j: usize) -> usize {
        self.block_index(self.labels[i], self.labels[j])
    }

    /// Block column of every present edge of `g`, in edge order.
    pub fn edge_blocks(&self, g: &Graph) -> Vec<usize> {
        g.edges().iter().map(|&(i, j)| self.block_of(i, j)).collect()
    }

    /// Observed block sizes `m̂_(r,s)`.
    pub fn observed_sizes(&self, g: &Graph) -> Vec<u64> {
        let mut counts = vec![0u64; self.num_blocks()];
        for b in self.edge_blocks(g) {
            counts[b] += 1;
        }
        counts
    }

    fn check_graph(&self, g: &Graph) -> Result<()> {
        if g.n() != self.n() {
            return Err(RlgError::DimensionMismatch {
                expected: format!("{} vertices", self.n()),
                got: format!("{} vertices", g.n()),
            });
        }
        Ok(())
    }
}

pub(crate) fn block_column(r: usize, s: usize, k: usize) -> usize {
    let (r, s) = if r <= s { (r, s) } else { (s, r) };
    if r == s {
        r
    } else {
        k + edge_index_unchecked(r, s, k)
    }
}

/// A matrix with at most one nonzero per row, constant within each column.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockProjection {
    row_block: Vec<Option<usize>>,
    col_value: Vec<f64>,
}

impl BlockProjection {
    pub fn nrows(&self) -> usize {
        self.row_block.len()
    }

    pub fn ncols(&self) -> usize {
        self.col_value.len()
    }

    /// Column holding row `r`'s nonzero, if any.
    pub fn row_block(&self, r: usize) -> Option<usize> {
        self.row_block[r]
    }

    /// The shared nonzero value of column `c`.
    pub fn column_value(&self, c: usize) -> f64 {
        self.col_value[c]
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut q = DMatrix::zeros(self.nrows(), self.ncols());
        for (r, b) in self.row_block.iter().enumerate() {
            if let Some(c) = *b {
                q[(r, c)] = self.col_value[c];
            }
        }
        q
    }

    /// `self · diag(scale)` as a dense matrix.
    pub fn scaled_dense(&self, scale: &[f64]) -> DMatrix<f64> {
        let mut q = self.to_dense();
        for (c, s) in scale.iter().enumerate() {
            q.column_mut(c).scale_mut(*s);
        }
        q
    }
}

/// `Q_({i,j}),(r,s) = m_(r,s)^{-1/2}` when `i ∈ C_r, j ∈ C_s`.
pub fn build_q(part: &InducedEdgePartition) -> BlockProjection {
    let n = part.n();
    let mut row_block = Vec::with_capacity(pair_count(n));
    for i in 0..n {
        for j in (i + 1)..n {
            row_block.push(Some(part.block_of(i, j)));
        }
    }
    BlockProjection {
        row_block,
        col_value: part.block_sizes().iter().map(|&m| 1.0 / (m as f64).sqrt()).collect(),
    }
}

/// Observed projection `Q̂` (rows = present edges) and its zero-padded form
/// `Q̄̂ = diag(δ_e sqrt(m_e / m̂_e)) Q` over all pairs. Blocks with no observed
/// edges give all-zero columns.
pub fn build_qhat(g: &Graph, part: &InducedEdgePartition) -> Result<(BlockProjection, BlockProjection)> {
    part.check_graph(g)?;
    let observed = part.observed_sizes(g);
    let col_value: Vec<f64> = observed
        .iter()
        .map(|&m| if m == 0 { 0.0 } else { 1.0 / (m as f64).sqrt() })
        .collect();
    let qhat = BlockProjection {
        row_block: part.edge_blocks(g).into_iter().map(Some).collect(),
        col_value: col_value.clone(),
    };
    let n = g.n();
    let presence = g.presence();
    let mut row_block = Vec::with_capacity(pair_count(n));
    let mut id = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            row_block.push(presence[id].then(|| part.block_of(i, j)));
            id += 1;
        }
    }
    Ok((qhat, BlockProjection { row_block, col_value }))
}

/// `Y_e = δ_e sqrt(m_e / m̂_e)` over all canonical pairs.
pub fn y_values(g: &Graph, part: &InducedEdgePartition) -> Result<Vec<f64>> {
    part.check_graph(g)?;
    let observed = part.observed_sizes(g);
    let n = g.n();
    let mut out = Vec::with_capacity(pair_count(n));
    let mut id = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            let b = part.block_of(i, j);
            let y = if g.presence()[id] {
                (part.block_sizes()[b] as f64 / observed[b] as f64).sqrt()
            } else {
                0.0
            };
            out.push(y);
            id += 1;
        }
    }
    Ok(out)
}

/// Closed-form `M = Q^T A(L(K_n)) Q`.
pub fn build_m(part: &InducedEdgePartition) -> DMatrix<f64> {
    let c = part.num_blocks();
    let nf: Vec<f64> = part.sizes().iter().map(|&s| s as f64).collect();
    DMatrix::from_fn(c, c, |x, y| {
        let (i, j) = part.block_pair(x);
        let (l, p) = part.block_pair(y);
        core_entry((i, j), (l, p), &nf)
    })
}

fn core_entry((i, j): (usize, usize), (l, p): (usize, usize), n: &[f64]) -> f64 {
    let diag_a = i == j;
    let diag_b = l == p;
    match (diag_a, diag_b) {
        (true, true) => {
            if i == l {
                2.0 * (n[i] - 2.0)
            } else {
                0.0
            }
        }
        (true, false) | (false, true) => {
            let (r, (x, y)) = if diag_a { (i, (l, p)) } else { (l, (i, j)) };
            let s = if x == r {
                y
            } else if y == r {
                x
            } else {
                return 0.0;
            };
            (2.0 * n[s] * (n[r] - 1.0)).sqrt()
        }
        (false, false) => {
            if (i, j) == (l, p) {
                n[i] + n[j] - 2.0
            } else {
                let shared = [i == l, i == p, j == l, j == p].iter().filter(|&&b| b).count();
                if shared == 1 {
                    // the two endpoints not shared
                    let s = if i == l || i == p { j } else { i };
                    let t = if l == i || l == j { p } else { l };
                    (n[s] * n[t]).sqrt()
                } else {
                    0.0
                }
            }
        }
    }
}

/// `F = [I; X^T D^{-1}]` and `D = diag(2 n_i - 2)` with `M + 2I = F D F^T`.
///
/// Rows for diagonal blocks are the standard unit vectors; the range of `F`
/// is the nonzero eigenspace of `M + 2I`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalBasis {
    pub f: DMatrix<f64>,
    pub d: DVector<f64>,
}

impl SignalBasis {
    /// `F D^{1/2}`.
    pub fn scaled(&self) -> DMatrix<f64> {
        let mut out = self.f.clone();
        for (c, d) in self.d.iter().enumerate() {
            out.column_mut(c).scale_mut(d.sqrt());
        }
        out
    }

    /// Orthonormal basis of the same column space.
    pub fn orthonormal(&self) -> DMatrix<f64> {
        self.f.clone().qr().q()
    }
}

fn triangular_root(c: usize) -> Option<usize> {
    (1..=c).find(|k| k * (k + 1) / 2 == c)
}

/// Signal factor of a core matrix built by [`build_m`].
pub fn signal_basis(m: &DMatrix<f64>) -> Result<SignalBasis> {
    let c = m.nrows();
    let k = triangular_root(c)
        .ok_or_else(|| RlgError::InvalidParameter(format!("order {c} is not C(k+1, 2)")))?;
    let shifted = m + DMatrix::identity(c, c) * 2.0;
    let eig = sym_eigenvalues_desc(&shifted);
    let scale = eig.iter().fold(0.0f64, |a, &x| a.max(x.abs())).max(1.0);
    let rank = eig.iter().filter(|&&x| x.abs() > 1e-9 * scale).count();
    if rank != k {
        return Err(RlgError::RankDeficient(format!("rank(M + 2I) = {rank}, expected {k}")));
    }
    let d = DVector::from_iterator(k, (0..k).map(|i| shifted[(i, i)]));
    if d.iter().any(|&x| x <= 0.0) {
        return Err(RlgError::RankDeficient("nonpositive diagonal block entry".into()));
    }
    let f = DMatrix::from_fn(c, k, |row, col| {
        if row < k {
            if row == col { 1.0 } else { 0.0 }
        } else {
            shifted[(col, row)] / d[col]
        }
    });
    Ok(SignalBasis { f, d })
}

/// Whether every candidate cluster lies inside a single truth cluster.
pub fn is_refinement(candidate: &VertexPartition, truth: &VertexPartition) -> Result<bool> {
    if candidate.len() != truth.len() {
        return Err(RlgError::DimensionMismatch {
            expected: format!("{} vertices", truth.len()),
            got: format!("{} vertices", candidate.len()),
        });
    }
    let mut host = vec![None; candidate.k()];
    for (c, t) in candidate.labels().iter().zip(truth.labels()) {
        match host[*c] {
            None => host[*c] = Some(*t),
            Some(h) if h != *t => return Ok(false),
            _ => {}
        }
    }
    Ok(true)
}

/// `min_D ‖E[P] Q̃ - Q̃ D‖_F` over diagonal `D`, where `Q̃` is the projection
/// induced by `candidate`. Zero exactly when `E[P]` is constant on each
/// candidate block.
pub fn refinement_residual(candidate: &VertexPartition, model: &SbmModel) -> Result<f64> {
    let part = InducedEdgePartition::new(candidate)?;
    if part.n() != model.n() {
        return Err(RlgError::DimensionMismatch {
            expected: format!("{} vertices", model.n()),
            got: format!("{} vertices", part.n()),
        });
    }
    let c = part.num_blocks();
    let n = part.n();
    let mut mean = vec![0.0; c];
    for i in 0..n {
        for j in (i + 1)..n {
            mean[part.block_of(i, j)] += model.edge_probability(i, j);
        }
    }
    for (m, &size) in mean.iter_mut().zip(part.block_sizes()) {
        *m /= size as f64;
    }
    // column b has entries m_b^{-1/2}; the best diagonal entry is the block mean
    let mut total = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let b = part.block_of(i, j);
            let dev = model.edge_probability(i, j) - mean[b];
            total += dev * dev / part.block_sizes()[b] as f64;
        }
    }
    Ok(total.sqrt())
}

/// Dense `(T1, T2)` with `T1 = Q diag(B) M diag(B) Q^T` and
/// `T1 + T2 = E[P] A(L(K_n)) E[P]`.
pub fn mean_decomposition(
    model: &SbmModel,
    part: &InducedEdgePartition,
    guard: usize,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let order = pair_count(model.n());
    if order > guard {
        return Err(RlgError::SizeGuard { order, guard });
    }
    let bvals = block_probabilities(part, model.block_matrix());
    let q = build_q(part).to_dense();
    let db = DMatrix::from_diagonal(&DVector::from_vec(bvals));
    let t1 = &q * &db * build_m(part) * &db * q.transpose();
    let mean = mean_line_matrix(model).to_dense(guard)?;
    let t2 = mean - &t1;
    Ok((t1, t2))
}

/// `B_(r,s)` in column order.
pub fn block_probabilities(part: &InducedEdgePartition, b: &DMatrix<f64>) -> Vec<f64> {
    (0..part.num_blocks())
        .map(|c| {
            let (r, s) = part.block_pair(c);
            b[(r, s)]
        })
        .collect()
}

/// Exact `μ_(r,s)` in column order.
pub fn block_means(part: &InducedEdgePartition, b: &DMatrix<f64>) -> Vec<f64> {
    block_probabilities(part, b)
        .iter()
        .zip(part.block_sizes())
        .map(|(&p, &m)| block_mean(p, m))
        .collect()
}

/// Number of pairs in block `col` sharing exactly one vertex with `edge`.
pub fn eta_count(edge: (usize, usize), col: usize, part: &InducedEdgePartition) -> u64 {
    let (r, s) = part.block_pair(col);
    let (mut a, mut b) = (part.labels[edge.0], part.labels[edge.1]);
    if a > b {
        std::mem::swap(&mut a, &mut b);
    }
    let n = |x: usize| part.sizes[x] as u64;
    if r == s {
        if (a, b) == (r, r) {
            2 * (n(r) - 2)
        } else if a == r || b == r {
            n(r) - 1
        } else {
            0
        }
    } else if (a, b) == (r, r) {
        2 * n(s)
    } else if (a, b) == (s, s) {
        2 * n(r)
    } else if (a, b) == (r, s) {
        n(r) + n(s) - 2
    } else if a == r || b == r {
        n(s)
    } else if a == s || b == s {
        n(r)
    } else {
        0
    }
}

/// All derived matrices for one graph and working partition.
#[derive(Debug, Clone)]
pub struct ProjectionBundle {
    pub partition: InducedEdgePartition,
    pub q: BlockProjection,
    pub qhat: BlockProjection,
    pub qhat_padded: BlockProjection,
    pub m: DMatrix<f64>,
    pub signal: SignalBasis,
    pub block_sizes: Vec<u64>,
    pub observed_sizes: Vec<u64>,
    /// `μ_(r,s)`; present only when block probabilities were supplied.
    pub means: Option<Vec<f64>>,
}

impl ProjectionBundle {
    pub fn new(g: &Graph, partition: InducedEdgePartition, block_matrix: Option<&DMatrix<f64>>) -> Result<Self> {
        let (qhat, qhat_padded) = build_qhat(g, &partition)?;
        let m = build_m(&partition);
        let signal = signal_basis(&m)?;
        Ok(ProjectionBundle {
            q: build_q(&partition),
            qhat,
            qhat_padded,
            signal,
            m,
            block_sizes: partition.block_sizes().to_vec(),
            observed_sizes: partition.observed_sizes(g),
            means: block_matrix.map(|b| block_means(&partition, b)),
            partition,
        })
    }
}

/// `Q^T A(L(K_n)) Q` computed densely; used to cross-check [`build_m`].
pub fn core_matrix_dense(part: &InducedEdgePartition, guard: usize) -> Result<DMatrix<f64>> {
    let q = build_q(part).to_dense();
    let a = complete_line_adjacency(part.n(), guard)?;
    Ok(q.transpose() * a * q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::sample_sbm;
    use crate::line_graph::shares_one_endpoint;
    use crate::linalg::multiset_max_gap;

    fn part(labels: Vec<usize>, k: usize) -> InducedEdgePartition {
        InducedEdgePartition::new(&Clustering::new(labels, k).unwrap()).unwrap()
    }

    #[test]
    fn rejects_small_clusters() {
        let c = Clustering::new(vec![0, 1, 1], 2).unwrap();
        assert!(InducedEdgePartition::new(&c).is_err());
    }

    #[test]
    fn column_order() {
        let p = part(vec![0, 0, 1, 1, 2, 2], 3);
        let pairs: Vec<_> = (0..6).map(|c| p.block_pair(c)).collect();
        assert_eq!(pairs, vec![(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)]);
        for (c, &(r, s)) in pairs.iter().enumerate() {
            assert_eq!(p.block_index(r, s), c);
            assert_eq!(p.block_index(s, r), c);
        }
    }

    #[test]
    fn q_single_cluster() {
        let p = part(vec![0; 5], 1);
        let q = build_q(&p).to_dense();
        assert_eq!(q.shape(), (10, 1));
        assert!(q.iter().all(|&x| (x - 10f64.powf(-0.5)).abs() < 1e-15));
    }

    #[test]
    fn q_two_by_two() {
        let p = part(vec![0, 0, 1, 1], 2);
        let q = build_q(&p).to_dense();
        assert_eq!(q.shape(), (6, 3));
        assert_eq!(q[(0, 0)], 1.0);
        assert!((q.transpose() * &q - DMatrix::identity(3, 3)).amax() < 1e-14);
    }

    #[test]
    fn m_two_by_two_example() {
        let p = part(vec![0, 0, 1, 1], 2);
        let m = build_m(&p);
        let expected = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 2.0, 0.0, 0.0, 2.0, 2.0, 2.0, 2.0]);
        assert!((&m - expected).amax() < 1e-14);
        let eig = sym_eigenvalues_desc(&m);
        assert!(multiset_max_gap(&eig, &[4.0, 0.0, -2.0]).unwrap() < 1e-12);
    }

    #[test]
    fn m_corner_entry() {
        let p = part(vec![0, 0, 0, 0, 0, 1, 1, 1], 2);
        let m = build_m(&p);
        let (n1, n2) = (5.0f64, 3.0f64);
        assert!((m[(0, 2)] - (2.0 * n2 * (n1 - 1.0)).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn m_matches_dense_unequal_sizes() {
        let labels = vec![0, 1, 2, 0, 0, 1, 2, 2, 0, 1, 2, 2];
        let p = part(labels, 3);
        let dense = core_matrix_dense(&p, 10_000).unwrap();
        assert!((dense - build_m(&p)).amax() < 1e-12);
    }

    #[test]
    fn signal_basis_structure() {
        let p = part(vec![0; 6], 1);
        let sb = signal_basis(&build_m(&p)).unwrap();
        assert_eq!(sb.f.shape(), (1, 1));
        assert_eq!(sb.f[(0, 0)], 1.0);

        let big = part((0..400).map(|v| v / 200).collect(), 2);
        let sb = signal_basis(&build_m(&big)).unwrap();
        let row = sb.f.row(2);
        assert!((row[0] - 0.5f64.sqrt()).abs() < 2e-3);
        assert!((row[1] - 0.5f64.sqrt()).abs() < 2e-3);

        let three = part((0..150).map(|v| v / 50).collect(), 3);
        let m = build_m(&three);
        let sb = signal_basis(&m).unwrap();
        assert_eq!(sb.f.ncols(), 3);
        let shifted = &m + DMatrix::identity(6, 6) * 2.0;
        let eig = sym_eigenvalues_desc(&shifted);
        assert_eq!(eig.iter().filter(|x| x.abs() < 1e-8).count(), 3);
        let rebuilt = &sb.f * DMatrix::from_diagonal(&sb.d) * sb.f.transpose();
        assert!((rebuilt - shifted).amax() < 1e-10);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(sb.f[(i, j)], if i == j { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn signal_basis_rejects_wrong_rank() {
        assert!(signal_basis(&DMatrix::zeros(3, 3)).is_err());
        assert!(signal_basis(&DMatrix::zeros(4, 4)).is_err());
    }

    #[test]
    fn refinement_predicate() {
        let truth = Clustering::new(vec![0, 0, 0, 0, 1, 1, 1, 1], 2).unwrap();
        assert!(is_refinement(&truth, &truth).unwrap());
        let singletons = Clustering::new((0..8).collect(), 8).unwrap();
        assert!(is_refinement(&singletons, &truth).unwrap());
        let merged = Clustering::new(vec![0; 8], 1).unwrap();
        assert!(!is_refinement(&merged, &truth).unwrap());
        let short = Clustering::new(vec![0, 0], 1).unwrap();
        assert!(is_refinement(&short, &truth).is_err());
    }

    #[test]
    fn refinement_residuals() {
        let b = DMatrix::from_row_slice(2, 2, &[0.7, 0.2, 0.2, 0.45]);
        let model = SbmModel::new(vec![0, 0, 0, 0, 1, 1, 1, 1], b).unwrap();
        let truth = Clustering::new(model.labels().to_vec(), 2).unwrap();
        assert!(refinement_residual(&truth, &model).unwrap() < 1e-14);
        let finer = Clustering::new(vec![0, 0, 1, 1, 2, 2, 3, 3], 4).unwrap();
        assert!(refinement_residual(&finer, &model).unwrap() < 1e-14);
        let merged = Clustering::new(vec![0; 8], 1).unwrap();
        let res = refinement_residual(&merged, &model).unwrap();
        assert!(res > 0.1);

        // dense residual with the best diagonal D = diag(Q^T E[P] Q)
        let p = InducedEdgePartition::new(&merged).unwrap();
        let q = build_q(&p).to_dense();
        let ep = DMatrix::from_diagonal(&DVector::from_vec(model.pair_probabilities()));
        let d = DMatrix::from_diagonal(&(q.transpose() * &ep * &q).diagonal());
        let dense = (&ep * &q - &q * d).norm();
        assert!((dense - res).abs() < 1e-12);
    }

    #[test]
    fn mean_decomposition_reconstructs() {
        let model = SbmModel::planted(&[5, 5], 0.6, 0.25).unwrap();
        let p = InducedEdgePartition::from_model(&model).unwrap();
        let (t1, t2) = mean_decomposition(&model, &p, 10_000).unwrap();
        let mean = mean_line_matrix(&model).to_dense(10_000).unwrap();
        assert!((&t1 + &t2 - mean).norm() <= 1e-10);
        // T2 block row sums vanish
        let n = model.n();
        let blocks: Vec<usize> = (0..pair_count(n))
            .map(|id| {
                let (i, j) = pair_of(id, n).unwrap();
                p.block_of(i, j)
            })
            .collect();
        for row in 0..t2.nrows() {
            let mut sums = vec![0.0; p.num_blocks()];
            for col in 0..t2.ncols() {
                sums[blocks[col]] += t2[(row, col)];
            }
            assert!(sums.iter().all(|s| s.abs() < 1e-12), "{sums:?}");
        }
    }

    #[test]
    fn mean_decomposition_homogeneous() {
        let model = SbmModel::planted(&[7], 0.4, 0.4).unwrap();
        let p = InducedEdgePartition::from_model(&model).unwrap();
        let (t1, t2) = mean_decomposition(&model, &p, 10_000).unwrap();
        let lk = complete_line_adjacency(7, 10_000).unwrap();
        assert!((&t1 + &t2 - &lk * 0.16).amax() < 1e-12);
        let eig = sym_eigenvalues_desc(&t1);
        assert!(eig.iter().filter(|x| x.abs() > 1e-9).count() <= 3);
    }

    #[test]
    fn qhat_on_complete_graph_is_q() {
        let p = part(vec![0, 1, 0, 1, 2, 2, 1], 3);
        let g = Graph::complete(7);
        let (qhat, padded) = build_qhat(&g, &p).unwrap();
        let q = build_q(&p).to_dense();
        assert!((qhat.to_dense() - &q).amax() < 1e-15);
        assert!((padded.to_dense() - &q).amax() < 1e-15);
    }

    #[test]
    fn qhat_empty_block_is_zero_column() {
        let p = part(vec![0, 0, 0, 1, 1, 1], 2);
        // only within-block edges: block (0,1) unobserved
        let g = Graph::from_edges(6, &[(0, 1), (1, 2), (3, 4)]).unwrap();
        let (qhat, padded) = build_qhat(&g, &p).unwrap();
        let d = qhat.to_dense();
        assert!(d.column(2).iter().all(|&x| x == 0.0));
        assert!(padded.to_dense().column(2).iter().all(|&x| x == 0.0));
        assert!((d.column(0).norm() - 1.0).abs() < 1e-15);
        assert!((d.column(1).norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn qhat_columns_unit_norm() {
        let model = SbmModel::planted(&[20, 15, 10], 0.5, 0.2).unwrap();
        let g = sample_sbm(&model, 4);
        let p = InducedEdgePartition::from_model(&model).unwrap();
        let (qhat, padded) = build_qhat(&g, &p).unwrap();
        for c in 0..6 {
            assert!((qhat.to_dense().column(c).norm() - 1.0).abs() < 1e-14);
            assert!((padded.to_dense().column(c).norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn eta_table_entries() {
        let p = part(vec![0, 0, 0, 1, 1, 1, 1, 2, 2, 2, 2, 2], 3);
        let n = [3u64, 4, 5];
        // r<s, e in C_(r,s)
        assert_eq!(eta_count((0, 3), p.block_index(0, 1), &p), n[0] + n[1] - 2);
        // r=s, e in C_(r,t)
        assert_eq!(eta_count((0, 7), p.block_index(0, 0), &p), n[0] - 1);
        assert_eq!(eta_count((0, 1), p.block_index(0, 1), &p), 2 * n[1]);
        assert_eq!(eta_count((0, 1), p.block_index(0, 0), &p), 2 * (n[0] - 2));
        assert_eq!(eta_count((3, 4), p.block_index(0, 2), &p), 0);
    }

    #[test]
    fn eta_matches_enumeration() {
        let p = part(vec![2, 0, 1, 0, 2, 1, 1, 0, 2, 2, 0, 1], 3);
        let n = 12;
        let pairs: Vec<_> = (0..pair_count(n)).map(|id| pair_of(id, n).unwrap()).collect();
        for &e in &pairs {
            for col in 0..p.num_blocks() {
                let brute = pairs
                    .iter()
                    .filter(|&&f| p.block_of(f.0, f.1) == col && shares_one_endpoint(e, f))
                    .count() as u64;
                assert_eq!(eta_count(e, col, &p), brute, "edge {e:?} block {col}");
            }
        }
    }
}
