//! Simple undirected graphs on `0..n` with a canonical pair indexing, SBM
//! sampling and incidence matrices.

use nalgebra::DMatrix;
use rand::Rng as _;

use crate::error::{Result, RlgError};
use crate::rng::rng_from_seed;

/// Number of unordered pairs of `n` items.
pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Canonical index of the pair `{i, j}`, `i < j`, in lexicographic order.
pub fn edge_index(i: usize, j: usize, n: usize) -> Result<usize> {
    if i >= j || j >= n {
        return Err(RlgError::InvalidPair { i, j, n });
    }
    Ok(edge_index_unchecked(i, j, n))
}

#[inline]
pub(crate) fn edge_index_unchecked(i: usize, j: usize, n: usize) -> usize {
    // pairs starting with 0..i come first: sum_{a<i} (n - 1 - a)
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

/// Inverse of [`edge_index`].
pub fn pair_of(index: usize, n: usize) -> Result<(usize, usize)> {
    if index >= pair_count(n) {
        return Err(RlgError::InvalidParameter(format!(
            "pair index {index} out of range for n = {n}"
        )));
    }
    let mut i = 0;
    let mut start = 0;
    loop {
        let row = n - 1 - i;
        if index < start + row {
            return Ok((i, i + 1 + index - start));
        }
        start += row;
        i += 1;
    }
}

/// A simple undirected graph on `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    edge_ids: Vec<usize>,
    present: Vec<bool>,
}

impl Graph {
    /// Builds a graph from an arbitrary list of pairs. Pairs are normalized to
    /// `i < j` and sorted; self-loops, duplicates and out-of-range vertices are
    /// rejected.
    pub fn from_edges(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut present = vec![false; pair_count(n)];
        for &(a, b) in pairs {
            let (i, j) = if a < b { (a, b) } else { (b, a) };
            let id = edge_index(i, j, n)?;
            if present[id] {
                return Err(RlgError::InvalidParameter(format!(
                    "duplicate edge {{{i}, {j}}}"
                )));
            }
            present[id] = true;
        }
        Ok(Self::from_presence(n, present))
    }

    fn from_presence(n: usize, present: Vec<bool>) -> Self {
        let mut edges = Vec::new();
        let mut edge_ids = Vec::new();
        let mut id = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                if present[id] {
                    edges.push((i, j));
                    edge_ids.push(id);
                }
                id += 1;
            }
        }
        Graph {
            n,
            edges,
            edge_ids,
            present,
        }
    }

    pub fn complete(n: usize) -> Self {
        Self::from_presence(n, vec![true; pair_count(n)])
    }

    pub fn empty(n: usize) -> Self {
        Self::from_presence(n, vec![false; pair_count(n)])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of present edges.
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Present edges, sorted lexicographically.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Canonical pair indices of the present edges, in the same order as
    /// [`Graph::edges`].
    pub fn edge_ids(&self) -> &[usize] {
        &self.edge_ids
    }

    /// Presence indicator over all canonical pair indices.
    pub fn presence(&self) -> &[bool] {
        &self.present
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        i != j && j < self.n && self.present[edge_index_unchecked(i, j, self.n)]
    }

    /// Position of the canonical pair `id` within [`Graph::edges`], if present.
    pub fn position_of(&self, id: usize) -> Option<usize> {
        self.edge_ids.binary_search(&id).ok()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for &(i, j) in &self.edges {
            deg[i] += 1;
            deg[j] += 1;
        }
        deg
    }

    /// Dense adjacency matrix `A(G)`.
    pub fn adjacency(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n, self.n);
        for &(i, j) in &self.edges {
            a[(i, j)] = 1.0;
            a[(j, i)] = 1.0;
        }
        a
    }

    /// `A(G) + D` with `D` the degree diagonal (the signless Laplacian).
    pub fn signless_laplacian(&self) -> DMatrix<f64> {
        let mut a = self.adjacency();
        for (i, d) in self.degrees().into_iter().enumerate() {
            a[(i, i)] = d as f64;
        }
        a
    }

    pub fn incidence(&self) -> IncidenceMatrix {
        IncidenceMatrix {
            n: self.n,
            endpoints: self.edges.clone(),
        }
    }
}

/// Stochastic blockmodel parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SbmModel {
    labels: Vec<usize>,
    block_matrix: DMatrix<f64>,
    cluster_sizes: Vec<usize>,
}

impl SbmModel {
    pub fn new(labels: Vec<usize>, block_matrix: DMatrix<f64>) -> Result<Self> {
        let k = block_matrix.nrows();
        if k == 0 || block_matrix.ncols() != k {
            return Err(RlgError::InvalidModel("block matrix must be square and nonempty".into()));
        }
        for r in 0..k {
            for s in 0..k {
                let b = block_matrix[(r, s)];
                if !(0.0..=1.0).contains(&b) {
                    return Err(RlgError::InvalidModel(format!("B[{r},{s}] = {b} outside [0, 1]")));
                }
                if b != block_matrix[(s, r)] {
                    return Err(RlgError::InvalidModel("block matrix is not symmetric".into()));
                }
            }
        }
        let mut cluster_sizes = vec![0; k];
        for &l in &labels {
            if l >= k {
                return Err(RlgError::InvalidModel(format!("label {l} >= k = {k}")));
            }
            cluster_sizes[l] += 1;
        }
        if let Some(r) = cluster_sizes.iter().position(|&s| s < 2) {
            return Err(RlgError::InvalidModel(format!(
                "cluster {r} has {} vertices, need at least 2",
                cluster_sizes[r]
            )));
        }
        Ok(SbmModel {
            labels,
            block_matrix,
            cluster_sizes,
        })
    }

    /// Contiguous blocks of the given sizes with a two-valued block matrix.
    pub fn planted(sizes: &[usize], within: f64, between: f64) -> Result<Self> {
        let k = sizes.len();
        let labels = sizes
            .iter()
            .enumerate()
            .flat_map(|(r, &s)| std::iter::repeat_n(r, s))
            .collect();
        let b = DMatrix::from_fn(k, k, |r, s| if r == s { within } else { between });
        Self::new(labels, b)
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn k(&self) -> usize {
        self.block_matrix.nrows()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn block_matrix(&self) -> &DMatrix<f64> {
        &self.block_matrix
    }

    pub fn cluster_sizes(&self) -> &[usize] {
        &self.cluster_sizes
    }

    /// `P[i, j] = B[label(i), label(j)]`.
    pub fn edge_probability(&self, i: usize, j: usize) -> f64 {
        self.block_matrix[(self.labels[i], self.labels[j])]
    }

    /// Dense `ZBZ^T` with zero diagonal.
    pub fn probability_matrix(&self) -> DMatrix<f64> {
        let n = self.n();
        DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { self.edge_probability(i, j) })
    }

    /// `E[P]` diagonal over all canonical pairs.
    pub fn pair_probabilities(&self) -> Vec<f64> {
        let n = self.n();
        let mut out = Vec::with_capacity(pair_count(n));
        for i in 0..n {
            for j in (i + 1)..n {
                out.push(self.edge_probability(i, j));
            }
        }
        out
    }
}

/// Draws a graph with each pair present independently with its block
/// probability.
pub fn sample_sbm(model: &SbmModel, seed: u64) -> Graph {
    let mut rng = rng_from_seed(seed);
    let n = model.n();
    let mut present = Vec::with_capacity(pair_count(n));
    for i in 0..n {
        for j in (i + 1)..n {
            let p = model.edge_probability(i, j);
            let u: f64 = rng.random();
            present.push(u < p);
        }
    }
    Graph::from_presence(n, present)
}

/// Vertex-edge incidence matrix, `n` rows by `m̂` columns, stored by column
/// endpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceMatrix {
    n: usize,
    endpoints: Vec<(usize, usize)>,
}

impl IncidenceMatrix {
    pub fn nrows(&self) -> usize {
        self.n
    }

    pub fn ncols(&self) -> usize {
        self.endpoints.len()
    }

    pub fn endpoints(&self) -> &[(usize, usize)] {
        &self.endpoints
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut b = DMatrix::zeros(self.n, self.endpoints.len());
        for (e, &(i, j)) in self.endpoints.iter().enumerate() {
            b[(i, e)] = 1.0;
            b[(j, e)] = 1.0;
        }
        b
    }

    /// `B X` for `X` with one row per edge.
    pub fn mul(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if x.nrows() != self.ncols() {
            return Err(RlgError::DimensionMismatch {
                expected: format!("{} rows", self.ncols()),
                got: format!("{} rows", x.nrows()),
            });
        }
        let mut out = DMatrix::zeros(self.n, x.ncols());
        for c in 0..x.ncols() {
            for (e, &(i, j)) in self.endpoints.iter().enumerate() {
                let v = x[(e, c)];
                out[(i, c)] += v;
                out[(j, c)] += v;
            }
        }
        Ok(out)
    }

    /// `B^T Y` for `Y` with one row per vertex.
    pub fn tr_mul(&self, y: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if y.nrows() != self.n {
            return Err(RlgError::DimensionMismatch {
                expected: format!("{} rows", self.n),
                got: format!("{} rows", y.nrows()),
            });
        }
        let mut out = DMatrix::zeros(self.endpoints.len(), y.ncols());
        for c in 0..y.ncols() {
            for (e, &(i, j)) in self.endpoints.iter().enumerate() {
                out[(e, c)] = y[(i, c)] + y[(j, c)];
            }
        }
        Ok(out)
    }
}
