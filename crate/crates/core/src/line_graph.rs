//! Line graphs and operator forms of `A(L(G)) = B^T B - 2I`.

use nalgebra::DMatrix;

use crate::error::{Result, RlgError};
use crate::graph::{pair_count, pair_of, Graph, IncidenceMatrix, SbmModel};
use crate::linalg::LinearOperator;

/// Default order above which dense line-graph matrices are refused.
pub const DEFAULT_DENSE_GUARD: usize = 5000;

/// `A(L(G))` as `X ↦ B^T (B X) - 2X`.
#[derive(Debug, Clone)]
pub struct LineOperator {
    incidence: IncidenceMatrix,
}

impl LineOperator {
    pub fn new(g: &Graph) -> Self {
        LineOperator {
            incidence: g.incidence(),
        }
    }

    pub fn order(&self) -> usize {
        self.incidence.ncols()
    }

    pub fn incidence(&self) -> &IncidenceMatrix {
        &self.incidence
    }

    pub fn try_apply(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let bx = self.incidence.mul(x)?;
        let mut out = self.incidence.tr_mul(&bx)?;
        out -= x * 2.0;
        Ok(out)
    }
}

impl LinearOperator for LineOperator {
    fn nrows(&self) -> usize {
        self.order()
    }
    fn ncols(&self) -> usize {
        self.order()
    }
    fn apply(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        self.try_apply(x).expect("row count checked by caller")
    }
    fn apply_transpose(&self, y: &DMatrix<f64>) -> DMatrix<f64> {
        self.apply(y)
    }
}

/// Applies `A(L(G))` to `x` through the incidence matrix.
pub fn line_operator_apply(op: &LineOperator, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    op.try_apply(x)
}

/// `A(L(K_n))` over all `C(n,2)` canonical pairs, without storing the
/// complete graph's incidence matrix.
#[derive(Debug, Clone, Copy)]
pub struct CompleteLineOperator {
    n: usize,
}

impl CompleteLineOperator {
    pub fn new(n: usize) -> Self {
        CompleteLineOperator { n }
    }

    pub fn try_apply(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let n = self.n;
        let order = pair_count(n);
        if x.nrows() != order {
            return Err(RlgError::DimensionMismatch {
                expected: format!("{order} rows"),
                got: format!("{} rows", x.nrows()),
            });
        }
        let mut out = DMatrix::zeros(order, x.ncols());
        let mut vertex_sums = vec![0.0; n];
        for c in 0..x.ncols() {
            vertex_sums.iter_mut().for_each(|v| *v = 0.0);
            let mut id = 0;
            for i in 0..n {
                for j in (i + 1)..n {
                    let v = x[(id, c)];
                    vertex_sums[i] += v;
                    vertex_sums[j] += v;
                    id += 1;
                }
            }
            id = 0;
            for i in 0..n {
                for j in (i + 1)..n {
                    out[(id, c)] = vertex_sums[i] + vertex_sums[j] - 2.0 * x[(id, c)];
                    id += 1;
                }
            }
        }
        Ok(out)
    }
}

impl LinearOperator for CompleteLineOperator {
    fn nrows(&self) -> usize {
        pair_count(self.n)
    }
    fn ncols(&self) -> usize {
        pair_count(self.n)
    }
    fn apply(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        self.try_apply(x).expect("row count checked by caller")
    }
    fn apply_transpose(&self, y: &DMatrix<f64>) -> DMatrix<f64> {
        self.apply(y)
    }
}

/// The line graph of a base graph: one vertex per base edge.
#[derive(Debug, Clone)]
pub struct LineGraph<'g> {
    base: &'g Graph,
    operator: LineOperator,
    guard: usize,
}

pub fn build_line_graph(g: &Graph) -> LineGraph<'_> {
    LineGraph::with_guard(g, DEFAULT_DENSE_GUARD)
}

impl<'g> LineGraph<'g> {
    pub fn with_guard(base: &'g Graph, guard: usize) -> Self {
        LineGraph {
            base,
            operator: LineOperator::new(base),
            guard,
        }
    }

    pub fn base(&self) -> &Graph {
        self.base
    }

    /// Vertices of the line graph, i.e. the base graph's edges.
    pub fn vertex_edges(&self) -> &[(usize, usize)] {
        self.base.edges()
    }

    pub fn order(&self) -> usize {
        self.base.edge_count()
    }

    pub fn operator(&self) -> &LineOperator {
        &self.operator
    }

    pub fn is_adjacent(&self, a: usize, b: usize) -> bool {
        let (e, f) = (self.base.edges()[a], self.base.edges()[b]);
        shares_one_endpoint(e, f)
    }

    /// Dense `A(L(G))`, refused above the size guard.
    pub fn dense_adjacency(&self) -> Result<DMatrix<f64>> {
        let m = self.order();
        if m > self.guard {
            return Err(RlgError::SizeGuard {
                order: m,
                guard: self.guard,
            });
        }
        let b = self.operator.incidence().to_dense();
        let mut a = b.tr_mul(&b);
        for e in 0..m {
            a[(e, e)] -= 2.0;
        }
        Ok(a)
    }
}

pub(crate) fn shares_one_endpoint(e: (usize, usize), f: (usize, usize)) -> bool {
    let common = [e.0 == f.0, e.0 == f.1, e.1 == f.0, e.1 == f.1]
        .iter()
        .filter(|&&x| x)
        .count();
    common == 1
}

/// Dense `A(L(K_n))`, refused above `guard`.
pub fn complete_line_adjacency(n: usize, guard: usize) -> Result<DMatrix<f64>> {
    let order = pair_count(n);
    if order > guard {
        return Err(RlgError::SizeGuard { order, guard });
    }
    let pairs: Vec<_> = (0..order).map(|id| pair_of(id, n).unwrap()).collect();
    Ok(DMatrix::from_fn(order, order, |a, b| {
        if shares_one_endpoint(pairs[a], pairs[b]) {
            1.0
        } else {
            0.0
        }
    }))
}

/// `E[P] A(L(K_n)) E[P]` with `E[P] = diag(P_{ij})`.
#[derive(Debug, Clone)]
pub struct MeanLineMatrix<'m> {
    model: &'m SbmModel,
}

pub fn mean_line_matrix(model: &SbmModel) -> MeanLineMatrix<'_> {
    MeanLineMatrix { model }
}

impl MeanLineMatrix<'_> {
    pub fn order(&self) -> usize {
        pair_count(self.model.n())
    }

    /// Entry for pairs `{i,j}` and `{r,s}`.
    pub fn entry(&self, e: (usize, usize), f: (usize, usize)) -> f64 {
        if shares_one_endpoint(e, f) {
            self.model.edge_probability(e.0, e.1) * self.model.edge_probability(f.0, f.1)
        } else {
            0.0
        }
    }

    pub fn to_dense(&self, guard: usize) -> Result<DMatrix<f64>> {
        let order = self.order();
        if order > guard {
            return Err(RlgError::SizeGuard { order, guard });
        }
        let n = self.model.n();
        let pairs: Vec<_> = (0..order).map(|id| pair_of(id, n).unwrap()).collect();
        Ok(DMatrix::from_fn(order, order, |a, b| self.entry(pairs[a], pairs[b])))
    }
}
