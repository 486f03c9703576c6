//! Dense helpers on top of nalgebra: ordered eigendecompositions, thin SVDs
//! with a fixed sign convention, and the linear-operator abstraction.

use nalgebra::{DMatrix, SymmetricEigen};

/// A real matrix available only through products.
pub trait LinearOperator {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    /// `A X`.
    fn apply(&self, x: &DMatrix<f64>) -> DMatrix<f64>;
    /// `A^T Y`.
    fn apply_transpose(&self, y: &DMatrix<f64>) -> DMatrix<f64>;
}

impl LinearOperator for DMatrix<f64> {
    fn nrows(&self) -> usize {
        self.nrows()
    }
    fn ncols(&self) -> usize {
        self.ncols()
    }
    fn apply(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        self * x
    }
    fn apply_transpose(&self, y: &DMatrix<f64>) -> DMatrix<f64> {
        self.tr_mul(y)
    }
}

/// Eigenvalues (nonincreasing) and matching eigenvector columns of a
/// symmetric matrix.
pub fn sym_eigen_desc(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    if a.is_empty() {
        return (Vec::new(), DMatrix::zeros(a.nrows(), 0));
    }
    let eig = SymmetricEigen::new(a.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(a.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Eigenvalues only, nonincreasing.
pub fn sym_eigenvalues_desc(a: &DMatrix<f64>) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    let mut v: Vec<f64> = a.clone().symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(|x, y| y.total_cmp(x));
    v
}

/// Thin singular value decomposition, singular values nonincreasing.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: DMatrix<f64>,
    pub singular_values: Vec<f64>,
    pub v: DMatrix<f64>,
}

impl Svd {
    /// First `k` triplets.
    pub fn truncate(mut self, k: usize) -> Self {
        let k = k.min(self.singular_values.len());
        self.u = self.u.columns(0, k).into_owned();
        self.v = self.v.columns(0, k).into_owned();
        self.singular_values.truncate(k);
        self
    }
}

/// Flips each column of `u` (and the matching column of `v`) so that its
/// largest-magnitude entry is positive.
pub(crate) fn fix_signs(u: &mut DMatrix<f64>, v: &mut DMatrix<f64>) {
    for c in 0..u.ncols() {
        let col = u.column(c);
        let mut best = 0;
        for r in 0..col.len() {
            if col[r].abs() > col[best].abs() + 1e-12 {
                best = r;
            }
        }
        if col.len() > 0 && col[best] < 0.0 {
            u.column_mut(c).neg_mut();
            if c < v.ncols() {
                v.column_mut(c).neg_mut();
            }
        }
    }
}

/// Dense thin SVD with nonincreasing singular values and deterministic signs.
pub fn thin_svd(a: &DMatrix<f64>) -> Svd {
    if a.is_empty() {
        return Svd {
            u: DMatrix::zeros(a.nrows(), 0),
            singular_values: Vec::new(),
            v: DMatrix::zeros(a.ncols(), 0),
        };
    }
    let svd = a.clone().svd(true, true);
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&x, &y| svd.singular_values[y].total_cmp(&svd.singular_values[x]));
    let mut uu = DMatrix::from_fn(u.nrows(), order.len(), |r, c| u[(r, order[c])]);
    let mut vv = DMatrix::from_fn(v_t.ncols(), order.len(), |r, c| v_t[(order[c], r)]);
    fix_signs(&mut uu, &mut vv);
    Svd {
        u: uu,
        singular_values: order.iter().map(|&i| svd.singular_values[i]).collect(),
        v: vv,
    }
}

/// Orthonormal basis for the column space of a full-column-rank matrix.
pub(crate) fn orthonormalize(a: &DMatrix<f64>) -> DMatrix<f64> {
    a.clone().qr().q()
}

/// `‖P_X - P_Y‖_F` for orthonormal-column `X`, `Y` of equal width: a
/// rotation-free subspace distance.
pub fn subspace_distance(x: &DMatrix<f64>, y: &DMatrix<f64>) -> f64 {
    let px = x * x.transpose();
    let py = y * y.transpose();
    (px - py).norm()
}

/// Sorted-then-paired multiset comparison; returns the largest absolute gap.
pub fn multiset_max_gap(a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    Some(x.iter().zip(&y).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    #[test]
    fn eigen_sorted() {
        let a = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 3.0, 0.0, 0.0, 0.0, 2.0]);
        let (vals, vecs) = sym_eigen_desc(&a);
        assert_eq!(vals, vec![3.0, 2.0, 1.0]);
        assert!((vecs[(1, 0)].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn thin_svd_reconstructs() {
        let a = DMatrix::from_fn(7, 3, |r, c| ((r * 3 + c * 5) % 7) as f64 - 3.0);
        let s = thin_svd(&a);
        let rebuilt = &s.u * DMatrix::from_diagonal(&DVector::from_vec(s.singular_values.clone())) * s.v.transpose();
        assert!((rebuilt - &a).norm() < 1e-10);
        assert!(s.singular_values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn empty_matrix() {
        assert!(thin_svd(&DMatrix::<f64>::zeros(3, 0)).singular_values.is_empty());
        let a = DMatrix::<f64>::zeros(0, 0);
        assert!(sym_eigenvalues_desc(&a).is_empty());
        assert!(sym_eigen_desc(&a).0.is_empty());
    }

    #[test]
    fn multiset_gap() {
        assert_eq!(multiset_max_gap(&[1.0, 2.0], &[2.0, 1.5]), Some(0.5));
        assert_eq!(multiset_max_gap(&[1.0], &[1.0, 2.0]), None);
    }
}
