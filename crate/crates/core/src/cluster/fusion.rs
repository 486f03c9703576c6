use nalgebra::DMatrix;

use super::gmm::GmmFit;
use crate::error::{Result, RlgError};
use crate::linalg::thin_svd;

/// `U S` for the leading `dims` singular triplets (all when `None`).
pub fn scaled_embedding(x: &DMatrix<f64>, dims: Option<usize>) -> DMatrix<f64> {
    let svd = thin_svd(x);
    let svd = match dims {
        Some(d) => svd.truncate(d),
        None => svd,
    };
    let mut out = svd.u;
    for (c, s) in svd.singular_values.iter().enumerate() {
        out.column_mut(c).scale_mut(*s);
    }
    out
}

/// Left singular vectors of `[w_1 U_1 S_1, w_2 U_2 S_2, ...]`, top `d`.
pub fn scmase_fuse(sources: &[(DMatrix<f64>, f64)], d: usize) -> Result<DMatrix<f64>> {
    let Some((first, _)) = sources.first() else {
        return Err(RlgError::InvalidParameter("no sources to fuse".into()));
    };
    let rows = first.nrows();
    let mut blocks = Vec::with_capacity(sources.len());
    for (x, w) in sources {
        if x.nrows() != rows {
            return Err(RlgError::DimensionMismatch {
                expected: format!("{rows} rows"),
                got: format!("{} rows", x.nrows()),
            });
        }
        if !(*w >= 0.0 && w.is_finite()) {
            return Err(RlgError::InvalidParameter(format!("source weight {w}")));
        }
        blocks.push(scaled_embedding(x, None) * *w);
    }
    let width: usize = blocks.iter().map(|b| b.ncols()).sum();
    if d == 0 || d > width.min(rows) {
        return Err(RlgError::InvalidParameter(format!(
            "fused dimension {d} outside 1..={}",
            width.min(rows)
        )));
    }
    let mut joined = DMatrix::zeros(rows, width);
    let mut col = 0;
    for b in &blocks {
        joined.columns_mut(col, b.ncols()).copy_from(b);
        col += b.ncols();
    }
    Ok(thin_svd(&joined).truncate(d).u)
}

/// `1 / σ̂`, where `σ̂²` is the mean per-coordinate variance of the fitted
/// components. Scaling a source by this puts its within-cluster noise on a
/// unit scale before fusion.
pub fn noise_weight(fit: &GmmFit) -> f64 {
    let q = fit.means.first().map_or(1, |m| m.len()) as f64;
    let var = fit.mean_covariance_trace() / q;
    1.0 / var.sqrt().max(f64::MIN_POSITIVE)
}
