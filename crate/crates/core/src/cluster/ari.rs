use super::Clustering;
use crate::error::{Result, RlgError};

fn choose2(x: f64) -> f64 {
    x * (x - 1.0) / 2.0
}

/// Adjusted Rand index. Two single-cluster (or all-singleton) clusterings
/// that agree score 1.
pub fn ari(a: &Clustering, b: &Clustering) -> Result<f64> {
    if a.len() != b.len() {
        return Err(RlgError::DimensionMismatch {
            expected: format!("{} items", a.len()),
            got: format!("{} items", b.len()),
        });
    }
    let n = a.len();
    if n < 2 {
        return Ok(1.0);
    }
    let (ka, kb) = (a.k(), b.k());
    let mut table = vec![0u64; ka * kb];
    for (&x, &y) in a.labels().iter().zip(b.labels()) {
        table[x * kb + y] += 1;
    }
    let index: f64 = table.iter().map(|&c| choose2(c as f64)).sum();
    let rows: f64 = a.sizes().iter().map(|&c| choose2(c as f64)).sum();
    let cols: f64 = b.sizes().iter().map(|&c| choose2(c as f64)).sum();
    let expected = rows * cols / choose2(n as f64);
    let max = 0.5 * (rows + cols);
    if max == expected {
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(labels: &[usize]) -> Clustering {
        Clustering::canonicalize(labels)
    }

    #[test]
    fn identical_and_permuted() {
        let a = c(&[0, 0, 1, 1, 2, 2, 2]);
        assert_eq!(ari(&a, &a).unwrap(), 1.0);
        let b = c(&[2, 2, 0, 0, 1, 1, 1]);
        assert!((ari(&a, &b).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn crossed_pairs() {
        let a = c(&[0, 0, 1, 1]);
        let b = c(&[0, 1, 0, 1]);
        assert!((ari(&a, &b).unwrap() + 0.5).abs() < 1e-15);
    }

    #[test]
    fn symmetric() {
        let a = c(&[0, 0, 1, 1, 2, 0, 1]);
        let b = c(&[1, 0, 1, 1, 0, 0, 2]);
        assert_eq!(ari(&a, &b).unwrap(), ari(&b, &a).unwrap());
    }

    #[test]
    fn mismatch() {
        assert!(ari(&c(&[0, 1]), &c(&[0, 1, 1])).is_err());
    }
}
