use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Result, RlgError};
use crate::graph::Graph;
use crate::partition::InducedEdgePartition;
use crate::rng::rng_from_seed;

/// One covariate row per present edge, in edge order.
#[derive(Debug, Clone)]
pub struct CovariateSet {
    pub values: DMatrix<f64>,
    pub centers: DMatrix<f64>,
    pub sigma: f64,
}

/// Six points in `R^3`: the unit vectors and their pairwise sums.
pub fn default_centers() -> DMatrix<f64> {
    DMatrix::from_row_slice(
        6,
        3,
        &[
            1.0, 0.0, 0.0, //
            0.0, 1.0, 0.0, //
            0.0, 0.0, 1.0, //
            1.0, 1.0, 0.0, //
            1.0, 0.0, 1.0, //
            0.0, 1.0, 1.0,
        ],
    )
}

/// Row for edge `e` is `centers[block(e)] + N(0, σ² I)`.
pub fn generate_edge_covariates(
    part: &InducedEdgePartition,
    g: &Graph,
    centers: &DMatrix<f64>,
    sigma: f64,
    seed: u64,
) -> Result<CovariateSet> {
    if centers.nrows() != part.num_blocks() {
        return Err(RlgError::DimensionMismatch {
            expected: format!("{} centers", part.num_blocks()),
            got: format!("{} centers", centers.nrows()),
        });
    }
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(RlgError::InvalidParameter(format!("noise scale {sigma}")));
    }
    if g.n() != part.n() {
        return Err(RlgError::DimensionMismatch {
            expected: format!("{} vertices", part.n()),
            got: format!("{} vertices", g.n()),
        });
    }
    let q = centers.ncols();
    let blocks = part.edge_blocks(g);
    let mut rng = rng_from_seed(seed);
    let mut values = DMatrix::zeros(blocks.len(), q);
    for (row, &b) in blocks.iter().enumerate() {
        for c in 0..q {
            let noise: f64 = StandardNormal.sample(&mut rng);
            values[(row, c)] = centers[(b, c)] + sigma * noise;
        }
    }
    Ok(CovariateSet {
        values,
        centers: centers.clone(),
        sigma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{sample_sbm, SbmModel};

    fn setup() -> (InducedEdgePartition, Graph) {
        let model = SbmModel::planted(&[30, 30, 30], 0.5, 0.2).unwrap();
        let g = sample_sbm(&model, 1);
        (InducedEdgePartition::from_model(&model).unwrap(), g)
    }

    #[test]
    fn zero_noise_gives_centers() {
        let (part, g) = setup();
        let set = generate_edge_covariates(&part, &g, &default_centers(), 0.0, 3).unwrap();
        assert_eq!(set.values.nrows(), g.edge_count());
        for (row, b) in part.edge_blocks(&g).into_iter().enumerate() {
            assert_eq!(set.values.row(row), set.centers.row(b));
        }
    }

    #[test]
    fn block_means_near_centers() {
        let (part, g) = setup();
        let sigma = 0.7;
        let set = generate_edge_covariates(&part, &g, &default_centers(), sigma, 4).unwrap();
        let blocks = part.edge_blocks(&g);
        let counts = part.observed_sizes(&g);
        for b in 0..6 {
            for c in 0..3 {
                let sum: f64 = blocks
                    .iter()
                    .enumerate()
                    .filter(|(_, &x)| x == b)
                    .map(|(r, _)| set.values[(r, c)])
                    .sum();
                let mean = sum / counts[b] as f64;
                assert!((mean - set.centers[(b, c)]).abs() <= 4.0 * sigma / (counts[b] as f64).sqrt());
            }
        }
    }

    #[test]
    fn wrong_center_count() {
        let (part, g) = setup();
        assert!(generate_edge_covariates(&part, &g, &DMatrix::zeros(5, 3), 0.1, 0).is_err());
        assert!(generate_edge_covariates(&part, &g, &default_centers(), -1.0, 0).is_err());
    }
}
