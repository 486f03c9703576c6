//! Vertex and edge clusterings, Gaussian mixtures, covariates and fusion.

pub mod ari;
pub mod ase;
pub mod covariates;
pub mod fusion;
pub mod gmm;
pub mod voting;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Result, RlgError};

pub use ari::ari;
pub use ase::{adjacency_spectral_embedding, ase_vertex_partition};
pub use covariates::{default_centers, generate_edge_covariates, CovariateSet};
pub use fusion::{noise_weight, scaled_embedding, scmase_fuse};
pub use gmm::{gmm_fit, gmm_fit_with, GmmFit, GmmOptions};
pub use voting::{vertex_voting, VotingResult};

/// Hard cluster assignment with labels `0..k`, each used at least once.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clustering {
    labels: Vec<usize>,
    k: usize,
}

impl Clustering {
    pub fn new(labels: Vec<usize>, k: usize) -> Result<Self> {
        let mut used = vec![false; k];
        for &l in &labels {
            if l >= k {
                return Err(RlgError::InvalidPartition(format!("label {l} out of range for k = {k}")));
            }
            used[l] = true;
        }
        if let Some(l) = used.iter().position(|u| !u) {
            return Err(RlgError::InvalidPartition(format!("label {l} is unused")));
        }
        Ok(Clustering { labels, k })
    }

    /// Relabels arbitrary ids to `0..k` preserving their numeric order.
    pub fn from_ids<T: Ord + Copy>(ids: &[T]) -> Self {
        let mut map = BTreeMap::new();
        for &id in ids {
            map.entry(id).or_insert(0usize);
        }
        for (next, v) in map.values_mut().enumerate() {
            *v = next;
        }
        let k = map.len();
        Clustering { labels: ids.iter().map(|id| map[id]).collect(), k }
    }

    /// Relabels by order of first appearance.
    pub fn canonicalize(labels: &[usize]) -> Self {
        let mut map = BTreeMap::new();
        let out = labels
            .iter()
            .map(|l| {
                let next = map.len();
                *map.entry(*l).or_insert(next)
            })
            .collect();
        Clustering { labels: out, k: map.len() }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.k];
        for &l in &self.labels {
            s[l] += 1;
        }
        s
    }

    pub fn into_labels(self) -> Vec<usize> {
        self.labels
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validates_labels() {
        assert!(Clustering::new(vec![0, 2], 3).is_err());
        assert!(Clustering::new(vec![0, 3], 3).is_err());
        assert!(Clustering::new(vec![1, 0, 1], 2).is_ok());
    }

    #[test]
    fn relabeling() {
        let c = Clustering::from_ids(&[10, 4, 10, 7]);
        assert_eq!(c.labels(), &[2, 0, 2, 1]);
        let c = Clustering::canonicalize(&[5, 5, 2, 9, 2]);
        assert_eq!(c.labels(), &[0, 0, 1, 2, 1]);
        assert_eq!(c.sizes(), vec![2, 2, 1]);
    }
}
