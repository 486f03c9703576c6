use super::Clustering;
use crate::error::{Result, RlgError};
use crate::graph::{pair_of, Graph};

/// Vertex labels from edge labels, plus the vertices that had no incident
/// edge and fell back to label 0.
#[derive(Debug, Clone)]
pub struct VotingResult {
    pub partition: Clustering,
    pub isolated: Vec<usize>,
}

/// Edge labels are block columns: `l < k` is `(l, l)`, larger labels are the
/// off-diagonal pairs in lexicographic order. An edge labeled `(l, l)` gives
/// its endpoints two votes for `l`; one labeled `(l, p)` gives one vote each
/// for `l` and `p`. Ties go to the smaller label.
pub fn vertex_voting(edge_clusters: &Clustering, g: &Graph, k: usize) -> Result<VotingResult> {
    if edge_clusters.len() != g.edge_count() {
        return Err(RlgError::DimensionMismatch {
            expected: format!("{} edges", g.edge_count()),
            got: format!("{} edge labels", edge_clusters.len()),
        });
    }
    let blocks = k * (k + 1) / 2;
    if k == 0 || edge_clusters.k() > blocks {
        return Err(RlgError::InvalidParameter(format!(
            "{} edge labels cannot index the blocks of {k} clusters",
            edge_clusters.k()
        )));
    }
    let n = g.n();
    let mut votes = vec![0u64; n * k];
    for (&(i, j), &label) in g.edges().iter().zip(edge_clusters.labels()) {
        let (r, s) = if label < k { (label, label) } else { pair_of(label - k, k)? };
        for v in [i, j] {
            votes[v * k + r] += 1;
            votes[v * k + s] += 1;
        }
    }
    let mut labels = vec![0usize; n];
    let mut isolated = Vec::new();
    for v in 0..n {
        let row = &votes[v * k..(v + 1) * k];
        if row.iter().all(|&x| x == 0) {
            isolated.push(v);
            continue;
        }
        let mut best = 0;
        for l in 1..k {
            if row[l] > row[best] {
                best = l;
            }
        }
        labels[v] = best;
    }
    Ok(VotingResult {
        partition: Clustering::from_ids(&labels),
        isolated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::InducedEdgePartition;

    #[test]
    fn perfect_edges_recover_vertices() {
        let truth = Clustering::new((0..9).map(|v| v / 3).collect(), 3).unwrap();
        let part = InducedEdgePartition::new(&truth).unwrap();
        let g = Graph::complete(9);
        let edges = Clustering::new(part.edge_blocks(&g), 6).unwrap();
        let out = vertex_voting(&edges, &g, 3).unwrap();
        assert_eq!(out.partition, truth);
        assert!(out.isolated.is_empty());
    }

    #[test]
    fn one_edge_cluster() {
        let g = Graph::complete(5);
        let edges = Clustering::new(vec![0; 10], 1).unwrap();
        let out = vertex_voting(&edges, &g, 2).unwrap();
        assert!(out.partition.labels().iter().all(|&l| l == 0));
        assert_eq!(out.partition.k(), 1);
    }

    #[test]
    fn single_mislabel_is_outvoted() {
        let truth = Clustering::new((0..12).map(|v| v / 4).collect(), 3).unwrap();
        let part = InducedEdgePartition::new(&truth).unwrap();
        let g = Graph::complete(12);
        let clean = part.edge_blocks(&g);
        for e in 0..clean.len() {
            for wrong in 0..6 {
                let mut labels = clean.clone();
                labels[e] = wrong;
                let edges = Clustering::from_ids(&labels);
                // keep the block meaning of labels even if one goes unused
                let edges = if edges.k() == 6 { Clustering::new(labels, 6).unwrap() } else { continue };
                let out = vertex_voting(&edges, &g, 3).unwrap();
                assert_eq!(out.partition, truth);
            }
        }
    }

    #[test]
    fn isolated_vertices_flagged() {
        let g = Graph::from_edges(4, &[(0, 1)]).unwrap();
        let edges = Clustering::new(vec![0], 1).unwrap();
        let out = vertex_voting(&edges, &g, 1).unwrap();
        assert_eq!(out.isolated, vec![2, 3]);
    }
}
