use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use super::config::ExperimentConfig;
use crate::cluster::{
    ari, ase_vertex_partition, noise_weight, default_centers, generate_edge_covariates, gmm_fit, scaled_embedding,
    scmase_fuse, Clustering,
};
use crate::embedding::{
    core_residual, estimate_edge_positions, h_matrix, naive_line_embedding, projected_line_matrix, row_normalized,
    singular_vector_residual, EmbeddingResult,
};
use crate::error::Result;
use crate::graph::{sample_sbm, Graph, SbmModel};
use crate::partition::{block_means, InducedEdgePartition};
use crate::rng::{derive_seed, Purpose};
use crate::spectral::{concentration_bounds, extreme_line_eigenvalues, ConcentrationReport};

/// Seed for the `index`-th clustering run of a replicate.
fn gmm_seed(base: u64, replicate: usize, index: u64) -> u64 {
    derive_seed(derive_seed(base, replicate as u64, Purpose::Gmm), index, Purpose::Other(2))
}

/// Seed for a replicate within the `setting`-th parameter setting.
fn setting_seed(base: u64, setting: usize, replicate: usize, purpose: Purpose) -> u64 {
    derive_seed(derive_seed(base, setting as u64, Purpose::Other(1)), replicate as u64, purpose)
}

/// True edge clustering: block column of each present edge.
pub fn edge_truth(g: &Graph, part: &InducedEdgePartition) -> Clustering {
    Clustering::from_ids(&part.edge_blocks(g))
}

/// Mixture clustering of `points` into `k` groups, scored against `truth`.
pub fn cluster_ari(points: &DMatrix<f64>, k: usize, truth: &Clustering, seed: u64, unit_rows: bool) -> Result<f64> {
    let x = if unit_rows { row_normalized(points) } else { points.clone() };
    let fit = gmm_fit(&x, k.min(x.nrows()), seed)?;
    ari(&fit.clustering, truth)
}

/// Like [`cluster_ari`], also returning the noise weight of `points` as
/// seen by a mixture fit on the raw rows.
fn cluster_ari_weighted(
    points: &DMatrix<f64>,
    k: usize,
    truth: &Clustering,
    seed: u64,
    unit_rows: bool,
) -> Result<(f64, f64)> {
    let k = k.min(points.nrows());
    let raw = gmm_fit(points, k, seed)?;
    let score = if unit_rows {
        ari(&gmm_fit(&row_normalized(points), k, seed)?.clustering, truth)?
    } else {
        ari(&raw.clustering, truth)?
    };
    Ok((score, noise_weight(&raw)))
}

fn replicate_graph(cfg: &ExperimentConfig, model: &SbmModel, r: usize) -> Graph {
    sample_sbm(model, derive_seed(cfg.seed, r as u64, Purpose::Graph))
}

#[derive(Debug, Clone, Serialize)]
pub struct VectorAri {
    pub replicate: usize,
    /// 1-based singular-vector indices.
    pub vectors: (usize, usize),
    pub ari: f64,
}

fn pair_aris(
    emb: &EmbeddingResult,
    pairs: &[(usize, usize)],
    truth: &Clustering,
    k_edges: usize,
    cfg: &ExperimentConfig,
    r: usize,
) -> Result<Vec<VectorAri>> {
    pairs
        .iter()
        .enumerate()
        .map(|(i, &(a, b))| {
            let x = emb.columns(&[a - 1, b - 1]);
            Ok(VectorAri {
                replicate: r,
                vectors: (a, b),
                ari: cluster_ari(&x, k_edges, truth, gmm_seed(cfg.seed, r, i as u64), cfg.unit_rows)?,
            })
        })
        .collect()
}

/// Projected embedding with the true partition; singular-vector pairs
/// (2,3), (1,2) and (1,3).
pub fn fig1_replicate(cfg: &ExperimentConfig, r: usize) -> Result<(EmbeddingResult, Vec<VectorAri>)> {
    let model = cfg.model()?;
    let part = InducedEdgePartition::from_model(&model)?;
    let g = replicate_graph(cfg, &model, r);
    let emb = estimate_edge_positions(&g, &part, cfg.embed_dim.min(part.num_blocks()))?;
    let truth = edge_truth(&g, &part);
    let pairs = [(2, 3), (1, 2), (1, 3)];
    let pairs: Vec<_> = pairs.into_iter().filter(|&(_, b)| b <= emb.dim()).collect();
    let aris = pair_aris(&emb, &pairs, &truth, part.num_blocks(), cfg, r)?;
    Ok((emb, aris))
}

/// Naive top singular vectors of `A(L(G))`; every pair among the top three.
pub fn fig2_replicate(cfg: &ExperimentConfig, r: usize) -> Result<(EmbeddingResult, Vec<VectorAri>)> {
    let model = cfg.model()?;
    let part = InducedEdgePartition::from_model(&model)?;
    let g = replicate_graph(cfg, &model, r);
    let emb = naive_line_embedding(&g, cfg.embed_dim.min(g.edge_count()))?;
    let truth = edge_truth(&g, &part);
    let pairs = [(1, 2), (1, 3), (2, 3)];
    let pairs: Vec<_> = pairs.into_iter().filter(|&(_, b)| b <= emb.dim()).collect();
    let aris = pair_aris(&emb, &pairs, &truth, part.num_blocks(), cfg, r)?;
    Ok((emb, aris))
}

pub fn fig1_records(cfg: &ExperimentConfig) -> Result<Vec<VectorAri>> {
    let per: Vec<Vec<VectorAri>> =
        (0..cfg.replicates).into_par_iter().map(|r| fig1_replicate(cfg, r).map(|x| x.1)).collect::<Result<_>>()?;
    Ok(per.into_iter().flatten().collect())
}

pub fn fig2_records(cfg: &ExperimentConfig) -> Result<Vec<VectorAri>> {
    let per: Vec<Vec<VectorAri>> =
        (0..cfg.replicates).into_par_iter().map(|r| fig2_replicate(cfg, r).map(|x| x.1)).collect::<Result<_>>()?;
    Ok(per.into_iter().flatten().collect())
}

/// The five edge-clustering pipelines compared across covariate noise levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Fig3Method {
    /// Edge partition induced by the ASE vertex clustering.
    InducedAse,
    /// Fusion of covariates with the top singular vectors of `A(L(G))`.
    FusedNaive,
    /// Fusion of covariates with the top singular vectors of `A(L(G)) Q̂`.
    FusedProjection,
    /// Top singular vectors of `A(L(G)) Q̂` alone.
    Projection,
    /// Singular value decomposition of the covariates alone.
    Covariates,
}

impl Fig3Method {
    pub const ALL: [Fig3Method; 5] = [
        Fig3Method::InducedAse,
        Fig3Method::FusedNaive,
        Fig3Method::FusedProjection,
        Fig3Method::Projection,
        Fig3Method::Covariates,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Fig3Method::InducedAse => "induced-ase",
            Fig3Method::FusedNaive => "fused-naive",
            Fig3Method::FusedProjection => "fused-projection",
            Fig3Method::Projection => "projection",
            Fig3Method::Covariates => "covariates",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Fig3Row {
    pub sigma: f64,
    pub method: Fig3Method,
    pub replicate: usize,
    pub ari: f64,
}

/// Moves vertices of clusters smaller than two into the largest cluster and
/// relabels, so the estimate can induce an edge partition.
pub fn usable_partition(est: &Clustering) -> Clustering {
    let sizes = est.sizes();
    if sizes.iter().all(|&s| s >= 2) {
        return est.clone();
    }
    let largest = (0..sizes.len()).max_by_key(|&l| (sizes[l], std::cmp::Reverse(l))).unwrap_or(0);
    let labels: Vec<usize> = est.labels().iter().map(|&l| if sizes[l] < 2 { largest } else { l }).collect();
    Clustering::from_ids(&labels)
}

/// All five methods at every noise level for replicate `r`, ordered by
/// noise level then method.
pub fn fig3_replicate(cfg: &ExperimentConfig, r: usize) -> Result<Vec<Fig3Row>> {
    let model = cfg.model()?;
    let truth_part = InducedEdgePartition::from_model(&model)?;
    let k_edges = truth_part.num_blocks();
    let g = replicate_graph(cfg, &model, r);
    let truth = edge_truth(&g, &truth_part);

    let estimate = ase_vertex_partition(&g, cfg.ase_dim.min(g.n()), model.k(), gmm_seed(cfg.seed, r, 0))?;
    let est_part = InducedEdgePartition::new(&usable_partition(&estimate))?;
    let induced = ari(&Clustering::from_ids(&est_part.edge_blocks(&g)), &truth)?;

    let dims = cfg.embed_dim.min(est_part.num_blocks());
    let projected = scaled_embedding(&projected_line_matrix(&g, &est_part)?, Some(dims));
    let naive = naive_line_embedding(&g, cfg.embed_dim.min(g.edge_count()))?.scaled();
    let (projection_only, projected_weight) =
        cluster_ari_weighted(&projected, k_edges, &truth, gmm_seed(cfg.seed, r, 1), cfg.unit_rows)?;
    let naive_weight = match cfg.line_weight {
        Some(w) => w,
        None => noise_weight(&gmm_fit(&naive, k_edges.min(naive.nrows()), gmm_seed(cfg.seed, r, 2))?),
    };
    let projected_weight = cfg.line_weight.unwrap_or(projected_weight);

    let centers = default_centers();
    let mut rows = Vec::with_capacity(cfg.sigmas.len() * Fig3Method::ALL.len());
    for (s, &sigma) in cfg.sigmas.iter().enumerate() {
        let cov_seed = derive_seed(derive_seed(cfg.seed, r as u64, Purpose::Covariate), s as u64, Purpose::Covariate);
        let covs = generate_edge_covariates(&truth_part, &g, &centers, sigma, cov_seed)?;
        let cov_points = scaled_embedding(&covs.values, None);
        let salt = 10 + 4 * s as u64;
        let cov_fit = gmm_fit(&cov_points, k_edges, gmm_seed(cfg.seed, r, salt))?;
        let cov_ari = ari(&cov_fit.clustering, &truth)?;
        let weight = cfg.covariate_weight.unwrap_or_else(|| noise_weight(&cov_fit));

        let fuse = |line: &DMatrix<f64>, line_weight: f64, salt: u64| -> Result<f64> {
            let fused = scmase_fuse(
                &[(line.clone(), line_weight), (covs.values.clone(), weight)],
                cfg.fused_dim.min(line.ncols() + covs.values.ncols()),
            )?;
            cluster_ari(&fused, k_edges, &truth, gmm_seed(cfg.seed, r, salt), cfg.unit_rows)
        };
        let fused_naive = fuse(&naive, naive_weight, salt + 1)?;
        let fused_projection = fuse(&projected, projected_weight, salt + 2)?;

        for method in Fig3Method::ALL {
            let value = match method {
                Fig3Method::InducedAse => induced,
                Fig3Method::FusedNaive => fused_naive,
                Fig3Method::FusedProjection => fused_projection,
                Fig3Method::Projection => projection_only,
                Fig3Method::Covariates => cov_ari,
            };
            rows.push(Fig3Row {
                sigma,
                method,
                replicate: r,
                ari: value,
            });
        }
    }
    Ok(rows)
}

/// Rows ordered by noise level, then method, then replicate.
pub fn fig3_records(cfg: &ExperimentConfig) -> Result<Vec<Fig3Row>> {
    let per: Vec<Vec<Fig3Row>> =
        (0..cfg.replicates).into_par_iter().map(|r| fig3_replicate(cfg, r)).collect::<Result<_>>()?;
    let methods = Fig3Method::ALL.len();
    let mut out = Vec::with_capacity(per.len() * cfg.sigmas.len() * methods);
    for s in 0..cfg.sigmas.len() {
        for m in 0..methods {
            for rows in &per {
                out.push(rows[s * methods + m].clone());
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct ExtremeRecord {
    pub p: f64,
    pub replicate: usize,
    pub lambda_1: f64,
    pub lambda_n: f64,
}

/// Extreme line-graph eigenvalues of homogeneous graphs and the matching
/// bound reports, one per edge probability.
pub fn concentration_records(cfg: &ExperimentConfig) -> Result<(Vec<ExtremeRecord>, Vec<ConcentrationReport>)> {
    let mut records = Vec::new();
    let mut reports = Vec::new();
    for (i, &p) in cfg.p_values.iter().enumerate() {
        let model = SbmModel::planted(&[cfg.n], p, p)?;
        let extremes: Vec<(f64, f64)> = (0..cfg.replicates)
            .into_par_iter()
            .map(|r| extreme_line_eigenvalues(&sample_sbm(&model, setting_seed(cfg.seed, i, r, Purpose::Graph))))
            .collect::<Result<_>>()?;
        for (r, &(l1, ln)) in extremes.iter().enumerate() {
            records.push(ExtremeRecord {
                p,
                replicate: r,
                lambda_1: l1,
                lambda_n: ln,
            });
        }
        reports.push(concentration_bounds(cfg.n, p, p, cfg.t_low, cfg.t_high)?.with_empirical(&extremes));
    }
    Ok((records, reports))
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayRecord {
    pub n: usize,
    pub replicate: usize,
    /// `min_O ‖Û - U O‖_F`.
    pub residual: f64,
    /// `‖H‖_F`.
    pub h_norm: f64,
    /// `‖Q̂^T A(L(G)) Q̂ - diag(μ) M diag(μ)‖_F`.
    pub core_residual: f64,
}

/// Splits `n` vertices into `k` nearly equal clusters.
pub fn balanced_sizes(n: usize, k: usize) -> Vec<usize> {
    (0..k).map(|r| n / k + usize::from(r < n % k)).collect()
}

pub fn decay_records(cfg: &ExperimentConfig) -> Result<Vec<DecayRecord>> {
    let k = cfg.k();
    let mut out = Vec::new();
    for (i, &n) in cfg.n_grid.iter().enumerate() {
        let model = cfg.model_with_sizes(&balanced_sizes(n, k))?;
        let part = InducedEdgePartition::from_model(&model)?;
        let means = block_means(&part, model.block_matrix());
        let rows: Vec<DecayRecord> = (0..cfg.replicates)
            .into_par_iter()
            .map(|r| {
                let g = sample_sbm(&model, setting_seed(cfg.seed, i, r, Purpose::Graph));
                Ok(DecayRecord {
                    n,
                    replicate: r,
                    residual: singular_vector_residual(&g, &part, &means, k, cfg.unit_rows)?,
                    h_norm: h_matrix(&g, &part, &means)?.norm(),
                    core_residual: core_residual(&g, &part, &means)?,
                })
            })
            .collect::<Result<_>>()?;
        out.extend(rows);
    }
    Ok(out)
}
