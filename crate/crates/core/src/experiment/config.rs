use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Result, RlgError};
use crate::graph::SbmModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExperimentKind {
    #[serde(rename = "fig1")]
    Fig1,
    #[serde(rename = "fig2")]
    Fig2,
    #[serde(rename = "fig3")]
    Fig3,
    #[serde(rename = "concentration")]
    Concentration,
    #[serde(rename = "thm2-decay")]
    Thm2Decay,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Fig1 => "fig1",
            ExperimentKind::Fig2 => "fig2",
            ExperimentKind::Fig3 => "fig3",
            ExperimentKind::Concentration => "concentration",
            ExperimentKind::Thm2Decay => "thm2-decay",
        }
    }
}

impl std::str::FromStr for ExperimentKind {
    type Err = RlgError;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| RlgError::Config(format!("unknown experiment id `{s}`")))
    }
}

/// `count` points spaced evenly in log scale over `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

/// Flat JSON record of one experiment. Unset keys take the defaults below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub cluster_sizes: Vec<usize>,
    pub p_within: f64,
    pub p_between: f64,
    /// Full symmetric block matrix; overrides `p_within` / `p_between`.
    pub block_matrix: Option<Vec<Vec<f64>>>,
    pub replicates: usize,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub sigmas: Vec<f64>,
    /// Vertex count for the concentration experiment.
    pub n: usize,
    pub p_values: Vec<f64>,
    pub t_low: f64,
    pub t_high: f64,
    /// Total vertex counts for the decay experiment, split evenly.
    pub n_grid: Vec<usize>,
    pub ase_dim: usize,
    pub embed_dim: usize,
    pub fused_dim: usize,
    /// Fixed line-graph weight; when unset it is `1/σ̂` from the fit on the
    /// line-graph embedding alone.
    pub line_weight: Option<f64>,
    /// Fixed covariate weight; when unset it is `1/σ̂` from the covariate fit.
    pub covariate_weight: Option<f64>,
    /// Fit the mixtures on row-normalized embeddings.
    pub unit_rows: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: ExperimentKind::Fig1,
            cluster_sizes: vec![50, 50, 50],
            p_within: 0.5,
            p_between: 0.2,
            block_matrix: None,
            replicates: 20,
            seed: 0,
            output_dir: PathBuf::from("out"),
            sigmas: log_grid(0.05, 2.0, 8),
            n: 100,
            p_values: vec![0.2, 0.5],
            t_low: 0.1,
            t_high: 3.0,
            n_grid: vec![60, 90, 120, 150],
            ase_dim: 3,
            embed_dim: 3,
            fused_dim: 3,
            line_weight: None,
            covariate_weight: None,
            unit_rows: false,
        }
    }
}

impl ExperimentConfig {
    pub fn for_experiment(kind: ExperimentKind) -> Self {
        ExperimentConfig {
            experiment: kind,
            replicates: if matches!(kind, ExperimentKind::Concentration) { 200 } else { 20 },
            ..Self::default()
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| RlgError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RlgError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(RlgError::Config(msg));
        if self.replicates == 0 {
            return bad("replicates must be at least 1".into());
        }
        let prob = |p: f64| (0.0..=1.0).contains(&p);
        match self.experiment {
            ExperimentKind::Fig3 if self.sigmas.is_empty() => return bad("sigma grid is empty".into()),
            ExperimentKind::Concentration => {
                if self.n < 3 {
                    return bad(format!("n = {} < 3", self.n));
                }
                if self.p_values.is_empty() || self.p_values.iter().any(|&p| !(p > 0.0 && p <= 1.0)) {
                    return bad("p_values must be nonempty and in (0, 1]".into());
                }
            }
            ExperimentKind::Thm2Decay if self.n_grid.is_empty() => return bad("n_grid is empty".into()),
            _ => {}
        }
        if self.sigmas.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return bad("sigmas must be finite and nonnegative".into());
        }
        if !prob(self.p_within) || !prob(self.p_between) {
            return bad("edge probabilities must lie in [0, 1]".into());
        }
        if self.cluster_sizes.is_empty() {
            return bad("cluster_sizes is empty".into());
        }
        if self.ase_dim == 0 || self.embed_dim == 0 || self.fused_dim == 0 {
            return bad("dimensions must be positive".into());
        }
        for (name, w) in [("line_weight", self.line_weight), ("covariate_weight", self.covariate_weight)] {
            if w.is_some_and(|w| !(w.is_finite() && w >= 0.0)) {
                return bad(format!("{name} must be finite and nonnegative"));
            }
        }
        self.block_probabilities()?;
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.cluster_sizes.len()
    }

    pub fn block_probabilities(&self) -> Result<DMatrix<f64>> {
        let k = self.k();
        match &self.block_matrix {
            Some(rows) => {
                if rows.len() != k || rows.iter().any(|r| r.len() != k) {
                    return Err(RlgError::Config(format!("block_matrix must be {k} x {k}")));
                }
                Ok(DMatrix::from_fn(k, k, |r, c| rows[r][c]))
            }
            None => Ok(DMatrix::from_fn(k, k, |r, c| if r == c { self.p_within } else { self.p_between })),
        }
    }

    /// The block model with clusters laid out contiguously.
    pub fn model(&self) -> Result<SbmModel> {
        self.model_with_sizes(&self.cluster_sizes)
    }

    pub fn model_with_sizes(&self, sizes: &[usize]) -> Result<SbmModel> {
        let labels = sizes.iter().enumerate().flat_map(|(r, &s)| std::iter::repeat_n(r, s)).collect();
        SbmModel::new(labels, self.block_probabilities()?)
    }
}
