use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rlg_core::cluster::{
    ase_vertex_partition, noise_weight, gmm_fit, scaled_embedding, scmase_fuse, vertex_voting, Clustering,
};
use rlg_core::embedding::{estimate_edge_positions, naive_line_embedding, padded_embedding, projected_line_matrix};
use rlg_core::io::{embedding_csv, read_covariates, read_edge_list, read_partition, spectrum_csv};
use rlg_core::spectral::{line_spectrum_dense, line_spectrum_via_transfer};
use rlg_core::{run_experiment, ExperimentConfig, ExperimentKind, InducedEdgePartition, Result, RlgError};

#[derive(Parser)]
#[command(name = "rlg", version, about = "Spectral inference on random line graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Line-graph spectrum of an edge list, one eigenvalue per line.
    Spectrum {
        #[arg(long)]
        graph: PathBuf,
        /// Eigendecompose the n x n signless Laplacian (default).
        #[arg(long, conflicts_with = "dense")]
        transfer: bool,
        /// Eigendecompose the line-graph adjacency directly.
        #[arg(long)]
        dense: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Edge latent positions for a graph and a vertex partition.
    Embed {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        partition: PathBuf,
        #[arg(long, default_value_t = 3)]
        dim: usize,
        #[arg(long, value_enum, default_value_t = Mode::Projected)]
        mode: Mode,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Cluster the edges of a graph, optionally fusing edge covariates.
    Cluster(ClusterArgs),
    Fig1(ExperimentArgs),
    Fig2(ExperimentArgs),
    Fig3(ExperimentArgs),
    Concentration(ExperimentArgs),
    #[command(name = "thm2-decay")]
    Thm2Decay(ExperimentArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Projected,
    Naive,
    Padded,
}

#[derive(Args)]
struct Overrides {
    /// Base seed; falls back to the config, then RLG_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Optional JSON config; its experiment id is replaced by the subcommand.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args)]
struct ClusterArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Number of vertex clusters.
    #[arg(long)]
    clusters: usize,
    /// Vertex partition; estimated by adjacency spectral embedding if absent.
    #[arg(long)]
    partition: Option<PathBuf>,
    /// Edge covariates CSV (`edge_i,edge_j,c1..cq`).
    #[arg(long)]
    covariates: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    dim: usize,
    #[arg(long, default_value_t = 3)]
    ase_dim: usize,
    /// Skip the projection and embed the line graph directly.
    #[arg(long)]
    naive: bool,
    #[arg(long, env = "RLG_SEED", default_value_t = 0)]
    seed: u64,
    /// Edge labels, `edge_i,edge_j,cluster`.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Vertex labels by edge voting, `vertex_id cluster_id`.
    #[arg(long)]
    vertex_output: Option<PathBuf>,
}

fn emit(output: Option<&Path>, body: &str) -> Result<()> {
    match output {
        Some(p) => std::fs::write(p, body)?,
        None => print!("{body}"),
    }
    Ok(())
}

fn env_seed() -> Result<Option<u64>> {
    match std::env::var("RLG_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| RlgError::Config(format!("RLG_SEED `{v}` is not an unsigned integer"))),
        Err(_) => Ok(None),
    }
}

fn load_config(path: Option<&Path>, kind: Option<ExperimentKind>, o: &Overrides) -> Result<ExperimentConfig> {
    let (mut cfg, has_seed) = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| RlgError::Config(format!("{}: {e}", p.display())))?;
            let raw: serde_json::Value = serde_json::from_str(&text).map_err(|e| RlgError::Config(e.to_string()))?;
            let has_seed = raw.get("seed").is_some();
            let mut raw = raw;
            if let (Some(k), Some(obj)) = (kind, raw.as_object_mut()) {
                obj.insert("experiment".into(), serde_json::Value::String(k.name().into()));
            }
            let cfg: ExperimentConfig =
                serde_json::from_value(raw).map_err(|e| RlgError::Config(e.to_string()))?;
            (cfg, has_seed)
        }
        None => (ExperimentConfig::for_experiment(kind.unwrap_or(ExperimentKind::Fig1)), false),
    };
    if let Some(seed) = o.seed {
        cfg.seed = seed;
    } else if !has_seed {
        if let Some(seed) = env_seed()? {
            cfg.seed = seed;
        }
    }
    if let Some(r) = o.replicates {
        cfg.replicates = r;
    }
    if let Some(dir) = &o.output_dir {
        cfg.output_dir = dir.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn experiment(cfg: ExperimentConfig) -> Result<()> {
    for f in run_experiment(&cfg)? {
        println!("{}", f.display());
    }
    Ok(())
}

fn cluster(a: &ClusterArgs) -> Result<()> {
    let g = read_edge_list(&a.graph)?;
    let vertices = match &a.partition {
        Some(p) => read_partition(p, g.n())?,
        None => ase_vertex_partition(&g, a.ase_dim.min(g.n()), a.clusters, a.seed)?,
    };
    let part = InducedEdgePartition::new(&vertices)?;
    let k_edges = a.clusters * (a.clusters + 1) / 2;
    let line = if a.naive {
        naive_line_embedding(&g, a.dim)?.scaled()
    } else {
        scaled_embedding(&projected_line_matrix(&g, &part)?, Some(a.dim.min(part.num_blocks())))
    };
    let points = match &a.covariates {
        Some(path) => {
            let covs = read_covariates(path, &g)?;
            let fit = gmm_fit(&scaled_embedding(&covs, None), k_edges, a.seed)?;
            scmase_fuse(&[(line.clone(), noise_weight(&gmm_fit(&line, k_edges.min(line.nrows()), a.seed)?)), (covs, noise_weight(&fit))], a.dim)?
        }
        None => line,
    };
    let edges = gmm_fit(&points, k_edges, a.seed)?.clustering;
    let mut body = String::from("edge_i,edge_j,cluster\n");
    for ((i, j), l) in g.edges().iter().zip(edges.labels()) {
        body += &format!("{i},{j},{l}\n");
    }
    emit(a.output.as_deref(), &body)?;
    if let Some(path) = &a.vertex_output {
        let voted = vertex_voting(&Clustering::from_ids(edges.labels()), &g, a.clusters)?;
        if !voted.isolated.is_empty() {
            eprintln!("warning: {} isolated vertices labeled 0", voted.isolated.len());
        }
        std::fs::write(path, rlg_core::io::partition_text(&voted.partition))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { config, overrides } => experiment(load_config(Some(&config), None, &overrides)?),
        Command::Spectrum { graph, dense, output, .. } => {
            let g = read_edge_list(&graph)?;
            let s = if dense { line_spectrum_dense(&g)? } else { line_spectrum_via_transfer(&g)? };
            emit(output.as_deref(), &spectrum_csv(&s.eigenvalues))
        }
        Command::Embed { graph, partition, dim, mode, output } => {
            let g = read_edge_list(&graph)?;
            let part = InducedEdgePartition::new(&read_partition(&partition, g.n())?)?;
            let emb = match mode {
                Mode::Projected => estimate_edge_positions(&g, &part, dim)?,
                Mode::Naive => naive_line_embedding(&g, dim)?,
                Mode::Padded => padded_embedding(&g, &part, dim)?,
            };
            emit(output.as_deref(), &embedding_csv(&emb, &part))
        }
        Command::Cluster(a) => cluster(&a),
        Command::Fig1(a) => experiment(load_config(a.config.as_deref(), Some(ExperimentKind::Fig1), &a.overrides)?),
        Command::Fig2(a) => experiment(load_config(a.config.as_deref(), Some(ExperimentKind::Fig2), &a.overrides)?),
        Command::Fig3(a) => experiment(load_config(a.config.as_deref(), Some(ExperimentKind::Fig3), &a.overrides)?),
        Command::Concentration(a) => {
            experiment(load_config(a.config.as_deref(), Some(ExperimentKind::Concentration), &a.overrides)?)
        }
        Command::Thm2Decay(a) => {
            experiment(load_config(a.config.as_deref(), Some(ExperimentKind::Thm2Decay), &a.overrides)?)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 3 } else { 2 })
        }
    }
}
