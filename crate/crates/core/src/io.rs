//! Text formats: edge lists, partition files, and the CSV outputs.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;

use crate::cluster::Clustering;
use crate::embedding::EmbeddingResult;
use crate::error::{Result, RlgError};
use crate::graph::Graph;
use crate::partition::InducedEdgePartition;

/// Non-empty, non-comment lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

fn parse_usize(field: Option<&str>, line: usize, what: &str) -> Result<usize> {
    field
        .ok_or_else(|| RlgError::Parse {
            line,
            msg: format!("missing {what}"),
        })?
        .parse()
        .map_err(|e| RlgError::Parse {
            line,
            msg: format!("bad {what}: {e}"),
        })
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| RlgError::Config(format!("cannot read {}: {e}", path.display())))
}

/// Header `n m`, then `m` lines `i j` with `i < j < n`.
pub fn parse_edge_list(text: &str) -> Result<Graph> {
    let mut lines = content_lines(text);
    let (hline, header) = lines.next().ok_or(RlgError::Parse {
        line: 1,
        msg: "missing `n m` header".into(),
    })?;
    let mut fields = header.split_whitespace();
    let n = parse_usize(fields.next(), hline, "vertex count")?;
    let m = parse_usize(fields.next(), hline, "edge count")?;
    if fields.next().is_some() {
        return Err(RlgError::Parse {
            line: hline,
            msg: "header has extra fields".into(),
        });
    }
    let mut edges = Vec::with_capacity(m);
    for (line, body) in lines {
        let mut f = body.split_whitespace();
        let i = parse_usize(f.next(), line, "endpoint")?;
        let j = parse_usize(f.next(), line, "endpoint")?;
        if f.next().is_some() {
            return Err(RlgError::Parse {
                line,
                msg: "edge line has extra fields".into(),
            });
        }
        if i >= j || j >= n {
            return Err(RlgError::Parse {
                line,
                msg: format!("edge ({i}, {j}) must satisfy i < j < {n}"),
            });
        }
        edges.push((i, j));
    }
    if edges.len() != m {
        return Err(RlgError::Parse {
            line: hline,
            msg: format!("header declares {m} edges, found {}", edges.len()),
        });
    }
    Graph::from_edges(n, &edges)
}

pub fn read_edge_list(path: &Path) -> Result<Graph> {
    parse_edge_list(&read(path)?)
}

pub fn edge_list_text(g: &Graph) -> String {
    let mut out = format!("{} {}\n", g.n(), g.edge_count());
    for (i, j) in g.edges() {
        writeln!(out, "{i} {j}").unwrap();
    }
    out
}

/// One `vertex_id cluster_id` line per vertex; cluster ids are relabeled to
/// `0..k` in increasing order.
pub fn parse_partition(text: &str, n: usize) -> Result<Clustering> {
    let mut ids: Vec<Option<usize>> = vec![None; n];
    for (line, body) in content_lines(text) {
        let mut f = body.split_whitespace();
        let v = parse_usize(f.next(), line, "vertex id")?;
        let c = parse_usize(f.next(), line, "cluster id")?;
        if f.next().is_some() {
            return Err(RlgError::Parse {
                line,
                msg: "partition line has extra fields".into(),
            });
        }
        if v >= n {
            return Err(RlgError::Parse {
                line,
                msg: format!("vertex {v} out of range for n = {n}"),
            });
        }
        if ids[v].replace(c).is_some() {
            return Err(RlgError::Parse {
                line,
                msg: format!("vertex {v} listed twice"),
            });
        }
    }
    if let Some(v) = ids.iter().position(Option::is_none) {
        return Err(RlgError::InvalidPartition(format!("vertex {v} has no cluster")));
    }
    let ids: Vec<usize> = ids.into_iter().map(|x| x.expect("checked")).collect();
    Ok(Clustering::from_ids(&ids))
}

pub fn read_partition(path: &Path, n: usize) -> Result<Clustering> {
    parse_partition(&read(path)?, n)
}

pub fn partition_text(c: &Clustering) -> String {
    let mut out = String::new();
    for (v, l) in c.labels().iter().enumerate() {
        writeln!(out, "{v} {l}").unwrap();
    }
    out
}

/// Header `edge_i,edge_j,block_r,block_s,x1..xd`.
pub fn embedding_csv(emb: &EmbeddingResult, part: &InducedEdgePartition) -> String {
    let d = emb.dim();
    let mut out = String::from("edge_i,edge_j,block_r,block_s");
    for c in 1..=d {
        write!(out, ",x{c}").unwrap();
    }
    out.push('\n');
    for (row, &(i, j)) in emb.edges.iter().enumerate() {
        let (r, s) = part.block_pair(part.block_of(i, j));
        write!(out, "{i},{j},{r},{s}").unwrap();
        for c in 0..d {
            write!(out, ",{}", emb.positions[(row, c)]).unwrap();
        }
        out.push('\n');
    }
    out
}

/// Header `edge_i,edge_j,c1..cq`, rows in edge order.
pub fn covariates_csv(g: &Graph, values: &DMatrix<f64>) -> Result<String> {
    if values.nrows() != g.edge_count() {
        return Err(RlgError::DimensionMismatch {
            expected: format!("{} rows", g.edge_count()),
            got: format!("{} rows", values.nrows()),
        });
    }
    let mut out = String::from("edge_i,edge_j");
    for c in 1..=values.ncols() {
        write!(out, ",c{c}").unwrap();
    }
    out.push('\n');
    for (row, (i, j)) in g.edges().iter().enumerate() {
        write!(out, "{i},{j}").unwrap();
        for c in 0..values.ncols() {
            write!(out, ",{}", values[(row, c)]).unwrap();
        }
        out.push('\n');
    }
    Ok(out)
}

/// Reads covariates and orders their rows like `g.edges()`.
pub fn parse_covariates(text: &str, g: &Graph) -> Result<DMatrix<f64>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or(RlgError::Parse {
        line: 1,
        msg: "missing header".into(),
    })?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols.len() < 3 || cols[0] != "edge_i" || cols[1] != "edge_j" {
        return Err(RlgError::Parse {
            line: 1,
            msg: "header must be edge_i,edge_j,c1..cq".into(),
        });
    }
    let q = cols.len() - 2;
    let mut values = DMatrix::from_element(g.edge_count(), q, f64::NAN);
    let mut seen = vec![false; g.edge_count()];
    for (idx, line) in lines {
        let line_no = idx + 1;
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != q + 2 {
            return Err(RlgError::Parse {
                line: line_no,
                msg: format!("expected {} fields", q + 2),
            });
        }
        let i = parse_usize(Some(f[0]), line_no, "edge_i")?;
        let j = parse_usize(Some(f[1]), line_no, "edge_j")?;
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        let row = crate::graph::edge_index(i, j, g.n())
            .ok()
            .and_then(|id| g.position_of(id))
            .ok_or(RlgError::Parse {
                line: line_no,
                msg: format!("({i}, {j}) is not an edge of the graph"),
            })?;
        if std::mem::replace(&mut seen[row], true) {
            return Err(RlgError::Parse {
                line: line_no,
                msg: format!("edge ({i}, {j}) repeated"),
            });
        }
        for c in 0..q {
            values[(row, c)] = f[c + 2].parse().map_err(|e| RlgError::Parse {
                line: line_no,
                msg: format!("bad value: {e}"),
            })?;
        }
    }
    if let Some(row) = seen.iter().position(|s| !s) {
        let (i, j) = g.edges()[row];
        return Err(RlgError::InvalidParameter(format!("no covariates for edge ({i}, {j})")));
    }
    Ok(values)
}

pub fn read_covariates(path: &Path, g: &Graph) -> Result<DMatrix<f64>> {
    parse_covariates(&read(path)?, g)
}

/// Header `eigenvalue`, one value per line.
pub fn spectrum_csv(values: &[f64]) -> String {
    let mut out = String::from("eigenvalue\n");
    for v in values {
        writeln!(out, "{v}").unwrap();
    }
    out
}
