//! Dataset files: adjacency matrices (dense CSV or edge lists), covariate
//! manifests and node-to-edge covariate construction.

use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use netpls_core::io::{matrix_from_csv, matrix_to_csv};
use netpls_core::model::{Adjacency, EdgeCovariates};
use netpls_core::simulate::{edge_covariates_from_nodes, NodeCovariate};

use crate::errors::{CliError, CliResult};

/// Where a covariate is observed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CovariateLevel {
    Node,
    Edge,
}

/// Scale of a covariate. Node-level quantitative values become absolute
/// differences; node-level categorical values become equality indicators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CovariateKind {
    Quantitative,
    Categorical,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CovariateEntry {
    pub name: String,
    pub level: CovariateLevel,
    pub kind: CovariateKind,
    /// Path to the data file, relative to the manifest.
    pub path: String,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Provenance {
    #[serde(default)]
    pub sources: Vec<String>,
    /// Human-readable construction log: which node covariates became which
    /// edge covariates and how.
    #[serde(default)]
    pub log: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CovariateManifest {
    pub schema_version: u32,
    pub covariates: Vec<CovariateEntry>,
    #[serde(default)]
    pub provenance: Provenance,
}

/// In-memory dataset: adjacency plus edge covariates with names and a
/// construction log.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub adjacency: Adjacency,
    pub edge_covariates: EdgeCovariates,
    pub covariate_names: Vec<String>,
    pub provenance: Provenance,
}

fn read_to_string(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

/// Reads an adjacency file: first as a dense 0/1 CSV, falling back to a
/// 1-indexed "i,j" edge list when the dense reading fails.
pub fn load_adjacency(path: &Path) -> CliResult<Adjacency> {
    let text = read_to_string(path)?;
    let dense_err = match matrix_from_csv(&text) {
        Ok(m) if m.nrows() == m.ncols() => match Adjacency::from_matrix(m) {
            Ok(a) => return Ok(a),
            Err(e) => Some(e.to_string()),
        },
        Ok(m) => Some(format!("matrix is {}x{}, not square", m.nrows(), m.ncols())),
        Err(e) => Some(e.to_string()),
    };

    // Edge list fallback.
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut max_node = 0usize;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').map(str::trim).collect();
        if parts.len() != 2 {
            return Err(CliError::Input(format!(
                "{}: not a dense adjacency ({}) and line {} is not an 'i,j' pair",
                path.display(),
                dense_err.unwrap_or_default(),
                lineno + 1
            )));
        }
        let parse = |s: &str| -> CliResult<usize> {
            s.parse::<usize>().map_err(|_| {
                CliError::Input(format!("bad node index {s:?} on line {}", lineno + 1))
            })
        };
        let (i, j) = (parse(parts[0])?, parse(parts[1])?);
        if i == 0 || j == 0 {
            return Err(CliError::Input("edge lists are 1-indexed".to_string()));
        }
        if i == j {
            return Err(CliError::Input(format!("self-loop {i},{j} in edge list")));
        }
        max_node = max_node.max(i).max(j);
        edges.push((i - 1, j - 1));
    }
    if edges.is_empty() {
        return Err(CliError::Input(format!("{}: no edges found", path.display())));
    }
    let mut m = Array2::zeros((max_node, max_node));
    for (i, j) in edges {
        m[[i, j]] = 1.0;
        m[[j, i]] = 1.0;
    }
    Adjacency::from_matrix(m).map_err(CliError::from)
}

fn load_node_values(path: &Path, kind: CovariateKind) -> CliResult<NodeCovariate> {
    let text = read_to_string(path)?;
    let tokens: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
    if tokens.is_empty() {
        return Err(CliError::Input(format!("{}: empty node covariate", path.display())));
    }
    match kind {
        CovariateKind::Quantitative => {
            let vals = tokens
                .iter()
                .map(|t| {
                    t.parse::<f64>().map_err(|_| {
                        CliError::Input(format!("bad numeric value {t:?} in {}", path.display()))
                    })
                })
                .collect::<CliResult<Vec<f64>>>()?;
            if vals.iter().any(|v| !v.is_finite()) {
                return Err(CliError::Input(format!(
                    "{}: node covariate contains NaN/inf",
                    path.display()
                )));
            }
            Ok(NodeCovariate::Quantitative(vals))
        }
        CovariateKind::Categorical => {
            let mut ids = std::collections::HashMap::new();
            let labels = tokens
                .iter()
                .map(|t| {
                    let next = ids.len();
                    *ids.entry(t.to_string()).or_insert(next)
                })
                .collect();
            Ok(NodeCovariate::Categorical(labels))
        }
    }
}

/// Loads a symmetric edge covariate matrix, averaging minor asymmetries
/// with the transpose and warning when the asymmetry exceeds `1e-8`.
fn load_edge_matrix(path: &Path, n: usize, name: &str) -> CliResult<Array2<f64>> {
    let m = matrix_from_csv(&read_to_string(path)?).map_err(CliError::from)?;
    if m.nrows() != n || m.ncols() != n {
        return Err(CliError::Input(format!(
            "covariate {name}: shape {}x{} does not match n={n}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(CliError::Input(format!("covariate {name} contains NaN/inf")));
    }
    let scale = m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[[i, j]] - m[[j, i]]).abs());
        }
    }
    if worst > 1e-8 * (1.0 + scale) {
        eprintln!(
            "warning: covariate {name} asymmetric by {worst:.3e}; symmetrizing with the transpose"
        );
    }
    Ok(Array2::from_shape_fn((n, n), |(i, j)| 0.5 * (m[[i, j]] + m[[j, i]])))
}

/// Loads the adjacency and the covariate manifest into a dataset. Node
/// covariates are converted to edge covariates (absolute difference or
/// equality indicator) and the construction is appended to the provenance
/// log.
pub fn load_dataset(adjacency_path: &Path, manifest_path: &Path) -> CliResult<Dataset> {
    let adjacency = load_adjacency(adjacency_path)?;
    let n = adjacency.n();
    let manifest: CovariateManifest = serde_json::from_str(&read_to_string(manifest_path)?)
        .map_err(|e| {
            CliError::Input(format!("bad manifest {}: {e}", manifest_path.display()))
        })?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));

    let mut matrices = Vec::new();
    let mut names = Vec::new();
    let mut provenance = manifest.provenance.clone();
    provenance
        .sources
        .push(adjacency_path.display().to_string());
    provenance.sources.push(manifest_path.display().to_string());

    for entry in &manifest.covariates {
        let path = base.join(&entry.path);
        let mat = match entry.level {
            CovariateLevel::Edge => load_edge_matrix(&path, n, &entry.name)?,
            CovariateLevel::Node => {
                let values = load_node_values(&path, entry.kind)?;
                let len = match &values {
                    NodeCovariate::Quantitative(v) => v.len(),
                    NodeCovariate::Categorical(v) => v.len(),
                };
                if len != n {
                    return Err(CliError::Input(format!(
                        "covariate {}: {len} node values for n={n}",
                        entry.name
                    )));
                }
                let rule = match entry.kind {
                    CovariateKind::Quantitative => "absolute difference |x_i - x_j|",
                    CovariateKind::Categorical => "equality indicator 1{x_i = x_j}",
                };
                provenance.log.push(format!(
                    "edge covariate {:?} built from node file {} via {rule}",
                    entry.name, entry.path
                ));
                edge_covariates_from_nodes(&values)
            }
        };
        matrices.push(mat);
        names.push(entry.name.clone());
    }

    let edge_covariates = EdgeCovariates::new(n, matrices).map_err(CliError::from)?;
    Ok(Dataset { adjacency, edge_covariates, covariate_names: names, provenance })
}

/// Writes a dataset directory: `A.csv`, one `X{l}.csv` per covariate and a
/// manifest pointing at them. Returns the manifest path.
pub fn save_dataset(dir: &Path, dataset: &Dataset) -> CliResult<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let n = dataset.adjacency.n();
    let mut a_text = String::new();
    for i in 0..n {
        let row: Vec<String> = (0..n)
            .map(|j| format!("{}", dataset.adjacency.matrix()[[i, j]] as u8))
            .collect();
        a_text.push_str(&row.join(","));
        a_text.push('\n');
    }
    std::fs::write(dir.join("A.csv"), a_text)?;

    let mut entries = Vec::new();
    for (l, (mat, name)) in dataset
        .edge_covariates
        .matrices()
        .iter()
        .zip(&dataset.covariate_names)
        .enumerate()
    {
        let fname = format!("X{}.csv", l + 1);
        std::fs::write(dir.join(&fname), matrix_to_csv(mat))?;
        entries.push(CovariateEntry {
            name: name.clone(),
            level: CovariateLevel::Edge,
            kind: CovariateKind::Quantitative,
            path: fname,
        });
    }
    let manifest = CovariateManifest {
        schema_version: 1,
        covariates: entries,
        provenance: dataset.provenance.clone(),
    };
    let path = dir.join("covariates.json");
    std::fs::write(&path, serde_json::to_string_pretty(&manifest).unwrap())?;
    Ok(path)
}
