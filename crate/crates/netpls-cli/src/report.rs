//! Fit reports: JSON summary plus per-matrix CSV files, with nodes permuted
//! so cluster intensities descend along the diagonal.

use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use netpls_core::clustering::GmmFit;
use netpls_core::estimator::FitResult;
use netpls_core::io::{matrix_from_csv, matrix_to_csv};
use netpls_core::model::{ResidualBlocks, Signature, ValidityReport};

use crate::errors::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceRow {
    pub gamma: Vec<f64>,
    pub objective: f64,
    pub d: usize,
    pub q: usize,
    pub s: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StartRow {
    pub init: f64,
    pub objective: Option<f64>,
    pub score: Option<f64>,
    pub d: Option<usize>,
    pub converged: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitSection {
    pub gamma: Vec<f64>,
    pub objective: f64,
    pub score: f64,
    pub converged: bool,
    pub init_used: f64,
    pub d: usize,
    pub q: usize,
    pub s: usize,
    pub trace: Vec<TraceRow>,
    pub starts: Vec<StartRow>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlocksSection {
    pub k: usize,
    pub cov_model: String,
    pub bic: f64,
    pub loglik: f64,
    pub mean_uncertainty: f64,
    /// Cluster means, monotone-relabeled (descending block intensity).
    pub means: Vec<Vec<f64>>,
    pub theta: Vec<Vec<f64>>,
    pub cluster_sizes: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValiditySection {
    pub max: f64,
    pub min: f64,
    pub max_le_one: bool,
    pub min_ge_zero: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub version: String,
    pub seed: u64,
    /// Echo of the command-line configuration.
    pub config: serde_json::Value,
    pub covariate_names: Vec<String>,
    pub provenance_log: Vec<String>,
    pub fit: FitSection,
    pub blocks: BlocksSection,
    /// `node_permutation[r]` is the original (zero-based) index of the node
    /// displayed at row `r` of the emitted matrices.
    pub node_permutation: Vec<usize>,
    /// The diagonal entries of the emitted matrices are computed from the
    /// same formulas but lie outside the model (self-loops are structural
    /// zeros).
    pub diagonal_out_of_model: bool,
    pub validity: ValiditySection,
    pub files: std::collections::BTreeMap<String, String>,
}

/// Stable permutation putting block 0 (highest intensity) first.
pub fn descending_block_permutation(assignments: &[usize]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..assignments.len()).collect();
    order.sort_by_key(|&i| (assignments[i], i));
    order
}

fn permute_matrix(m: &Array2<f64>, perm: &[usize]) -> Array2<f64> {
    Array2::from_shape_fn((perm.len(), perm.len()), |(i, j)| m[[perm[i], perm[j]]])
}

fn permute_rows(m: &Array2<f64>, perm: &[usize]) -> Array2<f64> {
    Array2::from_shape_fn((perm.len(), m.ncols()), |(i, j)| m[[perm[i], j]])
}

fn matrix_to_rows(m: &Array2<f64>) -> Vec<Vec<f64>> {
    m.rows().into_iter().map(|r| r.to_vec()).collect()
}

pub struct ReportInputs<'a> {
    pub fit: &'a FitResult,
    pub gmm: &'a GmmFit,
    pub blocks: &'a ResidualBlocks,
    pub c: &'a Array2<f64>,
    pub theta_expanded: &'a Array2<f64>,
    pub p: &'a Array2<f64>,
    pub validity: &'a ValidityReport,
    pub covariate_names: &'a [String],
    pub provenance_log: &'a [String],
    pub seed: u64,
    pub config: serde_json::Value,
}

/// Writes `report.json`, the permuted matrices `C.csv`, `Theta.csv`,
/// `P.csv`, `Lambda.csv` and the (original-order, relabeled, 1-based)
/// `assignments.csv`.
pub fn write_report(dir: &Path, inputs: &ReportInputs<'_>) -> CliResult<RunReport> {
    std::fs::create_dir_all(dir)?;
    let perm = descending_block_permutation(&inputs.blocks.assignments);

    let files: Vec<(&str, String)> = vec![
        ("c", matrix_to_csv(&permute_matrix(inputs.c, &perm))),
        ("theta", matrix_to_csv(&permute_matrix(inputs.theta_expanded, &perm))),
        ("p", matrix_to_csv(&permute_matrix(inputs.p, &perm))),
        ("lambda", matrix_to_csv(&permute_rows(&inputs.fit.params.lambda, &perm))),
    ];
    let mut file_map = std::collections::BTreeMap::new();
    for (key, text) in files {
        let name = match key {
            "c" => "C.csv",
            "theta" => "Theta.csv",
            "p" => "P.csv",
            _ => "Lambda.csv",
        };
        std::fs::write(dir.join(name), text)?;
        file_map.insert(key.to_string(), name.to_string());
    }
    let mut assign_text = String::new();
    for &z in &inputs.blocks.assignments {
        assign_text.push_str(&format!("{}\n", z + 1));
    }
    std::fs::write(dir.join("assignments.csv"), assign_text)?;
    file_map.insert("assignments".to_string(), "assignments.csv".to_string());

    let mut cluster_sizes = vec![0usize; inputs.blocks.k];
    for &z in &inputs.blocks.assignments {
        cluster_sizes[z] += 1;
    }

    let report = RunReport {
        schema_version: SCHEMA_VERSION,
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: inputs.seed,
        config: inputs.config.clone(),
        covariate_names: inputs.covariate_names.to_vec(),
        provenance_log: inputs.provenance_log.to_vec(),
        fit: FitSection {
            gamma: inputs.fit.params.gamma.to_vec(),
            objective: inputs.fit.objective,
            score: inputs.fit.score,
            converged: inputs.fit.converged,
            init_used: inputs.fit.init_used,
            d: inputs.fit.params.signature.d(),
            q: inputs.fit.params.signature.q,
            s: inputs.fit.params.signature.s,
            trace: inputs
                .fit
                .trace
                .iter()
                .map(|t| TraceRow {
                    gamma: t.gamma.to_vec(),
                    objective: t.objective,
                    d: t.d,
                    q: t.q,
                    s: t.s,
                })
                .collect(),
            starts: inputs
                .fit
                .start_summaries
                .iter()
                .map(|s| StartRow {
                    init: s.init,
                    objective: s.objective,
                    score: s.score,
                    d: s.d,
                    converged: s.converged,
                    error: s.error.clone(),
                })
                .collect(),
        },
        blocks: BlocksSection {
            k: inputs.blocks.k,
            cov_model: inputs.gmm.cov_model.label().to_string(),
            bic: inputs.gmm.bic,
            loglik: inputs.gmm.loglik,
            mean_uncertainty: inputs.gmm.mean_uncertainty,
            means: matrix_to_rows(&inputs.blocks.means),
            theta: matrix_to_rows(&inputs.blocks.theta),
            cluster_sizes,
        },
        node_permutation: perm,
        diagonal_out_of_model: true,
        validity: ValiditySection {
            max: inputs.validity.max,
            min: inputs.validity.min,
            max_le_one: inputs.validity.max_le_one,
            min_ge_zero: inputs.validity.min_ge_zero,
        },
        files: file_map,
    };
    let json = serde_json::to_string_pretty(&report)
        .map_err(|e| CliError::Numerical(format!("serializing report: {e}")))?;
    std::fs::write(dir.join("report.json"), json)?;
    Ok(report)
}

/// The pieces of a fit directory the bootstrap needs, restored to original
/// node order.
pub struct LoadedFit {
    pub report: RunReport,
    pub gamma: Array1<f64>,
    pub lambda: Array2<f64>,
    pub signature: Signature,
    pub blocks: ResidualBlocks,
}

pub fn load_fit_dir(dir: &Path) -> CliResult<LoadedFit> {
    let report_path = dir.join("report.json");
    let text = std::fs::read_to_string(&report_path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", report_path.display())))?;
    let report: RunReport = serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("bad report.json: {e}")))?;
    if report.schema_version != SCHEMA_VERSION {
        return Err(CliError::Input(format!(
            "unsupported report schema version {}",
            report.schema_version
        )));
    }

    let lambda_name = report
        .files
        .get("lambda")
        .cloned()
        .unwrap_or_else(|| "Lambda.csv".to_string());
    let lambda_text = std::fs::read_to_string(dir.join(&lambda_name))
        .map_err(|e| CliError::Input(format!("cannot read {lambda_name}: {e}")))?;
    let lambda_perm = matrix_from_csv(&lambda_text).map_err(CliError::from)?;
    let n = lambda_perm.nrows();
    if report.node_permutation.len() != n {
        return Err(CliError::Input("node permutation does not match Lambda.csv".to_string()));
    }
    // Invert the display permutation back to original node order.
    let mut lambda = Array2::zeros((n, lambda_perm.ncols()));
    for (row, &orig) in report.node_permutation.iter().enumerate() {
        for c in 0..lambda_perm.ncols() {
            lambda[[orig, c]] = lambda_perm[[row, c]];
        }
    }

    let assign_name = report
        .files
        .get("assignments")
        .cloned()
        .unwrap_or_else(|| "assignments.csv".to_string());
    let assign_text = std::fs::read_to_string(dir.join(&assign_name))
        .map_err(|e| CliError::Input(format!("cannot read {assign_name}: {e}")))?;
    let assignments: Vec<usize> = assign_text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Input(format!("bad assignment {l:?}")))
                .and_then(|v| {
                    if v == 0 {
                        Err(CliError::Input("assignments are 1-based".to_string()))
                    } else {
                        Ok(v - 1)
                    }
                })
        })
        .collect::<CliResult<Vec<usize>>>()?;
    if assignments.len() != n {
        return Err(CliError::Input("assignment count does not match Lambda.csv".to_string()));
    }

    let signature = Signature::new(report.fit.q, report.fit.s);
    let k = report.blocks.k;
    let d = signature.d();
    let mut means = Array2::zeros((k, d));
    for (a, row) in report.blocks.means.iter().enumerate() {
        if row.len() != d {
            return Err(CliError::Input("block means do not match signature dimension".to_string()));
        }
        for (j, &v) in row.iter().enumerate() {
            means[[a, j]] = v;
        }
    }
    let blocks = ResidualBlocks::from_means(means, assignments, signature)
        .map_err(CliError::from)?;
    let gamma = Array1::from_vec(report.fit.gamma.clone());
    Ok(LoadedFit { report, gamma, lambda, signature, blocks })
}
