use std::path::{Path, PathBuf};

use clap::Args;
use ndarray::Array1;
use serde::Serialize;

use netpls_core::metrics::{adjusted_rand_index, mse, normalized_mutual_information, Partition};

use crate::errors::{CliError, CliResult};

#[derive(Args)]
pub struct EvalArgs {
    /// Predicted assignments: assignments.csv (one label per line) or a
    /// truth.json.
    #[arg(long)]
    pub pred: PathBuf,
    /// Reference assignments, same formats.
    #[arg(long)]
    pub truth: PathBuf,
    /// Optional fit report; its gamma is scored against --truth's gamma.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Optional output path for the metric table (JSON). Printed to stdout
    /// regardless.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct MetricsJson {
    ari: f64,
    nmi: f64,
    n: usize,
    mse_gamma: Option<Vec<f64>>,
}

fn load_labels(path: &Path) -> CliResult<Vec<usize>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    if path.extension().map(|e| e == "json").unwrap_or(false) {
        let v: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Input(format!("bad JSON {}: {e}", path.display())))?;
        let z = v
            .get("z")
            .and_then(|z| z.as_array())
            .ok_or_else(|| CliError::Input(format!("{}: no \"z\" array", path.display())))?;
        return z
            .iter()
            .map(|x| {
                x.as_u64()
                    .map(|u| u as usize)
                    .ok_or_else(|| CliError::Input("non-integer label in z".to_string()))
            })
            .collect();
    }
    let mut ids = std::collections::HashMap::new();
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(|l| {
            let next = ids.len();
            Ok(*ids.entry(l.to_string()).or_insert(next))
        })
        .collect()
}

fn load_gamma_json(path: &Path, pointer: &str) -> CliResult<Option<Vec<f64>>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let v: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("bad JSON {}: {e}", path.display())))?;
    Ok(v.pointer(pointer).and_then(|g| g.as_array()).map(|arr| {
        arr.iter().filter_map(|x| x.as_f64()).collect::<Vec<f64>>()
    }))
}

pub fn run(args: EvalArgs) -> CliResult<()> {
    let pred = load_labels(&args.pred)?;
    let truth = load_labels(&args.truth)?;
    if pred.len() != truth.len() {
        return Err(CliError::Input(format!(
            "label counts differ: {} vs {}",
            pred.len(),
            truth.len()
        )));
    }
    let pa = Partition::new(pred.iter().copied());
    let pb = Partition::new(truth.iter().copied());
    let ari = adjusted_rand_index(&pa, &pb)?;
    let nmi = normalized_mutual_information(&pa, &pb)?;

    let mse_gamma = match &args.report {
        Some(report_path) => {
            let est = load_gamma_json(report_path, "/fit/gamma")?
                .ok_or_else(|| CliError::Input("report has no /fit/gamma".to_string()))?;
            let truth_gamma = load_gamma_json(&args.truth, "/gamma")?;
            match truth_gamma {
                Some(tg) => {
                    if tg.len() != est.len() {
                        return Err(CliError::Input(format!(
                            "gamma lengths differ: {} vs {}",
                            est.len(),
                            tg.len()
                        )));
                    }
                    let m = mse(&[Array1::from_vec(est)], &Array1::from_vec(tg))?;
                    Some(m.to_vec())
                }
                None => None,
            }
        }
        None => None,
    };

    let out = MetricsJson { ari, nmi, n: pred.len(), mse_gamma };
    let json = serde_json::to_string_pretty(&out)
        .map_err(|e| CliError::Numerical(e.to_string()))?;
    println!("{json}");
    if let Some(path) = &args.out {
        std::fs::write(path, &json)?;
    }
    Ok(())
}
