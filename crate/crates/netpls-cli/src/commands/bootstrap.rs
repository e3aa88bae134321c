use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use serde::Serialize;

use netpls_core::bootstrap::{
    confidence_interval, run_bootstrap, BootstrapConfig, BootstrapEnsemble, CiMethod, WeightScheme,
};
use netpls_core::model::ModelParams;

use crate::dataset::load_dataset;
use crate::errors::{CliError, CliResult};
use crate::report::load_fit_dir;

#[derive(Args)]
pub struct BootstrapArgs {
    #[arg(long)]
    pub adjacency: PathBuf,
    #[arg(long)]
    pub covariates: PathBuf,
    /// Directory produced by `netpls fit`.
    #[arg(long, value_name = "DIR")]
    pub fit_dir: PathBuf,
    #[arg(long, value_name = "DIR")]
    pub out_dir: PathBuf,

    /// Number of bootstrap replicates.
    #[arg(long, visible_alias = "B", default_value_t = 999)]
    pub b: usize,
    /// Weight scheme: bayesian, naive or moon.
    #[arg(long, default_value = "bayesian")]
    pub scheme: String,
    /// Exponential rate for the bayesian scheme: "auto" (n^-1/2) or a number.
    #[arg(long, default_value = "auto")]
    pub alpha: String,
    /// Resample size for the moon scheme.
    #[arg(long)]
    pub moon_m: Option<usize>,
    /// Confidence level.
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    /// Comma-separated subset of percentile,basic,normal.
    #[arg(long, default_value = "percentile,basic,normal")]
    pub methods: String,
    /// Tracked node pairs "i,j;k,l" (1-indexed). Defaults to one pair per
    /// block combination.
    #[arg(long)]
    pub tracked_pairs: Option<String>,
    /// Use unit weights: every replicate reproduces the point estimate.
    #[arg(long, default_value_t = false)]
    pub unit_weights: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Serialize)]
struct IntervalRow {
    param: String,
    truth_label: String,
    point: f64,
    method: String,
    lo: f64,
    hi: f64,
}

#[derive(Serialize)]
struct CisJson {
    schema_version: u32,
    version: String,
    seed: u64,
    b_requested: usize,
    b_completed: usize,
    failures: usize,
    scheme: String,
    level: f64,
    tracked_pairs: Vec<(usize, usize)>,
    wall_clock_seconds: f64,
    point_gamma: Vec<f64>,
    point_theta: Vec<Vec<f64>>,
    point_tracked_probs: Vec<f64>,
    intervals: Vec<IntervalRow>,
}

fn parse_methods(s: &str) -> CliResult<Vec<CiMethod>> {
    let mut out = Vec::new();
    for tok in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        out.push(match tok {
            "percentile" => CiMethod::Percentile,
            "basic" => CiMethod::Basic,
            "normal" => CiMethod::NormalBiasCorrected,
            other => {
                return Err(CliError::Config(format!(
                    "unknown method {other:?}; expected percentile, basic, normal"
                )))
            }
        });
    }
    if out.is_empty() {
        return Err(CliError::Config("--methods must list at least one method".to_string()));
    }
    Ok(out)
}

fn parse_tracked(s: &str, n: usize) -> CliResult<Vec<(usize, usize)>> {
    let mut out = Vec::new();
    for chunk in s.split(';').map(str::trim).filter(|c| !c.is_empty()) {
        let parts: Vec<&str> = chunk.split(',').map(str::trim).collect();
        if parts.len() != 2 {
            return Err(CliError::Config(format!("bad tracked pair {chunk:?}")));
        }
        let i = parts[0]
            .parse::<usize>()
            .map_err(|_| CliError::Config(format!("bad node index {:?}", parts[0])))?;
        let j = parts[1]
            .parse::<usize>()
            .map_err(|_| CliError::Config(format!("bad node index {:?}", parts[1])))?;
        if i == 0 || j == 0 || i > n || j > n || i == j {
            return Err(CliError::Config(format!("tracked pair {chunk:?} out of range")));
        }
        out.push((i - 1, j - 1));
    }
    Ok(out)
}

/// One representative pair per block combination (a <= b), by original node
/// order.
fn default_tracked(assignments: &[usize], k: usize) -> Vec<(usize, usize)> {
    let n = assignments.len();
    let mut out = Vec::new();
    for a in 0..k {
        for b in a..k {
            'search: for i in 0..n {
                for j in (i + 1)..n {
                    let (zi, zj) = (assignments[i], assignments[j]);
                    if (zi.min(zj), zi.max(zj)) == (a, b) {
                        out.push((i, j));
                        break 'search;
                    }
                }
            }
        }
    }
    out
}

pub fn run(args: BootstrapArgs) -> CliResult<()> {
    let dataset = load_dataset(&args.adjacency, &args.covariates)?;
    let loaded = load_fit_dir(&args.fit_dir)?;
    let n = dataset.adjacency.n();
    if loaded.lambda.nrows() != n {
        return Err(CliError::Input(format!(
            "fit was for {} nodes but the dataset has {n}",
            loaded.lambda.nrows()
        )));
    }
    let methods = parse_methods(&args.methods)?;
    if !args.level.is_finite() || args.level <= 0.0 || args.level >= 1.0 {
        return Err(CliError::Config("--level must lie in (0, 1)".to_string()));
    }

    let scheme = if args.unit_weights {
        WeightScheme::Unit
    } else {
        match args.scheme.as_str() {
            "bayesian" => {
                let alpha = match args.alpha.as_str() {
                    "auto" => (n as f64).powf(-0.5),
                    other => other.parse::<f64>().map_err(|_| {
                        CliError::Config(format!("--alpha must be 'auto' or a number, got {other:?}"))
                    })?,
                };
                if !alpha.is_finite() || alpha <= 0.0 {
                    return Err(CliError::Config("--alpha must be positive".to_string()));
                }
                WeightScheme::Bayesian { alpha }
            }
            "naive" => WeightScheme::Naive,
            "moon" => {
                let m = args.moon_m.ok_or_else(|| {
                    CliError::Config("--moon-m is required with --scheme moon".to_string())
                })?;
                WeightScheme::Moon { m }
            }
            other => {
                return Err(CliError::Config(format!(
                    "unknown scheme {other:?}; expected bayesian, naive, moon"
                )))
            }
        }
    };

    let tracked = match &args.tracked_pairs {
        Some(s) => parse_tracked(s, n)?,
        None => default_tracked(&loaded.blocks.assignments, loaded.blocks.k),
    };

    let params = ModelParams::new(
        loaded.gamma.clone(),
        loaded.lambda.clone(),
        loaded.signature,
    )?;
    let mut config = BootstrapConfig::new(args.b, scheme, args.seed);
    config.tracked_pairs = tracked.clone();

    let t0 = Instant::now();
    let ensemble = run_bootstrap(
        &params,
        &loaded.blocks,
        dataset.adjacency.matrix(),
        &dataset.edge_covariates,
        &config,
    )?;
    let wall = t0.elapsed().as_secs_f64();

    write_outputs(&args, &dataset.covariate_names, &loaded, &ensemble, &methods, &tracked, wall)
}

fn write_outputs(
    args: &BootstrapArgs,
    covariate_names: &[String],
    loaded: &crate::report::LoadedFit,
    ensemble: &BootstrapEnsemble,
    methods: &[CiMethod],
    tracked: &[(usize, usize)],
    wall: f64,
) -> CliResult<()> {
    std::fs::create_dir_all(&args.out_dir)?;
    let p = loaded.gamma.len();
    let k = loaded.blocks.k;

    let mut intervals: Vec<IntervalRow> = Vec::new();
    let mut sample_columns: Vec<(String, Vec<f64>)> = Vec::new();

    for l in 0..p {
        let samples = ensemble.gamma_samples(l);
        let point = loaded.gamma[l];
        let name = format!("gamma[{}]", l + 1);
        sample_columns.push((name.clone(), samples.clone()));
        for &m in methods {
            let (lo, hi) = confidence_interval(&samples, point, args.level, m)?;
            intervals.push(IntervalRow {
                param: name.clone(),
                truth_label: covariate_names.get(l).cloned().unwrap_or_default(),
                point,
                method: m.label().to_string(),
                lo,
                hi,
            });
        }
    }
    for a in 0..k {
        for b in a..k {
            let samples = ensemble.theta_samples(a, b);
            let point = loaded.blocks.theta[[a, b]];
            let name = format!("theta[{},{}]", a + 1, b + 1);
            sample_columns.push((name.clone(), samples.clone()));
            for &m in methods {
                let (lo, hi) = confidence_interval(&samples, point, args.level, m)?;
                intervals.push(IntervalRow {
                    param: name.clone(),
                    truth_label: String::new(),
                    point,
                    method: m.label().to_string(),
                    lo,
                    hi,
                });
            }
        }
    }

    // Tracked probabilities: the point value is read from the emitted P.csv
    // through the recorded node permutation.
    let p_csv = std::fs::read_to_string(args.fit_dir.join(
        loaded.report.files.get("p").cloned().unwrap_or_else(|| "P.csv".to_string()),
    ))?;
    let p_mat = netpls_core::io::matrix_from_csv(&p_csv).map_err(CliError::from)?;
    let inv_perm = {
        let mut inv = vec![0usize; loaded.report.node_permutation.len()];
        for (row, &orig) in loaded.report.node_permutation.iter().enumerate() {
            inv[orig] = row;
        }
        inv
    };
    for (t, &(i, j)) in tracked.iter().enumerate() {
        let samples = ensemble.prob_samples(t);
        let point = p_mat[[inv_perm[i], inv_perm[j]]];
        let name = format!("p[{},{}]", i + 1, j + 1);
        sample_columns.push((name.clone(), samples.clone()));
        for &m in methods {
            let (lo, hi) = confidence_interval(&samples, point, args.level, m)?;
            intervals.push(IntervalRow {
                param: name.clone(),
                truth_label: String::new(),
                point,
                method: m.label().to_string(),
                lo,
                hi,
            });
        }
    }

    let cis = CisJson {
        schema_version: 1,
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: args.seed,
        b_requested: ensemble.requested,
        b_completed: ensemble.replicates.len(),
        failures: ensemble.failures.len(),
        scheme: format!("{:?}", ensemble.scheme),
        level: args.level,
        tracked_pairs: tracked.iter().map(|&(i, j)| (i + 1, j + 1)).collect(),
        wall_clock_seconds: wall,
        point_gamma: loaded.gamma.to_vec(),
        point_theta: loaded
            .blocks
            .theta
            .rows()
            .into_iter()
            .map(|r| r.to_vec())
            .collect(),
        point_tracked_probs: tracked
            .iter()
            .map(|&(i, j)| p_mat[[inv_perm[i], inv_perm[j]]])
            .collect(),
        intervals,
    };
    std::fs::write(
        args.out_dir.join("cis.json"),
        serde_json::to_string_pretty(&cis).map_err(|e| CliError::Numerical(e.to_string()))?,
    )?;

    // samples.csv: header row, one row per completed replicate.
    let mut text = String::new();
    let header: Vec<&str> = sample_columns.iter().map(|(n, _)| n.as_str()).collect();
    text.push_str(&header.join(","));
    text.push('\n');
    let rows = ensemble.replicates.len();
    for r in 0..rows {
        let row: Vec<String> = sample_columns
            .iter()
            .map(|(_, col)| netpls_core::io::format_f64(col[r]))
            .collect();
        text.push_str(&row.join(","));
        text.push('\n');
    }
    std::fs::write(args.out_dir.join("samples.csv"), text)?;

    println!(
        "bootstrap: {} of {} replicates completed in {wall:.1}s; cis.json and samples.csv in {}",
        ensemble.replicates.len(),
        ensemble.requested,
        args.out_dir.display()
    );
    Ok(())
}
