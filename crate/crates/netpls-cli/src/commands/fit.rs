use std::path::PathBuf;

use clap::Args;
use serde_json::json;

use netpls_core::clustering::{fit_fixed_k, select_k, CovarianceModel, GmmOptions};
use netpls_core::estimator::{fit, FitConfig};
use netpls_core::model::{covariate_effect, validate_probability_model};
use netpls_core::bootstrap::relabel_monotone;

use crate::dataset::load_dataset;
use crate::errors::{CliError, CliResult};
use crate::report::{write_report, ReportInputs};

#[derive(Args)]
pub struct FitArgs {
    /// Adjacency file: dense 0/1 CSV or a 1-indexed "i,j" edge list.
    #[arg(long)]
    pub adjacency: PathBuf,
    /// Covariate manifest (JSON).
    #[arg(long)]
    pub covariates: PathBuf,
    #[arg(long, value_name = "DIR")]
    pub out_dir: PathBuf,

    #[arg(long, default_value_t = 500)]
    pub max_iter: usize,
    /// Number of equispaced constant initializations of gamma.
    #[arg(long, default_value_t = 20)]
    pub inits: usize,
    /// Initialization interval "lo:hi".
    #[arg(long, default_value = "0.15:2.0")]
    pub init_range: String,
    /// Absolute tolerance on objective change (default: 1e-8 per pair).
    #[arg(long)]
    pub tol: Option<f64>,
    /// Embedding dimension: "auto" or a fixed integer.
    #[arg(long, default_value = "auto")]
    pub dim: String,
    /// Largest dimension automatic selection may return.
    #[arg(long)]
    pub max_dim: Option<usize>,
    /// Largest cluster count tried by BIC selection.
    #[arg(long, default_value_t = 9)]
    pub kmax: usize,
    /// Fixed cluster count (skips BIC selection over K).
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Truncate reported edge probabilities into [0, 1].
    #[arg(long, default_value_t = false)]
    pub clamp: bool,
}

pub fn parse_init_range(s: &str) -> CliResult<(f64, f64)> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 2 {
        return Err(CliError::Config(format!("--init-range must be lo:hi, got {s:?}")));
    }
    let lo = parts[0]
        .parse::<f64>()
        .map_err(|_| CliError::Config(format!("bad init-range bound {:?}", parts[0])))?;
    let hi = parts[1]
        .parse::<f64>()
        .map_err(|_| CliError::Config(format!("bad init-range bound {:?}", parts[1])))?;
    if !lo.is_finite() || !hi.is_finite() || lo >= hi {
        return Err(CliError::Config("--init-range lower bound must be below upper".to_string()));
    }
    Ok((lo, hi))
}

pub fn run(args: FitArgs) -> CliResult<()> {
    let dataset = load_dataset(&args.adjacency, &args.covariates)?;
    let init_range = parse_init_range(&args.init_range)?;
    let d = match args.dim.as_str() {
        "auto" => None,
        other => Some(other.parse::<usize>().map_err(|_| {
            CliError::Config(format!("--dim must be 'auto' or a positive integer, got {other:?}"))
        })?),
    };
    if let Some(0) = d {
        return Err(CliError::Config("--dim must be positive".to_string()));
    }
    if args.kmax == 0 {
        return Err(CliError::Config("--kmax must be positive".to_string()));
    }

    let config = FitConfig {
        max_iter: args.max_iter,
        tol: args.tol,
        num_inits: args.inits,
        init_range,
        d,
        max_d: args.max_dim,
        freeze_d: false,
        seed: args.seed,
    };
    let a = dataset.adjacency.matrix();
    let x = &dataset.edge_covariates;
    let fit_result = fit(a, x, &config)?;

    let gmm = match args.k {
        Some(k) => fit_fixed_k(
            fit_result.params.lambda.view(),
            k,
            &CovarianceModel::ALL,
            args.seed,
            &GmmOptions::default(),
        )?,
        None => select_k(
            fit_result.params.lambda.view(),
            args.kmax,
            &CovarianceModel::ALL,
            args.seed,
        )?,
    };
    let raw_blocks = netpls_core::clustering::residual_blocks(&gmm, fit_result.params.signature)?;
    let blocks = relabel_monotone(&raw_blocks);

    let c = covariate_effect(fit_result.params.gamma.view(), x)?;
    let theta_expanded = blocks.expand();
    let mut p = &c + &theta_expanded;
    let validity = validate_probability_model(&p)?;
    if args.clamp {
        p.mapv_inplace(|v| v.clamp(0.0, 1.0));
    }

    let config_echo = json!({
        "adjacency": args.adjacency.display().to_string(),
        "covariates": args.covariates.display().to_string(),
        "max_iter": args.max_iter,
        "inits": args.inits,
        "init_range": args.init_range,
        "tol": args.tol,
        "dim": args.dim,
        "max_dim": args.max_dim,
        "kmax": args.kmax,
        "k": args.k,
        "seed": args.seed,
        "clamp": args.clamp,
    });
    let report = write_report(
        &args.out_dir,
        &ReportInputs {
            fit: &fit_result,
            gmm: &gmm,
            blocks: &blocks,
            c: &c,
            theta_expanded: &theta_expanded,
            p: &p,
            validity: &validity,
            covariate_names: &dataset.covariate_names,
            provenance_log: &dataset.provenance.log,
            seed: args.seed,
            config: config_echo,
        },
    )?;
    println!(
        "fit: gamma = {:?}, d = {} (q={}, s={}), K = {}, objective = {:.6e}; report in {}",
        report.fit.gamma,
        report.fit.d,
        report.fit.q,
        report.fit.s,
        report.blocks.k,
        report.fit.objective,
        args.out_dir.display()
    );
    if !validity.is_valid() {
        eprintln!(
            "warning: fitted probabilities outside [0, 1] (min {:.4}, max {:.4}); \
             rerun with --clamp to truncate",
            validity.min, validity.max
        );
    }
    Ok(())
}
