//! Generalized bootstrap for the estimating equations of the model: random
//! node weights enter the least squares criteria multiplicatively, each
//! weighted criterion is solved in closed form, and the resampled latent
//! positions are de-weighted before clustering.

use ndarray::{Array1, Array2};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;
use rayon::prelude::*;

use crate::clustering::{fit_fixed_k, CovarianceModel, GmmOptions};
use crate::error::{Error, Result};
use crate::estimator::solve_normal_equations;
use crate::model::{
    covariate_effect, latent_kernel_matrix, EdgeCovariates, ModelParams, ResidualBlocks,
    Signature,
};
use crate::spectral::rank_d_filter;

/// Distribution of the resampling weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightScheme {
    /// I.i.d. Exponential(alpha) weights. All weighted criteria are
    /// invariant to a common rescaling of the weights, so `alpha` only sets
    /// the reported scale.
    Bayesian { alpha: f64 },
    /// Multinomial(n; 1/n, ..., 1/n) counts.
    Naive,
    /// m-out-of-n: Multinomial(m; 1/n, ..., 1/n) counts.
    Moon { m: usize },
    /// All weights equal to one; reproduces the point estimates (debugging).
    Unit,
}

/// Draws one weight vector.
pub fn draw_weights(scheme: WeightScheme, n: usize, seed: u64) -> Result<Array1<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    draw_weights_rng(scheme, n, &mut rng)
}

fn draw_weights_rng(
    scheme: WeightScheme,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Array1<f64>> {
    if n == 0 {
        return Err(Error::invalid("need at least one node".to_string()));
    }
    match scheme {
        WeightScheme::Bayesian { alpha } => {
            if !alpha.is_finite() || alpha <= 0.0 {
                return Err(Error::invalid("bayesian rate must be positive".to_string()));
            }
            let exp = rand_distr::Exp::new(alpha)
                .map_err(|e| Error::invalid(format!("bad exponential rate: {e}")))?;
            Ok(Array1::from_iter((0..n).map(|_| exp.sample(rng))))
        }
        WeightScheme::Naive => multinomial_counts(n, n, rng),
        WeightScheme::Moon { m } => {
            if m == 0 || m > n {
                return Err(Error::invalid(format!(
                    "moon resample size {m} must lie in 1..={n}"
                )));
            }
            multinomial_counts(m, n, rng)
        }
        WeightScheme::Unit => Ok(Array1::ones(n)),
    }
}

fn multinomial_counts(draws: usize, n: usize, rng: &mut ChaCha8Rng) -> Result<Array1<f64>> {
    let mut counts = Array1::zeros(n);
    for _ in 0..draws {
        counts[rng.random_range(0..n)] += 1.0;
    }
    Ok(counts)
}

/// Weighted least squares update of `gamma` against a fixed de-latented
/// residual matrix `Y' = A - R`; pair `(i, j)` carries weight `w_i w_j`.
pub(crate) fn weighted_gamma_ols(
    y_prime: &Array2<f64>,
    x: &EdgeCovariates,
    w: &Array1<f64>,
) -> Result<Array1<f64>> {
    let n = y_prime.nrows();
    let p = x.p();
    if p == 0 {
        return Ok(Array1::zeros(0));
    }
    let mats = x.matrices();
    let mut g = Array2::zeros((p, p));
    let mut rhs = Array1::zeros(p);
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let wij = w[i] * w[j];
            if wij == 0.0 {
                continue;
            }
            total += wij;
            let y = y_prime[[i, j]];
            for l in 0..p {
                let xl = mats[l][[i, j]];
                rhs[l] += wij * xl * y;
                for m in l..p {
                    g[[l, m]] += wij * xl * mats[m][[i, j]];
                }
            }
        }
    }
    if total <= 0.0 {
        return Err(Error::invalid("all pair weights vanish".to_string()));
    }
    for l in 0..p {
        for m in 0..l {
            g[[l, m]] = g[[m, l]];
        }
    }
    solve_normal_equations(g, rhs)
}

/// Resampled coefficient estimate: minimizes the weighted residual sum of
/// squares around the fixed point-estimate latent kernel.
pub fn bootstrap_gamma(
    a: &Array2<f64>,
    x: &EdgeCovariates,
    lambda_hat: &Array2<f64>,
    sig: Signature,
    w: &Array1<f64>,
) -> Result<Array1<f64>> {
    let n = a.nrows();
    if lambda_hat.nrows() != n || x.n() != n || w.len() != n {
        return Err(Error::invalid("inconsistent shapes in bootstrap_gamma".to_string()));
    }
    let r = latent_kernel_matrix(lambda_hat.view(), sig);
    let y_prime = a - &r;
    weighted_gamma_ols(&y_prime, x, w)
}

/// De-weighted resampled latent positions.
#[derive(Debug, Clone)]
pub struct BootstrapLatent {
    /// `n x d` de-weighted positions; rows of excluded nodes are zero.
    pub lambda_star: Array2<f64>,
    pub signature: Signature,
    /// Nodes whose weight was zero: their de-weighted position is undefined
    /// and they are excluded from clustering.
    pub excluded: Vec<usize>,
}

/// Resampled latent positions at fixed dimension `d_hat`.
///
/// The weighted criterion in the latent positions is the unweighted
/// criterion of the rescaled matrix `D_w Y D_w` (`D_w = diag(sqrt w)`) in
/// the rescaled positions `sqrt(w_i) alpha_i`, so it is solved by one
/// spectral embedding followed by de-weighting.
pub fn bootstrap_latent(
    a: &Array2<f64>,
    x: &EdgeCovariates,
    gamma_star: &Array1<f64>,
    w: &Array1<f64>,
    d_hat: usize,
) -> Result<BootstrapLatent> {
    let n = a.nrows();
    if w.len() != n || x.n() != n {
        return Err(Error::invalid("inconsistent shapes in bootstrap_latent".to_string()));
    }
    if w.iter().any(|&v| v < 0.0 || !v.is_finite()) {
        return Err(Error::invalid("weights must be finite and nonnegative".to_string()));
    }
    let c = covariate_effect(gamma_star.view(), x)?;
    let y = a - &c;
    let root_w: Vec<f64> = w.iter().map(|&v| v.sqrt()).collect();
    let weighted = Array2::from_shape_fn((n, n), |(i, j)| root_w[i] * y[[i, j]] * root_w[j]);
    let filt = rank_d_filter(&weighted, d_hat)?;

    let mut lambda_star = filt.embedding.lambda;
    let mut excluded = Vec::new();
    for i in 0..n {
        if root_w[i] > 0.0 {
            for col in 0..d_hat {
                lambda_star[[i, col]] /= root_w[i];
            }
        } else {
            excluded.push(i);
            for col in 0..d_hat {
                lambda_star[[i, col]] = 0.0;
            }
        }
    }
    Ok(BootstrapLatent { lambda_star, signature: filt.signature, excluded })
}

/// Relabels clusters so diagonal intensities are nonincreasing:
/// `theta[0][0] >= theta[1][1] >= ...`. Ties keep the original label order.
pub fn relabel_monotone(blocks: &ResidualBlocks) -> ResidualBlocks {
    let k = blocks.k;
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        blocks.theta[[b, b]]
            .partial_cmp(&blocks.theta[[a, a]])
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut inverse = vec![0usize; k];
    for (new, &old) in order.iter().enumerate() {
        inverse[old] = new;
    }
    let d = blocks.means.ncols();
    let mut means = Array2::zeros((k, d));
    for (new, &old) in order.iter().enumerate() {
        means.row_mut(new).assign(&blocks.means.row(old));
    }
    let assignments: Vec<usize> = blocks.assignments.iter().map(|&z| inverse[z]).collect();
    ResidualBlocks::from_means(means, assignments, blocks.signature)
        .expect("relabeling preserves shape")
}

/// Confidence interval construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CiMethod {
    Percentile,
    Basic,
    NormalBiasCorrected,
}

impl CiMethod {
    pub fn label(&self) -> &'static str {
        match self {
            CiMethod::Percentile => "percentile",
            CiMethod::Basic => "basic",
            CiMethod::NormalBiasCorrected => "normal",
        }
    }
}

/// Linear-interpolation sample quantile of sorted data.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
    }
}

/// Inverse standard normal CDF (Acklam's rational approximation; absolute
/// error below 1.2e-9, ample for interval endpoints).
fn inverse_normal_cdf(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0);
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.38357751867269e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    let p_low = 0.02425;
    if p < p_low {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - p_low {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -inverse_normal_cdf(1.0 - p)
    }
}

/// Two-sided confidence interval from bootstrap samples around a point
/// estimate.
pub fn confidence_interval(
    samples: &[f64],
    point: f64,
    level: f64,
    method: CiMethod,
) -> Result<(f64, f64)> {
    if samples.len() < 2 {
        return Err(Error::invalid("need at least two bootstrap samples".to_string()));
    }
    if !level.is_finite() || level <= 0.0 || level >= 1.0 {
        return Err(Error::invalid("level must lie in (0, 1)".to_string()));
    }
    let mut sorted: Vec<f64> = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let lo_q = (1.0 - level) / 2.0;
    let hi_q = (1.0 + level) / 2.0;
    match method {
        CiMethod::Percentile => Ok((quantile_sorted(&sorted, lo_q), quantile_sorted(&sorted, hi_q))),
        CiMethod::Basic => {
            let lo = quantile_sorted(&sorted, lo_q);
            let hi = quantile_sorted(&sorted, hi_q);
            Ok((2.0 * point - hi, 2.0 * point - lo))
        }
        CiMethod::NormalBiasCorrected => {
            let b = samples.len() as f64;
            let mean = samples.iter().sum::<f64>() / b;
            let var = samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (b - 1.0);
            let sd = var.sqrt();
            let bias = mean - point;
            let z = inverse_normal_cdf(hi_q);
            let center = point - bias;
            Ok((center - z * sd, center + z * sd))
        }
    }
}

/// One bootstrap replicate.
#[derive(Debug, Clone)]
pub struct Replicate {
    pub gamma: Array1<f64>,
    /// Relabeled block matrix (`K x K`).
    pub theta: Array2<f64>,
    /// Relabeled cluster means (`K x d`).
    pub means: Array2<f64>,
    /// Edge probabilities for the tracked pairs.
    pub probs: Vec<f64>,
    pub seed: u64,
}

/// Full ensemble of bootstrap replicates.
#[derive(Debug, Clone)]
pub struct BootstrapEnsemble {
    pub requested: usize,
    pub replicates: Vec<Replicate>,
    pub tracked_pairs: Vec<(usize, usize)>,
    /// (replicate index, error message) of skipped replicates.
    pub failures: Vec<(usize, String)>,
    pub scheme: WeightScheme,
}

impl BootstrapEnsemble {
    pub fn gamma_samples(&self, l: usize) -> Vec<f64> {
        self.replicates.iter().map(|r| r.gamma[l]).collect()
    }

    pub fn theta_samples(&self, a: usize, b: usize) -> Vec<f64> {
        self.replicates.iter().map(|r| r.theta[[a, b]]).collect()
    }

    pub fn prob_samples(&self, t: usize) -> Vec<f64> {
        self.replicates.iter().map(|r| r.probs[t]).collect()
    }
}

/// Settings for [`run_bootstrap`].
#[derive(Debug, Clone)]
pub struct BootstrapConfig {
    pub b: usize,
    pub scheme: WeightScheme,
    pub seed: u64,
    /// Node pairs whose fitted probability is tracked across replicates.
    pub tracked_pairs: Vec<(usize, usize)>,
    /// Maximum tolerated fraction of failed replicates.
    pub max_failure_rate: f64,
}

impl BootstrapConfig {
    pub fn new(b: usize, scheme: WeightScheme, seed: u64) -> Self {
        BootstrapConfig {
            b,
            scheme,
            seed,
            tracked_pairs: Vec::new(),
            max_failure_rate: 0.1,
        }
    }
}

fn replicate_seed(master: u64, index: usize) -> u64 {
    // SplitMix64 step keeps per-replicate streams decorrelated while staying
    // reproducible across thread schedules.
    let mut z = master ^ (index as u64).wrapping_mul(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Runs the full bootstrap: each replicate draws weights, solves the
/// weighted coefficient and latent criteria, clusters the de-weighted
/// positions with the cluster count fixed at the point estimate's, relabels
/// monotonically, and records coefficients, block matrix and tracked
/// probabilities. The embedding dimension is likewise frozen at the point
/// estimate's to keep replicate-to-replicate variation parameter-driven.
pub fn run_bootstrap(
    params: &ModelParams,
    blocks: &ResidualBlocks,
    a: &Array2<f64>,
    x: &EdgeCovariates,
    config: &BootstrapConfig,
) -> Result<BootstrapEnsemble> {
    let n = a.nrows();
    if config.b == 0 {
        return Err(Error::invalid("need at least one replicate".to_string()));
    }
    for &(i, j) in &config.tracked_pairs {
        if i >= n || j >= n || i == j {
            return Err(Error::invalid(format!("bad tracked pair ({i}, {j})")));
        }
    }
    let d_hat = params.signature.d();
    let k_hat = blocks.k;
    let r_hat = params.residual_kernel();
    let y_prime = a - &r_hat;
    let gmm_opts = GmmOptions::default();

    let results: Vec<(usize, Result<Replicate>)> = (0..config.b)
        .into_par_iter()
        .map(|bi| {
            let seed = replicate_seed(config.seed, bi);
            let rep = (|| -> Result<Replicate> {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let w = draw_weights_rng(config.scheme, n, &mut rng)?;
                let gamma_star = if x.p() > 0 {
                    weighted_gamma_ols(&y_prime, x, &w)?
                } else {
                    Array1::zeros(0)
                };
                let latent = bootstrap_latent(a, x, &gamma_star, &w, d_hat)?;

                // Cluster only nodes with defined de-weighted positions.
                let included: Vec<usize> = (0..n)
                    .filter(|i| !latent.excluded.contains(i))
                    .collect();
                if included.len() < k_hat {
                    return Err(Error::DegenerateCluster(
                        "fewer defined positions than clusters".to_string(),
                    ));
                }
                let pts = Array2::from_shape_fn((included.len(), d_hat), |(r, c)| {
                    latent.lambda_star[[included[r], c]]
                });
                let gmm = fit_fixed_k(
                    pts.view(),
                    k_hat,
                    &CovarianceModel::ALL,
                    rng.random::<u64>(),
                    &gmm_opts,
                )?;

                // Scatter assignments back; excluded nodes go to the nearest
                // cluster mean.
                let mut assignments = vec![0usize; n];
                for (r, &i) in included.iter().enumerate() {
                    assignments[i] = gmm.assignments[r];
                }
                for &i in &latent.excluded {
                    let mut best = 0;
                    let mut best_d = f64::INFINITY;
                    for c in 0..k_hat {
                        let dist: f64 = (0..d_hat)
                            .map(|t| {
                                let dv = latent.lambda_star[[i, t]] - gmm.means[[c, t]];
                                dv * dv
                            })
                            .sum();
                        if dist < best_d {
                            best_d = dist;
                            best = c;
                        }
                    }
                    assignments[i] = best;
                }

                let raw = ResidualBlocks::from_means(
                    gmm.means.clone(),
                    assignments,
                    latent.signature,
                )?;
                let relabeled = relabel_monotone(&raw);
                let probs = config
                    .tracked_pairs
                    .iter()
                    .map(|&(i, j)| {
                        let mut v =
                            relabeled.theta[[relabeled.assignments[i], relabeled.assignments[j]]];
                        for (l, xl) in x.matrices().iter().enumerate() {
                            v += gamma_star[l] * xl[[i, j]];
                        }
                        v
                    })
                    .collect();
                Ok(Replicate {
                    gamma: gamma_star,
                    theta: relabeled.theta,
                    means: relabeled.means,
                    probs,
                    seed,
                })
            })();
            (bi, rep)
        })
        .collect();

    let mut replicates = Vec::with_capacity(config.b);
    let mut failures = Vec::new();
    for (bi, r) in results {
        match r {
            Ok(rep) => replicates.push(rep),
            Err(e) => failures.push((bi, e.to_string())),
        }
    }
    if failures.len() as f64 > config.max_failure_rate * config.b as f64 {
        return Err(Error::EnsembleQuality {
            failed: failures.len(),
            total: config.b,
        });
    }
    Ok(BootstrapEnsemble {
        requested: config.b,
        replicates,
        tracked_pairs: config.tracked_pairs.clone(),
        failures,
        scheme: config.scheme,
    })
}
