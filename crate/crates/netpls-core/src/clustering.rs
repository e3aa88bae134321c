//! Gaussian mixture clustering of latent positions, BIC model selection and
//! construction of the residual block matrix.

use ndarray::{Array1, Array2, ArrayView2};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{ResidualBlocks, Signature};

/// Covariance family of a mixture component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CovarianceModel {
    Spherical,
    Diagonal,
    Full,
}

impl CovarianceModel {
    pub const ALL: [CovarianceModel; 3] = [
        CovarianceModel::Spherical,
        CovarianceModel::Diagonal,
        CovarianceModel::Full,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            CovarianceModel::Spherical => "spherical",
            CovarianceModel::Diagonal => "diagonal",
            CovarianceModel::Full => "full",
        }
    }

    fn free_covariance_params(&self, k: usize, d: usize) -> usize {
        match self {
            CovarianceModel::Spherical => k,
            CovarianceModel::Diagonal => k * d,
            CovarianceModel::Full => k * d * (d + 1) / 2,
        }
    }
}

/// EM settings; the defaults match the rest of the pipeline.
#[derive(Debug, Clone)]
pub struct GmmOptions {
    pub restarts: usize,
    pub max_iter: usize,
    /// Relative tolerance on the log-likelihood change.
    pub rel_tol: f64,
}

impl Default for GmmOptions {
    fn default() -> Self {
        GmmOptions { restarts: 10, max_iter: 500, rel_tol: 1e-8 }
    }
}

/// A fitted Gaussian mixture.
#[derive(Debug, Clone)]
pub struct GmmFit {
    pub k: usize,
    pub cov_model: CovarianceModel,
    pub weights: Array1<f64>,
    /// `K x d` component means.
    pub means: Array2<f64>,
    /// Per-component covariance matrices (`d x d`, dense even for the
    /// constrained families).
    pub covariances: Vec<Array2<f64>>,
    pub loglik: f64,
    pub bic: f64,
    /// `n x K` posterior membership probabilities.
    pub responsibilities: Array2<f64>,
    /// Hard labels: argmax responsibility per point.
    pub assignments: Vec<usize>,
    /// Mean over points of `1 - max_k responsibility`.
    pub mean_uncertainty: f64,
    /// Log-likelihood after every EM iteration of the winning restart.
    pub loglik_trace: Vec<f64>,
}

struct Component {
    weight: f64,
    mean: Array1<f64>,
    cov: Array2<f64>,
    chol: Array2<f64>,
    log_det: f64,
}

fn cholesky(m: &Array2<f64>) -> Option<Array2<f64>> {
    let d = m.nrows();
    let mut l = Array2::zeros((d, d));
    for i in 0..d {
        for j in 0..=i {
            let mut sum = m[[i, j]];
            for k in 0..j {
                sum -= l[[i, k]] * l[[j, k]];
            }
            if i == j {
                if sum <= 0.0 || !sum.is_finite() {
                    return None;
                }
                l[[i, i]] = sum.sqrt();
            } else {
                l[[i, j]] = sum / l[[j, j]];
            }
        }
    }
    Some(l)
}

impl Component {
    fn new(weight: f64, mean: Array1<f64>, cov: Array2<f64>) -> Option<Self> {
        let chol = cholesky(&cov)?;
        let log_det = 2.0 * chol.diag().iter().map(|v| v.ln()).sum::<f64>();
        Some(Component { weight, mean, cov, chol, log_det })
    }

    fn log_pdf(&self, x: ArrayView2<'_, f64>, row: usize) -> f64 {
        let d = self.mean.len();
        // Solve L y = x - mu and accumulate ||y||^2.
        let mut y = vec![0.0; d];
        let mut quad = 0.0;
        for i in 0..d {
            let mut v = x[[row, i]] - self.mean[i];
            for (k, yk) in y.iter().enumerate().take(i) {
                v -= self.chol[[i, k]] * yk;
            }
            y[i] = v / self.chol[[i, i]];
            quad += y[i] * y[i];
        }
        -0.5 * (d as f64 * (2.0 * std::f64::consts::PI).ln() + self.log_det + quad)
            + self.weight.ln()
    }
}

fn kmeans_pp_centers(
    points: ArrayView2<'_, f64>,
    k: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<usize> {
    let n = points.nrows();
    let mut centers = Vec::with_capacity(k);
    centers.push(rng.random_range(0..n));
    let sq_dist = |a: usize, b: usize| -> f64 {
        points
            .row(a)
            .iter()
            .zip(points.row(b).iter())
            .map(|(x, y)| (x - y) * (x - y))
            .sum()
    };
    let mut d2: Vec<f64> = (0..n).map(|i| sq_dist(i, centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total <= 0.0 {
            // All remaining points coincide with a center; fall back to a
            // uniform draw.
            rng.random_range(0..n)
        } else {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                target -= w;
                if target <= 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        };
        centers.push(next);
        for (i, slot) in d2.iter_mut().enumerate() {
            *slot = slot.min(sq_dist(i, next));
        }
    }
    centers
}

struct EmRun {
    components: Vec<Component>,
    responsibilities: Array2<f64>,
    loglik: f64,
    trace: Vec<f64>,
}

fn m_step(
    points: ArrayView2<'_, f64>,
    resp: &Array2<f64>,
    cov_model: CovarianceModel,
    reg: f64,
) -> Option<Vec<Component>> {
    let (n, d) = (points.nrows(), points.ncols());
    let k = resp.ncols();
    let mut comps = Vec::with_capacity(k);
    for c in 0..k {
        let nk: f64 = (0..n).map(|i| resp[[i, c]]).sum();
        if nk < 1e-10 {
            return None;
        }
        let mut mean = Array1::zeros(d);
        for i in 0..n {
            for j in 0..d {
                mean[j] += resp[[i, c]] * points[[i, j]];
            }
        }
        mean /= nk;

        let mut cov = Array2::zeros((d, d));
        match cov_model {
            CovarianceModel::Spherical => {
                let mut s = 0.0;
                for i in 0..n {
                    let mut q = 0.0;
                    for j in 0..d {
                        let dv = points[[i, j]] - mean[j];
                        q += dv * dv;
                    }
                    s += resp[[i, c]] * q;
                }
                let var = s / (nk * d as f64) + reg;
                for j in 0..d {
                    cov[[j, j]] = var;
                }
            }
            CovarianceModel::Diagonal => {
                for j in 0..d {
                    let mut s = 0.0;
                    for i in 0..n {
                        let dv = points[[i, j]] - mean[j];
                        s += resp[[i, c]] * dv * dv;
                    }
                    cov[[j, j]] = s / nk + reg;
                }
            }
            CovarianceModel::Full => {
                for i in 0..n {
                    let r = resp[[i, c]];
                    if r == 0.0 {
                        continue;
                    }
                    for a in 0..d {
                        let da = points[[i, a]] - mean[a];
                        for b in a..d {
                            cov[[a, b]] += r * da * (points[[i, b]] - mean[b]);
                        }
                    }
                }
                for a in 0..d {
                    for b in 0..a {
                        cov[[a, b]] = cov[[b, a]];
                    }
                }
                cov /= nk;
                for a in 0..d {
                    cov[[a, a]] += reg;
                }
            }
        }
        comps.push(Component::new(nk / n as f64, mean, cov)?);
    }
    Some(comps)
}

fn em_once(
    points: ArrayView2<'_, f64>,
    k: usize,
    cov_model: CovarianceModel,
    opts: &GmmOptions,
    reg: f64,
    rng: &mut ChaCha8Rng,
) -> Option<EmRun> {
    let (n, _d) = (points.nrows(), points.ncols());
    // Hard-assign to kmeans++ seeds for the first responsibilities.
    let centers = kmeans_pp_centers(points, k, rng);
    let mut resp = Array2::zeros((n, k));
    for i in 0..n {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (c, &ctr) in centers.iter().enumerate() {
            let dist: f64 = points
                .row(i)
                .iter()
                .zip(points.row(ctr).iter())
                .map(|(x, y)| (x - y) * (x - y))
                .sum();
            if dist < best_d {
                best_d = dist;
                best = c;
            }
        }
        resp[[i, best]] = 1.0;
    }

    let mut comps = m_step(points, &resp, cov_model, reg)?;
    let mut loglik = f64::NEG_INFINITY;
    let mut trace = Vec::new();
    for _ in 0..opts.max_iter {
        // E step in the log domain.
        let mut new_ll = 0.0;
        for i in 0..n {
            let logs: Vec<f64> = comps.iter().map(|c| c.log_pdf(points, i)).collect();
            let mx = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let sum: f64 = logs.iter().map(|l| (l - mx).exp()).sum();
            let lse = mx + sum.ln();
            new_ll += lse;
            for c in 0..k {
                resp[[i, c]] = (logs[c] - lse).exp();
            }
        }
        trace.push(new_ll);
        let done = (new_ll - loglik).abs() <= opts.rel_tol * new_ll.abs().max(1.0);
        loglik = new_ll;
        if done {
            break;
        }
        comps = m_step(points, &resp, cov_model, reg)?;
    }
    Some(EmRun { components: comps, responsibilities: resp, loglik, trace })
}

fn regularization(points: ArrayView2<'_, f64>) -> f64 {
    let (n, d) = (points.nrows(), points.ncols());
    let mut var = 0.0;
    for j in 0..d {
        let mean: f64 = (0..n).map(|i| points[[i, j]]).sum::<f64>() / n as f64;
        var += (0..n).map(|i| (points[[i, j]] - mean).powi(2)).sum::<f64>() / n as f64;
    }
    let scale = var / d as f64;
    1e-10 * scale.max(1e-12)
}

/// Fits a `K`-component mixture by EM with k-means++ seeding and several
/// restarts, keeping the best local maximum of the likelihood.
pub fn fit_gmm(
    points: ArrayView2<'_, f64>,
    k: usize,
    cov_model: CovarianceModel,
    seed: u64,
) -> Result<GmmFit> {
    fit_gmm_with(points, k, cov_model, seed, &GmmOptions::default())
}

pub fn fit_gmm_with(
    points: ArrayView2<'_, f64>,
    k: usize,
    cov_model: CovarianceModel,
    seed: u64,
    opts: &GmmOptions,
) -> Result<GmmFit> {
    let (n, d) = (points.nrows(), points.ncols());
    if k == 0 || k > n {
        return Err(Error::invalid(format!("cannot fit {k} clusters to {n} points")));
    }
    if d == 0 {
        return Err(Error::invalid("points must have at least one dimension".to_string()));
    }
    if points.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("points contain NaN/inf".to_string()));
    }

    let base_reg = regularization(points);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<EmRun> = None;
    // Escalate the covariance floor only if every restart collapses.
    for &reg in &[base_reg, base_reg * 1e4, base_reg * 1e8] {
        for _ in 0..opts.restarts {
            if let Some(run) = em_once(points, k, cov_model, opts, reg, &mut rng) {
                let better = match &best {
                    Some(b) => run.loglik > b.loglik,
                    None => true,
                };
                if better {
                    best = Some(run);
                }
            }
        }
        if best.is_some() {
            break;
        }
    }
    let run = best.ok_or_else(|| {
        Error::DegenerateCluster(format!("EM failed to fit {k} components"))
    })?;

    let weights = Array1::from_iter(run.components.iter().map(|c| c.weight));
    let mut means = Array2::zeros((k, d));
    let mut covariances = Vec::with_capacity(k);
    for (c, comp) in run.components.iter().enumerate() {
        means.row_mut(c).assign(&comp.mean);
        covariances.push(comp.cov.clone());
    }
    let mut assignments = Vec::with_capacity(n);
    let mut uncertainty = 0.0;
    for i in 0..n {
        let mut best_c = 0;
        let mut best_r = f64::NEG_INFINITY;
        for c in 0..k {
            if run.responsibilities[[i, c]] > best_r {
                best_r = run.responsibilities[[i, c]];
                best_c = c;
            }
        }
        assignments.push(best_c);
        uncertainty += 1.0 - best_r;
    }
    let free_params = (k - 1) + k * d + cov_model.free_covariance_params(k, d);
    let bic = -2.0 * run.loglik + free_params as f64 * (n as f64).ln();
    Ok(GmmFit {
        k,
        cov_model,
        weights,
        means,
        covariances,
        loglik: run.loglik,
        bic,
        responsibilities: run.responsibilities,
        assignments,
        mean_uncertainty: uncertainty / n as f64,
        loglik_trace: run.trace,
    })
}

/// Fits every combination of `K in 1..=k_max` and covariance family and
/// returns the fit with the smallest BIC. Ties prefer fewer clusters, then
/// the simpler family.
pub fn select_k(
    points: ArrayView2<'_, f64>,
    k_max: usize,
    cov_models: &[CovarianceModel],
    seed: u64,
) -> Result<GmmFit> {
    select_k_with(points, k_max, cov_models, seed, &GmmOptions::default())
}

/// As [`select_k`], with explicit EM settings (large simulation studies use
/// fewer restarts).
pub fn select_k_with(
    points: ArrayView2<'_, f64>,
    k_max: usize,
    cov_models: &[CovarianceModel],
    seed: u64,
    opts: &GmmOptions,
) -> Result<GmmFit> {
    let n = points.nrows();
    if k_max == 0 {
        return Err(Error::invalid("k_max must be at least 1".to_string()));
    }
    let ks: Vec<usize> = (1..=k_max.min(n)).collect();
    let cells: Vec<(usize, CovarianceModel)> = ks
        .iter()
        .flat_map(|&k| cov_models.iter().map(move |&m| (k, m)))
        .collect();
    let fits: Vec<Result<GmmFit>> = cells
        .par_iter()
        .map(|&(k, m)| {
            let cell_seed = seed
                .wrapping_mul(0x9e3779b97f4a7c15)
                .wrapping_add((k as u64) << 8)
                .wrapping_add(m as u64);
            fit_gmm_with(points, k, m, cell_seed, opts)
        })
        .collect();

    let mut best: Option<GmmFit> = None;
    let mut last_err = None;
    for fit in fits {
        match fit {
            Ok(f) => {
                let better = match &best {
                    Some(b) => {
                        f.bic < b.bic
                            || (f.bic == b.bic
                                && (f.k, f.cov_model) < (b.k, b.cov_model))
                    }
                    None => true,
                };
                if better {
                    best = Some(f);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    best.ok_or_else(|| match last_err {
        Some(e) => e,
        None => Error::DegenerateCluster("no mixture could be fitted".to_string()),
    })
}

/// Fixed-`K` fit choosing the covariance family by BIC; used by bootstrap
/// replicates and the manual-K override.
pub fn fit_fixed_k(
    points: ArrayView2<'_, f64>,
    k: usize,
    cov_models: &[CovarianceModel],
    seed: u64,
    opts: &GmmOptions,
) -> Result<GmmFit> {
    let mut best: Option<GmmFit> = None;
    let mut last_err = None;
    for (idx, &m) in cov_models.iter().enumerate() {
        let cell_seed = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(idx as u64);
        match fit_gmm_with(points, k, m, cell_seed, opts) {
            Ok(f) => {
                let better = match &best {
                    Some(b) => f.bic < b.bic,
                    None => true,
                };
                if better {
                    best = Some(f);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    best.ok_or_else(|| match last_err {
        Some(e) => e,
        None => Error::DegenerateCluster("no covariance family succeeded".to_string()),
    })
}

/// Builds the residual block matrix from fitted cluster means:
/// `theta[a][b]` is the indefinite inner product of means `a` and `b`.
pub fn residual_blocks(gmm: &GmmFit, sig: Signature) -> Result<ResidualBlocks> {
    if gmm.means.ncols() != sig.d() {
        return Err(Error::invalid(format!(
            "means have dimension {} but signature dimension is {}",
            gmm.means.ncols(),
            sig.d()
        )));
    }
    ResidualBlocks::from_means(gmm.means.clone(), gmm.assignments.clone(), sig)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::arr2;
    use rand_distr::Distribution;

    fn two_cloud_data(n_half: usize, sep: f64, sd: f64, seed: u64) -> Array2<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = rand_distr::Normal::new(0.0, sd).unwrap();
        Array2::from_shape_fn((2 * n_half, 1), |(i, _)| {
            let center = if i < n_half { -sep } else { sep };
            center + normal.sample(&mut rng)
        })
    }

    #[test]
    fn separated_clouds_are_recovered() {
        let pts = two_cloud_data(100, 1.0, 0.01, 9);
        let fit = fit_gmm(pts.view(), 2, CovarianceModel::Spherical, 1).unwrap();
        let first = fit.assignments[0];
        assert!(fit.assignments[..100].iter().all(|&a| a == first));
        assert!(fit.assignments[100..].iter().all(|&a| a != first));
        assert!(fit.mean_uncertainty < 1e-8);
    }

    #[test]
    fn identical_points_fit_single_component() {
        let pts = Array2::from_elem((20, 2), 0.7);
        let fit = fit_gmm(pts.view(), 1, CovarianceModel::Full, 3).unwrap();
        assert!((fit.means[[0, 0]] - 0.7).abs() < 1e-12);
        assert!(fit.loglik.is_finite());
    }

    #[test]
    fn k1_loglik_matches_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pts = Array2::from_shape_fn((150, 1), |_| rng.random::<f64>());
        let fit = fit_gmm(pts.view(), 1, CovarianceModel::Spherical, 2).unwrap();
        let n = 150.0;
        let mean: f64 = pts.iter().sum::<f64>() / n;
        let var: f64 = pts.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let want = -0.5 * n * ((2.0 * std::f64::consts::PI * var).ln() + 1.0);
        assert!(
            (fit.loglik - want).abs() < 1e-6 * want.abs(),
            "got {} want {want}",
            fit.loglik
        );
    }

    #[test]
    fn bic_selects_two_for_separated_and_one_for_single_cloud() {
        let pts = two_cloud_data(80, 1.0, 0.05, 17);
        let fit = select_k(pts.view(), 5, &CovarianceModel::ALL, 4).unwrap();
        assert_eq!(fit.k, 2);

        let single = two_cloud_data(80, 0.0, 0.05, 23);
        let fit = select_k(single.view(), 5, &CovarianceModel::ALL, 4).unwrap();
        assert_eq!(fit.k, 1);
    }

    #[test]
    fn em_trace_is_monotone() {
        let pts = two_cloud_data(60, 0.5, 0.2, 31);
        let fit = fit_gmm(pts.view(), 3, CovarianceModel::Diagonal, 11).unwrap();
        for w in fit.loglik_trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-9, "loglik decreased: {} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn select_k_is_deterministic() {
        let pts = two_cloud_data(50, 0.8, 0.1, 41);
        let a = select_k(pts.view(), 4, &CovarianceModel::ALL, 8).unwrap();
        let b = select_k(pts.view(), 4, &CovarianceModel::ALL, 8).unwrap();
        assert_eq!(a.k, b.k);
        assert_eq!(a.cov_model, b.cov_model);
        assert_eq!(a.means, b.means);
    }

    #[test]
    fn residual_blocks_from_means() {
        let pts = arr2(&[[0.3], [0.3], [0.668], [0.668]]);
        let fit = fit_gmm(pts.view(), 2, CovarianceModel::Spherical, 6).unwrap();
        let blocks = residual_blocks(&fit, Signature::new(1, 0)).unwrap();
        let mut diag: Vec<f64> = blocks.theta.diag().to_vec();
        diag.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((diag[0] - 0.09).abs() < 1e-8);
        assert!((diag[1] - 0.446224).abs() < 1e-8);
    }
}
