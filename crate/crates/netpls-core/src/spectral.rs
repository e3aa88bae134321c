//! Symmetric eigendecomposition, the rank-d filter, signature detection and
//! profile-likelihood dimension selection.

use ndarray::Array2;
use std::sync::Once;

use crate::error::{Error, Result};
use crate::model::Signature;

/// Full eigensystem of a symmetric matrix, ordered by decreasing signed
/// eigenvalue. Columns of `vectors` are the matching orthonormal
/// eigenvectors.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    pub vectors: Array2<f64>,
}

/// Spectral embedding `Lambda = U |S|^{1/2}` built from the `d` kept
/// eigenpairs.
#[derive(Debug, Clone)]
pub struct Embedding {
    /// `n x d` latent position matrix, columns ordered by decreasing signed
    /// kept eigenvalue.
    pub lambda: Array2<f64>,
    pub signature: Signature,
    /// Kept eigenvalues in the same column order.
    pub kept_values: Vec<f64>,
    /// Set when the input was (numerically) zero or some kept eigenvalue is
    /// below the noise floor; such values are counted as assortative.
    pub degenerate: bool,
}

fn faer_seq_once() {
    static INIT: Once = Once::new();
    INIT.call_once(|| {
        // Single-threaded kernels keep results bit-reproducible; outer code
        // parallelizes across starts and replicates instead.
        faer::set_global_parallelism(faer::Par::Seq);
    });
}

fn frobenius(b: &Array2<f64>) -> f64 {
    b.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Dense symmetric eigendecomposition.
///
/// The input must be symmetric to `1e-10` relative tolerance; the result is
/// sorted by decreasing signed eigenvalue.
pub fn symmetric_eigendecomposition(b: &Array2<f64>) -> Result<EigenSystem> {
    let n = b.nrows();
    if b.ncols() != n {
        return Err(Error::invalid(format!(
            "matrix must be square, got {}x{}",
            n,
            b.ncols()
        )));
    }
    if n == 0 {
        return Err(Error::invalid("empty matrix".to_string()));
    }
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for i in 0..n {
        for j in (i + 1)..n {
            if (b[[i, j]] - b[[j, i]]).abs() > 1e-10 * (1.0 + scale) {
                return Err(Error::invalid(format!(
                    "matrix not symmetric at ({i}, {j})"
                )));
            }
        }
    }

    faer_seq_once();
    let m = faer::Mat::from_fn(n, n, |i, j| 0.5 * (b[[i, j]] + b[[j, i]]));
    let evd = m
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::NumericalFailure(format!("eigendecomposition failed: {e:?}")))?;

    let s = evd.S();
    let u = evd.U();
    let mut order: Vec<usize> = (0..n).collect();
    // Decreasing signed value; ties keep the solver's index order.
    order.sort_by(|&a, &c| s[c].partial_cmp(&s[a]).unwrap().then(a.cmp(&c)));

    let values: Vec<f64> = order.iter().map(|&k| s[k]).collect();
    let vectors = Array2::from_shape_fn((n, n), |(i, j)| u[(i, order[j])]);
    Ok(EigenSystem { values, vectors })
}

/// Result of applying the rank-d filter: the filtered matrix together with
/// the detected signature and the embedding that generates it.
#[derive(Debug, Clone)]
pub struct FilteredMatrix {
    pub filtered: Array2<f64>,
    pub signature: Signature,
    pub embedding: Embedding,
}

/// Keeps the `d` largest-in-magnitude eigenvalues of `b` (with their signs)
/// and reconstructs the corresponding low-rank matrix. Kept eigenpairs are
/// ordered by decreasing signed eigenvalue, so the embedding's first `q`
/// columns are assortative and the last `s` disassortative.
pub fn rank_d_filter(b: &Array2<f64>, d: usize) -> Result<FilteredMatrix> {
    let eig = symmetric_eigendecomposition(b)?;
    let fro = frobenius(b);
    rank_d_filter_from(&eig, d, fro)
}

pub(crate) fn rank_d_filter_from(
    eig: &EigenSystem,
    d: usize,
    frobenius_norm: f64,
) -> Result<FilteredMatrix> {
    let n = eig.values.len();
    if d == 0 || d > n {
        return Err(Error::invalid(format!(
            "rank {d} out of range for dimension {n}"
        )));
    }

    // Candidate order: decreasing magnitude, ties broken toward the more
    // positive value (stable within the signed-descending base order).
    let mut by_mag: Vec<usize> = (0..n).collect();
    by_mag.sort_by(|&a, &c| {
        eig.values[c]
            .abs()
            .partial_cmp(&eig.values[a].abs())
            .unwrap()
            .then(a.cmp(&c))
    });
    let mut kept: Vec<usize> = by_mag[..d].to_vec();
    // Present kept values by decreasing signed value.
    kept.sort_by(|&a, &c| eig.values[c].partial_cmp(&eig.values[a]).unwrap().then(a.cmp(&c)));

    let floor = 1e-12 * frobenius_norm;
    let mut q = 0;
    let mut s = 0;
    let mut degenerate = false;
    for &k in &kept {
        let v = eig.values[k];
        if v.abs() <= floor {
            // Noise-floor eigenvalues count as assortative.
            q += 1;
            degenerate = true;
        } else if v > 0.0 {
            q += 1;
        } else {
            s += 1;
        }
    }
    let signature = Signature::new(q, s);

    let mut lambda = Array2::zeros((n, d));
    let mut filtered = Array2::zeros((n, n));
    let mut kept_values = Vec::with_capacity(d);
    for (col, &k) in kept.iter().enumerate() {
        let v = eig.values[k];
        kept_values.push(v);
        let root = v.abs().sqrt();
        for i in 0..n {
            lambda[[i, col]] = eig.vectors[[i, k]] * root;
        }
        for i in 0..n {
            let ui = eig.vectors[[i, k]] * v;
            for j in 0..n {
                filtered[[i, j]] += ui * eig.vectors[[j, k]];
            }
        }
    }

    Ok(FilteredMatrix {
        filtered,
        signature,
        embedding: Embedding {
            lambda,
            signature,
            kept_values,
            degenerate,
        },
    })
}

/// Dimension selection on a scree of eigenvalue magnitudes.
///
/// Fits a two-group Gaussian model with common variance, splitting the
/// sorted values after position `d`, and returns the split maximizing the
/// profile log-likelihood over `d in 1..=max_d`. Since the group sizes sum
/// to a constant, this is equivalent to minimizing the pooled sum of squared
/// deviations; exact ties break toward the smaller dimension.
pub fn select_dimension_zhu_ghodsi(magnitudes: &[f64], max_d: usize) -> Result<usize> {
    let m = magnitudes.len();
    if m < 2 {
        return Err(Error::invalid(
            "dimension selection needs at least two magnitudes".to_string(),
        ));
    }
    if magnitudes.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::invalid(
            "magnitudes must be sorted in nonincreasing order".to_string(),
        ));
    }
    if magnitudes.iter().any(|&v| !v.is_finite() || v <= 0.0) {
        return Err(Error::invalid(
            "magnitudes must be positive finite reals".to_string(),
        ));
    }

    let prefix: Vec<f64> = std::iter::once(0.0)
        .chain(magnitudes.iter().scan(0.0, |acc, &v| {
            *acc += v;
            Some(*acc)
        }))
        .collect();
    let prefix_sq: Vec<f64> = std::iter::once(0.0)
        .chain(magnitudes.iter().scan(0.0, |acc, &v| {
            *acc += v * v;
            Some(*acc)
        }))
        .collect();
    let group_ss = |lo: usize, hi: usize| -> f64 {
        // Sum of squared deviations of magnitudes[lo..hi] around their mean.
        let cnt = (hi - lo) as f64;
        let sum = prefix[hi] - prefix[lo];
        let sumsq = prefix_sq[hi] - prefix_sq[lo];
        (sumsq - sum * sum / cnt).max(0.0)
    };

    let upper = max_d.min(m - 1).max(1);
    let mut best_d = 1;
    let mut best_ss = f64::INFINITY;
    for d in 1..=upper {
        let ss = group_ss(0, d) + group_ss(d, m);
        if ss < best_ss {
            best_ss = ss;
            best_d = d;
        }
    }
    Ok(best_d)
}

/// Configuration for automatic dimension selection.
#[derive(Debug, Clone, Copy, Default)]
pub struct SpectralConfig {
    /// Largest dimension the selector may return; defaults to `min(n-1, 20)`.
    pub max_d: Option<usize>,
}

impl SpectralConfig {
    pub fn resolved_max_d(&self, n: usize) -> usize {
        self.max_d.unwrap_or_else(|| n.saturating_sub(1).min(20)).max(1)
    }
}

/// Spectral embedding of a symmetric matrix. When `d` is absent the
/// dimension is chosen by [`select_dimension_zhu_ghodsi`] applied to the
/// leading eigenvalue magnitudes (the top `max_d + 1`, after dropping
/// magnitudes below the `1e-12 * ||Y||_F` noise floor).
pub fn spectral_embed(
    y: &Array2<f64>,
    d: Option<usize>,
    config: &SpectralConfig,
) -> Result<Embedding> {
    Ok(spectral_embed_full(y, d, config)?.embedding)
}

/// As [`spectral_embed`], but also returns the filtered matrix
/// `Lambda I_qs Lambda'`, which iterative callers reuse.
pub fn spectral_embed_full(
    y: &Array2<f64>,
    d: Option<usize>,
    config: &SpectralConfig,
) -> Result<FilteredMatrix> {
    let n = y.nrows();
    let eig = symmetric_eigendecomposition(y)?;
    let fro = frobenius(y);

    if fro < 1e-300 {
        // Zero input: report a one-dimensional zero embedding instead of
        // erroring so resampled pipelines never abort.
        let d = d.unwrap_or(1);
        if d == 0 || d > n {
            return Err(Error::invalid(format!("rank {d} out of range")));
        }
        let signature = Signature::new(d, 0);
        return Ok(FilteredMatrix {
            filtered: Array2::zeros((n, n)),
            signature,
            embedding: Embedding {
                lambda: Array2::zeros((n, d)),
                signature,
                kept_values: vec![0.0; d],
                degenerate: true,
            },
        });
    }

    let chosen = match d {
        Some(d) => d,
        None => {
            let floor = 1e-12 * fro;
            let mut mags: Vec<f64> = eig.values.iter().map(|v| v.abs()).collect();
            mags.sort_by(|a, b| b.partial_cmp(a).unwrap());
            mags.retain(|&v| v > floor);
            let max_d = config.resolved_max_d(n);
            if mags.len() < 2 {
                1
            } else {
                let window = mags.len().min(max_d + 1);
                select_dimension_zhu_ghodsi(&mags[..window], max_d)?.min(mags.len())
            }
        }
    };
    rank_d_filter_from(&eig, chosen, fro)
}
