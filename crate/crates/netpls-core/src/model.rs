//! Domain types for the network-covariate model and the deterministic maps
//! from parameters to covariate effects and edge probabilities.
//!
//! The model gives every node pair `(i, j)`, `i < j`, an edge probability
//! `P_ij = x_ij' gamma + alpha_i' I_qs alpha_j`, where `x_ij` stacks the edge
//! covariates, `gamma` is the homophily coefficient vector and the second
//! term is an indefinite inner product of latent node positions.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};

/// Symmetric binary adjacency matrix with a zero diagonal.
#[derive(Debug, Clone)]
pub struct Adjacency {
    entries: Array2<f64>,
}

impl Adjacency {
    /// Validates that `entries` is square, symmetric, zero on the diagonal
    /// and contains only 0/1 values.
    pub fn from_matrix(entries: Array2<f64>) -> Result<Self> {
        let n = entries.nrows();
        if entries.ncols() != n {
            return Err(Error::invalid(format!(
                "adjacency must be square, got {}x{}",
                n,
                entries.ncols()
            )));
        }
        for i in 0..n {
            if entries[[i, i]] != 0.0 {
                return Err(Error::invalid(format!("self-loop at node {i}")));
            }
            for j in (i + 1)..n {
                let a = entries[[i, j]];
                if a != entries[[j, i]] {
                    return Err(Error::invalid(format!(
                        "adjacency not symmetric at ({i}, {j})"
                    )));
                }
                if a != 0.0 && a != 1.0 {
                    return Err(Error::invalid(format!(
                        "adjacency entry ({i}, {j}) = {a} is not 0/1"
                    )));
                }
            }
        }
        Ok(Adjacency { entries })
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.entries
    }

    pub fn into_matrix(self) -> Array2<f64> {
        self.entries
    }

    /// Number of edges (unordered pairs with A_ij = 1).
    pub fn edge_count(&self) -> usize {
        let n = self.n();
        let mut m = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                if self.entries[[i, j]] == 1.0 {
                    m += 1;
                }
            }
        }
        m
    }
}

/// A stack of `p` symmetric edge covariate matrices sharing one dimension.
#[derive(Debug, Clone)]
pub struct EdgeCovariates {
    n: usize,
    matrices: Vec<Array2<f64>>,
}

impl EdgeCovariates {
    pub fn new(n: usize, matrices: Vec<Array2<f64>>) -> Result<Self> {
        for (l, x) in matrices.iter().enumerate() {
            if x.nrows() != n || x.ncols() != n {
                return Err(Error::invalid(format!(
                    "covariate {l} has shape {}x{}, expected {n}x{n}",
                    x.nrows(),
                    x.ncols()
                )));
            }
            let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for i in 0..n {
                for j in (i + 1)..n {
                    if (x[[i, j]] - x[[j, i]]).abs() > 1e-10 * (1.0 + scale) {
                        return Err(Error::invalid(format!(
                            "covariate {l} not symmetric at ({i}, {j})"
                        )));
                    }
                }
            }
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("covariate {l} contains NaN/inf")));
            }
        }
        Ok(EdgeCovariates { n, matrices })
    }

    /// Covariate stack with `p = 0`, for models without a linear term.
    pub fn empty(n: usize) -> Self {
        EdgeCovariates {
            n,
            matrices: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.matrices.len()
    }

    pub fn matrices(&self) -> &[Array2<f64>] {
        &self.matrices
    }

    /// Covariate vector `x_ij` for one node pair.
    pub fn pair(&self, i: usize, j: usize) -> Array1<f64> {
        Array1::from_iter(self.matrices.iter().map(|x| x[[i, j]]))
    }
}

/// Counts of assortative (`q`) and disassortative (`s`) latent dimensions.
/// The latent dimension is `d = q + s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Signature {
    pub q: usize,
    pub s: usize,
}

impl Signature {
    pub fn new(q: usize, s: usize) -> Self {
        Signature { q, s }
    }

    pub fn d(&self) -> usize {
        self.q + self.s
    }

    /// Diagonal of the indefinite identity: +1 for the first `q` coordinates,
    /// -1 for the remaining `s`.
    pub fn metric_diag(&self) -> Array1<f64> {
        let mut diag = Array1::ones(self.d());
        for k in self.q..self.d() {
            diag[k] = -1.0;
        }
        diag
    }
}

/// Indefinite inner product `x' I_qs y`: the first `q` coordinate products
/// are added, the last `s` subtracted.
pub fn indefinite_inner_product(
    x: ArrayView1<'_, f64>,
    y: ArrayView1<'_, f64>,
    sig: Signature,
) -> Result<f64> {
    let d = sig.d();
    if x.len() != d || y.len() != d {
        return Err(Error::invalid(format!(
            "vector lengths {} and {} do not match signature dimension {d}",
            x.len(),
            y.len()
        )));
    }
    let mut acc = 0.0;
    for k in 0..sig.q {
        acc += x[k] * y[k];
    }
    for k in sig.q..d {
        acc -= x[k] * y[k];
    }
    Ok(acc)
}

/// Expands `Lambda I_qs Lambda'` to a full `n x n` matrix.
pub fn latent_kernel_matrix(lambda: ArrayView2<'_, f64>, sig: Signature) -> Array2<f64> {
    let diag = sig.metric_diag();
    let mut scaled = lambda.to_owned();
    for (mut col, sign) in scaled.columns_mut().into_iter().zip(diag.iter()) {
        col.mapv_inplace(|v| v * sign);
    }
    scaled.dot(&lambda.t())
}

/// Full parameter set of the model.
#[derive(Debug, Clone)]
pub struct ModelParams {
    /// Homophily coefficients, one per edge covariate.
    pub gamma: Array1<f64>,
    /// Latent positions, one row per node.
    pub lambda: Array2<f64>,
    pub signature: Signature,
}

impl ModelParams {
    pub fn new(gamma: Array1<f64>, lambda: Array2<f64>, signature: Signature) -> Result<Self> {
        if lambda.ncols() != signature.d() {
            return Err(Error::invalid(format!(
                "latent matrix has {} columns but signature dimension is {}",
                lambda.ncols(),
                signature.d()
            )));
        }
        Ok(ModelParams {
            gamma,
            lambda,
            signature,
        })
    }

    pub fn n(&self) -> usize {
        self.lambda.nrows()
    }

    pub fn residual_kernel(&self) -> Array2<f64> {
        latent_kernel_matrix(self.lambda.view(), self.signature)
    }
}

/// Block summary of the residual structure: `K` cluster means, node
/// assignments and the block matrix `theta[a][b] = mu_a' I_qs mu_b`.
#[derive(Debug, Clone)]
pub struct ResidualBlocks {
    pub k: usize,
    /// `K x d` matrix of cluster means.
    pub means: Array2<f64>,
    /// Zero-based cluster label per node.
    pub assignments: Vec<usize>,
    pub theta: Array2<f64>,
    pub signature: Signature,
}

impl ResidualBlocks {
    /// Builds the block matrix from cluster means; `theta` is always the
    /// exact indefinite Gram matrix of the means.
    pub fn from_means(
        means: Array2<f64>,
        assignments: Vec<usize>,
        sig: Signature,
    ) -> Result<Self> {
        let k = means.nrows();
        if means.ncols() != sig.d() {
            return Err(Error::invalid(format!(
                "means have dimension {} but signature dimension is {}",
                means.ncols(),
                sig.d()
            )));
        }
        if let Some(&bad) = assignments.iter().find(|&&z| z >= k) {
            return Err(Error::invalid(format!(
                "assignment label {bad} out of range for {k} clusters"
            )));
        }
        let mut theta = Array2::zeros((k, k));
        for a in 0..k {
            for b in a..k {
                let v = indefinite_inner_product(means.row(a), means.row(b), sig)?;
                theta[[a, b]] = v;
                theta[[b, a]] = v;
            }
        }
        Ok(ResidualBlocks {
            k,
            means,
            assignments,
            theta,
            signature: sig,
        })
    }

    /// Expands the block matrix to a full `n x n` residual matrix using the
    /// node assignments.
    pub fn expand(&self) -> Array2<f64> {
        let n = self.assignments.len();
        Array2::from_shape_fn((n, n), |(i, j)| {
            self.theta[[self.assignments[i], self.assignments[j]]]
        })
    }
}

/// Covariate effect matrix `C = sum_l gamma_l X_l`.
pub fn covariate_effect(gamma: ArrayView1<'_, f64>, x: &EdgeCovariates) -> Result<Array2<f64>> {
    if gamma.len() != x.p() {
        return Err(Error::invalid(format!(
            "gamma has length {} but there are {} covariates",
            gamma.len(),
            x.p()
        )));
    }
    let n = x.n();
    let mut c = Array2::zeros((n, n));
    for (g, xl) in gamma.iter().zip(x.matrices()) {
        c.scaled_add(*g, xl);
    }
    Ok(c)
}

/// Edge probability matrix implied by fitted blocks:
/// `P_ij = C_ij + theta[z_i][z_j]`.
///
/// The diagonal is filled in by the same formula but lies outside the model
/// (self-loops are structural zeros); callers should treat it as a report
/// value only. With `clamp` set, entries are truncated into `[0, 1]`.
pub fn edge_probability_matrix(
    gamma: ArrayView1<'_, f64>,
    blocks: &ResidualBlocks,
    x: &EdgeCovariates,
    clamp: bool,
) -> Result<Array2<f64>> {
    if blocks.assignments.len() != x.n() {
        return Err(Error::invalid(format!(
            "{} assignments for {} nodes",
            blocks.assignments.len(),
            x.n()
        )));
    }
    let mut p = covariate_effect(gamma, x)?;
    p += &blocks.expand();
    if clamp {
        p.mapv_inplace(|v| v.clamp(0.0, 1.0));
    }
    Ok(p)
}

/// Diagnostic report on whether a matrix is a valid edge probability matrix.
#[derive(Debug, Clone)]
pub struct ValidityReport {
    pub max: f64,
    pub min: f64,
    pub argmax: (usize, usize),
    pub argmin: (usize, usize),
    pub max_le_one: bool,
    pub min_ge_zero: bool,
}

impl ValidityReport {
    pub fn is_valid(&self) -> bool {
        self.max_le_one && self.min_ge_zero
    }
}

/// Scans the off-diagonal of `p` and reports the extreme values and whether
/// they satisfy `0 <= P_ij <= 1`. The diagonal is ignored (out of model).
pub fn validate_probability_model(p: &Array2<f64>) -> Result<ValidityReport> {
    let n = p.nrows();
    if p.ncols() != n {
        return Err(Error::invalid("probability matrix must be square".to_string()));
    }
    if n < 2 {
        return Err(Error::invalid("need at least two nodes".to_string()));
    }
    let mut max = f64::NEG_INFINITY;
    let mut min = f64::INFINITY;
    let mut argmax = (0, 1);
    let mut argmin = (0, 1);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let v = p[[i, j]];
            if v > max {
                max = v;
                argmax = (i, j);
            }
            if v < min {
                min = v;
                argmin = (i, j);
            }
        }
    }
    Ok(ValidityReport {
        max,
        min,
        argmax,
        argmin,
        max_le_one: max <= 1.0,
        min_ge_zero: min >= 0.0,
    })
}
