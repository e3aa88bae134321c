//! Independent oracles used by the integration and acceptance tests. These
//! deliberately avoid the library's own linear algebra: the eigensolver is
//! a classical Jacobi rotation sweep and the regressions are explicit
//! normal equations, so agreement is a two-route check.

#![allow(dead_code)]

use ndarray::{Array1, Array2};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Jacobi eigenvalue iteration for symmetric matrices. Returns
/// (eigenvalues, eigenvectors as columns), unsorted.
pub fn jacobi_eigen(a: &Array2<f64>, sweeps: usize) -> (Vec<f64>, Array2<f64>) {
    let n = a.nrows();
    let mut m = a.clone();
    let mut v = Array2::<f64>::eye(n);
    for _ in 0..sweeps {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[[i, j]] * m[[i, j]];
            }
        }
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if m[[p, q]].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[[q, q]] - m[[p, p]]) / (2.0 * m[[p, q]]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[[k, p]], m[[k, q]]);
                    m[[k, p]] = c * mkp - s * mkq;
                    m[[k, q]] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[[p, k]], m[[q, k]]);
                    m[[p, k]] = c * mpk - s * mqk;
                    m[[q, k]] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[[k, p]], v[[k, q]]);
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| m[[i, i]]).collect(), v)
}

/// Brute-force best symmetric rank-`d` approximation in Frobenius norm:
/// reconstructs from every size-`d` subset of Jacobi eigenpairs and keeps
/// the closest.
pub fn brute_force_rank_d(a: &Array2<f64>, d: usize) -> Array2<f64> {
    let n = a.nrows();
    let (vals, vecs) = jacobi_eigen(a, 60);
    let idx: Vec<usize> = (0..n).collect();
    let mut best: Option<(f64, Array2<f64>)> = None;
    for subset in combinations(&idx, d) {
        let mut m = Array2::<f64>::zeros((n, n));
        for &k in &subset {
            for i in 0..n {
                for j in 0..n {
                    m[[i, j]] += vals[k] * vecs[[i, k]] * vecs[[j, k]];
                }
            }
        }
        let dist: f64 = m
            .iter()
            .zip(a.iter())
            .map(|(x, y)| (x - y) * (x - y))
            .sum();
        if best.as_ref().map(|(b, _)| dist < *b).unwrap_or(true) {
            best = Some((dist, m));
        }
    }
    best.unwrap().1
}

pub fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    if items.len() < k {
        return Vec::new();
    }
    let mut out = Vec::new();
    for (i, &first) in items.iter().enumerate() {
        for mut rest in combinations(&items[i + 1..], k - 1) {
            let mut c = vec![first];
            c.append(&mut rest);
            out.push(c);
        }
    }
    out
}

/// Explicit normal-equation OLS of `y` on the columns of `x` (no
/// intercept), solved by Gauss-Jordan with full pivoting on the inverse.
pub fn ols_normal_equations(x: &Array2<f64>, y: &Array1<f64>) -> Array1<f64> {
    let p = x.ncols();
    let mut g = Array2::<f64>::zeros((p, p));
    let mut b = Array1::<f64>::zeros(p);
    for r in 0..x.nrows() {
        for l in 0..p {
            b[l] += x[[r, l]] * y[r];
            for m in 0..p {
                g[[l, m]] += x[[r, l]] * x[[r, m]];
            }
        }
    }
    let gi = invert(&g);
    gi.dot(&b)
}

fn invert(a: &Array2<f64>) -> Array2<f64> {
    let n = a.nrows();
    let mut m = a.clone();
    let mut inv = Array2::<f64>::eye(n);
    for col in 0..n {
        let mut piv = col;
        for r in (col + 1)..n {
            if m[[r, col]].abs() > m[[piv, col]].abs() {
                piv = r;
            }
        }
        if piv != col {
            for c in 0..n {
                m.swap([col, c], [piv, c]);
                inv.swap([col, c], [piv, c]);
            }
        }
        let d = m[[col, col]];
        assert!(d.abs() > 1e-14, "oracle design is singular");
        for c in 0..n {
            m[[col, c]] /= d;
            inv[[col, c]] /= d;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = m[[r, col]];
            if f == 0.0 {
                continue;
            }
            for c in 0..n {
                let (mc, ic) = (m[[col, c]], inv[[col, c]]);
                m[[r, c]] -= f * mc;
                inv[[r, c]] -= f * ic;
            }
        }
    }
    inv
}

/// Random symmetric matrix with entries in [-1, 1].
pub fn random_symmetric(n: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let mut m = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in i..n {
            let v = rng.random::<f64>() * 2.0 - 1.0;
            m[[i, j]] = v;
            m[[j, i]] = v;
        }
    }
    m
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn frob_dist(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
