use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::direct::EnvelopeCholesky;
use super::sparse::CsrMatrix;
use crate::{Error, Result};

/// Systems up to this size use a dense symmetric eigensolver under
/// [`EigenMethod::Auto`].
pub const DENSE_LIMIT: usize = 600;

/// Relative accuracy targeted by the iterative path.
pub const EIGEN_TOL: f64 = 1e-6;

const MAX_LANCZOS: usize = 400;
/// Seed of the Lanczos start vectors when none is given.
pub const DEFAULT_SEED: u64 = 0x1fe_5eed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EigenMethod {
    Auto,
    Dense,
    Lanczos,
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct EigenEstimate {
    pub max: f64,
    pub min: f64,
    pub method: EigenMethod,
    pub iterations: usize,
}

impl EigenEstimate {
    pub fn condition(&self) -> f64 {
        if self.min > 0.0 {
            self.max / self.min
        } else {
            f64::INFINITY
        }
    }
}

/// Extreme eigenvalues of a symmetric matrix.
///
/// The largest comes from Lanczos on `K`, the smallest from Lanczos on `K⁻¹`
/// applied through a sparse Cholesky factor; both with full
/// reorthogonalization and a fixed seed.
pub fn extreme_eigs(k: &CsrMatrix, method: EigenMethod) -> Result<EigenEstimate> {
    extreme_eigs_seeded(k, method, DEFAULT_SEED)
}

/// [`extreme_eigs`] with the seed of the Lanczos start vectors.
pub fn extreme_eigs_seeded(k: &CsrMatrix, method: EigenMethod, seed: u64) -> Result<EigenEstimate> {
    let n = k.nrows;
    if n == 0 || k.ncols != n {
        return Err(Error::DimensionMismatch(format!(
            "eigenvalues of a {}x{} matrix",
            k.nrows, k.ncols
        )));
    }
    let dense = match method {
        EigenMethod::Dense => true,
        EigenMethod::Lanczos => false,
        EigenMethod::Auto => n <= DENSE_LIMIT,
    };
    if dense {
        let d = k.to_dense();
        let sym = (&d + d.transpose()) * 0.5;
        let ev = sym.symmetric_eigen().eigenvalues;
        return Ok(EigenEstimate {
            max: ev.max(),
            min: ev.min(),
            method: EigenMethod::Dense,
            iterations: 0,
        });
    }
    let (max, it_max) = lanczos_largest(n, seed, |x| k.mul_vec(x))?;
    let chol = EnvelopeCholesky::factor(k)?;
    let (inv_max, it_min) = lanczos_largest(n, seed ^ 1, |x| chol.solve(x)).map_err(|e| match e {
        Error::EstimationFailure { max: m, .. } => Error::EstimationFailure {
            max,
            min: 1.0 / m,
        },
        e => e,
    })?;
    Ok(EigenEstimate {
        max,
        min: 1.0 / inv_max,
        method: EigenMethod::Lanczos,
        iterations: it_max.max(it_min),
    })
}

/// Largest eigenvalue of the symmetric operator `op` by Lanczos iteration.
pub fn lanczos_largest(
    n: usize,
    seed: u64,
    mut op: impl FnMut(&[f64]) -> Vec<f64>,
) -> Result<(f64, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    normalize(&mut v);
    let m = MAX_LANCZOS.min(n);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut alpha = Vec::with_capacity(m);
    let mut beta: Vec<f64> = Vec::with_capacity(m);
    let mut best = 0.0;
    for j in 0..m {
        let mut w = op(&v);
        let a = dot(&w, &v);
        alpha.push(a);
        basis.push(v);
        // full reorthogonalization, twice for stability
        for _ in 0..2 {
            for q in &basis {
                let c = dot(&w, q);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= c * qi;
                }
            }
        }
        let b = dot(&w, &w).sqrt();
        let done = j + 1 == m || b <= 1e-14 * a.abs().max(f64::MIN_POSITIVE);
        if done || (j + 1) % 5 == 0 {
            let (theta, resid) = ritz_top(&alpha, &beta, b);
            best = theta;
            if done || resid <= EIGEN_TOL * theta.abs() * 1e-2 {
                return Ok((theta, j + 1));
            }
        }
        beta.push(b);
        v = w.into_iter().map(|x| x / b).collect();
    }
    Err(Error::EstimationFailure {
        max: best,
        min: f64::NAN,
    })
}

/// Top Ritz value of the Lanczos tridiagonal and its residual bound.
fn ritz_top(alpha: &[f64], beta: &[f64], b_next: f64) -> (f64, f64) {
    let k = alpha.len();
    let mut t = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alpha[i];
        if i + 1 < k {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = t.symmetric_eigen();
    let (idx, theta) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &e)| if e > acc.1 { (i, e) } else { acc });
    let resid = (b_next * eig.eigenvectors[(k - 1, idx)]).abs();
    (theta, resid)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) {
    let s = dot(v, v).sqrt();
    v.iter_mut().for_each(|x| *x /= s);
}

/// `κ(K) = μ_max / μ_min`.
pub fn condition_number(k: &CsrMatrix, method: EigenMethod) -> Result<f64> {
    Ok(extreme_eigs(k, method)?.condition())
}

/// `κ(D^{-1/2} K D^{-1/2})`.
pub fn scaled_condition(k: &CsrMatrix, method: EigenMethod) -> Result<f64> {
    Ok(extreme_eigs(&k.jacobi_scaled()?, method)?.condition())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplace_1d(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i > 0 {
                t.push((i, i - 1, -1.0));
                t.push((i - 1, i, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, n, &t)
    }

    #[test]
    fn diagonal_spectrum() {
        let t: Vec<_> = (0..10).map(|i| (i, i, (i + 1) as f64)).collect();
        let m = CsrMatrix::from_triplets(10, 10, &t);
        for method in [EigenMethod::Dense, EigenMethod::Lanczos] {
            let e = extreme_eigs(&m, method).unwrap();
            assert!((e.max - 10.0).abs() < 1e-8);
            assert!((e.min - 1.0).abs() < 1e-8);
        }
        assert!((scaled_condition(&m, EigenMethod::Auto).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn laplacian_closed_form() {
        let m = laplace_1d(10);
        let pi = std::f64::consts::PI;
        let max = 2.0 - 2.0 * (10.0 * pi / 11.0).cos();
        let min = 2.0 - 2.0 * (pi / 11.0).cos();
        for method in [EigenMethod::Dense, EigenMethod::Lanczos] {
            let e = extreme_eigs(&m, method).unwrap();
            assert!((e.max - max).abs() < 1e-8, "{method:?}");
            assert!((e.min - min).abs() < 1e-8, "{method:?}");
        }
    }

    #[test]
    fn dense_and_lanczos_agree_on_larger_system() {
        let m = laplace_1d(300);
        let d = extreme_eigs(&m, EigenMethod::Dense).unwrap();
        let l = extreme_eigs(&m, EigenMethod::Lanczos).unwrap();
        assert!((d.max - l.max).abs() <= 1e-4 * d.max);
        assert!((d.min - l.min).abs() <= 1e-4 * d.min);
    }

    #[test]
    fn scaled_condition_is_homogeneous() {
        let m = laplace_1d(30);
        let a = scaled_condition(&m, EigenMethod::Auto).unwrap();
        let b = scaled_condition(&m.scale(7.5), EigenMethod::Auto).unwrap();
        assert!((a - b).abs() < 1e-9 * a);
    }
}
