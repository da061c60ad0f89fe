//! Linear solvers, extreme eigenvalue estimates, condition numbers and the
//! round-off indicator.

mod direct;
mod eigen;
mod iterative;
mod sparse;

pub use direct::{dense_solve, rcm_ordering, DenseMethod, EnvelopeCholesky};
pub use eigen::{
    condition_number, extreme_eigs, extreme_eigs_seeded, lanczos_largest, scaled_condition, EigenEstimate,
    EigenMethod, DEFAULT_SEED, DENSE_LIMIT, EIGEN_TOL,
};
pub use iterative::{cg, CgOutcome};
pub use sparse::{write_vector, CsrMatrix};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    Direct,
    Cg,
    Dense(DenseMethod),
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    #[serde(skip)]
    pub solution: Vec<f64>,
    pub solver: SolverKind,
    pub iterations: Option<usize>,
    /// `‖K u - F‖ / ‖F‖`.
    pub relative_residual: f64,
    pub envelope_size: Option<usize>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConditionReport {
    pub mu_max: f64,
    pub mu_min: f64,
    pub kappa: f64,
    pub kappa_s: f64,
    pub method: EigenMethod,
}

pub fn relative_residual(k: &CsrMatrix, u: &[f64], f: &[f64]) -> f64 {
    let r = k.mul_vec(u);
    let num: f64 = r.iter().zip(f).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let den: f64 = f.iter().map(|x| x * x).sum::<f64>().sqrt();
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

/// Solve with the given method. `Cg` uses a Jacobi preconditioner with
/// relative tolerance `1e-12`.
pub fn solve(k: &CsrMatrix, f: &[f64], solver: SolverKind) -> Result<SolveReport> {
    if k.nrows != f.len() || k.ncols != f.len() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix with rhs of length {}",
            k.nrows,
            k.ncols,
            f.len()
        )));
    }
    let (solution, iterations, envelope_size) = match solver {
        SolverKind::Direct => {
            let c = EnvelopeCholesky::factor(k)?;
            (c.solve(f), None, Some(c.envelope_size()))
        }
        SolverKind::Cg => {
            let out = cg(k, f, 1e-12, 20 * k.nrows.max(10))?;
            (out.x, Some(out.iterations), None)
        }
        SolverKind::Dense(m) => (dense_solve(&k.to_dense(), f, m)?, None, None),
    };
    let relative_residual = relative_residual(k, &solution, f);
    Ok(SolveReport {
        solution,
        solver,
        iterations,
        relative_residual,
        envelope_size,
    })
}

/// `κ(K)` and `κ(D^{-1/2} K D^{-1/2})`; `seed` drives the Lanczos start vectors.
pub fn condition_report(k: &CsrMatrix, method: EigenMethod, seed: u64) -> Result<ConditionReport> {
    let e = extreme_eigs_seeded(k, method, seed)?;
    let kappa_s = extreme_eigs_seeded(&k.jacobi_scaled()?, method, seed)?.condition();
    Ok(ConditionReport {
        mu_max: e.max,
        mu_min: e.min,
        kappa: e.condition(),
        kappa_s,
        method: e.method,
    })
}

/// `η = ‖u - û‖ / ‖u‖`.
pub fn roundoff_eta(exact: &[f64], computed: &[f64]) -> Result<f64> {
    if exact.len() != computed.len() {
        return Err(Error::DimensionMismatch(format!(
            "vectors of length {} and {}",
            exact.len(),
            computed.len()
        )));
    }
    let norm: f64 = exact.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::UndefinedIndicator);
    }
    let diff: f64 = exact
        .iter()
        .zip(computed)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(diff / norm)
}
