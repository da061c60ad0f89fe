use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};

use super::sparse::CsrMatrix;
use crate::{Error, Result};

/// Reverse Cuthill-McKee ordering of the (symmetrized) sparsity pattern.
/// `perm[new] = old`.
pub fn rcm_ordering(a: &CsrMatrix) -> Vec<usize> {
    let n = a.nrows;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for (j, _) in a.row(i) {
            if i != j {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    for l in adj.iter_mut() {
        l.sort_unstable();
        l.dedup();
    }
    let deg: Vec<usize> = adj.iter().map(|l| l.len()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&i| (deg[i], i));
    for &seed in &by_degree {
        if visited[seed] {
            continue;
        }
        let start = peripheral(seed, &adj);
        let mut queue = VecDeque::from([start]);
        visited[start] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nb: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            nb.sort_by_key(|&w| (deg[w], w));
            for w in nb {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

/// Pseudo-peripheral vertex of the component containing `seed`.
fn peripheral(seed: usize, adj: &[Vec<usize>]) -> usize {
    let mut start = seed;
    let mut ecc = 0;
    for _ in 0..8 {
        let (far, e) = bfs_far(start, adj);
        if e <= ecc {
            break;
        }
        ecc = e;
        start = far;
    }
    start
}

fn bfs_far(start: usize, adj: &[Vec<usize>]) -> (usize, usize) {
    let mut dist = std::collections::HashMap::new();
    dist.insert(start, 0usize);
    let mut queue = VecDeque::from([start]);
    let mut best = (start, 0usize);
    while let Some(v) = queue.pop_front() {
        let d = dist[&v];
        if d > best.1 || (d == best.1 && adj[v].len() < adj[best.0].len()) {
            best = (v, d);
        }
        for &w in &adj[v] {
            if let std::collections::hash_map::Entry::Vacant(e) = dist.entry(w) {
                e.insert(d + 1);
                queue.push_back(w);
            }
        }
    }
    best
}

/// Envelope (profile) Cholesky factor `P K Pᵀ = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct EnvelopeCholesky {
    n: usize,
    perm: Vec<usize>,
    first: Vec<usize>,
    offset: Vec<usize>,
    data: Vec<f64>,
}

impl EnvelopeCholesky {
    pub fn factor(a: &CsrMatrix) -> Result<EnvelopeCholesky> {
        let perm = rcm_ordering(a);
        Self::factor_with(a, perm)
    }

    pub fn factor_with(a: &CsrMatrix, perm: Vec<usize>) -> Result<EnvelopeCholesky> {
        let n = a.nrows;
        if a.ncols != n || perm.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "Cholesky of a {}x{} matrix",
                a.nrows, a.ncols
            )));
        }
        let mut inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        // lower triangle, row by row in the new ordering
        let mut first: Vec<usize> = (0..n).collect();
        for old in 0..n {
            let i = inv[old];
            for (oj, _) in a.row(old) {
                let j = inv[oj];
                if j < i {
                    first[i] = first[i].min(j);
                } else if i < j {
                    first[j] = first[j].min(i);
                }
            }
        }
        let mut offset = Vec::with_capacity(n + 1);
        offset.push(0);
        for i in 0..n {
            offset.push(offset[i] + i - first[i] + 1);
        }
        let mut data = vec![0.0; offset[n]];
        for old in 0..n {
            let i = inv[old];
            for (oj, v) in a.row(old) {
                let j = inv[oj];
                if j <= i {
                    data[offset[i] + j - first[i]] += v;
                }
            }
        }
        for i in 0..n {
            let fi = first[i];
            for j in fi..i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let (head, row_i) = data.split_at_mut(offset[i]);
                let row_j = &head[offset[j]..offset[j + 1]];
                let s: f64 = row_i[k0 - fi..j - fi]
                    .iter()
                    .zip(&row_j[k0 - fj..j - fj])
                    .map(|(x, y)| x * y)
                    .sum();
                let ljj = row_j[j - fj];
                row_i[j - fi] = (row_i[j - fi] - s) / ljj;
            }
            let row_i = &mut data[offset[i]..offset[i + 1]];
            let (off, diag) = row_i.split_at_mut(i - fi);
            let d = diag[0] - off.iter().map(|x| x * x).sum::<f64>();
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::NotSpd {
                    pivot: perm[i],
                    value: d,
                });
            }
            diag[0] = d.sqrt();
        }
        Ok(EnvelopeCholesky {
            n,
            perm,
            first,
            offset,
            data,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of stored factor entries.
    pub fn envelope_size(&self) -> usize {
        self.data.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y: Vec<f64> = self.perm.iter().map(|&o| b[o]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.data[self.offset[i]..self.offset[i + 1]];
            let s: f64 = row[..i - fi].iter().zip(&y[fi..i]).map(|(l, x)| l * x).sum();
            y[i] = (y[i] - s) / row[i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let row = &self.data[self.offset[i]..self.offset[i + 1]];
            y[i] /= row[i - fi];
            let xi = y[i];
            for (yk, l) in y[fi..i].iter_mut().zip(&row[..i - fi]) {
                *yk -= l * xi;
            }
        }
        let mut x = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

/// Dense direct solvers used for the round-off study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DenseMethod {
    Cholesky,
    GaussNoPivot,
    GaussPivot,
}

impl DenseMethod {
    pub const ALL: [DenseMethod; 3] = [
        DenseMethod::Cholesky,
        DenseMethod::GaussNoPivot,
        DenseMethod::GaussPivot,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DenseMethod::Cholesky => "cholesky",
            DenseMethod::GaussNoPivot => "gauss-no-pivot",
            DenseMethod::GaussPivot => "gauss-pivot",
        }
    }
}

pub fn dense_solve(a: &DMatrix<f64>, b: &[f64], method: DenseMethod) -> Result<Vec<f64>> {
    let n = a.nrows();
    if a.ncols() != n || b.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "dense solve with {}x{} matrix and rhs of length {}",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    let rhs = DVector::from_column_slice(b);
    let x = match method {
        DenseMethod::Cholesky => {
            let c = a.clone().cholesky().ok_or_else(|| {
                let pivot = (0..n).find(|&i| a[(i, i)] <= 0.0).unwrap_or(0);
                Error::NotSpd {
                    pivot,
                    value: a[(pivot, pivot)],
                }
            })?;
            c.solve(&rhs)
        }
        DenseMethod::GaussPivot => a
            .clone()
            .lu()
            .solve(&rhs)
            .ok_or(Error::NotSpd { pivot: 0, value: 0.0 })?,
        DenseMethod::GaussNoPivot => gauss_no_pivot(a.clone(), rhs)?,
    };
    Ok(x.as_slice().to_vec())
}

fn gauss_no_pivot(mut a: DMatrix<f64>, mut b: DVector<f64>) -> Result<DVector<f64>> {
    let n = a.nrows();
    for k in 0..n {
        let piv = a[(k, k)];
        if piv == 0.0 || !piv.is_finite() {
            return Err(Error::NotSpd { pivot: k, value: piv });
        }
        for i in k + 1..n {
            let f = a[(i, k)] / piv;
            if f == 0.0 {
                continue;
            }
            for j in k + 1..n {
                a[(i, j)] -= f * a[(k, j)];
            }
            a[(i, k)] = 0.0;
            b[i] -= f * b[k];
        }
    }
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a[(k, j)] * b[j]).sum();
        b[k] = (b[k] - s) / a[(k, k)];
    }
    Ok(b)
}
