use std::io::{BufRead, Write};

use nalgebra::DMatrix;

use crate::{Error, Result};

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    /// Build from coordinate triplets; duplicates are summed.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> CsrMatrix {
        let mut count = vec![0usize; nrows + 1];
        for &(i, _, _) in triplets {
            count[i + 1] += 1;
        }
        for i in 0..nrows {
            count[i + 1] += count[i];
        }
        let mut next = count.clone();
        let mut cols = vec![0usize; triplets.len()];
        let mut vals = vec![0.0; triplets.len()];
        for &(i, j, v) in triplets {
            debug_assert!(i < nrows && j < ncols);
            cols[next[i]] = j;
            vals[next[i]] = v;
            next[i] += 1;
        }
        let mut row_ptr = Vec::with_capacity(nrows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        let mut row: Vec<(usize, f64)> = Vec::new();
        for i in 0..nrows {
            row.clear();
            row.extend((count[i]..count[i + 1]).map(|k| (cols[k], vals[k])));
            row.sort_by_key(|e| e.0);
            for &(j, v) in &row {
                if col_idx.len() > row_ptr[i] && *col_idx.last().unwrap() == j {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(j);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        CsrMatrix {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn identity(n: usize) -> CsrMatrix {
        CsrMatrix::from_triplets(n, n, &(0..n).map(|i| (i, i, 1.0)).collect::<Vec<_>>())
    }

    pub fn from_dense(m: &DMatrix<f64>) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                if m[(i, j)] != 0.0 {
                    t.push((i, j, m[(i, j)]));
                }
            }
        }
        CsrMatrix::from_triplets(m.nrows(), m.ncols(), &t)
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (self.col_idx[k], self.values[k]))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let cols = &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]];
        match cols.binary_search(&j) {
            Ok(k) => self.values[self.row_ptr[i] + k],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).map(|(j, v)| v * x[j]).sum();
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut t = Vec::with_capacity(self.nnz());
        for i in 0..self.nrows {
            t.extend(self.row(i).map(|(j, v)| (j, i, v)));
        }
        CsrMatrix::from_triplets(self.ncols, self.nrows, &t)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// `max |K - Kᵀ|`.
    pub fn symmetry_defect(&self) -> f64 {
        let mut d = 0.0f64;
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                d = d.max((v - self.get(j, i)).abs());
            }
        }
        d
    }

    pub fn scale(&self, c: f64) -> CsrMatrix {
        let mut m = self.clone();
        m.values.iter_mut().for_each(|v| *v *= c);
        m
    }

    /// `D^{-1/2} K D^{-1/2}` with `D` the diagonal of `K`.
    pub fn jacobi_scaled(&self) -> Result<CsrMatrix> {
        let d = self.diagonal();
        let mut s = Vec::with_capacity(d.len());
        for (index, &value) in d.iter().enumerate() {
            if !(value > 0.0) {
                return Err(Error::Scaling { index, value });
            }
            s.push(value.sqrt().recip());
        }
        let mut m = self.clone();
        for i in 0..m.nrows {
            for k in m.row_ptr[i]..m.row_ptr[i + 1] {
                m.values[k] *= s[i] * s[m.col_idx[k]];
            }
        }
        Ok(m)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                m[(i, j)] += v;
            }
        }
        m
    }

    /// MatrixMarket coordinate real general, 1-indexed.
    pub fn write_matrix_market<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(w, "{} {} {}", self.nrows, self.ncols, self.nnz())?;
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                writeln!(w, "{} {} {:.17e}", i + 1, j + 1, v)?;
            }
        }
        Ok(())
    }

    /// Read a MatrixMarket coordinate real matrix (general or symmetric).
    pub fn read_matrix_market<R: BufRead>(r: R) -> Result<CsrMatrix> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty MatrixMarket stream".into()))??;
        let h = header.to_lowercase();
        if !h.starts_with("%%matrixmarket matrix coordinate") {
            return Err(Error::Parse(format!("unsupported header: {header}")));
        }
        if h.contains("complex") || h.contains("pattern") {
            return Err(Error::Parse(format!("unsupported field in header: {header}")));
        }
        let symmetric = h.contains("symmetric");
        let mut dims: Option<(usize, usize, usize)> = None;
        let mut t = Vec::new();
        for line in lines {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('%') {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            let bad = || Error::Parse(format!("malformed line: {line}"));
            match dims {
                None => {
                    if parts.len() != 3 {
                        return Err(bad());
                    }
                    let p: Vec<usize> = parts
                        .iter()
                        .map(|s| s.parse().map_err(|_| bad()))
                        .collect::<Result<_>>()?;
                    dims = Some((p[0], p[1], p[2]));
                    t.reserve(p[2]);
                }
                Some((nr, nc, _)) => {
                    if parts.len() != 3 {
                        return Err(bad());
                    }
                    let i: usize = parts[0].parse().map_err(|_| bad())?;
                    let j: usize = parts[1].parse().map_err(|_| bad())?;
                    let v: f64 = parts[2].parse().map_err(|_| bad())?;
                    if i == 0 || j == 0 || i > nr || j > nc {
                        return Err(Error::Parse(format!("index out of range: {line}")));
                    }
                    t.push((i - 1, j - 1, v));
                    if symmetric && i != j {
                        t.push((j - 1, i - 1, v));
                    }
                }
            }
        }
        let (nr, nc, nnz) = dims.ok_or_else(|| Error::Parse("missing size line".into()))?;
        let stored = if symmetric {
            t.iter().filter(|e| e.0 >= e.1).count()
        } else {
            t.len()
        };
        if stored != nnz {
            return Err(Error::Parse(format!("expected {nnz} entries, found {stored}")));
        }
        Ok(CsrMatrix::from_triplets(nr, nc, &t))
    }
}

/// Write a vector as plain text, one value per line.
pub fn write_vector<W: Write>(mut w: W, v: &[f64]) -> Result<()> {
    for x in v {
        writeln!(w, "{x:.17e}")?;
    }
    Ok(())
}
