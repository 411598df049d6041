use std::fmt::Write as _;
use std::io::{self, Write};

use super::LinalgError;

/// Sparse matrix in compressed-row layout.
///
/// Column indices are strictly increasing within each row and explicit zeros are
/// dropped by every constructor and product.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Assemble from `(row, col, value)` triplets. Duplicates are summed.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut counts = vec![0usize; nrows + 1];
        for &(r, c, _) in triplets {
            assert!(r < nrows && c < ncols, "triplet ({r}, {c}) outside {nrows}x{ncols}");
            counts[r + 1] += 1;
        }
        for i in 0..nrows {
            counts[i + 1] += counts[i];
        }
        let mut cols = vec![0usize; triplets.len()];
        let mut vals = vec![0.0; triplets.len()];
        let mut next = counts.clone();
        for &(r, c, v) in triplets {
            cols[next[r]] = c;
            vals[next[r]] = v;
            next[r] += 1;
        }

        let mut row_ptr = Vec::with_capacity(nrows + 1);
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_ptr.push(0);
        let mut scratch: Vec<(usize, f64)> = Vec::new();
        for r in 0..nrows {
            scratch.clear();
            scratch.extend((counts[r]..counts[r + 1]).map(|k| (cols[k], vals[k])));
            scratch.sort_by_key(|&(c, _)| c);
            let mut k = 0;
            while k < scratch.len() {
                let c = scratch[k].0;
                let mut sum = 0.0;
                while k < scratch.len() && scratch[k].0 == c {
                    sum += scratch[k].1;
                    k += 1;
                }
                if sum != 0.0 {
                    col_idx.push(c);
                    values.push(sum);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self { nrows, ncols, row_ptr, col_idx, values }
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, row_ptr: vec![0; nrows + 1], col_idx: Vec::new(), values: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n])
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let triplets: Vec<_> = diag.iter().enumerate().map(|(i, &d)| (i, i, d)).collect();
        Self::from_triplets(n, n, &triplets)
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut triplets = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), ncols, "ragged dense matrix");
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    triplets.push((i, j, v));
                }
            }
        }
        Self::from_triplets(nrows, ncols, &triplets)
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.nrows
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.ncols
    }

    #[inline]
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of one row.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[range.clone()], &self.values[range])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).map_or(0.0, |k| vals[k])
    }

    /// All stored entries as `(row, col, value)`, row-major.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&j, &v)| (i, j, v))
        })
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.ncols + 1];
        for &c in &self.col_idx {
            counts[c + 1] += 1;
        }
        for j in 0..self.ncols {
            counts[j + 1] += counts[j];
        }
        let mut col_idx = vec![0usize; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        let mut next = counts.clone();
        // rows are visited in increasing order, so each output row stays sorted
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                col_idx[next[c]] = i;
                values[next[c]] = v;
                next[c] += 1;
            }
        }
        Self { nrows: self.ncols, ncols: self.nrows, row_ptr: counts, col_idx, values }
    }

    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>, LinalgError> {
        if x.len() != self.ncols {
            return Err(LinalgError::DimensionMismatch {
                op: "spmv",
                left: (self.nrows, self.ncols),
                right: (x.len(), 1),
            });
        }
        Ok((0..self.nrows)
            .map(|i| {
                let (cols, vals) = self.row(i);
                cols.iter().zip(vals).map(|(&c, &v)| v * x[c]).sum()
            })
            .collect())
    }

    /// Sparse product `self * rhs` (row-wise Gustavson accumulation).
    pub fn spmm(&self, rhs: &SparseMatrix) -> Result<SparseMatrix, LinalgError> {
        if self.ncols != rhs.nrows {
            return Err(LinalgError::DimensionMismatch {
                op: "spmm",
                left: (self.nrows, self.ncols),
                right: (rhs.nrows, rhs.ncols),
            });
        }
        let mut acc = vec![0.0; rhs.ncols];
        let mut mark = vec![usize::MAX; rhs.ncols];
        let mut pattern: Vec<usize> = Vec::new();
        let mut row_ptr = Vec::with_capacity(self.nrows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for i in 0..self.nrows {
            pattern.clear();
            let (cols, vals) = self.row(i);
            for (&k, &a) in cols.iter().zip(vals) {
                let (rcols, rvals) = rhs.row(k);
                for (&j, &b) in rcols.iter().zip(rvals) {
                    if mark[j] != i {
                        mark[j] = i;
                        acc[j] = 0.0;
                        pattern.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            pattern.sort_unstable();
            for &j in &pattern {
                if acc[j] != 0.0 {
                    col_idx.push(j);
                    values.push(acc[j]);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok(Self { nrows: self.nrows, ncols: rhs.ncols, row_ptr, col_idx, values })
    }

    /// `alpha * self + beta * rhs`.
    pub fn add_scaled(&self, alpha: f64, rhs: &SparseMatrix, beta: f64) -> Result<SparseMatrix, LinalgError> {
        if self.nrows != rhs.nrows || self.ncols != rhs.ncols {
            return Err(LinalgError::DimensionMismatch {
                op: "add",
                left: (self.nrows, self.ncols),
                right: (rhs.nrows, rhs.ncols),
            });
        }
        let mut row_ptr = Vec::with_capacity(self.nrows + 1);
        let mut col_idx = Vec::with_capacity(self.nnz() + rhs.nnz());
        let mut values = Vec::with_capacity(self.nnz() + rhs.nnz());
        row_ptr.push(0);
        fn push(col_idx: &mut Vec<usize>, values: &mut Vec<f64>, c: usize, v: f64) {
            if v != 0.0 {
                col_idx.push(c);
                values.push(v);
            }
        }
        for i in 0..self.nrows {
            let (ac, av) = self.row(i);
            let (bc, bv) = rhs.row(i);
            let (mut p, mut q) = (0, 0);
            while p < ac.len() || q < bc.len() {
                if q == bc.len() || (p < ac.len() && ac[p] < bc[q]) {
                    push(&mut col_idx, &mut values, ac[p], alpha * av[p]);
                    p += 1;
                } else if p == ac.len() || bc[q] < ac[p] {
                    push(&mut col_idx, &mut values, bc[q], beta * bv[q]);
                    q += 1;
                } else {
                    push(&mut col_idx, &mut values, ac[p], alpha * av[p] + beta * bv[q]);
                    p += 1;
                    q += 1;
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok(Self { nrows: self.nrows, ncols: self.ncols, row_ptr, col_idx, values })
    }

    /// `diag(d) * self`.
    pub fn scale_rows(&self, d: &[f64]) -> Result<SparseMatrix, LinalgError> {
        if d.len() != self.nrows {
            return Err(LinalgError::DimensionMismatch {
                op: "scale_rows",
                left: (d.len(), d.len()),
                right: (self.nrows, self.ncols),
            });
        }
        let mut triplets = Vec::with_capacity(self.nnz());
        triplets.extend(self.triplets().map(|(i, j, v)| (i, j, d[i] * v)));
        Ok(Self::from_triplets(self.nrows, self.ncols, &triplets))
    }

    /// `self * diag(d)`.
    pub fn scale_cols(&self, d: &[f64]) -> Result<SparseMatrix, LinalgError> {
        if d.len() != self.ncols {
            return Err(LinalgError::DimensionMismatch {
                op: "scale_cols",
                left: (self.nrows, self.ncols),
                right: (d.len(), d.len()),
            });
        }
        let mut triplets = Vec::with_capacity(self.nnz());
        triplets.extend(self.triplets().map(|(i, j, v)| (i, j, v * d[j])));
        Ok(Self::from_triplets(self.nrows, self.ncols, &triplets))
    }

    pub fn scale(&self, alpha: f64) -> SparseMatrix {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= alpha);
        if alpha == 0.0 {
            return Self::zeros(self.nrows, self.ncols);
        }
        out
    }

    /// Keep only the listed rows and columns, in the given order.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> SparseMatrix {
        let mut col_map = vec![usize::MAX; self.ncols];
        for (new, &old) in cols.iter().enumerate() {
            col_map[old] = new;
        }
        let mut triplets = Vec::new();
        for (new_r, &r) in rows.iter().enumerate() {
            let (cs, vs) = self.row(r);
            for (&c, &v) in cs.iter().zip(vs) {
                if col_map[c] != usize::MAX {
                    triplets.push((new_r, col_map[c], v));
                }
            }
        }
        Self::from_triplets(rows.len(), cols.len(), &triplets)
    }

    /// Zero every column `j` with `keep[j] == false`.
    pub fn mask_cols(&self, keep: &[bool]) -> SparseMatrix {
        let triplets: Vec<_> = self.triplets().filter(|&(_, j, _)| keep[j]).collect();
        Self::from_triplets(self.nrows, self.ncols, &triplets)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    pub fn norm_inf(&self) -> f64 {
        (0..self.nrows).map(|i| self.row(i).1.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest `|A_ij - A_ji|` relative to the largest entry.
    pub fn asymmetry(&self) -> f64 {
        if !self.is_square() || self.nnz() == 0 {
            return if self.is_square() { 0.0 } else { f64::INFINITY };
        }
        let t = self.transpose();
        let diff = self.add_scaled(1.0, &t, -1.0).expect("same shape");
        diff.max_abs() / self.max_abs()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.ncols]; self.nrows];
        for (i, j, v) in self.triplets() {
            dense[i][j] = v;
        }
        dense
    }

    /// Matrix Market coordinate format (1-based indices).
    pub fn write_matrix_market<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(out, "{} {} {}", self.nrows, self.ncols, self.nnz())?;
        let mut line = String::new();
        for (i, j, v) in self.triplets() {
            line.clear();
            let _ = write!(line, "{} {} {:.17e}", i + 1, j + 1, v);
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let n = a.len();
        let m = b[0].len();
        let k = b.len();
        (0..n).map(|i| (0..m).map(|j| (0..k).map(|p| a[i][p] * b[p][j]).sum()).collect()).collect()
    }

    #[test]
    fn triplets_sum_duplicates_and_drop_zeros() {
        let a = SparseMatrix::from_triplets(2, 3, &[(0, 2, 1.0), (0, 0, 2.0), (0, 2, -1.0), (1, 1, 3.0), (1, 1, 1.0)]);
        assert_eq!(a.nnz(), 2);
        assert_eq!(a.get(0, 0), 2.0);
        assert_eq!(a.get(0, 2), 0.0);
        assert_eq!(a.get(1, 1), 4.0);
        assert_eq!(a.row(0).0, &[0]);
    }

    #[test]
    fn identity_times_matrix() {
        let a = SparseMatrix::from_dense(&[vec![1.0, 0.0, 2.0], vec![0.0, -3.0, 0.5]]);
        let i2 = SparseMatrix::identity(2);
        assert_eq!(i2.spmm(&a).unwrap(), a);
        assert_eq!(a.spmm(&SparseMatrix::identity(3)).unwrap(), a);
    }

    #[test]
    fn transpose_of_product() {
        let a = SparseMatrix::from_dense(&[vec![1.0, 0.0, 2.0], vec![0.0, -3.0, 0.5]]);
        let b = SparseMatrix::from_dense(&[vec![0.0, 1.0], vec![4.0, 0.0], vec![-1.0, 2.0]]);
        let ab_t = a.spmm(&b).unwrap().transpose();
        let bt_at = b.transpose().spmm(&a.transpose()).unwrap();
        assert_eq!(ab_t, bt_at);
        assert_eq!(a.transpose().transpose(), a);
        assert_eq!(a.spmm(&b).unwrap().to_dense(), dense_mul(&a.to_dense(), &b.to_dense()));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let a = SparseMatrix::identity(3);
        let b = SparseMatrix::identity(2);
        assert!(matches!(a.spmm(&b), Err(LinalgError::DimensionMismatch { .. })));
        assert!(a.spmv(&[1.0]).is_err());
        assert!(a.add_scaled(1.0, &b, 1.0).is_err());
    }

    #[test]
    fn cancellation_leaves_no_explicit_zero() {
        let a = SparseMatrix::from_dense(&[vec![1.0, -1.0]]);
        let b = SparseMatrix::from_dense(&[vec![1.0], vec![1.0]]);
        let c = a.spmm(&b).unwrap();
        assert_eq!(c.nnz(), 0);
        let d = a.add_scaled(1.0, &a, -1.0).unwrap();
        assert_eq!(d.nnz(), 0);
    }

    #[test]
    fn submatrix_and_masks() {
        let a = SparseMatrix::from_dense(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0], vec![7.0, 8.0, 9.0]]);
        let s = a.submatrix(&[2, 0], &[1, 2]);
        assert_eq!(s.to_dense(), vec![vec![8.0, 9.0], vec![2.0, 3.0]]);
        let m = a.mask_cols(&[true, false, true]);
        assert_eq!(m.get(1, 1), 0.0);
        assert_eq!(m.get(1, 2), 6.0);
        assert!(a.asymmetry() > 0.0);
        let sym = a.add_scaled(1.0, &a.transpose(), 1.0).unwrap();
        assert_eq!(sym.asymmetry(), 0.0);
    }

    #[test]
    fn matrix_market_header() {
        let a = SparseMatrix::from_dense(&[vec![1.0, 0.0], vec![0.0, 2.5]]);
        let mut buf = Vec::new();
        a.write_matrix_market(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("%%MatrixMarket"));
        assert_eq!(lines.next().unwrap(), "2 2 2");
        assert!(lines.next().unwrap().starts_with("1 1 1.0"));
    }
}
