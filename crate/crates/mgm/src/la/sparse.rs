//! Compressed sparse row matrices and the handful of kernels the solver needs.
//!
//! All kernels use a fixed, index-order summation so results are bit-reproducible.

use crate::error::{Error, Result};
use crate::la::dense::DenseMatrix;
use crate::la::perm::Permutation;

/// Which side of a matrix a permutation is applied to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PermuteSide {
    Rows,
    Cols,
    Both,
}

/// Sparse matrix in CSR form. Within each row the column indices are strictly
/// increasing; explicit zeros are allowed (stencil assembly relies on them),
/// NaN values are not.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Build from raw CSR arrays, validating the structural invariants.
    pub fn from_parts(
        nrows: usize,
        ncols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_offsets.len() != nrows + 1 {
            return Err(Error::InvalidMatrix(format!(
                "row_offsets has length {}, expected {}",
                row_offsets.len(),
                nrows + 1
            )));
        }
        if row_offsets[0] != 0 {
            return Err(Error::InvalidMatrix("row_offsets[0] must be 0".into()));
        }
        if *row_offsets.last().unwrap() != col_indices.len() {
            return Err(Error::InvalidMatrix(format!(
                "row_offsets[{}] = {} does not match nnz = {}",
                nrows,
                row_offsets[nrows],
                col_indices.len()
            )));
        }
        if col_indices.len() != values.len() {
            return Err(Error::InvalidMatrix(
                "col_indices and values lengths differ".into(),
            ));
        }
        for i in 0..nrows {
            if row_offsets[i] > row_offsets[i + 1] {
                return Err(Error::InvalidMatrix(format!(
                    "row_offsets decreasing at row {i}"
                )));
            }
            let cols = &col_indices[row_offsets[i]..row_offsets[i + 1]];
            for (k, &c) in cols.iter().enumerate() {
                if c >= ncols {
                    return Err(Error::InvalidMatrix(format!(
                        "column index {c} out of bounds in row {i}"
                    )));
                }
                if k > 0 && cols[k - 1] >= c {
                    return Err(Error::InvalidMatrix(format!(
                        "column indices not strictly increasing in row {i}"
                    )));
                }
            }
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::InvalidMatrix("NaN value in matrix".into()));
        }
        Ok(CsrMatrix {
            nrows,
            ncols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Build from (row, col, value) triplets; duplicates are summed.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self> {
        for &(i, j, v) in triplets {
            if i >= nrows || j >= ncols {
                return Err(Error::InvalidMatrix(format!(
                    "triplet ({i}, {j}) out of bounds for {nrows}x{ncols}"
                )));
            }
            if v.is_nan() {
                return Err(Error::InvalidMatrix(format!("NaN value at ({i}, {j})")));
            }
        }
        let mut sorted: Vec<(usize, usize, f64)> = triplets.to_vec();
        sorted.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));

        let mut col_indices = Vec::with_capacity(sorted.len());
        let mut values = Vec::with_capacity(sorted.len());
        let mut rows = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for &(i, j, v) in &sorted {
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_indices.push(j);
                values.push(v);
                rows.push(i);
                last = Some((i, j));
            }
        }
        let mut row_offsets = vec![0usize; nrows + 1];
        for &i in &rows {
            row_offsets[i + 1] += 1;
        }
        for i in 0..nrows {
            row_offsets[i + 1] += row_offsets[i];
        }
        Self::from_parts(nrows, ncols, row_offsets, col_indices, values)
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix {
            nrows: n,
            ncols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.col_indices.len()
    }

    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let lo = self.row_offsets[i];
        let hi = self.row_offsets[i + 1];
        (&self.col_indices[lo..hi], &self.values[lo..hi])
    }

    /// Value at (i, j), zero if not stored.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    /// y = A x, rows accumulated in column-index order.
    pub fn spmv_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        if x.len() != self.ncols {
            return Err(Error::DimensionMismatch(format!(
                "spmv: vector length {} vs {} columns",
                x.len(),
                self.ncols
            )));
        }
        if y.len() != self.nrows {
            return Err(Error::DimensionMismatch(format!(
                "spmv: output length {} vs {} rows",
                y.len(),
                self.nrows
            )));
        }
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            let mut acc = 0.0;
            for (&j, &v) in cols.iter().zip(vals) {
                acc += v * x[j];
            }
            y[i] = acc;
        }
        Ok(())
    }

    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.nrows];
        self.spmv_into(x, &mut y)?;
        Ok(y)
    }

    /// Sparse matrix product A * B. Output rows are sorted and merged;
    /// exact zeros produced by cancellation are dropped.
    pub fn spmm(&self, other: &CsrMatrix) -> Result<CsrMatrix> {
        if self.ncols != other.nrows {
            return Err(Error::DimensionMismatch(format!(
                "spmm: {}x{} times {}x{}",
                self.nrows, self.ncols, other.nrows, other.ncols
            )));
        }
        let n_out_cols = other.ncols;
        let mut acc = vec![0.0f64; n_out_cols];
        let mut marker = vec![usize::MAX; n_out_cols];
        let mut touched: Vec<usize> = Vec::new();

        let mut row_offsets = Vec::with_capacity(self.nrows + 1);
        row_offsets.push(0usize);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();

        for i in 0..self.nrows {
            touched.clear();
            let (a_cols, a_vals) = self.row(i);
            for (&k, &a) in a_cols.iter().zip(a_vals) {
                let (b_cols, b_vals) = other.row(k);
                for (&j, &b) in b_cols.iter().zip(b_vals) {
                    if marker[j] != i {
                        marker[j] = i;
                        acc[j] = a * b;
                        touched.push(j);
                    } else {
                        acc[j] += a * b;
                    }
                }
            }
            touched.sort_unstable();
            for &j in &touched {
                let v = acc[j];
                if v != 0.0 {
                    col_indices.push(j);
                    values.push(v);
                }
            }
            row_offsets.push(col_indices.len());
        }
        Ok(CsrMatrix {
            nrows: self.nrows,
            ncols: n_out_cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Structural transpose; applying it twice reproduces the input bit for bit.
    pub fn transpose(&self) -> CsrMatrix {
        let mut counts = vec![0usize; self.ncols + 1];
        for &j in &self.col_indices {
            counts[j + 1] += 1;
        }
        for j in 0..self.ncols {
            counts[j + 1] += counts[j];
        }
        let row_offsets = counts.clone();
        let mut next = counts;
        let mut col_indices = vec![0usize; self.nnz()];
        let mut values = vec![0.0f64; self.nnz()];
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                let slot = next[j];
                col_indices[slot] = i;
                values[slot] = v;
                next[j] += 1;
            }
        }
        CsrMatrix {
            nrows: self.ncols,
            ncols: self.nrows,
            row_offsets,
            col_indices,
            values,
        }
    }

    /// Apply a permutation so that `A_perm[i, j] = A[p.forward(i), p.forward(j)]`
    /// (for `Both`; `Rows`/`Cols` apply one side only).
    pub fn permute(&self, p: &Permutation, side: PermuteSide) -> Result<CsrMatrix> {
        let permute_rows = matches!(side, PermuteSide::Rows | PermuteSide::Both);
        let permute_cols = matches!(side, PermuteSide::Cols | PermuteSide::Both);
        if permute_rows && p.len() != self.nrows {
            return Err(Error::DimensionMismatch(format!(
                "permute: permutation length {} vs {} rows",
                p.len(),
                self.nrows
            )));
        }
        if permute_cols && p.len() != self.ncols {
            return Err(Error::DimensionMismatch(format!(
                "permute: permutation length {} vs {} columns",
                p.len(),
                self.ncols
            )));
        }

        let mut row_offsets = Vec::with_capacity(self.nrows + 1);
        row_offsets.push(0usize);
        let mut col_indices = Vec::with_capacity(self.nnz());
        let mut values = Vec::with_capacity(self.nnz());
        let mut scratch: Vec<(usize, f64)> = Vec::new();

        for i in 0..self.nrows {
            let src = if permute_rows { p.forward()[i] } else { i };
            let (cols, vals) = self.row(src);
            if permute_cols {
                scratch.clear();
                scratch.extend(
                    cols.iter()
                        .zip(vals)
                        .map(|(&j, &v)| (p.inverse()[j], v)),
                );
                scratch.sort_unstable_by_key(|&(j, _)| j);
                for &(j, v) in &scratch {
                    col_indices.push(j);
                    values.push(v);
                }
            } else {
                col_indices.extend_from_slice(cols);
                values.extend_from_slice(vals);
            }
            row_offsets.push(col_indices.len());
        }
        Ok(CsrMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Leading k-by-k principal block.
    pub fn principal_block(&self, k: usize) -> Result<CsrMatrix> {
        if k > self.nrows || k > self.ncols {
            return Err(Error::DimensionMismatch(format!(
                "principal block {k} of {}x{} matrix",
                self.nrows, self.ncols
            )));
        }
        let mut row_offsets = Vec::with_capacity(k + 1);
        row_offsets.push(0usize);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        for i in 0..k {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                if j < k {
                    col_indices.push(j);
                    values.push(v);
                }
            }
            row_offsets.push(col_indices.len());
        }
        Ok(CsrMatrix {
            nrows: k,
            ncols: k,
            row_offsets,
            col_indices,
            values,
        })
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                d.set(i, j, v);
            }
        }
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_csr(rng: &mut StdRng, nrows: usize, ncols: usize, density: f64) -> CsrMatrix {
        let mut triplets = Vec::new();
        for i in 0..nrows {
            for j in 0..ncols {
                if rng.gen::<f64>() < density {
                    triplets.push((i, j, rng.gen_range(-1.0..1.0)));
                }
            }
        }
        CsrMatrix::from_triplets(nrows, ncols, &triplets).unwrap()
    }

    // brute-force dense oracles
    fn dense_matvec(a: &CsrMatrix, x: &[f64]) -> Vec<f64> {
        let d = a.to_dense();
        (0..a.nrows())
            .map(|i| (0..a.ncols()).map(|j| d.get(i, j) * x[j]).sum())
            .collect()
    }

    fn dense_matmul(a: &CsrMatrix, b: &CsrMatrix) -> DenseMatrix {
        let (da, db) = (a.to_dense(), b.to_dense());
        let mut c = DenseMatrix::zeros(a.nrows(), b.ncols());
        for i in 0..a.nrows() {
            for j in 0..b.ncols() {
                let mut s = 0.0;
                for k in 0..a.ncols() {
                    s += da.get(i, k) * db.get(k, j);
                }
                c.set(i, j, s);
            }
        }
        c
    }

    #[test]
    fn spmv_identity() {
        let a = CsrMatrix::identity(3);
        let y = a.spmv(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(y, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn spmv_hand_example() {
        // [[2, 0], [1, 3]]
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 2.0), (1, 0, 1.0), (1, 1, 3.0)]).unwrap();
        let y = a.spmv(&[1.0, 1.0]).unwrap();
        assert_eq!(y, vec![2.0, 4.0]);
    }

    #[test]
    fn spmv_dimension_mismatch() {
        let a = CsrMatrix::identity(3);
        assert!(a.spmv(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn spmv_matches_dense_oracle() {
        let mut rng = StdRng::seed_from_u64(7);
        let a = random_csr(&mut rng, 20, 20, 0.3);
        let x: Vec<f64> = (0..20).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y = a.spmv(&x).unwrap();
        let y_ref = dense_matvec(&a, &x);
        for (u, v) in y.iter().zip(&y_ref) {
            assert!((u - v).abs() <= 1e-14 * v.abs().max(1.0));
        }
    }

    #[test]
    fn spmm_identity_is_noop() {
        let mut rng = StdRng::seed_from_u64(3);
        let a = random_csr(&mut rng, 8, 8, 0.4);
        let prod = a.spmm(&CsrMatrix::identity(8)).unwrap();
        assert_eq!(a, prod);
    }

    #[test]
    fn spmm_permutation_times_inverse() {
        // 3x3 permutation matrix (2, 0, 1) times its inverse is the identity
        let p = CsrMatrix::from_triplets(3, 3, &[(0, 2, 1.0), (1, 0, 1.0), (2, 1, 1.0)]).unwrap();
        let pinv = p.transpose();
        assert_eq!(p.spmm(&pinv).unwrap(), CsrMatrix::identity(3));
    }

    #[test]
    fn spmm_matches_dense_oracle() {
        let mut rng = StdRng::seed_from_u64(11);
        let a = random_csr(&mut rng, 15, 12, 0.3);
        let b = random_csr(&mut rng, 12, 9, 0.3);
        let c = a.spmm(&b).unwrap();
        let c_ref = dense_matmul(&a, &b);
        let scale: f64 = c_ref.values().iter().fold(0.0, |m, v| m.max(v.abs()));
        for i in 0..15 {
            for j in 0..9 {
                assert!((c.get(i, j) - c_ref.get(i, j)).abs() <= 1e-13 * scale.max(1.0));
            }
        }
    }

    #[test]
    fn spmm_dimension_mismatch() {
        let a = CsrMatrix::identity(3);
        let b = CsrMatrix::identity(4);
        assert!(a.spmm(&b).is_err());
    }

    #[test]
    fn transpose_hand_example() {
        // [[1, 0, 2], [0, 3, 0]] -> [[1, 0], [0, 3], [2, 0]]
        let a =
            CsrMatrix::from_triplets(2, 3, &[(0, 0, 1.0), (0, 2, 2.0), (1, 1, 3.0)]).unwrap();
        let t = a.transpose();
        assert_eq!(t.nrows(), 3);
        assert_eq!(t.ncols(), 2);
        assert_eq!(t.get(0, 0), 1.0);
        assert_eq!(t.get(1, 1), 3.0);
        assert_eq!(t.get(2, 0), 2.0);
        assert_eq!(t.nnz(), 3);
    }

    #[test]
    fn transpose_identity() {
        let a = CsrMatrix::identity(4);
        assert_eq!(a.transpose(), a);
    }

    #[test]
    fn from_triplets_sums_duplicates() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 1, 1.0), (0, 1, 2.0)]).unwrap();
        assert_eq!(a.nnz(), 1);
        assert_eq!(a.get(0, 1), 3.0);
    }

    #[test]
    fn invalid_csr_rejected() {
        // out-of-range column
        assert!(CsrMatrix::from_parts(1, 1, vec![0, 1], vec![1], vec![1.0]).is_err());
        // NaN value
        assert!(CsrMatrix::from_parts(1, 1, vec![0, 1], vec![0], vec![f64::NAN]).is_err());
        // unsorted columns
        assert!(
            CsrMatrix::from_parts(1, 3, vec![0, 2], vec![2, 0], vec![1.0, 1.0]).is_err()
        );
    }

    #[test]
    fn permute_identity_is_noop() {
        let mut rng = StdRng::seed_from_u64(5);
        let a = random_csr(&mut rng, 6, 6, 0.5);
        let p = Permutation::identity(6);
        assert_eq!(a.permute(&p, PermuteSide::Both).unwrap(), a);
    }

    #[test]
    fn permute_swap_hand_example() {
        // swap(0,1) on [[a,b],[c,d]] -> [[d,c],[b,a]]
        let a = CsrMatrix::from_triplets(
            2,
            2,
            &[(0, 0, 1.0), (0, 1, 2.0), (1, 0, 3.0), (1, 1, 4.0)],
        )
        .unwrap();
        let p = Permutation::from_forward(vec![1, 0]).unwrap();
        let b = a.permute(&p, PermuteSide::Both).unwrap();
        assert_eq!(b.get(0, 0), 4.0);
        assert_eq!(b.get(0, 1), 3.0);
        assert_eq!(b.get(1, 0), 2.0);
        assert_eq!(b.get(1, 1), 1.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn transpose_is_involution(seed in 0u64..1000) {
            let mut rng = StdRng::seed_from_u64(seed);
            let nrows = rng.gen_range(1..20);
            let ncols = rng.gen_range(1..20);
            let a = random_csr(&mut rng, nrows, ncols, 0.3);
            prop_assert_eq!(a.transpose().transpose(), a);
        }

        #[test]
        fn permute_round_trip(seed in 0u64..1000) {
            let mut rng = StdRng::seed_from_u64(seed);
            let n = rng.gen_range(1..16);
            let a = random_csr(&mut rng, n, n, 0.4);
            let mut fwd: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                let j = rng.gen_range(0..=i);
                fwd.swap(i, j);
            }
            let p = Permutation::from_forward(fwd).unwrap();
            let b = a.permute(&p, PermuteSide::Both).unwrap();
            let back = b.permute(&p.inverted(), PermuteSide::Both).unwrap();
            prop_assert_eq!(back, a);
        }
    }
}
