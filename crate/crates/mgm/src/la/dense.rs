//! Small dense matrices, LU with partial pivoting, and Householder QR.
//!
//! These back the local stencil systems and the coarsest-level solve; sizes
//! stay in the hundreds, so no blocking or BLAS is warranted.

use crate::error::{Error, Result};

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    nrows: usize,
    ncols: usize,
    values: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        DenseMatrix {
            nrows,
            ncols,
            values: vec![0.0; nrows * ncols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::InvalidMatrix("ragged rows".into()));
        }
        Ok(DenseMatrix {
            nrows,
            ncols,
            values: rows.concat(),
        })
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ncols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.values[i * self.ncols + j] = v;
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.ncols {
            return Err(Error::DimensionMismatch(format!(
                "dense matvec: {} vs {} columns",
                x.len(),
                self.ncols
            )));
        }
        Ok((0..self.nrows)
            .map(|i| {
                let row = &self.values[i * self.ncols..(i + 1) * self.ncols];
                row.iter().zip(x).map(|(a, b)| a * b).sum()
            })
            .collect())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// LU factorization with partial pivoting.
#[derive(Debug)]
pub struct LuFactors {
    n: usize,
    lu: Vec<f64>,
    pivots: Vec<usize>,
}

/// Factor a square matrix; pivots smaller than `1e-14 * max|A|` are treated
/// as exactly singular and reported with the offending pivot index.
pub fn lu_factor(a: &DenseMatrix) -> Result<LuFactors> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "lu_factor: {}x{} matrix is not square",
            a.nrows(),
            a.ncols()
        )));
    }
    let n = a.nrows();
    let mut lu = a.values().to_vec();
    let mut pivots = vec![0usize; n];
    let tol = 1e-14 * a.max_abs();

    for k in 0..n {
        let mut p = k;
        let mut best = lu[k * n + k].abs();
        for i in (k + 1)..n {
            let v = lu[i * n + k].abs();
            if v > best {
                best = v;
                p = i;
            }
        }
        if best <= tol {
            return Err(Error::SingularMatrix { pivot: k });
        }
        pivots[k] = p;
        if p != k {
            for j in 0..n {
                lu.swap(k * n + j, p * n + j);
            }
        }
        let inv_pivot = 1.0 / lu[k * n + k];
        for i in (k + 1)..n {
            let factor = lu[i * n + k] * inv_pivot;
            lu[i * n + k] = factor;
            if factor != 0.0 {
                for j in (k + 1)..n {
                    lu[i * n + j] -= factor * lu[k * n + j];
                }
            }
        }
    }
    Ok(LuFactors { n, lu, pivots })
}

impl LuFactors {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "lu solve: rhs length {} vs order {}",
                b.len(),
                self.n
            )));
        }
        let n = self.n;
        let mut x = b.to_vec();
        for k in 0..n {
            x.swap(k, self.pivots[k]);
        }
        // forward substitution with unit lower triangle
        for i in 1..n {
            let mut acc = x[i];
            for j in 0..i {
                acc -= self.lu[i * n + j] * x[j];
            }
            x[i] = acc;
        }
        // back substitution
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in (i + 1)..n {
                acc -= self.lu[i * n + j] * x[j];
            }
            x[i] = acc / self.lu[i * n + i];
        }
        Ok(x)
    }
}

/// Householder QR of an m-by-n matrix with m >= n. Reflectors are stored
/// below the diagonal with the v_0 = 1 convention.
#[derive(Debug)]
pub struct QrFactors {
    m: usize,
    n: usize,
    qr: Vec<f64>,
    beta: Vec<f64>,
}

pub fn qr_factor(a: &DenseMatrix) -> Result<QrFactors> {
    let (m, n) = (a.nrows(), a.ncols());
    if m < n {
        return Err(Error::DimensionMismatch(format!(
            "qr_factor: {m}x{n} has more columns than rows"
        )));
    }
    let mut qr = a.values().to_vec();
    let mut beta = vec![0.0f64; n];
    for k in 0..n {
        let mut norm2 = 0.0;
        for i in k..m {
            let v = qr[i * n + k];
            norm2 += v * v;
        }
        let norm = norm2.sqrt();
        if norm == 0.0 {
            beta[k] = 0.0;
            continue;
        }
        let alpha = if qr[k * n + k] >= 0.0 { -norm } else { norm };
        let v0 = qr[k * n + k] - alpha;
        qr[k * n + k] = alpha;
        // v = (v0, x_{k+1..m}); normalize so the head is 1
        let mut vtv = v0 * v0;
        for i in (k + 1)..m {
            let v = qr[i * n + k];
            vtv += v * v;
        }
        if vtv == 0.0 {
            beta[k] = 0.0;
            continue;
        }
        for i in (k + 1)..m {
            qr[i * n + k] /= v0;
        }
        beta[k] = 2.0 * v0 * v0 / vtv;
        // apply reflector to the trailing columns
        for j in (k + 1)..n {
            let mut dot = qr[k * n + j];
            for i in (k + 1)..m {
                dot += qr[i * n + k] * qr[i * n + j];
            }
            dot *= beta[k];
            qr[k * n + j] -= dot;
            for i in (k + 1)..m {
                let vik = qr[i * n + k];
                qr[i * n + j] -= dot * vik;
            }
        }
    }
    Ok(QrFactors { m, n, qr, beta })
}

impl QrFactors {
    pub fn r_diag(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.qr[k * self.n + k]).collect()
    }

    /// Smallest |R_kk| relative to the largest; zero for a structurally
    /// rank-deficient factor.
    pub fn rank_ratio(&self) -> f64 {
        let d = self.r_diag();
        let hi = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if hi == 0.0 {
            return 0.0;
        }
        d.iter().fold(f64::INFINITY, |m, v| m.min(v.abs())) / hi
    }

    /// Solve R^T z = b by forward substitution (R is n-by-n upper triangular).
    pub fn solve_r_transpose(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "solve_r_transpose: rhs length {} vs {}",
                b.len(),
                self.n
            )));
        }
        let n = self.n;
        let mut z = vec![0.0f64; n];
        for i in 0..n {
            let mut acc = b[i];
            for j in 0..i {
                acc -= self.qr[j * n + i] * z[j];
            }
            let d = self.qr[i * n + i];
            if d == 0.0 {
                return Err(Error::SingularMatrix { pivot: i });
            }
            z[i] = acc / d;
        }
        Ok(z)
    }

    /// Solve R x = b by back substitution.
    pub fn solve_r(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "solve_r: rhs length {} vs {}",
                b.len(),
                self.n
            )));
        }
        let n = self.n;
        let mut x = b.to_vec();
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in (i + 1)..n {
                acc -= self.qr[i * n + j] * x[j];
            }
            let d = self.qr[i * n + i];
            if d == 0.0 {
                return Err(Error::SingularMatrix { pivot: i });
            }
            x[i] = acc / d;
        }
        Ok(x)
    }

    /// y = Q [z; 0] for z of length n.
    pub fn apply_q(&self, z: &[f64]) -> Result<Vec<f64>> {
        if z.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "apply_q: input length {} vs {}",
                z.len(),
                self.n
            )));
        }
        let (m, n) = (self.m, self.n);
        let mut y = vec![0.0f64; m];
        y[..n].copy_from_slice(z);
        for k in (0..n).rev() {
            if self.beta[k] == 0.0 {
                continue;
            }
            let mut dot = y[k];
            for i in (k + 1)..m {
                dot += self.qr[i * n + k] * y[i];
            }
            dot *= self.beta[k];
            y[k] -= dot;
            for i in (k + 1)..m {
                y[i] -= dot * self.qr[i * n + k];
            }
        }
        Ok(y)
    }

    /// w = Q^T y for y of length m.
    pub fn apply_q_transpose(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.m {
            return Err(Error::DimensionMismatch(format!(
                "apply_q_transpose: input length {} vs {}",
                y.len(),
                self.m
            )));
        }
        let (m, n) = (self.m, self.n);
        let mut w = y.to_vec();
        for k in 0..n {
            if self.beta[k] == 0.0 {
                continue;
            }
            let mut dot = w[k];
            for i in (k + 1)..m {
                dot += self.qr[i * n + k] * w[i];
            }
            dot *= self.beta[k];
            w[k] -= dot;
            for i in (k + 1)..m {
                w[i] -= dot * self.qr[i * n + k];
            }
        }
        Ok(w)
    }

    /// Least-squares solution of the factored system: x = R^{-1} (Q^T b)[..n].
    pub fn least_squares(&self, b: &[f64]) -> Result<Vec<f64>> {
        let w = self.apply_q_transpose(b)?;
        self.solve_r(&w[..self.n])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn lu_identity() {
        let f = lu_factor(&DenseMatrix::identity(4)).unwrap();
        let b = vec![1.0, -2.0, 3.0, 0.5];
        assert_eq!(f.solve(&b).unwrap(), b);
    }

    #[test]
    fn lu_hand_example() {
        // [[2,1],[1,3]] x = [3,4] -> x = [1,1]
        let a = DenseMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 3.0]]).unwrap();
        let x = lu_factor(&a).unwrap().solve(&[3.0, 4.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14);
        assert!((x[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn lu_singular_names_pivot() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        match lu_factor(&a) {
            Err(Error::SingularMatrix { pivot }) => assert_eq!(pivot, 1),
            other => panic!("expected singular error, got {other:?}"),
        }
    }

    #[test]
    fn lu_random_residual() {
        // residual oracle on a diagonally dominant 50x50 system
        let mut rng = StdRng::seed_from_u64(42);
        let n = 50;
        let mut a = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                a.set(i, j, rng.gen_range(-1.0..1.0));
            }
            a.set(i, i, a.get(i, i) + n as f64);
        }
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = lu_factor(&a).unwrap().solve(&b).unwrap();
        let r: Vec<f64> = a
            .matvec(&x)
            .unwrap()
            .iter()
            .zip(&b)
            .map(|(ax, bi)| ax - bi)
            .collect();
        let rnorm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        let bnorm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(rnorm / bnorm < 1e-11);
    }

    #[test]
    fn qr_least_squares_consistent_system() {
        let a = DenseMatrix::from_rows(&[
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 1.0],
        ])
        .unwrap();
        // b in the range of A: A [2, 3] = [2, 3, 5]
        let qr = qr_factor(&a).unwrap();
        let x = qr.least_squares(&[2.0, 3.0, 5.0]).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-13);
        assert!((x[1] - 3.0).abs() < 1e-13);
    }

    #[test]
    fn qr_reconstruction() {
        let mut rng = StdRng::seed_from_u64(9);
        let (m, n) = (12, 5);
        let mut a = DenseMatrix::zeros(m, n);
        for i in 0..m {
            for j in 0..n {
                a.set(i, j, rng.gen_range(-1.0..1.0));
            }
        }
        let qr = qr_factor(&a).unwrap();
        // Q R e_j should reproduce column j of A
        for j in 0..n {
            let mut rcol = vec![0.0; n];
            for i in 0..=j {
                rcol[i] = qr.qr[i * n + j];
            }
            let col = qr.apply_q(&rcol).unwrap();
            for i in 0..m {
                assert!((col[i] - a.get(i, j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn qr_q_orthonormal() {
        let mut rng = StdRng::seed_from_u64(17);
        let (m, n) = (10, 4);
        let mut a = DenseMatrix::zeros(m, n);
        for i in 0..m {
            for j in 0..n {
                a.set(i, j, rng.gen_range(-1.0..1.0));
            }
        }
        let qr = qr_factor(&a).unwrap();
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            let qj = qr.apply_q(&e).unwrap();
            let back = qr.apply_q_transpose(&qj).unwrap();
            for i in 0..n {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((back[i] - expect).abs() < 1e-12);
            }
        }
    }
}
