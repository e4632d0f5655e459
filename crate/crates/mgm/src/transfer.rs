//! Coarse-to-fine interpolation built from local radial-basis interpolants in
//! ambient R^3 (distance kernel plus a constant), restriction as its
//! transpose.
//!
//! Each fine point takes its m nearest coarse points and solves the bordered
//! system `[A 1; 1^T 0] [d; lambda] = [s; 1]` with `A_ij = |y_i - y_j|` and
//! `s_i = |x - y_i|`. The constant block makes every row sum to one; the
//! multiplier is discarded. A fine point coinciding with a coarse point gets
//! an exact unit row (with explicit zeros, so the row count stays m).

use crate::error::{Error, Result};
use crate::geom::{dist, KdTree, PointCloud};
use crate::la::{lu_factor, CsrMatrix, DenseMatrix};
use rayon::prelude::*;

/// Interpolation (fine x coarse) and its bit-identical transpose.
#[derive(Clone, Debug)]
pub struct TransferPair {
    pub interp: CsrMatrix,
    pub restrict: CsrMatrix,
}

impl TransferPair {
    /// Rebuild the restriction after modifying the interpolation.
    pub fn from_interp(interp: CsrMatrix) -> TransferPair {
        let restrict = interp.transpose();
        TransferPair { interp, restrict }
    }
}

/// Build the interpolation operator from `coarse` to `fine` with m-point
/// stencils.
pub fn build_interpolation(
    coarse: &PointCloud,
    fine: &PointCloud,
    m: usize,
) -> Result<TransferPair> {
    if m < 1 || m > coarse.len() {
        return Err(Error::InvalidArgument(format!(
            "transfer stencil size {m} not in [1, {}]",
            coarse.len()
        )));
    }
    let tree = KdTree::build(coarse.points());

    let rows: Vec<Result<Vec<(usize, f64)>>> = (0..fine.len())
        .into_par_iter()
        .map(|i| {
            let x = fine.point(i);
            let nbrs = tree.knn(x, m)?;
            let d0 = dist(x, coarse.point(nbrs[0]));
            let weights: Vec<f64> = if d0 == 0.0 {
                // exact node reproduction for coincident points
                let mut w = vec![0.0; m];
                w[0] = 1.0;
                w
            } else {
                let dim = m + 1;
                let mut a = DenseMatrix::zeros(dim, dim);
                for r in 0..m {
                    for c in 0..m {
                        a.set(r, c, dist(coarse.point(nbrs[r]), coarse.point(nbrs[c])));
                    }
                    a.set(r, m, 1.0);
                    a.set(m, r, 1.0);
                }
                let mut rhs = vec![0.0f64; dim];
                for (r, &j) in nbrs.iter().enumerate() {
                    rhs[r] = dist(x, coarse.point(j));
                }
                rhs[m] = 1.0;
                let sol = lu_factor(&a)
                    .and_then(|f| f.solve(&rhs))
                    .map_err(|_| Error::SingularTransfer { fine: i })?;
                sol[..m].to_vec()
            };
            let mut entries: Vec<(usize, f64)> = nbrs.into_iter().zip(weights).collect();
            entries.sort_unstable_by_key(|&(j, _)| j);
            Ok(entries)
        })
        .collect();

    let mut row_offsets = Vec::with_capacity(fine.len() + 1);
    row_offsets.push(0usize);
    let mut col_indices = Vec::with_capacity(fine.len() * m);
    let mut values = Vec::with_capacity(fine.len() * m);
    for row in rows {
        for (j, v) in row? {
            col_indices.push(j);
            values.push(v);
        }
        row_offsets.push(col_indices.len());
    }
    let interp = CsrMatrix::from_parts(fine.len(), coarse.len(), row_offsets, col_indices, values)?;
    Ok(TransferPair::from_interp(interp))
}
