//! Gauss-Seidel relaxation sweeps.

use crate::error::{Error, Result};
use crate::la::sparse::CsrMatrix;

/// Which triangular part drives the sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum SweepDirection {
    Forward,
    Backward,
}

/// One sweep of u <- u + B^{-1}(f - A u), with B the lower (forward) or upper
/// (backward) triangle of A, updated in place in index order.
pub fn gs_sweep(a: &CsrMatrix, u: &mut [f64], f: &[f64], direction: SweepDirection) -> Result<()> {
    gs_sweep_partial(a, u, f, direction, a.nrows())
}

/// Sweep restricted to the first `active_rows` rows. Rows beyond the range are
/// left untouched but still contribute to residuals through the row products;
/// the constrained Poisson smoother relies on this.
pub fn gs_sweep_partial(
    a: &CsrMatrix,
    u: &mut [f64],
    f: &[f64],
    direction: SweepDirection,
    active_rows: usize,
) -> Result<()> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "gs_sweep: {}x{} matrix is not square",
            a.nrows(),
            a.ncols()
        )));
    }
    if u.len() != a.nrows() || f.len() != a.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "gs_sweep: vectors of length {}/{} vs order {}",
            u.len(),
            f.len(),
            a.nrows()
        )));
    }
    if active_rows > a.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "gs_sweep: active rows {} vs order {}",
            active_rows,
            a.nrows()
        )));
    }

    let update_row = |i: usize, u: &mut [f64]| -> Result<()> {
        let (cols, vals) = a.row(i);
        let mut acc = f[i];
        let mut diag = 0.0;
        for (&j, &v) in cols.iter().zip(vals) {
            acc -= v * u[j];
            if j == i {
                diag = v;
            }
        }
        if diag == 0.0 {
            return Err(Error::ZeroDiagonal { row: i });
        }
        u[i] += acc / diag;
        Ok(())
    };

    match direction {
        SweepDirection::Forward => {
            for i in 0..active_rows {
                update_row(i, u)?;
            }
        }
        SweepDirection::Backward => {
            for i in (0..active_rows).rev() {
                update_row(i, u)?;
            }
        }
    }
    Ok(())
}
