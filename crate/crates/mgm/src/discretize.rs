//! Discrete surface Laplacian assembly.
//!
//! Each row of the operator comes from one stencil projected to the tangent
//! plane at its center. Two weight constructions are provided:
//!
//! * RBF-FD: a polyharmonic-spline interpolant `|r|^(2k+1)` augmented with
//!   bivariate polynomials of degree `ell`; the weights solve the bordered
//!   collocation system with the planar Laplacian of the kernel and of the
//!   monomials on the right-hand side.
//! * GFD: a weighted polynomial least-squares fit with a Gaussian distance
//!   weight, solved through a QR factorization of `W^(1/2) P`.
//!
//! Both enforce exactness of the planar Laplacian on polynomials up to
//! degree `ell`.

use crate::error::{Error, Result};
use crate::geom::{PointCloud, StencilSet};
use crate::la::{lu_factor, qr_factor, CsrMatrix, DenseMatrix};
use rayon::prelude::*;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Method {
    RbfFd,
    Gfd,
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Method> {
        match s {
            "rbf-fd" => Ok(Method::RbfFd),
            "gfd" => Ok(Method::Gfd),
            other => Err(Error::InvalidArgument(format!(
                "unknown method '{other}' (expected rbf-fd or gfd)"
            ))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Method::RbfFd => write!(f, "rbf-fd"),
            Method::Gfd => write!(f, "gfd"),
        }
    }
}

/// Whether the assembled operator is the singular Laplacian or the shifted
/// (screened) form `I - mu * D`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum ProblemKind {
    Poisson,
    Shifted,
}

impl FromStr for ProblemKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<ProblemKind> {
        match s {
            "poisson" => Ok(ProblemKind::Poisson),
            "shifted" => Ok(ProblemKind::Shifted),
            other => Err(Error::InvalidArgument(format!(
                "unknown problem '{other}' (expected poisson or shifted)"
            ))),
        }
    }
}

impl std::fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ProblemKind::Poisson => write!(f, "poisson"),
            ProblemKind::Shifted => write!(f, "shifted"),
        }
    }
}

/// Discretization parameters. Defaults follow the standard choices:
/// PHS order k = ell, stencil size n = (ell+1)(ell+2) = 2L, alpha = 4.
#[derive(Clone, Copy, Debug, serde::Serialize, serde::Deserialize)]
pub struct DiscretizationConfig {
    pub method: Method,
    pub poly_degree: usize,
    pub phs_order: usize,
    pub gfd_alpha: f64,
    pub stencil_size: usize,
}

impl DiscretizationConfig {
    pub fn new(method: Method, poly_degree: usize) -> Result<Self> {
        let cfg = DiscretizationConfig {
            method,
            poly_degree,
            phs_order: poly_degree,
            gfd_alpha: 4.0,
            stencil_size: (poly_degree + 1) * (poly_degree + 2),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_phs_order(mut self, k: usize) -> Result<Self> {
        self.phs_order = k;
        self.validate()?;
        Ok(self)
    }

    pub fn with_alpha(mut self, alpha: f64) -> Result<Self> {
        self.gfd_alpha = alpha;
        self.validate()?;
        Ok(self)
    }

    pub fn with_stencil_size(mut self, n: usize) -> Result<Self> {
        self.stencil_size = n;
        self.validate()?;
        Ok(self)
    }

    /// Number of bivariate monomials of degree <= poly_degree.
    pub fn monomial_count(&self) -> usize {
        (self.poly_degree + 1) * (self.poly_degree + 2) / 2
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=10).contains(&self.poly_degree) {
            return Err(Error::InvalidArgument(format!(
                "polynomial degree {} outside 1..=10",
                self.poly_degree
            )));
        }
        if self.phs_order > self.poly_degree {
            return Err(Error::InvalidArgument(format!(
                "PHS order {} exceeds polynomial degree {}",
                self.phs_order, self.poly_degree
            )));
        }
        if self.gfd_alpha <= 0.0 || !self.gfd_alpha.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "alpha must be positive, got {}",
                self.gfd_alpha
            )));
        }
        if self.stencil_size < 1 {
            return Err(Error::InvalidArgument("stencil size must be >= 1".into()));
        }
        Ok(())
    }
}

/// Exponent pairs (a, b) of the monomials x^a y^b with a + b <= ell, ordered
/// by total degree.
fn monomial_powers(ell: usize) -> Vec<(u32, u32)> {
    let mut powers = Vec::with_capacity((ell + 1) * (ell + 2) / 2);
    for d in 0..=ell as u32 {
        for b in 0..=d {
            powers.push((d - b, b));
        }
    }
    powers
}

#[inline]
fn eval_monomial(p: [f64; 2], a: u32, b: u32) -> f64 {
    p[0].powi(a as i32) * p[1].powi(b as i32)
}

/// Planar Laplacian of each monomial evaluated at the origin: 2 for x^2 and
/// y^2, zero otherwise.
fn laplacian_of_monomials(powers: &[(u32, u32)]) -> Vec<f64> {
    powers
        .iter()
        .map(|&(a, b)| match (a, b) {
            (2, 0) | (0, 2) => 2.0,
            _ => 0.0,
        })
        .collect()
}

/// Planar Laplacian of `|r|^(2k+1)` at distance r from the kernel center:
/// `(2k+1)^2 |r|^(2k-1)`, taken as 0 at the center.
#[inline]
fn phs_laplacian(r: f64, k: usize) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    let m = (2 * k + 1) as f64;
    m * m * r.powi(2 * k as i32 - 1)
}

#[inline]
fn phs_kernel(r: f64, k: usize) -> f64 {
    // r^(2k+1) without powf
    let r2 = r * r;
    r * r2.powi(k as i32)
}

fn norm2d(p: [f64; 2]) -> f64 {
    (p[0] * p[0] + p[1] * p[1]).sqrt()
}

fn dist2d(p: [f64; 2], q: [f64; 2]) -> f64 {
    let (dx, dy) = (p[0] - q[0], p[1] - q[1]);
    (dx * dx + dy * dy).sqrt()
}

/// Stencil radius: the largest projected distance from the center.
fn stencil_radius(coords: &[[f64; 2]]) -> f64 {
    coords.iter().map(|&p| norm2d(p)).fold(0.0, f64::max)
}

/// Support radius of every stencil in the set.
pub fn stencil_radii(stencils: &StencilSet) -> Vec<f64> {
    (0..stencils.len())
        .map(|i| stencil_radius(stencils.projected(i)))
        .collect()
}

/// Weights pinned entirely by the polynomial constraints `P^T c = dp`.
/// Applies when the constraints have full column rank in c and are
/// consistent; this covers classic finite-difference stencils whose point
/// count is below the monomial count.
fn constraint_pinned_weights(
    coords: &[[f64; 2]],
    powers: &[(u32, u32)],
    dp: &[f64],
) -> Result<Vec<f64>> {
    let n = coords.len();
    let big_l = powers.len();
    if big_l < n {
        return Err(Error::InvalidArgument(
            "constraint system does not determine the weights".into(),
        ));
    }
    let mut pt = DenseMatrix::zeros(big_l, n);
    for (j, &(a, b)) in powers.iter().enumerate() {
        for (i, &x) in coords.iter().enumerate() {
            pt.set(j, i, eval_monomial(x, a, b));
        }
    }
    let qr = qr_factor(&pt)?;
    if qr.rank_ratio() < 1e-10 {
        return Err(Error::InvalidArgument(
            "polynomial constraint matrix is rank deficient".into(),
        ));
    }
    let c = qr.least_squares(dp)?;
    // the constraints must actually hold, otherwise the stencil is unusable
    let fitted = pt.matvec(&c)?;
    let scale = dp.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let err: f64 = fitted
        .iter()
        .zip(dp)
        .map(|(f, d)| (f - d) * (f - d))
        .sum::<f64>()
        .sqrt();
    if err > 1e-9 * scale {
        return Err(Error::InvalidArgument(format!(
            "polynomial constraints inconsistent (residual {err:.3e})"
        )));
    }
    Ok(c)
}

/// RBF-FD stencil weights for the planar Laplacian on projected coordinates
/// (center first, at the origin). Exact for polynomials of degree <= ell.
pub fn rbffd_weights(coords: &[[f64; 2]], ell: usize, k: usize) -> Result<Vec<f64>> {
    if coords.is_empty() {
        return Err(Error::InvalidArgument("empty stencil".into()));
    }
    if k > ell {
        return Err(Error::InvalidArgument(format!(
            "PHS order {k} exceeds polynomial degree {ell}"
        )));
    }
    let n = coords.len();
    let powers = monomial_powers(ell);
    let big_l = powers.len();
    let dp = laplacian_of_monomials(&powers);

    // scale the stencil to unit radius; rescale the weights by 1/rho^2 after
    let rho = stencil_radius(coords);
    if rho == 0.0 {
        return Err(Error::InvalidArgument(
            "degenerate stencil: all points coincide with the center".into(),
        ));
    }
    let scaled: Vec<[f64; 2]> = coords.iter().map(|&p| [p[0] / rho, p[1] / rho]).collect();

    let dim = n + big_l;
    let mut m = DenseMatrix::zeros(dim, dim);
    for i in 0..n {
        for j in 0..n {
            m.set(i, j, phs_kernel(dist2d(scaled[i], scaled[j]), k));
        }
        for (j, &(a, b)) in powers.iter().enumerate() {
            let v = eval_monomial(scaled[i], a, b);
            m.set(i, n + j, v);
            m.set(n + j, i, v);
        }
    }
    let mut rhs = vec![0.0f64; dim];
    for i in 0..n {
        rhs[i] = phs_laplacian(norm2d(scaled[i]), k);
    }
    rhs[n..].copy_from_slice(&dp);

    let weights = match lu_factor(&m) {
        Ok(f) => {
            let sol = f.solve(&rhs)?;
            sol[..n].to_vec()
        }
        Err(Error::SingularMatrix { .. }) => constraint_pinned_weights(&scaled, &powers, &dp)?,
        Err(e) => return Err(e),
    };
    Ok(weights.into_iter().map(|c| c / (rho * rho)).collect())
}

/// GFD stencil weights: weighted polynomial least squares with
/// `w_i = exp(-alpha |x_i|^2 / (rho_1^2 + rho_i^2))`, where `radii[i]` is the
/// support radius of the stencil centered at the i-th stencil member.
pub fn gfd_weights(coords: &[[f64; 2]], ell: usize, alpha: f64, radii: &[f64]) -> Result<Vec<f64>> {
    if coords.is_empty() {
        return Err(Error::InvalidArgument("empty stencil".into()));
    }
    if coords.len() != radii.len() {
        return Err(Error::DimensionMismatch(format!(
            "gfd_weights: {} coordinates vs {} radii",
            coords.len(),
            radii.len()
        )));
    }
    if radii.iter().any(|&r| !(r > 0.0)) {
        return Err(Error::InvalidArgument(
            "gfd_weights: stencil radii must be positive".into(),
        ));
    }
    let n = coords.len();
    let powers = monomial_powers(ell);
    let big_l = powers.len();
    let dp = laplacian_of_monomials(&powers);

    let rho = stencil_radius(coords);
    if rho == 0.0 {
        return Err(Error::InvalidArgument(
            "degenerate stencil: all points coincide with the center".into(),
        ));
    }
    let scaled: Vec<[f64; 2]> = coords.iter().map(|&p| [p[0] / rho, p[1] / rho]).collect();

    // Gaussian weights from unscaled geometry (the ratio is scale free).
    // The support radii are rescaled to the local spacing scale, sqrt(c/n)
    // with c = 20/3: an n-point stencil of support rho has spacing
    // ~ rho/sqrt(n), and a Gaussian tied to that scale stays equally sharp
    // across stencil sizes. Tying it to the full support instead flattens the
    // weight as n grows and the least-squares stencils turn oscillatory.
    let spacing_scale = (20.0 / 3.0) / n as f64;
    let rho1sq = radii[0] * radii[0] * spacing_scale;
    let sqrt_w: Vec<f64> = coords
        .iter()
        .zip(radii)
        .map(|(&p, &ri)| {
            let d2 = p[0] * p[0] + p[1] * p[1];
            (-alpha * d2 / (rho1sq + ri * ri * spacing_scale)).exp().sqrt()
        })
        .collect();

    let weights_scaled = if n >= big_l {
        let mut b = DenseMatrix::zeros(n, big_l);
        for i in 0..n {
            for (j, &(a, bb)) in powers.iter().enumerate() {
                b.set(i, j, sqrt_w[i] * eval_monomial(scaled[i], a, bb));
            }
        }
        let qr = qr_factor(&b)?;
        if qr.rank_ratio() < 1e-12 {
            constraint_pinned_weights(&scaled, &powers, &dp)?
        } else {
            // c = W^(1/2) Q R^(-T) dp
            let z = qr.solve_r_transpose(&dp)?;
            let y = qr.apply_q(&z)?;
            y.iter().zip(&sqrt_w).map(|(yi, wi)| wi * yi).collect()
        }
    } else {
        constraint_pinned_weights(&scaled, &powers, &dp)?
    };
    Ok(weights_scaled.into_iter().map(|c| c / (rho * rho)).collect())
}

/// Assemble the discrete surface Laplacian: row i holds the weights of
/// stencil i in the columns of its neighbor indices, exactly n entries per
/// row.
pub fn assemble_lbo(cloud: &PointCloud, config: &DiscretizationConfig) -> Result<CsrMatrix> {
    config.validate()?;
    let n_points = cloud.len();
    let n = config.stencil_size;
    if n > n_points {
        return Err(Error::InvalidArgument(format!(
            "stencil size {n} exceeds cloud size {n_points}"
        )));
    }
    let stencils = StencilSet::build(cloud, n)?;
    let radii = match config.method {
        Method::Gfd => stencil_radii(&stencils),
        Method::RbfFd => Vec::new(),
    };

    let rows: Vec<Result<Vec<(usize, f64)>>> = (0..n_points)
        .into_par_iter()
        .map(|i| {
            let coords = stencils.projected(i);
            let indices = stencils.indices(i);
            let weights = match config.method {
                Method::RbfFd => rbffd_weights(coords, config.poly_degree, config.phs_order),
                Method::Gfd => {
                    let local_radii: Vec<f64> = indices.iter().map(|&j| radii[j]).collect();
                    gfd_weights(coords, config.poly_degree, config.gfd_alpha, &local_radii)
                }
            }
            .map_err(|e| Error::NonUnisolventStencil {
                center: i,
                reason: e.to_string(),
            })?;
            let mut entries: Vec<(usize, f64)> =
                indices.iter().copied().zip(weights).collect();
            entries.sort_unstable_by_key(|&(j, _)| j);
            Ok(entries)
        })
        .collect();

    let mut row_offsets = Vec::with_capacity(n_points + 1);
    row_offsets.push(0usize);
    let mut col_indices = Vec::with_capacity(n_points * n);
    let mut values = Vec::with_capacity(n_points * n);
    for row in rows {
        for (j, v) in row? {
            col_indices.push(j);
            values.push(v);
        }
        row_offsets.push(col_indices.len());
    }
    CsrMatrix::from_parts(n_points, n_points, row_offsets, col_indices, values)
}

/// Materialize `I - mu * D` with canonical structure; exact zeros produced by
/// the merge are dropped.
pub fn shifted_operator(d: &CsrMatrix, mu: f64) -> Result<CsrMatrix> {
    if !d.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "shifted_operator: {}x{} matrix is not square",
            d.nrows(),
            d.ncols()
        )));
    }
    if !(mu >= 0.0) || !mu.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "shift mu must be finite and nonnegative, got {mu}"
        )));
    }
    let n = d.nrows();
    if mu == 0.0 {
        return Ok(CsrMatrix::identity(n));
    }
    let mut row_offsets = Vec::with_capacity(n + 1);
    row_offsets.push(0usize);
    let mut col_indices = Vec::new();
    let mut values = Vec::new();
    for i in 0..n {
        let (cols, vals) = d.row(i);
        let mut wrote_diag = false;
        let push = |j: usize, v: f64, cols_out: &mut Vec<usize>, vals_out: &mut Vec<f64>| {
            if v != 0.0 {
                cols_out.push(j);
                vals_out.push(v);
            }
        };
        for (&j, &v) in cols.iter().zip(vals) {
            if j == i {
                push(i, 1.0 - mu * v, &mut col_indices, &mut values);
                wrote_diag = true;
            } else {
                if j > i && !wrote_diag {
                    push(i, 1.0, &mut col_indices, &mut values);
                    wrote_diag = true;
                }
                push(j, -mu * v, &mut col_indices, &mut values);
            }
        }
        if !wrote_diag {
            push(i, 1.0, &mut col_indices, &mut values);
        }
        row_offsets.push(col_indices.len());
    }
    CsrMatrix::from_parts(n, n, row_offsets, col_indices, values)
}

/// The operator of the discrete problem: the Laplacian itself (Poisson) or
/// the materialized shifted form.
#[derive(Clone, Debug)]
pub struct SurfaceOperator {
    pub kind: ProblemKind,
    pub mu: f64,
    pub matrix: CsrMatrix,
}

impl SurfaceOperator {
    pub fn poisson(laplacian: CsrMatrix) -> SurfaceOperator {
        SurfaceOperator {
            kind: ProblemKind::Poisson,
            mu: 0.0,
            matrix: laplacian,
        }
    }

    pub fn shifted(laplacian: &CsrMatrix, mu: f64) -> Result<SurfaceOperator> {
        Ok(SurfaceOperator {
            kind: ProblemKind::Shifted,
            mu,
            matrix: shifted_operator(laplacian, mu)?,
        })
    }
}
