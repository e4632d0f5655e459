//! Multilevel hierarchy construction and the V-cycle iteration.
//!
//! Setup thins each point cloud by weighted sample elimination (successively,
//! each level from the previous one), builds radial-basis transfer operators,
//! forms coarse operators by the Galerkin triple product, reorders every
//! level with reverse Cuthill-McKee, and factors the coarsest operator
//! densely. The cycle presmooths with Gauss-Seidel, restricts the residual,
//! recurses to the coarse direct solve, then interpolates corrections back up
//! with postsmoothing.
//!
//! For the singular Poisson problem the operator is bordered with an all-ones
//! constraint row/column and a Lagrange multiplier; transfers pass the
//! multiplier through unchanged and the smoother touches only the solution
//! block.

use crate::coarsen::{hierarchy_sizes, wse_coarsen};
use crate::discretize::ProblemKind;
use crate::error::{Error, Result};
use crate::geom::PointCloud;
use crate::krylov::SolveReport;
use crate::la::{
    bandwidth, gs_sweep_partial, lu_factor, norm2, rcm_ordering, CsrMatrix, LuFactors,
    Permutation, PermuteSide, SweepDirection,
};
use crate::transfer::{build_interpolation, TransferPair};
use serde::Serialize;
use std::time::Instant;

/// Multilevel parameters; the defaults are the tuned choices used throughout.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct MgmConfig {
    /// Minimum number of nodes on the coarsest level.
    pub n_min: usize,
    /// Pre-smoothing sweeps per level.
    pub nu1: usize,
    /// Post-smoothing sweeps per level.
    pub nu2: usize,
    pub pre_smoother: SweepDirection,
    pub post_smoother: SweepDirection,
    /// Stencil size of the interpolation operators.
    pub transfer_stencil: usize,
}

impl Default for MgmConfig {
    fn default() -> Self {
        MgmConfig {
            n_min: 250,
            nu1: 1,
            nu2: 1,
            pre_smoother: SweepDirection::Forward,
            post_smoother: SweepDirection::Forward,
            transfer_stencil: 3,
        }
    }
}

impl MgmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_min < 1 {
            return Err(Error::InvalidArgument("n_min must be at least 1".into()));
        }
        if self.nu1 + self.nu2 == 0 {
            return Err(Error::InvalidArgument(
                "at least one smoothing sweep is required".into(),
            ));
        }
        if self.transfer_stencil < 1 {
            return Err(Error::InvalidArgument(
                "transfer stencil size must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct LevelStats {
    pub size: usize,
    pub nnz: usize,
    pub bandwidth_before_rcm: usize,
    pub bandwidth_after_rcm: usize,
}

/// One level: its point cloud, operator (bordered in Poisson mode), and the
/// transfer pair to the next coarser level (absent on the coarsest).
pub struct Level {
    pub cloud: PointCloud,
    pub operator: CsrMatrix,
    pub transfer: Option<TransferPair>,
    pub stats: LevelStats,
    smooth_rows: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct HierarchySummary {
    pub kind: ProblemKind,
    pub num_levels: usize,
    pub levels: Vec<LevelStats>,
}

pub struct Hierarchy {
    levels: Vec<Level>,
    coarse_lu: LuFactors,
    finest_ordering: Permutation,
    pub config: MgmConfig,
    pub kind: ProblemKind,
}

/// Border a singular operator with the all-ones constraint row and column;
/// the corner is zero.
pub fn augment_poisson(l: &CsrMatrix) -> Result<CsrMatrix> {
    if !l.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "augment_poisson: {}x{} matrix is not square",
            l.nrows(),
            l.ncols()
        )));
    }
    let n = l.nrows();
    let mut row_offsets = Vec::with_capacity(n + 2);
    row_offsets.push(0usize);
    let mut col_indices = Vec::with_capacity(l.nnz() + 2 * n);
    let mut values = Vec::with_capacity(l.nnz() + 2 * n);
    for i in 0..n {
        let (cols, vals) = l.row(i);
        col_indices.extend_from_slice(cols);
        values.extend_from_slice(vals);
        col_indices.push(n);
        values.push(1.0);
        row_offsets.push(col_indices.len());
    }
    for j in 0..n {
        col_indices.push(j);
        values.push(1.0);
    }
    row_offsets.push(col_indices.len());
    CsrMatrix::from_parts(n + 1, n + 1, row_offsets, col_indices, values)
}

/// blkdiag(T, 1): transfers pass the Lagrange multiplier through unchanged.
fn augment_transfer(t: &CsrMatrix) -> CsrMatrix {
    let (nr, nc) = (t.nrows(), t.ncols());
    let mut row_offsets = t.row_offsets().to_vec();
    let mut col_indices = t.col_indices().to_vec();
    let mut values = t.values().to_vec();
    col_indices.push(nc);
    values.push(1.0);
    row_offsets.push(col_indices.len());
    CsrMatrix::from_parts(nr + 1, nc + 1, row_offsets, col_indices, values)
        .expect("bordered transfer is structurally valid")
}

impl Hierarchy {
    /// Build the full hierarchy for the given fine operator and point cloud.
    pub fn setup(
        fine_operator: &CsrMatrix,
        fine_cloud: &PointCloud,
        config: MgmConfig,
        kind: ProblemKind,
    ) -> Result<Hierarchy> {
        config.validate()?;
        if !fine_operator.is_square() || fine_operator.nrows() != fine_cloud.len() {
            return Err(Error::DimensionMismatch(format!(
                "setup: operator is {}x{} for a cloud of {} points",
                fine_operator.nrows(),
                fine_operator.ncols(),
                fine_cloud.len()
            )));
        }
        let poisson = kind == ProblemKind::Poisson;
        let sizes = hierarchy_sizes(fine_cloud.len(), config.n_min)?;
        let p = sizes.len();

        // finest level: RCM on the physical pattern, constraint row pinned last
        let rcm_fine = rcm_ordering(fine_operator)?;
        let bw_before = bandwidth(fine_operator);
        let op_phys = fine_operator.permute(&rcm_fine, PermuteSide::Both)?;
        let bw_after = bandwidth(&op_phys);
        let mut cloud = fine_cloud.permuted(&rcm_fine);
        let mut operator = if poisson {
            augment_poisson(&op_phys)?
        } else {
            op_phys
        };
        let finest_ordering = if poisson {
            rcm_fine.extend_identity(1)
        } else {
            rcm_fine
        };
        let mut stats = LevelStats {
            size: sizes[0],
            nnz: operator.nnz(),
            bandwidth_before_rcm: bw_before,
            bandwidth_after_rcm: bw_after,
        };

        let mut levels: Vec<Level> = Vec::with_capacity(p);
        for j in 0..p - 1 {
            let n_coarse = sizes[j + 1];
            let at = |e: Error| e.at_level(j + 1);

            let keep = wse_coarsen(&cloud, n_coarse).map_err(at)?;
            let coarse_cloud = cloud.subset(&keep);
            let pair = build_interpolation(&coarse_cloud, &cloud, config.transfer_stencil)
                .map_err(|e| e.at_level(j + 1))?;
            let (interp, restrict) = if poisson {
                let interp = augment_transfer(&pair.interp);
                let restrict = interp.transpose();
                (interp, restrict)
            } else {
                (pair.interp, pair.restrict)
            };

            // Galerkin coarse operator: restrict * (L * interp)
            let coarse_op = restrict
                .spmm(&operator.spmm(&interp).map_err(|e| e.at_level(j + 1))?)
                .map_err(|e| e.at_level(j + 1))?;

            // RCM on the physical block; the constraint index stays pinned
            let coarse_pattern = if poisson {
                coarse_op.principal_block(n_coarse)?
            } else {
                coarse_op.clone()
            };
            let bw_before_c = bandwidth(&coarse_pattern);
            let rcm_coarse = rcm_ordering(&coarse_pattern)?;
            let perm = if poisson {
                rcm_coarse.extend_identity(1)
            } else {
                rcm_coarse.clone()
            };
            let coarse_op = coarse_op.permute(&perm, PermuteSide::Both)?;
            let bw_after_c = if poisson {
                bandwidth(&coarse_op.principal_block(n_coarse)?)
            } else {
                bandwidth(&coarse_op)
            };
            let coarse_cloud = coarse_cloud.permuted(&rcm_coarse);
            let interp = interp.permute(&perm, PermuteSide::Cols)?;
            let pair = TransferPair::from_interp(interp);

            levels.push(Level {
                smooth_rows: cloud.len(),
                cloud,
                operator,
                transfer: Some(pair),
                stats,
            });
            cloud = coarse_cloud;
            operator = coarse_op;
            stats = LevelStats {
                size: n_coarse,
                nnz: operator.nnz(),
                bandwidth_before_rcm: bw_before_c,
                bandwidth_after_rcm: bw_after_c,
            };
        }

        let coarse_lu =
            lu_factor(&operator.to_dense()).map_err(|e| e.at_level(p.saturating_sub(1)))?;
        levels.push(Level {
            smooth_rows: cloud.len(),
            cloud,
            operator,
            transfer: None,
            stats,
        });

        Ok(Hierarchy {
            levels,
            coarse_lu,
            finest_ordering,
            config,
            kind,
        })
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    /// Number of unknowns the cycle operates on (physical plus the Lagrange
    /// multiplier in Poisson mode).
    pub fn system_size(&self) -> usize {
        self.levels[0].operator.nrows()
    }

    /// Number of physical unknowns on the finest level.
    pub fn physical_size(&self) -> usize {
        self.levels[0].cloud.len()
    }

    /// Extend a physical right-hand side to the system size (append the zero
    /// constraint value in Poisson mode).
    pub fn augment_rhs(&self, f: &[f64]) -> Vec<f64> {
        let mut out = f.to_vec();
        if self.kind == ProblemKind::Poisson {
            out.push(0.0);
        }
        out
    }

    /// Drop the Lagrange multiplier from a system-size vector.
    pub fn extract_physical<'a>(&self, u: &'a [f64]) -> &'a [f64] {
        &u[..self.physical_size()]
    }

    pub fn summary(&self) -> HierarchySummary {
        HierarchySummary {
            kind: self.kind,
            num_levels: self.levels.len(),
            levels: self.levels.iter().map(|l| l.stats).collect(),
        }
    }

    /// Apply the finest-level operator to a vector in original (pre-RCM)
    /// index order.
    pub fn apply_fine_operator(&self, x: &[f64]) -> Result<Vec<f64>> {
        let xp = self.finest_ordering.apply_vec(x);
        let yp = self.levels[0].operator.spmv(&xp)?;
        Ok(self.finest_ordering.unapply_vec(&yp))
    }

    /// Relative residual `|f - L u| / |f|` of the finest-level system, with
    /// vectors in original (pre-RCM) index order.
    pub fn relative_residual(&self, f: &[f64], u: &[f64]) -> Result<f64> {
        let fp = self.finest_ordering.apply_vec(f);
        let up = self.finest_ordering.apply_vec(u);
        let lu = self.levels[0].operator.spmv(&up)?;
        let fnorm = norm2(&fp);
        if fnorm == 0.0 {
            return Ok(norm2(&lu));
        }
        let diff: Vec<f64> = fp.iter().zip(&lu).map(|(a, b)| a - b).collect();
        Ok(norm2(&diff) / fnorm)
    }

    /// One V(nu1, nu2) cycle; returns the updated approximation. Exact and
    /// deterministic given its inputs. A single-level hierarchy degenerates
    /// to the direct solve.
    pub fn vcycle(&self, f: &[f64], u0: &[f64]) -> Result<Vec<f64>> {
        let n_sys = self.system_size();
        if f.len() != n_sys || u0.len() != n_sys {
            return Err(Error::DimensionMismatch(format!(
                "vcycle: got vectors of length {}/{} for system size {}",
                f.len(),
                u0.len(),
                n_sys
            )));
        }
        let p = self.levels.len();
        let fine = &self.levels[0];
        let fp = self.finest_ordering.apply_vec(f);
        let mut u = self.finest_ordering.apply_vec(u0);

        if p == 1 {
            let au = fine.operator.spmv(&u)?;
            let r: Vec<f64> = fp.iter().zip(&au).map(|(a, b)| a - b).collect();
            let e = self.coarse_lu.solve(&r)?;
            for (ui, ei) in u.iter_mut().zip(&e) {
                *ui += ei;
            }
            return Ok(self.finest_ordering.unapply_vec(&u));
        }

        for _ in 0..self.config.nu1 {
            gs_sweep_partial(
                &fine.operator,
                &mut u,
                &fp,
                self.config.pre_smoother,
                fine.smooth_rows,
            )?;
        }

        // descend: defect right-hand sides per level
        let mut rhs: Vec<Vec<f64>> = vec![Vec::new(); p];
        let mut errs: Vec<Vec<f64>> = vec![Vec::new(); p];
        {
            let mut r = fine.operator.spmv(&u)?;
            for (ri, fi) in r.iter_mut().zip(&fp) {
                *ri = fi - *ri;
            }
            rhs[1] = fine.transfer.as_ref().unwrap().restrict.spmv(&r)?;
        }
        for j in 1..p - 1 {
            let lvl = &self.levels[j];
            let mut e = vec![0.0; lvl.operator.nrows()];
            for _ in 0..self.config.nu1 {
                gs_sweep_partial(
                    &lvl.operator,
                    &mut e,
                    &rhs[j],
                    self.config.pre_smoother,
                    lvl.smooth_rows,
                )?;
            }
            let mut r = lvl.operator.spmv(&e)?;
            for (ri, bi) in r.iter_mut().zip(&rhs[j]) {
                *ri = bi - *ri;
            }
            rhs[j + 1] = lvl.transfer.as_ref().unwrap().restrict.spmv(&r)?;
            errs[j] = e;
        }

        errs[p - 1] = self.coarse_lu.solve(&rhs[p - 1])?;

        // ascend: interpolate, correct, postsmooth
        for j in (1..p - 1).rev() {
            let lvl = &self.levels[j];
            let corr = lvl.transfer.as_ref().unwrap().interp.spmv(&errs[j + 1])?;
            let e = &mut errs[j];
            for (ei, ci) in e.iter_mut().zip(&corr) {
                *ei += ci;
            }
            for _ in 0..self.config.nu2 {
                gs_sweep_partial(
                    &lvl.operator,
                    e,
                    &rhs[j],
                    self.config.post_smoother,
                    lvl.smooth_rows,
                )?;
            }
        }
        let corr = fine.transfer.as_ref().unwrap().interp.spmv(&errs[1])?;
        for (ui, ci) in u.iter_mut().zip(&corr) {
            *ui += ci;
        }
        for _ in 0..self.config.nu2 {
            gs_sweep_partial(
                &fine.operator,
                &mut u,
                &fp,
                self.config.post_smoother,
                fine.smooth_rows,
            )?;
        }
        Ok(self.finest_ordering.unapply_vec(&u))
    }

    /// Iterate V-cycles from a zero initial guess until the relative residual
    /// drops below `tol` or `maxit` cycles elapse. Non-convergence is
    /// reported, not an error.
    pub fn solve_standalone(&self, f: &[f64], tol: f64, maxit: usize) -> Result<(Vec<f64>, SolveReport)> {
        if !(tol > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tolerance must be positive, got {tol}"
            )));
        }
        let start = Instant::now();
        let n_sys = self.system_size();
        if f.len() != n_sys {
            return Err(Error::DimensionMismatch(format!(
                "solve: rhs length {} vs system size {}",
                f.len(),
                n_sys
            )));
        }
        let mut u = vec![0.0; n_sys];
        if norm2(f) == 0.0 {
            return Ok((
                u,
                SolveReport {
                    converged: true,
                    iterations: 0,
                    residual_history: vec![0.0],
                    preconditioner_applications: 0,
                    wall_time: start.elapsed().as_secs_f64(),
                },
            ));
        }
        let mut history = vec![1.0];
        let mut converged = false;
        for _ in 1..=maxit {
            u = self.vcycle(f, &u)?;
            let rel = self.relative_residual(f, &u)?;
            history.push(rel);
            if rel <= tol {
                converged = true;
                break;
            }
        }
        let iterations = history.len() - 1;
        Ok((
            u,
            SolveReport {
                converged,
                iterations,
                residual_history: history,
                preconditioner_applications: iterations,
                wall_time: start.elapsed().as_secs_f64(),
            },
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::{assemble_lbo, shifted_operator, DiscretizationConfig, Method};
    use crate::geom::icosahedral_sphere_nodes;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn sphere_problem(k: u32, ell: usize, mu: f64) -> (CsrMatrix, PointCloud) {
        let cloud = icosahedral_sphere_nodes(k).unwrap();
        let config = DiscretizationConfig::new(Method::RbfFd, ell).unwrap();
        let d = assemble_lbo(&cloud, &config).unwrap();
        let l = shifted_operator(&d, mu).unwrap();
        (l, cloud)
    }

    #[test]
    fn single_level_is_direct_solve() {
        let (l, cloud) = sphere_problem(3, 3, 1.0); // 642 < 1000 -> p = 1
        let h = Hierarchy::setup(&l, &cloud, MgmConfig::default(), ProblemKind::Shifted).unwrap();
        assert_eq!(h.num_levels(), 1);
        let mut rng = StdRng::seed_from_u64(3);
        let f: Vec<f64> = (0..cloud.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let u = h.vcycle(&f, &vec![0.0; f.len()]).unwrap();
        assert!(h.relative_residual(&f, &u).unwrap() <= 1e-10);

        // nonzero initial guess is still corrected exactly
        let u0: Vec<f64> = (0..f.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let u = h.vcycle(&f, &u0).unwrap();
        assert!(h.relative_residual(&f, &u).unwrap() <= 1e-10);
    }

    #[test]
    fn zero_rhs_zero_guess_stays_zero() {
        let (l, cloud) = sphere_problem(4, 3, 1.0); // 2562 -> p = 2
        let h = Hierarchy::setup(&l, &cloud, MgmConfig::default(), ProblemKind::Shifted).unwrap();
        assert_eq!(h.num_levels(), 2);
        let zero = vec![0.0; h.system_size()];
        let u = h.vcycle(&zero, &zero).unwrap();
        assert!(u.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn galerkin_identity_holds() {
        let (l, cloud) = sphere_problem(4, 3, 1.0);
        let h = Hierarchy::setup(&l, &cloud, MgmConfig::default(), ProblemKind::Shifted).unwrap();
        for j in 0..h.num_levels() - 1 {
            let fine = &h.levels()[j];
            let coarse = &h.levels()[j + 1];
            let pair = fine.transfer.as_ref().unwrap();
            let product = pair
                .restrict
                .spmm(&fine.operator.spmm(&pair.interp).unwrap())
                .unwrap();
            let stored = &coarse.operator;
            assert_eq!(product.nrows(), stored.nrows());
            let scale = stored.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for i in 0..stored.nrows() {
                for (&col, &v) in product.row(i).0.iter().zip(product.row(i).1) {
                    assert!((v - stored.get(i, col)).abs() <= 1e-13 * scale);
                }
                for (&col, &v) in stored.row(i).0.iter().zip(stored.row(i).1) {
                    assert!((v - product.get(i, col)).abs() <= 1e-13 * scale);
                }
            }
        }
    }

    #[test]
    fn residual_contracts_per_cycle() {
        let (l, cloud) = sphere_problem(4, 3, 1.0);
        let h = Hierarchy::setup(&l, &cloud, MgmConfig::default(), ProblemKind::Shifted).unwrap();
        let mut rng = StdRng::seed_from_u64(11);
        let f: Vec<f64> = (0..h.system_size())
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        let (_, report) = h.solve_standalone(&f, 1e-12, 40).unwrap();
        assert!(report.converged, "history: {:?}", report.residual_history);
        // reduction factor per cycle over cycles 2..10
        let hist = &report.residual_history;
        for w in hist.windows(2).take(10).skip(1) {
            assert!(w[1] <= 0.5 * w[0], "slow contraction: {hist:?}");
        }
    }

    #[test]
    fn runs_are_bit_reproducible() {
        let (l, cloud) = sphere_problem(4, 3, 1.0);
        let h = Hierarchy::setup(&l, &cloud, MgmConfig::default(), ProblemKind::Shifted).unwrap();
        let mut rng = StdRng::seed_from_u64(5);
        let f: Vec<f64> = (0..h.system_size())
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        let (_, r1) = h.solve_standalone(&f, 1e-12, 30).unwrap();
        let (_, r2) = h.solve_standalone(&f, 1e-12, 30).unwrap();
        assert_eq!(r1.residual_history, r2.residual_history);
    }

    #[test]
    fn augment_poisson_structure() {
        // all-zero 2x2 block: [[0,0,1],[0,0,1],[1,1,0]]
        let z = CsrMatrix::from_triplets(2, 2, &[]).unwrap();
        let a = augment_poisson(&z).unwrap();
        assert_eq!(a.nrows(), 3);
        assert_eq!(a.get(0, 2), 1.0);
        assert_eq!(a.get(1, 2), 1.0);
        assert_eq!(a.get(2, 0), 1.0);
        assert_eq!(a.get(2, 1), 1.0);
        assert_eq!(a.get(2, 2), 0.0);
        assert_eq!(a.nnz(), 4);
    }

    #[test]
    fn augmented_coarse_solve_is_nonsingular() {
        // the bordered Laplacian on a small sphere factors without pivot failure
        let cloud = icosahedral_sphere_nodes(3).unwrap(); // 642
        let config = DiscretizationConfig::new(Method::RbfFd, 3).unwrap();
        let d = assemble_lbo(&cloud, &config).unwrap();
        let h = Hierarchy::setup(&d, &cloud, MgmConfig::default(), ProblemKind::Poisson).unwrap();
        assert_eq!(h.num_levels(), 1);
        assert_eq!(h.system_size(), cloud.len() + 1);
        // direct solve through the degenerate cycle
        let mut rng = StdRng::seed_from_u64(2);
        let v: Vec<f64> = (0..cloud.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let f = h.augment_rhs(&d.spmv(&v).unwrap());
        let u = h.vcycle(&f, &vec![0.0; f.len()]).unwrap();
        assert!(h.relative_residual(&f, &u).unwrap() <= 1e-10);
    }

    #[test]
    fn poisson_solution_has_zero_mean() {
        let cloud = icosahedral_sphere_nodes(4).unwrap(); // 2562 -> p = 2
        let config = DiscretizationConfig::new(Method::RbfFd, 3).unwrap();
        let d = assemble_lbo(&cloud, &config).unwrap();
        let h = Hierarchy::setup(&d, &cloud, MgmConfig::default(), ProblemKind::Poisson).unwrap();
        let mut rng = StdRng::seed_from_u64(7);
        let v: Vec<f64> = (0..cloud.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let f = h.augment_rhs(&d.spmv(&v).unwrap());
        let (u, report) = h.solve_standalone(&f, 1e-12, 60).unwrap();
        assert!(report.converged);
        let mean_sum: f64 = h.extract_physical(&u).iter().sum();
        assert!(mean_sum.abs() <= 1e-8 * cloud.len() as f64);
    }

    #[test]
    fn poisson_coarse_correction_restores_constraint() {
        // with no postsmoothing, the exact coarse solve plus the bordered
        // transfers drive |sum(u)| to the factorization accuracy in one cycle,
        // from any starting point
        let cloud = icosahedral_sphere_nodes(4).unwrap();
        let config = DiscretizationConfig::new(Method::RbfFd, 3).unwrap();
        let d = assemble_lbo(&cloud, &config).unwrap();
        let mgm_config = MgmConfig {
            nu1: 1,
            nu2: 0,
            ..MgmConfig::default()
        };
        let h = Hierarchy::setup(&d, &cloud, mgm_config, ProblemKind::Poisson).unwrap();
        let mut rng = StdRng::seed_from_u64(9);
        let v: Vec<f64> = (0..cloud.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let f = h.augment_rhs(&d.spmv(&v).unwrap());
        let constraint = |u: &[f64]| h.extract_physical(u).iter().sum::<f64>().abs();
        let mut u: Vec<f64> = (0..h.system_size()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let before = constraint(&u);
        for _ in 0..3 {
            u = h.vcycle(&f, &u).unwrap();
            let after = constraint(&u);
            assert!(
                after <= before + 1e-10,
                "constraint residual grew: {before} -> {after}"
            );
        }
        assert!(constraint(&u) <= 1e-8, "constraint not restored");
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let (l, cloud) = sphere_problem(3, 3, 1.0);
        let h = Hierarchy::setup(&l, &cloud, MgmConfig::default(), ProblemKind::Shifted).unwrap();
        let bad = vec![0.0; h.system_size() + 1];
        assert!(h.vcycle(&bad, &bad).is_err());
    }
}
