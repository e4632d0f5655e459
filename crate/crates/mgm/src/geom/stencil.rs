//! Nearest-neighbor stencils and their tangent-plane projections.

use crate::error::{Error, Result};
use crate::geom::{cross, dot3, normalize, sub, KdTree, PointCloud, Vec3};
use rayon::prelude::*;

/// Orthonormal tangent basis (t1, t2) for a unit normal: t1 is the global
/// axis least aligned with n orthogonalized against it, t2 = n x t1. Fixed
/// deterministically; any orthonormal choice gives the same Laplacian.
pub fn tangent_basis(n: Vec3) -> (Vec3, Vec3) {
    let mut axis = 0;
    for a in 1..3 {
        if n[a].abs() < n[axis].abs() {
            axis = a;
        }
    }
    let mut e = [0.0; 3];
    e[axis] = 1.0;
    let t1 = normalize(sub(e, crate::geom::scale(n, dot3(n, e))))
        .expect("unit normal leaves a nonzero tangent component");
    let t2 = cross(n, t1);
    (t1, t2)
}

/// Project the stencil points onto the tangent plane at the center:
/// `x_hat_j = R^T (x_j - x_center)` with R = [t1 t2]. The center maps to the
/// origin exactly.
pub fn tangent_projection(cloud: &PointCloud, indices: &[usize], center: usize) -> Vec<[f64; 2]> {
    let c = cloud.point(center);
    let (t1, t2) = tangent_basis(cloud.normal(center));
    indices
        .iter()
        .map(|&j| {
            let d = sub(cloud.point(j), c);
            [dot3(t1, d), dot3(t2, d)]
        })
        .collect()
}

/// Per-point neighbor lists (self first) with projected 2-D coordinates.
#[derive(Clone, Debug)]
pub struct StencilSet {
    n_points: usize,
    size: usize,
    neighbors: Vec<usize>,
    projected: Vec<[f64; 2]>,
}

impl StencilSet {
    /// Build stencils of `size` nearest neighbors for every point.
    pub fn build(cloud: &PointCloud, size: usize) -> Result<StencilSet> {
        let n_points = cloud.len();
        if size < 1 || size > n_points {
            return Err(Error::InvalidArgument(format!(
                "stencil size {size} not in [1, {n_points}]"
            )));
        }
        let tree = KdTree::build(cloud.points());
        let per_point: Result<Vec<(Vec<usize>, Vec<[f64; 2]>)>> = (0..n_points)
            .into_par_iter()
            .map(|i| {
                let nbrs = tree.knn(cloud.point(i), size)?;
                debug_assert_eq!(nbrs[0], i, "self must be its own nearest neighbor");
                let proj = tangent_projection(cloud, &nbrs, i);
                Ok((nbrs, proj))
            })
            .collect();
        let per_point = per_point?;

        let mut neighbors = Vec::with_capacity(n_points * size);
        let mut projected = Vec::with_capacity(n_points * size);
        for (nbrs, proj) in per_point {
            neighbors.extend(nbrs);
            projected.extend(proj);
        }
        Ok(StencilSet {
            n_points,
            size,
            neighbors,
            projected,
        })
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        self.n_points == 0
    }

    /// Stencil size n (constant across points).
    pub fn size(&self) -> usize {
        self.size
    }

    /// Neighbor indices of stencil `i`; the first entry is `i` itself.
    pub fn indices(&self, i: usize) -> &[usize] {
        &self.neighbors[i * self.size..(i + 1) * self.size]
    }

    /// Projected coordinates of stencil `i`; the first entry is the origin.
    pub fn projected(&self, i: usize) -> &[[f64; 2]] {
        &self.projected[i * self.size..(i + 1) * self.size]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{dist, icosahedral_sphere_nodes, norm3};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn basis_is_orthonormal() {
        let mut rng = StdRng::seed_from_u64(2);
        for _ in 0..50 {
            let n = normalize([
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            ])
            .unwrap();
            let (t1, t2) = tangent_basis(n);
            assert!((norm3(t1) - 1.0).abs() < 1e-12);
            assert!((norm3(t2) - 1.0).abs() < 1e-12);
            assert!(dot3(t1, n).abs() < 1e-12);
            assert!(dot3(t2, n).abs() < 1e-12);
            assert!(dot3(t1, t2).abs() < 1e-12);
        }
    }

    #[test]
    fn center_projects_to_origin() {
        let cloud = icosahedral_sphere_nodes(1).unwrap();
        let proj = tangent_projection(&cloud, &[3, 0, 7], 3);
        assert_eq!(proj[0], [0.0, 0.0]);
    }

    #[test]
    fn planar_projection_is_isometric() {
        // z = 0 plane with normal (0,0,1): pairwise distances preserved exactly
        let mut rng = StdRng::seed_from_u64(31);
        let points: Vec<Vec3> = (0..30)
            .map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), 0.0])
            .collect();
        let normals = vec![[0.0, 0.0, 1.0]; 30];
        let cloud = PointCloud::new(points, normals).unwrap();
        let indices: Vec<usize> = (0..30).collect();
        let proj = tangent_projection(&cloud, &indices, 0);
        for i in 0..30 {
            for j in 0..30 {
                let d3 = dist(cloud.point(i), cloud.point(j));
                let dx = proj[i][0] - proj[j][0];
                let dy = proj[i][1] - proj[j][1];
                let d2 = (dx * dx + dy * dy).sqrt();
                assert!((d3 - d2).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn projection_contracts_on_sphere() {
        let cloud = icosahedral_sphere_nodes(3).unwrap();
        let stencils = StencilSet::build(&cloud, 12).unwrap();
        for i in 0..cloud.len() {
            let proj = stencils.projected(i);
            for (slot, &j) in stencils.indices(i).iter().enumerate() {
                let planar = (proj[slot][0].powi(2) + proj[slot][1].powi(2)).sqrt();
                let ambient = dist(cloud.point(i), cloud.point(j));
                assert!(planar <= ambient + 1e-12);
            }
        }
    }

    #[test]
    fn stencils_have_requested_size_and_self_first() {
        let cloud = icosahedral_sphere_nodes(2).unwrap();
        let stencils = StencilSet::build(&cloud, 9).unwrap();
        assert_eq!(stencils.size(), 9);
        for i in 0..cloud.len() {
            assert_eq!(stencils.indices(i).len(), 9);
            assert_eq!(stencils.indices(i)[0], i);
            assert_eq!(stencils.projected(i)[0], [0.0, 0.0]);
        }
    }
}
