//! Normal estimation for raw point sets: per-point PCA of the k-neighborhood
//! followed by sign propagation across the kNN graph.

use crate::error::{Error, Result};
use crate::geom::{dot3, normalize, scale, sub, KdTree, Vec3};
use std::collections::VecDeque;

/// Eigen-decomposition of a symmetric 3x3 matrix by cyclic Jacobi sweeps.
/// Returns eigenvalues in ascending order with matching unit eigenvectors.
fn jacobi_eigen_3x3(m: [[f64; 3]; 3]) -> ([f64; 3], [Vec3; 3]) {
    let mut a = m;
    let mut v = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    for _ in 0..32 {
        let off = a[0][1].abs() + a[0][2].abs() + a[1][2].abs();
        if off < 1e-300 {
            break;
        }
        for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
            let apq = a[p][q];
            if apq.abs() < 1e-300 {
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            let rotate = |mat: &mut [[f64; 3]; 3], i: usize| {
                let (mip, miq) = (mat[i][p], mat[i][q]);
                mat[i][p] = c * mip - s * miq;
                mat[i][q] = s * mip + c * miq;
            };
            for i in 0..3 {
                rotate(&mut a, i);
            }
            for i in 0..3 {
                let (api, aqi) = (a[p][i], a[q][i]);
                a[p][i] = c * api - s * aqi;
                a[q][i] = s * api + c * aqi;
            }
            for i in 0..3 {
                rotate(&mut v, i);
            }
        }
    }
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| a[i][i].total_cmp(&a[j][j]));
    let evals = [a[order[0]][order[0]], a[order[1]][order[1]], a[order[2]][order[2]]];
    let evecs = [
        [v[0][order[0]], v[1][order[0]], v[2][order[0]]],
        [v[0][order[1]], v[1][order[1]], v[2][order[1]]],
        [v[0][order[2]], v[1][order[2]], v[2][order[2]]],
    ];
    (evals, evecs)
}

/// Estimate unit normals as the least-significant principal direction of each
/// k-neighborhood. Signs are made consistent by BFS over the kNN graph and
/// each connected component is flipped to point away from the cloud centroid.
pub fn estimate_normals(points: &[Vec3], k: usize) -> Result<Vec<Vec3>> {
    let n = points.len();
    if n <= k {
        return Err(Error::InvalidArgument(format!(
            "normal estimation needs more than k = {k} points, got {n}"
        )));
    }
    if k < 2 {
        return Err(Error::InvalidArgument(
            "normal estimation needs k >= 2".into(),
        ));
    }
    let tree = KdTree::build(points);
    let mut neighborhoods: Vec<Vec<usize>> = Vec::with_capacity(n);
    let mut normals: Vec<Vec3> = Vec::with_capacity(n);
    for i in 0..n {
        let nbrs = tree.knn(points[i], k)?;
        // Gaussian distance weights over the neighborhood radius damp the
        // bias from asymmetric neighborhoods
        let radius2 = nbrs
            .iter()
            .map(|&j| crate::geom::dist2(points[j], points[i]))
            .fold(0.0f64, f64::max)
            .max(1e-300);
        let weights: Vec<f64> = nbrs
            .iter()
            .map(|&j| (-2.0 * crate::geom::dist2(points[j], points[i]) / radius2).exp())
            .collect();
        let total: f64 = weights.iter().sum();
        let mut mean = [0.0; 3];
        for (&j, &w) in nbrs.iter().zip(&weights) {
            mean = crate::geom::add(mean, scale(points[j], w));
        }
        mean = scale(mean, 1.0 / total);
        let mut cov = [[0.0f64; 3]; 3];
        for (&j, &w) in nbrs.iter().zip(&weights) {
            let d = sub(points[j], mean);
            for r in 0..3 {
                for c in 0..3 {
                    cov[r][c] += w * d[r] * d[c];
                }
            }
        }
        let (evals, evecs) = jacobi_eigen_3x3(cov);
        if (evals[1] - evals[0]).abs() <= 1e-10 * evals[2].abs().max(1e-300) {
            log::warn!(
                "degenerate neighborhood at point {i}: two equal smallest singular values"
            );
        }
        normals.push(normalize(evecs[0]).unwrap_or([0.0, 0.0, 1.0]));
        neighborhoods.push(nbrs);
    }

    // sign consistency: BFS, flip against the parent when needed
    let mut visited = vec![false; n];
    let mut centroid = [0.0; 3];
    for &p in points {
        centroid = crate::geom::add(centroid, p);
    }
    centroid = scale(centroid, 1.0 / n as f64);

    for start in 0..n {
        if visited[start] {
            continue;
        }
        let mut component = Vec::new();
        let mut queue = VecDeque::new();
        visited[start] = true;
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            component.push(u);
            for &w in &neighborhoods[u] {
                if !visited[w] {
                    visited[w] = true;
                    if dot3(normals[w], normals[u]) < 0.0 {
                        normals[w] = scale(normals[w], -1.0);
                    }
                    queue.push_back(w);
                }
            }
        }
        // orient the whole component away from the centroid
        let mut outward = 0.0;
        for &i in &component {
            outward += dot3(normals[i], sub(points[i], centroid));
        }
        if outward < 0.0 {
            for &i in &component {
                normals[i] = scale(normals[i], -1.0);
            }
        }
    }
    Ok(normals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::icosahedral_sphere_nodes;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn planar_cloud_gets_vertical_normals() {
        let mut rng = StdRng::seed_from_u64(4);
        let points: Vec<Vec3> = (0..100)
            .map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), 0.0])
            .collect();
        let normals = estimate_normals(&points, 10).unwrap();
        for n in normals {
            assert!(n[2].abs() > 1.0 - 1e-10, "normal {n:?} not +-(0,0,1)");
        }
    }

    #[test]
    fn sphere_normals_near_radial() {
        let cloud = icosahedral_sphere_nodes(3).unwrap();
        let normals = estimate_normals(cloud.points(), 20).unwrap();
        let two_degrees = 2.0_f64.to_radians().cos();
        for (p, n) in cloud.points().iter().zip(&normals) {
            let alignment = dot3(*p, *n); // exact normal is the point itself
            assert!(
                alignment > two_degrees,
                "normal off radial by more than 2 degrees: {alignment}"
            );
        }
    }

    #[test]
    fn neighbor_normals_consistently_signed() {
        let cloud = icosahedral_sphere_nodes(2).unwrap();
        let normals = estimate_normals(cloud.points(), 12).unwrap();
        let tree = KdTree::build(cloud.points());
        for i in 0..cloud.len() {
            for j in tree.knn(cloud.point(i), 12).unwrap() {
                assert!(dot3(normals[i], normals[j]) > 0.0);
            }
        }
    }

    #[test]
    fn jacobi_recovers_diagonal_spectrum() {
        let (evals, evecs) = jacobi_eigen_3x3([[3.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 2.0]]);
        assert!((evals[0] - 1.0).abs() < 1e-14);
        assert!((evals[1] - 2.0).abs() < 1e-14);
        assert!((evals[2] - 3.0).abs() < 1e-14);
        assert!(evecs[0][1].abs() > 1.0 - 1e-12);
    }

    #[test]
    fn jacobi_handles_rotated_matrix() {
        // A = R diag(1, 4, 9) R^T for a known rotation
        let r = [
            [0.8, -0.6, 0.0],
            [0.6, 0.8, 0.0],
            [0.0, 0.0, 1.0],
        ];
        let d = [1.0, 4.0, 9.0];
        let mut a = [[0.0f64; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    a[i][j] += r[i][k] * d[k] * r[j][k];
                }
            }
        }
        let (evals, evecs) = jacobi_eigen_3x3(a);
        for (got, want) in evals.iter().zip(&d) {
            assert!((got - want).abs() < 1e-12);
        }
        // smallest eigenvector maps back to +-column 0 of R
        let v = evecs[0];
        let expected = [r[0][0], r[1][0], r[2][0]];
        assert!(dot3(v, expected).abs() > 1.0 - 1e-12);
    }

    #[test]
    fn too_few_points_rejected() {
        let points = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]];
        assert!(estimate_normals(&points, 5).is_err());
    }
}
