//! Icosahedral node sets on the unit sphere.

use crate::error::{Error, Result};
use crate::geom::{normalize, PointCloud, Vec3};
use std::collections::HashMap;

const MAX_REFINEMENT: u32 = 10;

/// Vertices of the k-times subdivided icosahedron projected to the unit
/// sphere; N = 10 * 4^k + 2. Normals are the points themselves.
pub fn icosahedral_sphere_nodes(refinement_k: u32) -> Result<PointCloud> {
    if refinement_k > MAX_REFINEMENT {
        return Err(Error::InvalidArgument(format!(
            "refinement {refinement_k} exceeds supported maximum {MAX_REFINEMENT}"
        )));
    }
    let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
    let raw: [Vec3; 12] = [
        [-1.0, phi, 0.0],
        [1.0, phi, 0.0],
        [-1.0, -phi, 0.0],
        [1.0, -phi, 0.0],
        [0.0, -1.0, phi],
        [0.0, 1.0, phi],
        [0.0, -1.0, -phi],
        [0.0, 1.0, -phi],
        [phi, 0.0, -1.0],
        [phi, 0.0, 1.0],
        [-phi, 0.0, -1.0],
        [-phi, 0.0, 1.0],
    ];
    let mut vertices: Vec<Vec3> = raw.iter().map(|&v| normalize(v).unwrap()).collect();
    let mut faces: Vec<[u32; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];

    for _ in 0..refinement_k {
        let mut midpoints: HashMap<(u32, u32), u32> = HashMap::new();
        let mut next_faces = Vec::with_capacity(faces.len() * 4);
        let mut midpoint = |a: u32, b: u32, vertices: &mut Vec<Vec3>| -> u32 {
            let key = (a.min(b), a.max(b));
            if let Some(&m) = midpoints.get(&key) {
                return m;
            }
            let pa = vertices[a as usize];
            let pb = vertices[b as usize];
            let m = normalize([
                0.5 * (pa[0] + pb[0]),
                0.5 * (pa[1] + pb[1]),
                0.5 * (pa[2] + pb[2]),
            ])
            .unwrap();
            vertices.push(m);
            let idx = (vertices.len() - 1) as u32;
            midpoints.insert(key, idx);
            idx
        };
        for &[a, b, c] in &faces {
            let ab = midpoint(a, b, &mut vertices);
            let bc = midpoint(b, c, &mut vertices);
            let ca = midpoint(c, a, &mut vertices);
            next_faces.push([a, ab, ca]);
            next_faces.push([ab, b, bc]);
            next_faces.push([ab, bc, ca]);
            next_faces.push([ca, bc, c]);
        }
        faces = next_faces;
    }

    let expected = 10usize * 4usize.pow(refinement_k) + 2;
    debug_assert_eq!(vertices.len(), expected);
    let normals = vertices.clone();
    PointCloud::new(vertices, normals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::norm3;

    #[test]
    fn base_icosahedron_has_12_unit_vertices() {
        let cloud = icosahedral_sphere_nodes(0).unwrap();
        assert_eq!(cloud.len(), 12);
        for &p in cloud.points() {
            assert!((norm3(p) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn point_count_formula() {
        for k in 0..=5 {
            let cloud = icosahedral_sphere_nodes(k).unwrap();
            assert_eq!(cloud.len(), 10 * 4usize.pow(k) + 2);
        }
    }

    #[test]
    fn refinement_five_matches_expected_size() {
        assert_eq!(icosahedral_sphere_nodes(5).unwrap().len(), 10242);
    }

    #[test]
    fn all_points_on_unit_sphere() {
        let cloud = icosahedral_sphere_nodes(3).unwrap();
        for &p in cloud.points() {
            assert!((norm3(p) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn excessive_refinement_rejected() {
        assert!(icosahedral_sphere_nodes(11).is_err());
    }
}
