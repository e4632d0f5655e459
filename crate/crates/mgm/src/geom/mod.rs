//! Point clouds, surface samplers, and spatial queries in R^3.

pub mod cyclide;
pub mod kdtree;
pub mod normals;
pub mod sphere;
pub mod stencil;
pub mod surface;

pub use cyclide::{cyclide_candidates, cyclide_nodes, Cyclide};
pub use kdtree::KdTree;
pub use normals::estimate_normals;
pub use sphere::icosahedral_sphere_nodes;
pub use stencil::{tangent_basis, tangent_projection, StencilSet};
pub use surface::SurfaceSpec;

use crate::error::{Error, Result};
use crate::la::Permutation;

pub type Vec3 = [f64; 3];

#[inline]
pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn dot3(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn norm3(a: Vec3) -> f64 {
    dot3(a, a).sqrt()
}

#[inline]
pub fn dist2(a: Vec3, b: Vec3) -> f64 {
    let d = sub(a, b);
    dot3(d, d)
}

#[inline]
pub fn dist(a: Vec3, b: Vec3) -> f64 {
    dist2(a, b).sqrt()
}

pub fn normalize(a: Vec3) -> Result<Vec3> {
    let n = norm3(a);
    if n == 0.0 || !n.is_finite() {
        return Err(Error::InvalidCloud("cannot normalize zero vector".into()));
    }
    Ok(scale(a, 1.0 / n))
}

/// Surface sample points with unit outward-ish normals of the same length.
#[derive(Clone, Debug)]
pub struct PointCloud {
    points: Vec<Vec3>,
    normals: Vec<Vec3>,
}

impl PointCloud {
    /// Validates matching lengths, finite coordinates, unit normals (1e-12),
    /// and that no two points coincide exactly.
    pub fn new(points: Vec<Vec3>, normals: Vec<Vec3>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidCloud("empty point cloud".into()));
        }
        if points.len() != normals.len() {
            return Err(Error::InvalidCloud(format!(
                "{} points but {} normals",
                points.len(),
                normals.len()
            )));
        }
        for (i, p) in points.iter().enumerate() {
            if p.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidCloud(format!("point {i} is not finite")));
            }
        }
        for (i, n) in normals.iter().enumerate() {
            if n.iter().any(|c| !c.is_finite()) || (norm3(*n) - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidCloud(format!("normal {i} is not unit length")));
            }
        }
        check_distinct(&points)?;
        Ok(PointCloud { points, normals })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn normals(&self) -> &[Vec3] {
        &self.normals
    }

    pub fn point(&self, i: usize) -> Vec3 {
        self.points[i]
    }

    pub fn normal(&self, i: usize) -> Vec3 {
        self.normals[i]
    }

    /// Cloud restricted to `indices`, in the order given.
    pub fn subset(&self, indices: &[usize]) -> PointCloud {
        PointCloud {
            points: indices.iter().map(|&i| self.points[i]).collect(),
            normals: indices.iter().map(|&i| self.normals[i]).collect(),
        }
    }

    /// Reorder so that entry `i` holds former entry `p.forward()[i]`.
    pub fn permuted(&self, p: &Permutation) -> PointCloud {
        PointCloud {
            points: p.apply_vec(&self.points),
            normals: p.apply_vec(&self.normals),
        }
    }
}

/// Error with the first pair of exactly coincident points, if any.
pub fn check_distinct(points: &[Vec3]) -> Result<()> {
    let key = |p: Vec3, q: Vec3| {
        p[0].total_cmp(&q[0])
            .then(p[1].total_cmp(&q[1]))
            .then(p[2].total_cmp(&q[2]))
    };
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_unstable_by(|&a, &b| key(points[a], points[b]).then(a.cmp(&b)));
    for w in order.windows(2) {
        if points[w[0]] == points[w[1]] {
            let (a, b) = (w[0].min(w[1]), w[0].max(w[1]));
            return Err(Error::DuplicatePoints { first: a, second: b });
        }
    }
    Ok(())
}
