//! File formats: xyz / OBJ / PLY point clouds, Matrix Market matrices, and
//! plain text vectors. The parsers accept untrusted input and must never
//! panic; they are exercised directly by the fuzz targets.

pub mod mtx;
pub mod obj;
pub mod ply;
pub mod vecio;
pub mod xyz;

pub use mtx::{parse_matrix_market, write_matrix_market};
pub use obj::parse_obj_vertices;
pub use ply::parse_ply_vertices;
pub use vecio::{parse_vector, write_vector};
pub use xyz::{parse_xyz, write_xyz};

use crate::error::{Error, Result};
use crate::geom::{estimate_normals, normalize, PointCloud, Vec3};
use std::path::Path;

/// Raw parse result before validation and normal estimation.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RawCloud {
    pub points: Vec<Vec3>,
    pub normals: Option<Vec<Vec3>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CloudFormat {
    Xyz,
    ObjVertices,
    PlyVertices,
}

impl CloudFormat {
    pub fn from_path(path: &Path) -> Result<CloudFormat> {
        match path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase())
            .as_deref()
        {
            Some("xyz") | Some("txt") => Ok(CloudFormat::Xyz),
            Some("obj") => Ok(CloudFormat::ObjVertices),
            Some("ply") => Ok(CloudFormat::PlyVertices),
            other => Err(Error::InvalidArgument(format!(
                "cannot infer cloud format from extension {other:?} of {}",
                path.display()
            ))),
        }
    }
}

/// Turn parsed data into a validated cloud: normals from the file are
/// renormalized, missing normals are estimated from the k-neighborhood
/// (k = 20, capped by the cloud size).
pub fn finish_cloud(raw: RawCloud) -> Result<PointCloud> {
    crate::geom::check_distinct(&raw.points)?;
    let normals = match raw.normals {
        Some(file_normals) => file_normals
            .into_iter()
            .enumerate()
            .map(|(i, n)| {
                normalize(n).map_err(|_| Error::InvalidCloud(format!("zero normal at vertex {i}")))
            })
            .collect::<Result<Vec<Vec3>>>()?,
        None => {
            if raw.points.len() < 3 {
                return Err(Error::InvalidCloud(
                    "need at least 3 points to estimate normals".into(),
                ));
            }
            let k = 20.min(raw.points.len() - 1).max(2);
            estimate_normals(&raw.points, k)?
        }
    };
    PointCloud::new(raw.points, normals)
}

/// Read a point cloud from disk in the given format.
pub fn load_cloud(path: &Path, format: CloudFormat) -> Result<PointCloud> {
    let text = std::fs::read_to_string(path)?;
    let raw = match format {
        CloudFormat::Xyz => parse_xyz(&text)?,
        CloudFormat::ObjVertices => parse_obj_vertices(&text)?,
        CloudFormat::PlyVertices => parse_ply_vertices(&text)?,
    };
    finish_cloud(raw)
}

pub(crate) fn parse_f64(token: &str, line: usize) -> Result<f64> {
    let v: f64 = token
        .parse()
        .map_err(|_| Error::Parse {
            line,
            msg: format!("invalid number '{token}'"),
        })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line,
            msg: format!("non-finite number '{token}'"),
        });
    }
    Ok(v)
}
