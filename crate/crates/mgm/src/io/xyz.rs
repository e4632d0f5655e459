//! xyz text format: one `x y z [nx ny nz]` record per line, `#` comments.

use crate::error::{Error, Result};
use crate::geom::PointCloud;
use crate::io::{parse_f64, RawCloud};
use std::io::Write;

pub fn parse_xyz(text: &str) -> Result<RawCloud> {
    let mut points = Vec::new();
    let mut normals: Vec<[f64; 3]> = Vec::new();
    let mut has_normals: Option<bool> = None;

    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let with_normals = match fields.len() {
            3 => false,
            6 => true,
            n => {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("expected 3 or 6 fields, found {n}"),
                })
            }
        };
        match has_normals {
            None => has_normals = Some(with_normals),
            Some(expected) if expected != with_normals => {
                return Err(Error::Parse {
                    line: line_no,
                    msg: "mixed records with and without normals".into(),
                })
            }
            _ => {}
        }
        points.push([
            parse_f64(fields[0], line_no)?,
            parse_f64(fields[1], line_no)?,
            parse_f64(fields[2], line_no)?,
        ]);
        if with_normals {
            normals.push([
                parse_f64(fields[3], line_no)?,
                parse_f64(fields[4], line_no)?,
                parse_f64(fields[5], line_no)?,
            ]);
        }
    }
    Ok(RawCloud {
        points,
        normals: if has_normals == Some(true) {
            Some(normals)
        } else {
            None
        },
    })
}

pub fn write_xyz(cloud: &PointCloud, w: &mut impl Write) -> std::io::Result<()> {
    for (p, n) in cloud.points().iter().zip(cloud.normals()) {
        writeln!(w, "{} {} {} {} {} {}", p[0], p[1], p[2], n[0], n[1], n[2])?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::finish_cloud;

    #[test]
    fn three_point_file() {
        let text = "# unit sphere samples\n1 0 0\n0 1 0\n0 0 1\n";
        let raw = parse_xyz(text).unwrap();
        assert_eq!(raw.points.len(), 3);
        assert!(raw.normals.is_none());
        let cloud = finish_cloud(raw).unwrap();
        assert_eq!(cloud.len(), 3);
    }

    #[test]
    fn normals_parsed_when_present() {
        let text = "0 0 0 0 0 2\n1 0 0 0 2 0\n";
        let raw = parse_xyz(text).unwrap();
        let normals = raw.normals.clone().unwrap();
        assert_eq!(normals.len(), 2);
        // renormalized on finish
        let cloud = finish_cloud(raw).unwrap();
        assert_eq!(cloud.normal(0), [0.0, 0.0, 1.0]);
    }

    #[test]
    fn bad_field_count_reports_line() {
        let text = "0 0 0\n1 2\n";
        match parse_xyz(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn mixed_normal_presence_rejected() {
        let text = "0 0 0\n1 0 0 0 0 1\n";
        assert!(parse_xyz(text).is_err());
    }

    #[test]
    fn non_finite_rejected() {
        assert!(parse_xyz("0 0 inf\n").is_err());
        assert!(parse_xyz("0 0 nan\n").is_err());
    }

    #[test]
    fn round_trip() {
        let cloud = crate::geom::icosahedral_sphere_nodes(0).unwrap();
        let mut buf = Vec::new();
        write_xyz(&cloud, &mut buf).unwrap();
        let raw = parse_xyz(std::str::from_utf8(&buf).unwrap()).unwrap();
        let back = finish_cloud(raw).unwrap();
        assert_eq!(back.len(), cloud.len());
        for (a, b) in back.points().iter().zip(cloud.points()) {
            assert_eq!(a, b);
        }
    }
}
