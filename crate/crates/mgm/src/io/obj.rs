//! Vertex records of Wavefront OBJ files. Only `v` (and matching `vn`) lines
//! are consumed; faces and other elements are ignored.

use crate::error::{Error, Result};
use crate::io::{parse_f64, RawCloud};

pub fn parse_obj_vertices(text: &str) -> Result<RawCloud> {
    let mut points = Vec::new();
    let mut normals = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.trim();
        let mut fields = line.split_whitespace();
        match fields.next() {
            Some("v") => {
                let coords: Vec<&str> = fields.collect();
                // 'v x y z [w]'
                if coords.len() != 3 && coords.len() != 4 {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!("vertex needs 3 or 4 coordinates, found {}", coords.len()),
                    });
                }
                points.push([
                    parse_f64(coords[0], line_no)?,
                    parse_f64(coords[1], line_no)?,
                    parse_f64(coords[2], line_no)?,
                ]);
            }
            Some("vn") => {
                let coords: Vec<&str> = fields.collect();
                if coords.len() != 3 {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!("normal needs 3 coordinates, found {}", coords.len()),
                    });
                }
                normals.push([
                    parse_f64(coords[0], line_no)?,
                    parse_f64(coords[1], line_no)?,
                    parse_f64(coords[2], line_no)?,
                ]);
            }
            _ => {} // comments, faces, texture coords, groups, ...
        }
    }
    // use the normals only when they pair one-to-one with the vertices
    let normals = if !normals.is_empty() && normals.len() == points.len() {
        Some(normals)
    } else {
        None
    };
    Ok(RawCloud { points, normals })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_v_lines() {
        let mut text = String::from("# comment\ng mesh\n");
        for i in 0..100 {
            text.push_str(&format!("v {} 0 0\n", i));
        }
        text.push_str("f 1 2 3\n");
        let raw = parse_obj_vertices(&text).unwrap();
        assert_eq!(raw.points.len(), 100);
        assert!(raw.normals.is_none());
    }

    #[test]
    fn normals_used_when_counts_match() {
        let text = "v 0 0 0\nvn 0 0 1\nv 1 0 0\nvn 0 1 0\n";
        let raw = parse_obj_vertices(text).unwrap();
        assert_eq!(raw.normals.unwrap().len(), 2);
    }

    #[test]
    fn mismatched_normal_count_ignored() {
        let text = "v 0 0 0\nv 1 0 0\nvn 0 0 1\n";
        let raw = parse_obj_vertices(text).unwrap();
        assert!(raw.normals.is_none());
    }

    #[test]
    fn optional_w_coordinate_accepted() {
        let raw = parse_obj_vertices("v 1 2 3 1.0\n").unwrap();
        assert_eq!(raw.points[0], [1.0, 2.0, 3.0]);
    }

    #[test]
    fn malformed_vertex_reports_line() {
        match parse_obj_vertices("v 0 0 0\nv 1 x 0\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
