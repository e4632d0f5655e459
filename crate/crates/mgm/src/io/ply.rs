//! ASCII PLY vertex elements. Reads x/y/z and, when declared, nx/ny/nz;
//! other scalar vertex properties are skipped by position. Binary PLY and
//! list properties inside the vertex element are rejected.

use crate::error::{Error, Result};
use crate::io::{parse_f64, RawCloud};

pub fn parse_ply_vertices(text: &str) -> Result<RawCloud> {
    let mut lines = text.lines().enumerate();

    let mut expect = |want: &str| -> Result<()> {
        match lines.next() {
            Some((idx, line)) if line.trim() == want => {
                let _ = idx;
                Ok(())
            }
            Some((idx, line)) => Err(Error::Parse {
                line: idx + 1,
                msg: format!("expected '{want}', found '{}'", line.trim()),
            }),
            None => Err(Error::Parse {
                line: 1,
                msg: format!("expected '{want}', found end of input"),
            }),
        }
    };
    expect("ply")?;

    let mut vertex_count: Option<usize> = None;
    let mut vertex_props: Vec<String> = Vec::new();
    let mut in_vertex_element = false;
    let mut saw_format = false;
    let mut header_end_line = 0usize;

    for (idx, raw_line) in &mut lines {
        let line_no = idx + 1;
        let line = raw_line.trim();
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields.first().copied() {
            Some("format") => {
                if fields.get(1).copied() != Some("ascii") {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: "only 'format ascii 1.0' is supported".into(),
                    });
                }
                saw_format = true;
            }
            Some("comment") | Some("obj_info") => {}
            Some("element") => {
                let name = fields.get(1).copied().unwrap_or("");
                if name == "vertex" {
                    if vertex_count.is_some() {
                        return Err(Error::Parse {
                            line: line_no,
                            msg: "duplicate vertex element".into(),
                        });
                    }
                    let count: usize = fields
                        .get(2)
                        .ok_or(Error::Parse {
                            line: line_no,
                            msg: "element vertex needs a count".into(),
                        })?
                        .parse()
                        .map_err(|_| Error::Parse {
                            line: line_no,
                            msg: "invalid vertex count".into(),
                        })?;
                    vertex_count = Some(count);
                    in_vertex_element = true;
                } else {
                    in_vertex_element = false;
                }
            }
            Some("property") => {
                if in_vertex_element {
                    if fields.get(1).copied() == Some("list") {
                        return Err(Error::Parse {
                            line: line_no,
                            msg: "list property not supported in vertex element".into(),
                        });
                    }
                    let name = fields.get(2).ok_or(Error::Parse {
                        line: line_no,
                        msg: "property needs a type and a name".into(),
                    })?;
                    vertex_props.push((*name).to_string());
                }
            }
            Some("end_header") => {
                header_end_line = line_no;
                break;
            }
            Some(other) => {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("unexpected header keyword '{other}'"),
                })
            }
            None => {}
        }
    }
    if header_end_line == 0 {
        return Err(Error::Parse {
            line: 1,
            msg: "missing end_header".into(),
        });
    }
    if !saw_format {
        return Err(Error::Parse {
            line: 1,
            msg: "missing format line".into(),
        });
    }
    let count = vertex_count.ok_or(Error::Parse {
        line: header_end_line,
        msg: "missing vertex element".into(),
    })?;

    let col = |name: &str| vertex_props.iter().position(|p| p == name);
    let (xi, yi, zi) = match (col("x"), col("y"), col("z")) {
        (Some(a), Some(b), Some(c)) => (a, b, c),
        _ => {
            return Err(Error::Parse {
                line: header_end_line,
                msg: "vertex element must declare x, y, z".into(),
            })
        }
    };
    let normal_cols = match (col("nx"), col("ny"), col("nz")) {
        (Some(a), Some(b), Some(c)) => Some((a, b, c)),
        (None, None, None) => None,
        _ => {
            return Err(Error::Parse {
                line: header_end_line,
                msg: "vertex element declares a partial normal (nx/ny/nz)".into(),
            })
        }
    };

    let mut points = Vec::with_capacity(count.min(1 << 20));
    let mut normals = Vec::with_capacity(if normal_cols.is_some() {
        count.min(1 << 20)
    } else {
        0
    });
    let mut read = 0usize;
    for (idx, raw_line) in &mut lines {
        if read == count {
            break;
        }
        let line_no = idx + 1;
        let line = raw_line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < vertex_props.len() {
            return Err(Error::Parse {
                line: line_no,
                msg: format!(
                    "vertex row has {} fields, header declares {}",
                    fields.len(),
                    vertex_props.len()
                ),
            });
        }
        points.push([
            parse_f64(fields[xi], line_no)?,
            parse_f64(fields[yi], line_no)?,
            parse_f64(fields[zi], line_no)?,
        ]);
        if let Some((nx, ny, nz)) = normal_cols {
            normals.push([
                parse_f64(fields[nx], line_no)?,
                parse_f64(fields[ny], line_no)?,
                parse_f64(fields[nz], line_no)?,
            ]);
        }
        read += 1;
    }
    if read != count {
        return Err(Error::Parse {
            line: header_end_line,
            msg: format!("vertex element declares {count} rows, found {read}"),
        });
    }
    Ok(RawCloud {
        points,
        normals: normal_cols.map(|_| normals),
    })
}
