//! Matrix Market exchange format, `matrix coordinate real general` only.

use crate::error::{Error, Result};
use crate::io::parse_f64;
use crate::la::CsrMatrix;
use std::io::Write;

pub fn parse_matrix_market(text: &str) -> Result<CsrMatrix> {
    let mut lines = text.lines().enumerate();

    let (_, banner) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "empty input".into(),
    })?;
    let tokens: Vec<String> = banner
        .split_whitespace()
        .map(|t| t.to_ascii_lowercase())
        .collect();
    let expected = ["%%matrixmarket", "matrix", "coordinate", "real", "general"];
    if tokens.len() != expected.len() || tokens.iter().zip(&expected).any(|(a, b)| a != b) {
        return Err(Error::Parse {
            line: 1,
            msg: format!("unsupported banner '{banner}'; expected '%%MatrixMarket matrix coordinate real general'"),
        });
    }

    // size line, after comments
    let mut size: Option<(usize, usize, usize, usize)> = None;
    for (idx, raw_line) in &mut lines {
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                line: idx + 1,
                msg: format!("size line needs 'rows cols nnz', found '{line}'"),
            });
        }
        let parse_count = |t: &str| -> Result<usize> {
            t.parse().map_err(|_| Error::Parse {
                line: idx + 1,
                msg: format!("invalid count '{t}'"),
            })
        };
        size = Some((
            parse_count(fields[0])?,
            parse_count(fields[1])?,
            parse_count(fields[2])?,
            idx + 1,
        ));
        break;
    }
    let (nrows, ncols, nnz, size_line) = size.ok_or(Error::Parse {
        line: 1,
        msg: "missing size line".into(),
    })?;

    let mut triplets: Vec<(usize, usize, f64)> = Vec::with_capacity(nnz.min(1 << 22));
    for (idx, raw_line) in &mut lines {
        if triplets.len() == nnz {
            break;
        }
        let line_no = idx + 1;
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("entry needs 'row col value', found '{line}'"),
            });
        }
        let row: usize = fields[0].parse().map_err(|_| Error::Parse {
            line: line_no,
            msg: format!("invalid row index '{}'", fields[0]),
        })?;
        let col: usize = fields[1].parse().map_err(|_| Error::Parse {
            line: line_no,
            msg: format!("invalid column index '{}'", fields[1]),
        })?;
        if row < 1 || row > nrows || col < 1 || col > ncols {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("entry ({row}, {col}) outside {nrows}x{ncols}"),
            });
        }
        let value = parse_f64(fields[2], line_no)?;
        triplets.push((row - 1, col - 1, value));
    }
    if triplets.len() != nnz {
        return Err(Error::Parse {
            line: size_line,
            msg: format!("declared {} entries, found {}", nnz, triplets.len()),
        });
    }
    CsrMatrix::from_triplets(nrows, ncols, &triplets)
}

pub fn write_matrix_market(a: &CsrMatrix, w: &mut impl Write) -> std::io::Result<()> {
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(w, "{} {} {}", a.nrows(), a.ncols(), a.nnz())?;
    for i in 0..a.nrows() {
        let (cols, vals) = a.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            writeln!(w, "{} {} {}", i + 1, j + 1, v)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_small_general_matrix() {
        let text = "%%MatrixMarket matrix coordinate real general\n\
% a comment\n\
2 3 3\n\
1 1 1.5\n\
2 1 -2\n\
2 3 4e-1\n";
        let a = parse_matrix_market(text).unwrap();
        assert_eq!((a.nrows(), a.ncols(), a.nnz()), (2, 3, 3));
        assert_eq!(a.get(0, 0), 1.5);
        assert_eq!(a.get(1, 0), -2.0);
        assert_eq!(a.get(1, 2), 0.4);
    }

    #[test]
    fn round_trip_preserves_matrix() {
        let a = CsrMatrix::from_triplets(
            3,
            3,
            &[(0, 0, 1.0), (0, 2, -0.25), (1, 1, 3.5), (2, 0, 1e-13)],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_matrix_market(&a, &mut buf).unwrap();
        let b = parse_matrix_market(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn duplicates_are_summed() {
        let text = "%%MatrixMarket matrix coordinate real general\n1 1 2\n1 1 1.0\n1 1 2.0\n";
        let a = parse_matrix_market(text).unwrap();
        assert_eq!(a.get(0, 0), 3.0);
    }

    #[test]
    fn rejects_other_banners() {
        for banner in [
            "%%MatrixMarket matrix coordinate complex general",
            "%%MatrixMarket matrix coordinate real symmetric",
            "%%MatrixMarket matrix array real general",
            "not a banner",
        ] {
            let text = format!("{banner}\n1 1 0\n");
            assert!(parse_matrix_market(&text).is_err(), "accepted '{banner}'");
        }
    }

    #[test]
    fn rejects_out_of_range_and_bad_counts() {
        let text = "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n";
        assert!(parse_matrix_market(text).is_err());
        let text = "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n";
        assert!(parse_matrix_market(text).is_err());
        let text = "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 nan\n";
        assert!(parse_matrix_market(text).is_err());
    }
}
