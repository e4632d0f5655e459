//! Plain text vectors: one value per line, `#` comments.

use crate::error::Result;
use crate::io::parse_f64;
use std::io::Write;

pub fn parse_vector(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        out.push(parse_f64(line, idx + 1)?);
    }
    Ok(out)
}

pub fn write_vector(x: &[f64], w: &mut impl Write) -> std::io::Result<()> {
    for v in x {
        writeln!(w, "{v}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let x = vec![1.0, -2.5e-17, std::f64::consts::PI, 0.1];
        let mut buf = Vec::new();
        write_vector(&x, &mut buf).unwrap();
        let y = parse_vector(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn comments_and_blanks_skipped() {
        assert_eq!(parse_vector("# header\n\n1\n2\n").unwrap(), vec![1.0, 2.0]);
    }

    #[test]
    fn garbage_reports_line() {
        match parse_vector("1\nnope\n") {
            Err(crate::Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
