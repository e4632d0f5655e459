//! CSV and metadata-sidecar output. Numbers are formatted with Rust's
//! shortest-round-trip float formatting: locale independent, '.' decimal
//! point, and exact on re-parse.

use anyhow::{Context, Result};
use std::io::Write;
use std::path::Path;

pub struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> CsvTable {
        CsvTable {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, fields: &[String]) {
        assert_eq!(fields.len(), self.header.len(), "csv row width mismatch");
        self.rows.push(fields.to_vec());
    }
}

pub fn write_csv(path: &Path, table: &CsvTable) -> Result<()> {
    let mut file = std::fs::File::create(path)
        .with_context(|| format!("cannot create {}", path.display()))?;
    writeln!(file, "{}", table.header.join(","))?;
    for row in &table.rows {
        writeln!(file, "{}", row.join(","))?;
    }
    Ok(())
}

/// JSON sidecar next to a CSV: `<name>.meta.json`, carrying the run
/// configuration, seed, and package version.
pub fn write_metadata(csv_path: &Path, config: &serde_json::Value) -> Result<()> {
    let mut meta = config.clone();
    if let Some(obj) = meta.as_object_mut() {
        obj.insert(
            "version".to_string(),
            serde_json::Value::String(env!("CARGO_PKG_VERSION").to_string()),
        );
    }
    let mut path = csv_path.as_os_str().to_owned();
    path.push(".meta.json");
    std::fs::write(&path, serde_json::to_string_pretty(&meta)?)
        .with_context(|| format!("cannot write {}", Path::new(&path).display()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trips_floats_exactly() {
        let dir = std::env::temp_dir().join("mgm-csv-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("t.csv");
        let mut table = CsvTable::new(&["a", "b"]);
        let v = 0.1234567890123456789_f64;
        table.row(&[v.to_string(), (1.0e-13_f64).to_string()]);
        write_csv(&path, &table).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "a,b");
        let fields: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(fields[0].parse::<f64>().unwrap(), v);
        assert_eq!(fields[1].parse::<f64>().unwrap(), 1.0e-13);
    }

    #[test]
    fn empty_table_is_header_only() {
        let dir = std::env::temp_dir().join("mgm-csv-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("empty.csv");
        write_csv(&path, &CsvTable::new(&["x", "y"])).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "x,y\n");
    }
}
