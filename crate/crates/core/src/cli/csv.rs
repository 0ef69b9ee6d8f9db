//! Minimal CSV writer/reader for the emitted tables.
//!
//! Files start with a block of `# ` metadata lines, then a header row.
//! Numbers are written with 17 significant digits so they read back to the
//! same `f64`. Empty cells mean "no value".

use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CsvError {
    #[error("no header row")]
    MissingHeader,
    #[error("row {row} has {found} cells, header has {expected}")]
    Ragged { row: usize, found: usize, expected: usize },
}

pub fn float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn optional(v: Option<f64>) -> String {
    v.map(float).unwrap_or_default()
}

#[derive(Debug, Clone, Default)]
pub struct CsvWriter {
    buf: String,
}

impl CsvWriter {
    pub fn new(metadata: &[String], header: &[&str]) -> Self {
        let mut buf = String::new();
        for line in metadata {
            let _ = writeln!(buf, "# {line}");
        }
        buf.push_str(&header.join(","));
        buf.push('\n');
        Self { buf }
    }

    pub fn row<S: AsRef<str>>(&mut self, cells: &[S]) {
        let mut first = true;
        for cell in cells {
            if !first {
                self.buf.push(',');
            }
            self.buf.push_str(cell.as_ref());
            first = false;
        }
        self.buf.push('\n');
    }

    pub fn finish(self) -> String {
        self.buf
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub metadata: Vec<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Cells of a column parsed as numbers; empty or non-numeric cells are `None`.
    pub fn numbers(&self, index: usize) -> Vec<Option<f64>> {
        self.rows.iter().map(|r| r[index].parse::<f64>().ok()).collect()
    }

    /// Whether every non-empty cell of the column is numeric.
    pub fn is_numeric(&self, index: usize) -> bool {
        self.rows.iter().all(|r| r[index].is_empty() || r[index].parse::<f64>().is_ok())
            && self.rows.iter().any(|r| !r[index].is_empty())
    }
}

pub fn read(text: &str) -> Result<Table, CsvError> {
    let mut metadata = Vec::new();
    let mut lines = text.lines().filter(|l| !l.is_empty());
    let header = loop {
        match lines.next() {
            Some(l) if l.starts_with('#') => {
                metadata.push(l.trim_start_matches('#').trim_start().to_string());
            }
            Some(l) => break l.split(',').map(str::to_string).collect::<Vec<_>>(),
            None => return Err(CsvError::MissingHeader),
        }
    };
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let cells: Vec<String> = line.split(',').map(str::to_string).collect();
        if cells.len() != header.len() {
            return Err(CsvError::Ragged {
                row: i + 1,
                found: cells.len(),
                expected: header.len(),
            });
        }
        rows.push(cells);
    }
    Ok(Table { metadata, header, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn writes_metadata_header_and_rows() {
        let mut w = CsvWriter::new(&["seed = 42".into()], &["x", "y"]);
        w.row(&[float(0.5), optional(None)]);
        let text = w.finish();
        assert_eq!(text, "# seed = 42\nx,y\n5.0000000000000000e-1,\n");
        let t = read(&text).unwrap();
        assert_eq!(t.metadata, vec!["seed = 42"]);
        assert_eq!(t.numbers(0), vec![Some(0.5)]);
        assert_eq!(t.numbers(1), vec![None]);
    }

    #[test]
    fn ragged_rows_are_rejected() {
        assert!(matches!(read("a,b\n1\n"), Err(CsvError::Ragged { row: 1, .. })));
        assert_eq!(read("# only\n"), Err(CsvError::MissingHeader));
    }

    proptest! {
        #[test]
        fn seventeen_digits_round_trip(v in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            prop_assert_eq!(float(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }
}
